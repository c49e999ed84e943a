#include "mtcf/mtcf.h"

#include <algorithm>
#include <cstdlib>
#include <cstring>
#include <optional>
#include <string>
#include <thread>

#include "mtcf/error.hpp"
#include "mtcf/scenario.hpp"
#include "mtcf/trace.hpp"

struct mtcf_scenario {
    mtcf::ScenarioConfig config;
    std::optional<std::uint64_t> seed;
    std::string method;
};

struct mtcf_trace {
    mtcf::CorrelationTrace trace;
    std::vector<std::string> warnings;
};

namespace {

thread_local std::string g_last_error;

mtcf_status record(mtcf_status code, const char* what) {
    g_last_error = what;
    return code;
}

// Runs f, mapping exceptions to status codes.
template <class F>
mtcf_status guarded(F&& f) {
    try {
        f();
        g_last_error.clear();
        return MTCF_OK;
    } catch (const mtcf::ConfigError& e) {
        return record(MTCF_ERR_CONFIG, e.what());
    } catch (const mtcf::OverflowError& e) {
        return record(MTCF_ERR_OVERFLOW, e.what());
    } catch (const mtcf::IoError& e) {
        return record(MTCF_ERR_IO, e.what());
    } catch (const mtcf::GridMismatch& e) {
        return record(MTCF_ERR_GRID_MISMATCH, e.what());
    } catch (const mtcf::InvalidArgument& e) {
        return record(MTCF_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::exception& e) {
        return record(MTCF_ERR_INTERNAL, e.what());
    } catch (...) {
        return record(MTCF_ERR_INTERNAL, "unknown error");
    }
}

char* dup(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out == nullptr) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

mtcf_status null_arg(const char* name) {
    return record(MTCF_ERR_INVALID_ARGUMENT, (std::string("null argument: ") + name).c_str());
}

mtcf_trace* wrap(mtcf::CorrelationTrace trace) {
    auto* out = new mtcf_trace{std::move(trace), {}};
    for (const auto& [k, v] : out->trace.metadata) {
        if (k == "warning") out->warnings.push_back(v);
    }
    return out;
}

}  // namespace

extern "C" {

const char* mtcf_version(void) {
    static const std::string v = mtcf::version_string();
    return v.c_str();
}

const char* mtcf_last_error(void) { return g_last_error.c_str(); }

void mtcf_string_free(char* s) { std::free(s); }

mtcf_status mtcf_scenario_load_file(const char* path, mtcf_scenario** out) {
    if (path == nullptr || out == nullptr) return null_arg("path/out");
    *out = nullptr;
    return guarded([&] {
        auto cfg = mtcf::load_scenario(path);
        std::string method(mtcf::method_name(cfg.method));
        *out = new mtcf_scenario{std::move(cfg), std::nullopt, std::move(method)};
    });
}

mtcf_status mtcf_scenario_load_json(const char* json_text, mtcf_scenario** out) {
    if (json_text == nullptr || out == nullptr) return null_arg("json_text/out");
    *out = nullptr;
    return guarded([&] {
        auto cfg = mtcf::parse_scenario(json_text);
        std::string method(mtcf::method_name(cfg.method));
        *out = new mtcf_scenario{std::move(cfg), std::nullopt, std::move(method)};
    });
}

void mtcf_scenario_free(mtcf_scenario* scenario) { delete scenario; }

mtcf_status mtcf_scenario_to_json(const mtcf_scenario* scenario, char** out) {
    if (scenario == nullptr || out == nullptr) return null_arg("scenario/out");
    return guarded([&] { *out = dup(mtcf::scenario_to_json(scenario->config)); });
}

mtcf_status mtcf_scenario_set_seed(mtcf_scenario* scenario, uint64_t seed) {
    if (scenario == nullptr) return null_arg("scenario");
    scenario->seed = seed;
    return MTCF_OK;
}

const char* mtcf_scenario_output_path(const mtcf_scenario* scenario) {
    return scenario == nullptr ? "" : scenario->config.output.c_str();
}

const char* mtcf_scenario_method(const mtcf_scenario* scenario) {
    return scenario == nullptr ? "" : scenario->method.c_str();
}

mtcf_status mtcf_run(const mtcf_scenario* scenario, unsigned threads, mtcf_trace** out) {
    if (scenario == nullptr || out == nullptr) return null_arg("scenario/out");
    *out = nullptr;
    return guarded([&] {
        mtcf::RunOptions opts;
        opts.threads = threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : threads;
        opts.seed_override = scenario->seed;
        *out = wrap(mtcf::run_scenario(scenario->config, opts));
    });
}

size_t mtcf_trace_size(const mtcf_trace* trace) { return trace == nullptr ? 0 : trace->trace.rows.size(); }

mtcf_status mtcf_trace_row(const mtcf_trace* trace, size_t i, mtcf_row* out) {
    if (trace == nullptr || out == nullptr) return null_arg("trace/out");
    if (i >= trace->trace.rows.size()) return record(MTCF_ERR_INVALID_ARGUMENT, "row index out of range");
    const auto& r = trace->trace.rows[i];
    *out = {r.t, r.t_prime, r.value.real(), r.value.imag(), r.se_re, r.se_im};
    return MTCF_OK;
}

size_t mtcf_trace_warning_count(const mtcf_trace* trace) { return trace == nullptr ? 0 : trace->warnings.size(); }

const char* mtcf_trace_warning(const mtcf_trace* trace, size_t i) {
    if (trace == nullptr || i >= trace->warnings.size()) return nullptr;
    return trace->warnings[i].c_str();
}

const char* mtcf_trace_meta(const mtcf_trace* trace, const char* key) {
    if (trace == nullptr || key == nullptr) return nullptr;
    for (const auto& [k, v] : trace->trace.metadata) {
        if (k == key) return v.c_str();
    }
    return nullptr;
}

mtcf_status mtcf_trace_write_csv(const mtcf_trace* trace, const char* path) {
    if (trace == nullptr || path == nullptr) return null_arg("trace/path");
    return guarded([&] { mtcf::write_csv_atomic(trace->trace, path); });
}

mtcf_status mtcf_trace_load_csv(const char* path, mtcf_trace** out) {
    if (path == nullptr || out == nullptr) return null_arg("path/out");
    *out = nullptr;
    return guarded([&] { *out = wrap(mtcf::read_csv(path)); });
}

void mtcf_trace_free(mtcf_trace* trace) { delete trace; }

mtcf_status mtcf_compare(const mtcf_trace* a, const mtcf_trace* b, double tolerance, mtcf_compare_summary* out) {
    if (a == nullptr || b == nullptr || out == nullptr) return null_arg("a/b/out");
    return guarded([&] {
        const auto r = mtcf::compare_traces(a->trace, b->trace, tolerance);
        *out = {r.max_abs_diff, r.max_z, r.points.size(), r.within_tolerance ? 1 : 0};
    });
}

mtcf_status mtcf_compare_report(const mtcf_trace* a, const mtcf_trace* b, double tolerance, char** text_out,
                                char** csv_out) {
    if (a == nullptr || b == nullptr || text_out == nullptr) return null_arg("a/b/text_out");
    return guarded([&] {
        const auto r = mtcf::compare_traces(a->trace, b->trace, tolerance);
        *text_out = dup(mtcf::format_report(r));
        if (csv_out != nullptr) *csv_out = dup(mtcf::format_report_csv(r));
    });
}

size_t mtcf_preset_count(void) { return mtcf::preset_names().size(); }

const char* mtcf_preset_name(size_t i) {
    static const std::vector<std::string> names = mtcf::preset_names();
    return i < names.size() ? names[i].c_str() : nullptr;
}

mtcf_status mtcf_preset_json(const char* name, char** out) {
    if (name == nullptr || out == nullptr) return null_arg("name/out");
    return guarded([&] { *out = dup(mtcf::scenario_to_json(mtcf::preset(name))); });
}

}  // extern "C"
