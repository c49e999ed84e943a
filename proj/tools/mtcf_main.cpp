// mtcf - command-line front end over the C API.
//
//   mtcf run <config.json> [--threads N] [--out path]
//   mtcf compare <a.csv> <b.csv> --tol x [--report path]
//   mtcf preset <name> [--out path]
//
// run exits 0 on success, 2 on configuration errors, 3 when the Monte-Carlo
// overflow budget is exceeded and 1 otherwise. compare exits 0 within
// tolerance, 1 outside it and 2 when the inputs cannot be compared.

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "mtcf/mtcf.h"

namespace {

int run_exit_code(mtcf_status s) {
    switch (s) {
        case MTCF_OK:
            return 0;
        case MTCF_ERR_CONFIG:
            return 2;
        case MTCF_ERR_OVERFLOW:
            return 3;
        default:
            return 1;
    }
}

int report_error(const char* context, mtcf_status s) {
    std::fprintf(stderr, "mtcf: %s: %s\n", context, mtcf_last_error());
    return run_exit_code(s);
}

bool parse_seed(const char* text, std::uint64_t& seed) {
    if (text == nullptr || *text == '\0' || *text == '-') return false;
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(text, &end, 10);
    if (errno != 0 || *end != '\0') return false;
    seed = v;
    return true;
}

int cmd_run(const std::string& config, unsigned threads, const std::string& out_override) {
    mtcf_scenario* sc = nullptr;
    mtcf_status s = mtcf_scenario_load_file(config.c_str(), &sc);
    if (s == MTCF_ERR_IO) {
        std::fprintf(stderr, "mtcf: %s\n", mtcf_last_error());
        return 2;
    }
    if (s != MTCF_OK) return report_error("config", s);

    if (const char* env = std::getenv("MTCF_SEED")) {
        std::uint64_t seed = 0;
        if (!parse_seed(env, seed)) {
            std::fprintf(stderr, "mtcf: MTCF_SEED must be a non-negative integer, got '%s'\n", env);
            mtcf_scenario_free(sc);
            return 2;
        }
        mtcf_scenario_set_seed(sc, seed);
    }
    const std::string out = out_override.empty() ? mtcf_scenario_output_path(sc) : out_override;
    if (out.empty()) {
        std::fprintf(stderr, "mtcf: config: no output path; set 'output' or pass --out\n");
        mtcf_scenario_free(sc);
        return 2;
    }

    mtcf_trace* trace = nullptr;
    s = mtcf_run(sc, threads, &trace);
    mtcf_scenario_free(sc);
    if (s != MTCF_OK) return report_error("run", s);

    for (size_t i = 0; i < mtcf_trace_warning_count(trace); ++i) {
        std::fprintf(stderr, "mtcf: warning: %s\n", mtcf_trace_warning(trace, i));
    }
    s = mtcf_trace_write_csv(trace, out.c_str());
    const size_t rows = mtcf_trace_size(trace);
    mtcf_trace_free(trace);
    if (s != MTCF_OK) return report_error("write", s);
    std::printf("wrote %zu rows to %s\n", rows, out.c_str());
    return 0;
}

int cmd_compare(const std::string& a_path, const std::string& b_path, double tol, const std::string& report) {
    mtcf_trace* a = nullptr;
    mtcf_trace* b = nullptr;
    if (mtcf_trace_load_csv(a_path.c_str(), &a) != MTCF_OK || mtcf_trace_load_csv(b_path.c_str(), &b) != MTCF_OK) {
        std::fprintf(stderr, "mtcf: compare: %s\n", mtcf_last_error());
        mtcf_trace_free(a);
        return 2;
    }
    char* text = nullptr;
    char* csv = nullptr;
    const mtcf_status s = mtcf_compare_report(a, b, tol, &text, report.empty() ? nullptr : &csv);
    mtcf_compare_summary summary{};
    if (s == MTCF_OK) mtcf_compare(a, b, tol, &summary);
    mtcf_trace_free(a);
    mtcf_trace_free(b);
    if (s != MTCF_OK) {
        std::fprintf(stderr, "mtcf: compare: %s\n", mtcf_last_error());
        return 2;
    }
    std::fputs(text, stdout);
    mtcf_string_free(text);
    if (csv != nullptr) {
        std::ofstream f(report, std::ios::binary);
        f << csv;
        mtcf_string_free(csv);
        if (!f) {
            std::fprintf(stderr, "mtcf: compare: cannot write report '%s'\n", report.c_str());
            return 2;
        }
    }
    return summary.within_tolerance ? 0 : 1;
}

int cmd_preset(const std::string& name, const std::string& out_override) {
    char* text = nullptr;
    const mtcf_status s = mtcf_preset_json(name.c_str(), &text);
    if (s != MTCF_OK) return report_error("preset", s);
    const std::string out = out_override.empty() ? name + ".json" : out_override;
    if (out == "-") {
        std::fputs(text, stdout);
    } else {
        std::ofstream f(out, std::ios::binary);
        f << text;
        if (!f) {
            mtcf_string_free(text);
            std::fprintf(stderr, "mtcf: preset: cannot write '%s'\n", out.c_str());
            return 1;
        }
        std::printf("wrote %s\n", out.c_str());
    }
    mtcf_string_free(text);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-time correlation functions of open quantum systems"};
    app.set_version_flag("--version", std::string(mtcf_version()));
    app.require_subcommand(1);

    std::string config;
    unsigned threads = 0;
    std::string run_out;
    auto* run = app.add_subcommand("run", "Run a scenario file and write a CSV trace");
    run->add_option("config", config, "Scenario JSON file")->required();
    run->add_option("--threads", threads, "Worker threads for Monte-Carlo runs (default: all cores)");
    run->add_option("--out", run_out, "Output CSV path (overrides the scenario)");

    std::string a_path, b_path, report;
    double tol = 0.0;
    auto* compare = app.add_subcommand("compare", "Compare two traces on the same grid");
    compare->add_option("a", a_path, "First CSV trace")->required();
    compare->add_option("b", b_path, "Second CSV trace")->required();
    compare->add_option("--tol", tol, "Tolerance on max |difference|")->required()->check(CLI::NonNegativeNumber);
    compare->add_option("--report", report, "Write the per-point table as CSV");

    std::string preset_name, preset_out;
    std::string names;
    for (size_t i = 0; i < mtcf_preset_count(); ++i) names += std::string(i ? ", " : "") + mtcf_preset_name(i);
    auto* preset = app.add_subcommand("preset", "Write a built-in scenario (" + names + ")");
    preset->add_option("name", preset_name, "Preset name")->required();
    preset->add_option("--out", preset_out, "Output path, '-' for stdout (default: <name>.json)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    if (*run) return cmd_run(config, threads, run_out);
    if (*compare) return cmd_compare(a_path, b_path, tol, report);
    return cmd_preset(preset_name, preset_out);
}
