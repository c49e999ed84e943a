#include "mtcf/trace.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "mtcf/error.hpp"

namespace mtcf {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_double(std::string_view field, std::size_t line) {
    field = trim(field);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw IoError(fmt::format("csv line {}: '{}' is not a number", line, field));
    }
    return v;
}

}  // namespace

void CorrelationTrace::validate() const {
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const TraceRow& r = rows[i];
        if (!std::isfinite(r.t) || !std::isfinite(r.t_prime) || !std::isfinite(r.value.real()) ||
            !std::isfinite(r.value.imag()) || !std::isfinite(r.se_re) || !std::isfinite(r.se_im)) {
            throw InvalidArgument(fmt::format("trace row {} is not finite", i));
        }
        if (i > 0 && !(r.t_prime > rows[i - 1].t_prime)) {
            throw InvalidArgument(fmt::format("trace row {}: t_prime must strictly increase", i));
        }
    }
}

std::string CorrelationTrace::meta(std::string_view key) const {
    for (const auto& [k, v] : metadata) {
        if (k == key) return v;
    }
    return {};
}

std::string format_csv(const CorrelationTrace& trace) {
    std::string out;
    for (const auto& [k, v] : trace.metadata) out += fmt::format("# {}: {}\n", k, v);
    out += kCsvHeader;
    out += '\n';
    for (const TraceRow& r : trace.rows) {
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", r.t, r.t_prime, r.value.real(),
                           r.value.imag(), r.se_re, r.se_im);
    }
    return out;
}

CorrelationTrace parse_csv(std::string_view text) {
    CorrelationTrace trace;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '#') {
            line.remove_prefix(1);
            const auto colon = line.find(':');
            if (colon == std::string_view::npos) {
                trace.metadata.emplace_back(std::string(trim(line)), std::string());
            } else {
                trace.metadata.emplace_back(std::string(trim(line.substr(0, colon))),
                                            std::string(trim(line.substr(colon + 1))));
            }
            continue;
        }
        if (!header_seen) {
            if (line != kCsvHeader) throw IoError(fmt::format("csv line {}: expected header '{}'", line_no, kCsvHeader));
            header_seen = true;
            continue;
        }
        double f[6];
        std::size_t n = 0;
        while (true) {
            const auto comma = line.find(',');
            if (n == 6) throw IoError(fmt::format("csv line {}: expected 6 fields", line_no));
            f[n++] = parse_double(line.substr(0, comma), line_no);
            if (comma == std::string_view::npos) break;
            line.remove_prefix(comma + 1);
        }
        if (n != 6) throw IoError(fmt::format("csv line {}: expected 6 fields", line_no));
        trace.rows.push_back({f[0], f[1], {f[2], f[3]}, f[4], f[5]});
    }
    if (!header_seen) throw IoError("csv: missing header line");
    return trace;
}

void write_csv_atomic(const CorrelationTrace& trace, const std::string& path) {
    namespace fs = std::filesystem;
    const fs::path target(path);
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError(fmt::format("cannot open '{}' for writing", tmp.string()));
        const std::string text = format_csv(trace);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        out.flush();
        if (!out) throw IoError(fmt::format("write to '{}' failed", tmp.string()));
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec) {
        fs::remove(tmp, ec);
        throw IoError(fmt::format("cannot move output into '{}'", path));
    }
}

CorrelationTrace read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str());
}

CompareReport compare_traces(const CorrelationTrace& a, const CorrelationTrace& b, double tolerance) {
    if (a.rows.size() != b.rows.size()) {
        throw GridMismatch(fmt::format("traces have {} and {} rows", a.rows.size(), b.rows.size()));
    }
    CompareReport report;
    report.tolerance = tolerance;
    for (std::size_t i = 0; i < a.rows.size(); ++i) {
        const TraceRow& ra = a.rows[i];
        const TraceRow& rb = b.rows[i];
        if (ra.t != rb.t || ra.t_prime != rb.t_prime) {
            throw GridMismatch(fmt::format("row {}: grid point ({}, {}) vs ({}, {})", i, ra.t, ra.t_prime, rb.t,
                                           rb.t_prime));
        }
        const double diff = std::abs(ra.value - rb.value);
        const double se = std::sqrt(ra.se_re * ra.se_re + ra.se_im * ra.se_im + rb.se_re * rb.se_re + rb.se_im * rb.se_im);
        report.points.push_back({ra.t, ra.t_prime, diff, se});
        report.max_abs_diff = std::max(report.max_abs_diff, diff);
        if (se > 0.0) report.max_z = std::max(report.max_z, diff / se);
    }
    report.within_tolerance = report.max_abs_diff <= tolerance;
    return report;
}

std::string format_report(const CompareReport& report) {
    std::string out = fmt::format("points: {}\nmax_abs_diff: {:.6g}\nmax_diff_over_stderr: {:.6g}\ntolerance: {:.6g}\n{}\n",
                                  report.points.size(), report.max_abs_diff, report.max_z, report.tolerance,
                                  report.within_tolerance ? "PASS" : "FAIL");
    out += "t\tt_prime\tabs_diff\tstderr\n";
    for (const auto& p : report.points) {
        out += fmt::format("{:.6g}\t{:.6g}\t{:.6g}\t{:.6g}\n", p.t, p.t_prime, p.abs_diff, p.std_err);
    }
    return out;
}

std::string format_report_csv(const CompareReport& report) {
    std::string out = "t,t_prime,abs_diff,stderr\n";
    for (const auto& p : report.points) {
        out += fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", p.t, p.t_prime, p.abs_diff, p.std_err);
    }
    return out;
}

}  // namespace mtcf
