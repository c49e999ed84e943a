// trace.hpp - correlation traces, their CSV form, and trace comparison.
//
// CSV layout: `# key: value` metadata lines, then the header
// t,t_prime,re,im,stderr_re,stderr_im and one row per grid point. Floats use
// 17 significant digits so a parse/format cycle is lossless.

#pragma once

#include <complex>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mtcf {

struct TraceRow {
    double t = 0.0;
    double t_prime = 0.0;
    std::complex<double> value;
    double se_re = 0.0;
    double se_im = 0.0;

    bool operator==(const TraceRow&) const = default;
};

struct CorrelationTrace {
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<TraceRow> rows;

    /// Throws InvalidArgument unless values are finite and t' strictly increases.
    void validate() const;
    /// Value of the first metadata entry with this key, or empty.
    std::string meta(std::string_view key) const;

    bool operator==(const CorrelationTrace&) const = default;
};

inline constexpr std::string_view kCsvHeader = "t,t_prime,re,im,stderr_re,stderr_im";

std::string format_csv(const CorrelationTrace& trace);
/// Throws IoError on malformed text.
CorrelationTrace parse_csv(std::string_view text);

/// Writes through a temporary file in the same directory and renames it.
void write_csv_atomic(const CorrelationTrace& trace, const std::string& path);
CorrelationTrace read_csv(const std::string& path);

struct ComparePoint {
    double t;
    double t_prime;
    double abs_diff;
    double std_err;  ///< combined standard error, 0 when both traces are deterministic
};

struct CompareReport {
    double max_abs_diff = 0.0;
    /// max |diff| / stderr over points with stderr > 0; 0 if there are none.
    double max_z = 0.0;
    double tolerance = 0.0;
    bool within_tolerance = true;
    std::vector<ComparePoint> points;
};

/// Throws GridMismatch when the (t, t') grids differ.
CompareReport compare_traces(const CorrelationTrace& a, const CorrelationTrace& b, double tolerance);

std::string format_report(const CompareReport& report);
std::string format_report_csv(const CompareReport& report);

}  // namespace mtcf
