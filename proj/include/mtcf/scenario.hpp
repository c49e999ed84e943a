// scenario.hpp - JSON scenario files, presets and run dispatch.
//
// A scenario names one system, one bath, the observables A (and B), a time
// grid and exactly one method. The parsed form keeps what the file said
// (operator names, raw psi0) so that writing it back reproduces an equal
// config; resolution to numerical objects happens at run time.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mtcf/bath.hpp"
#include "mtcf/operator.hpp"
#include "mtcf/stochastic.hpp"
#include "mtcf/trace.hpp"
#include "mtcf/weak_coupling.hpp"

namespace mtcf {

/// Placeholder accepted in place of a number when a preset cannot supply it.
inline constexpr std::string_view kRequiredUserInput = "REQUIRED-USER-INPUT";

/// Either a known name (sigma_x, sigma_y, sigma_z, sigma_12, identity) or explicit entries.
struct OperatorSpec {
    std::string name;
    Matrix entries;

    static OperatorSpec named(std::string n) { return {std::move(n), {}}; }
    Operator resolve(int dim) const;
    bool operator==(const OperatorSpec& o) const { return name == o.name && entries == o.entries; }
};

struct SystemConfig {
    int dim = 2;
    /// Qubit shorthand H_S = (omega/2) sigma_z. Mutually exclusive with h_sys.
    std::optional<double> omega;
    bool omega_required = false;  ///< omega was given as the placeholder
    Matrix h_sys;
    OperatorSpec coupling;
    double coupling_scale = 1.0;
    Vector psi0;  ///< as written; normalised on resolution

    bool operator==(const SystemConfig& o) const {
        return dim == o.dim && omega == o.omega && omega_required == o.omega_required && h_sys == o.h_sys &&
               coupling == o.coupling && coupling_scale == o.coupling_scale && psi0 == o.psi0;
    }
};

struct BathConfig {
    enum class Kind { Modes, Exponential, Fourier };
    Kind kind = Kind::Modes;
    std::vector<Mode> modes;
    double gamma = 0.0;  ///< exponential
    FourierBathParams fourier{};
    std::vector<cplx> z0;  ///< initial coherent labels, empty for vacuum

    bool operator==(const BathConfig&) const = default;
};

struct TimeGrid {
    double start;
    double end;
    double step;

    bool operator==(const TimeGrid&) const = default;
};

struct TimesConfig {
    double t = 0.0;
    std::vector<double> t_prime;  ///< explicit list, or expanded from grid
    std::optional<TimeGrid> grid;

    bool operator==(const TimesConfig&) const = default;
};

struct McMethod {
    std::size_t n_traj = 0;
    std::uint64_t seed = 1;
    double dt = 0.0;                   ///< 0 selects the engine default
    std::optional<OStrategy> strategy;  ///< absent: commuting when [H_S, L] = 0

    bool operator==(const McMethod&) const = default;
};

struct WeakOdeMethod {
    double dt = 1e-3;
    QrtMode mode = QrtMode::Full;

    bool operator==(const WeakOdeMethod&) const = default;
};

struct ExactDephasingMethod {
    /// "exact" or "printed"; the latter needs tau.
    std::string dtilde = "exact";
    std::optional<double> tau;

    bool operator==(const ExactDephasingMethod&) const = default;
};

struct OracleMethod {
    int n_max = 30;

    bool operator==(const OracleMethod&) const = default;
};

using Method = std::variant<McMethod, WeakOdeMethod, ExactDephasingMethod, OracleMethod>;

std::string_view method_name(const Method& m);

struct ScenarioConfig {
    SystemConfig system;
    BathConfig bath;
    std::vector<OperatorSpec> observables;  ///< [A] or [A, B]
    TimesConfig times;
    Method method;
    std::string output;

    bool operator==(const ScenarioConfig&) const = default;
};

/// Throws ConfigError with the offending field or the line/column of a syntax error.
ScenarioConfig parse_scenario(std::string_view json_text);
ScenarioConfig load_scenario(const std::string& path);
std::string scenario_to_json(const ScenarioConfig& config);

/// fig1a, fig1a-exact, fig1b, fig1b-exact, fig1b-qrt, fig1b-oracle, fig2, fig2-ode, fig3, fig3-qrt.
std::vector<std::string> preset_names();
/// Throws ConfigError for unknown names.
ScenarioConfig preset(std::string_view name);

SystemSpec resolve_system(const ScenarioConfig& config);
/// Bath without the coupling scale.
Bath resolve_bath(const ScenarioConfig& config);

struct RunOptions {
    unsigned threads = 1;
    std::optional<std::uint64_t> seed_override;
};

/// Runs the configured method. Throws ConfigError for unusable combinations,
/// OverflowError when the Monte-Carlo overflow budget is exceeded.
CorrelationTrace run_scenario(const ScenarioConfig& config, const RunOptions& options);

/// "mtcf <version> (<git describe>)".
std::string version_string();

}  // namespace mtcf
