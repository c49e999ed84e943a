#include "mtcf/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <span>
#include <sstream>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <json.hpp>

#include "mtcf/dephasing.hpp"
#include "mtcf/oracle.hpp"

#ifndef MTCF_VERSION_STRING
#define MTCF_VERSION_STRING "0.0.0"
#endif
#ifndef MTCF_GIT_DESCRIBE_STRING
#define MTCF_GIT_DESCRIBE_STRING "unknown"
#endif

namespace mtcf {

using json = nlohmann::json;

namespace {

constexpr double kStructureTol = 1e-12;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError(fmt::format("config field '{}': {}", path, what));
}

std::string join(const std::string& path, std::string_view key) {
    return path.empty() ? std::string(key) : fmt::format("{}.{}", path, key);
}

std::string index(const std::string& path, std::size_t i) { return fmt::format("{}[{}]", path, i); }

void expect_object(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
}

void expect_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& path) {
    expect_object(j, path);
    for (const auto& [key, _] : j.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) fail(join(path, key), "unknown field");
    }
}

const json& require(const json& j, std::string_view key, const std::string& path) {
    const auto it = j.find(key);
    if (it == j.end()) fail(join(path, key), "missing");
    return *it;
}

double number(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    const double v = j.get<double>();
    if (!std::isfinite(v)) fail(path, "must be finite");
    return v;
}

cplx complex_value(const json& j, const std::string& path) {
    if (j.is_number()) return {number(j, path), 0.0};
    if (!j.is_array() || j.size() != 2) fail(path, "expected a number or [re, im]");
    return {number(j[0], index(path, 0)), number(j[1], index(path, 1))};
}

json complex_json(cplx v) { return json::array({v.real(), v.imag()}); }

std::vector<cplx> complex_list(const json& j, const std::string& path) {
    if (!j.is_array()) fail(path, "expected an array");
    std::vector<cplx> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(complex_value(j[i], index(path, i)));
    return out;
}

Matrix matrix_value(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
        const std::string rp = index(path, static_cast<std::size_t>(r));
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) fail(rp, "matrix must be square");
        for (Eigen::Index c = 0; c < n; ++c) {
            m(r, c) = complex_value(row[static_cast<std::size_t>(c)], index(rp, static_cast<std::size_t>(c)));
        }
    }
    return m;
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(complex_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

constexpr std::string_view kOperatorNames[] = {"sigma_x", "sigma_y", "sigma_z", "sigma_12", "identity"};

OperatorSpec operator_value(const json& j, const std::string& path) {
    if (j.is_string()) {
        const auto name = j.get<std::string>();
        if (std::find(std::begin(kOperatorNames), std::end(kOperatorNames), name) == std::end(kOperatorNames)) {
            fail(path, fmt::format("unknown operator name '{}'", name));
        }
        return OperatorSpec::named(name);
    }
    return {"", matrix_value(j, path)};
}

json operator_json(const OperatorSpec& op) {
    if (!op.name.empty()) return op.name;
    return matrix_json(op.entries);
}

SystemConfig parse_system(const json& j, const std::string& path) {
    expect_keys(j, {"dim", "omega", "h_sys", "coupling", "coupling_scale", "psi0"}, path);
    SystemConfig s;
    const bool has_omega = j.contains("omega");
    const bool has_h = j.contains("h_sys");
    if (has_omega == has_h) fail(path, "give exactly one of 'omega' and 'h_sys'");
    if (has_omega) {
        const json& w = j["omega"];
        if (w.is_string() && w.get<std::string>() == kRequiredUserInput) {
            s.omega_required = true;
        } else {
            s.omega = number(w, join(path, "omega"));
        }
        s.dim = 2;
    } else {
        s.h_sys = matrix_value(j["h_sys"], join(path, "h_sys"));
        s.dim = static_cast<int>(s.h_sys.rows());
    }
    if (j.contains("dim")) {
        const json& d = j["dim"];
        if (!d.is_number_integer() || d.get<int>() != s.dim) {
            fail(join(path, "dim"), fmt::format("must be an integer equal to the Hamiltonian dimension {}", s.dim));
        }
    }
    s.coupling = operator_value(require(j, "coupling", path), join(path, "coupling"));
    if (j.contains("coupling_scale")) {
        s.coupling_scale = number(j["coupling_scale"], join(path, "coupling_scale"));
        if (s.coupling_scale < 0.0) fail(join(path, "coupling_scale"), "must be >= 0");
    }
    const auto psi = complex_list(require(j, "psi0", path), join(path, "psi0"));
    if (static_cast<int>(psi.size()) != s.dim) fail(join(path, "psi0"), fmt::format("needs {} amplitudes", s.dim));
    s.psi0 = Eigen::Map<const Vector>(psi.data(), static_cast<Eigen::Index>(psi.size()));
    if (s.psi0.norm() == 0.0) fail(join(path, "psi0"), "must not be zero");
    return s;
}

BathConfig parse_bath(const json& j, const std::string& path) {
    expect_keys(j, {"modes", "exponential", "fourier", "z0"}, path);
    BathConfig b;
    const int kinds = static_cast<int>(j.contains("modes")) + static_cast<int>(j.contains("exponential")) +
                      static_cast<int>(j.contains("fourier"));
    if (kinds != 1) fail(path, "give exactly one of 'modes', 'exponential', 'fourier'");
    if (j.contains("modes")) {
        b.kind = BathConfig::Kind::Modes;
        const json& modes = j["modes"];
        const std::string mp = join(path, "modes");
        if (!modes.is_array()) fail(mp, "expected an array");
        for (std::size_t i = 0; i < modes.size(); ++i) {
            const std::string ip = index(mp, i);
            expect_keys(modes[i], {"g", "omega"}, ip);
            b.modes.push_back({complex_value(require(modes[i], "g", ip), join(ip, "g")),
                               number(require(modes[i], "omega", ip), join(ip, "omega"))});
        }
    } else if (j.contains("exponential")) {
        b.kind = BathConfig::Kind::Exponential;
        const std::string ep = join(path, "exponential");
        expect_keys(j["exponential"], {"gamma"}, ep);
        b.gamma = number(require(j["exponential"], "gamma", ep), join(ep, "gamma"));
        if (!(b.gamma > 0.0)) fail(join(ep, "gamma"), "must be > 0");
    } else {
        b.kind = BathConfig::Kind::Fourier;
        const std::string fp = join(path, "fourier");
        const json& f = j["fourier"];
        expect_keys(f, {"gamma", "T", "nu"}, fp);
        b.fourier.gamma = number(require(f, "gamma", fp), join(fp, "gamma"));
        b.fourier.T = number(require(f, "T", fp), join(fp, "T"));
        const json& nu = require(f, "nu", fp);
        if (!nu.is_number_integer()) fail(join(fp, "nu"), "expected an integer");
        b.fourier.nu = nu.get<int>();
        if (!(b.fourier.gamma > 0.0)) fail(join(fp, "gamma"), "must be > 0");
        if (!(b.fourier.T > 0.0)) fail(join(fp, "T"), "must be > 0");
        if (b.fourier.nu <= 0 || b.fourier.nu % 2 != 0) fail(join(fp, "nu"), "must be a positive even integer");
    }
    if (j.contains("z0")) {
        if (b.kind == BathConfig::Kind::Exponential) fail(join(path, "z0"), "needs an explicit mode list");
        b.z0 = complex_list(j["z0"], join(path, "z0"));
        const std::size_t n_modes =
            b.kind == BathConfig::Kind::Modes ? b.modes.size() : static_cast<std::size_t>(b.fourier.nu + 1);
        if (b.z0.size() != n_modes) fail(join(path, "z0"), fmt::format("needs one label per mode ({})", n_modes));
    }
    return b;
}

std::vector<double> expand_grid(const TimeGrid& g, const std::string& path) {
    if (!(g.step > 0.0)) fail(join(path, "step"), "must be > 0");
    if (!(g.end >= g.start)) fail(join(path, "t_prime_end"), "must be >= t_prime_start");
    const double span = g.end - g.start;
    const auto n = static_cast<long long>(std::llround(span / g.step));
    if (std::abs(static_cast<double>(n) * g.step - span) > 1e-9 * std::max(1.0, std::abs(g.end))) {
        fail(join(path, "step"), "t_prime_end - t_prime_start must be a whole number of steps");
    }
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(n + 1));
    for (long long k = 0; k < n; ++k) out.push_back(g.start + static_cast<double>(k) * g.step);
    out.push_back(g.end);
    return out;
}

TimesConfig parse_times(const json& j, const std::string& path) {
    expect_keys(j, {"t", "t_prime", "t_prime_start", "t_prime_end", "step"}, path);
    TimesConfig tc;
    if (j.contains("t")) tc.t = number(j["t"], join(path, "t"));
    if (tc.t < 0.0) fail(join(path, "t"), "must be >= 0");
    const bool listed = j.contains("t_prime");
    const bool gridded = j.contains("t_prime_start") || j.contains("t_prime_end") || j.contains("step");
    if (listed == gridded) fail(path, "give either 't_prime' or 't_prime_start'/'t_prime_end'/'step'");
    if (listed) {
        const json& l = j["t_prime"];
        const std::string lp = join(path, "t_prime");
        if (!l.is_array() || l.empty()) fail(lp, "expected a non-empty array");
        for (std::size_t i = 0; i < l.size(); ++i) tc.t_prime.push_back(number(l[i], index(lp, i)));
    } else {
        tc.grid = TimeGrid{number(require(j, "t_prime_start", path), join(path, "t_prime_start")),
                           number(require(j, "t_prime_end", path), join(path, "t_prime_end")),
                           number(require(j, "step", path), join(path, "step"))};
        tc.t_prime = expand_grid(*tc.grid, path);
    }
    for (std::size_t i = 0; i < tc.t_prime.size(); ++i) {
        if (i > 0 && !(tc.t_prime[i] > tc.t_prime[i - 1])) fail(join(path, "t_prime"), "must strictly increase");
    }
    return tc;
}

OStrategy strategy_value(const json& j, const std::string& path) {
    if (j == "commuting") return OStrategy::Commuting;
    if (j == "zeroth_order") return OStrategy::ZerothOrder;
    fail(path, "expected 'commuting' or 'zeroth_order'");
}

Method parse_method(const json& j, const std::string& path) {
    expect_object(j, path);
    if (j.size() != 1) fail(path, "give exactly one of 'mc', 'weak_ode', 'exact_dephasing', 'oracle'");
    const auto& [name, body] = *j.items().begin();
    const std::string bp = join(path, name);
    if (name == "mc") {
        expect_keys(body, {"n_traj", "seed", "dt", "o_strategy"}, bp);
        McMethod m;
        const json& n = require(body, "n_traj", bp);
        if (!n.is_number_integer() || n.get<long long>() <= 0) fail(join(bp, "n_traj"), "expected a positive integer");
        m.n_traj = n.get<std::size_t>();
        if (body.contains("seed")) {
            const json& s = body["seed"];
            if (!s.is_number_unsigned()) fail(join(bp, "seed"), "expected a non-negative integer");
            m.seed = s.get<std::uint64_t>();
        }
        if (body.contains("dt")) {
            m.dt = number(body["dt"], join(bp, "dt"));
            if (!(m.dt > 0.0)) fail(join(bp, "dt"), "must be > 0");
        }
        if (body.contains("o_strategy")) m.strategy = strategy_value(body["o_strategy"], join(bp, "o_strategy"));
        return m;
    }
    if (name == "weak_ode") {
        expect_keys(body, {"dt", "mode"}, bp);
        WeakOdeMethod m;
        if (body.contains("dt")) {
            m.dt = number(body["dt"], join(bp, "dt"));
            if (!(m.dt > 0.0)) fail(join(bp, "dt"), "must be > 0");
        }
        if (body.contains("mode")) {
            const json& mode = body["mode"];
            if (mode == "full") {
                m.mode = QrtMode::Full;
            } else if (mode == "qrt_truncated") {
                m.mode = QrtMode::QrtTruncated;
            } else {
                fail(join(bp, "mode"), "expected 'full' or 'qrt_truncated'");
            }
        }
        return m;
    }
    if (name == "exact_dephasing") {
        expect_keys(body, {"dtilde", "tau"}, bp);
        ExactDephasingMethod m;
        if (body.contains("dtilde")) {
            const json& d = body["dtilde"];
            if (d != "exact" && d != "printed") fail(join(bp, "dtilde"), "expected 'exact' or 'printed'");
            m.dtilde = d.get<std::string>();
        }
        if (body.contains("tau")) m.tau = number(body["tau"], join(bp, "tau"));
        if (m.dtilde == "printed" && !m.tau) fail(join(bp, "tau"), "required when dtilde is 'printed'");
        return m;
    }
    if (name == "oracle") {
        expect_keys(body, {"n_max"}, bp);
        OracleMethod m;
        if (body.contains("n_max")) {
            const json& n = body["n_max"];
            if (!n.is_number_integer() || n.get<int>() < 1) fail(join(bp, "n_max"), "expected an integer >= 1");
            m.n_max = n.get<int>();
        }
        return m;
    }
    fail(bp, "unknown method");
}

std::pair<std::size_t, std::size_t> line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

// ---- resolution -------------------------------------------------------------

bool close_to(const Operator& a, const Operator& b) { return (a - b).norm() < kStructureTol; }

bool is_offdiagonal_qubit(const Operator& a) {
    return a.dim() == 2 && std::abs(a(0, 0)) < kStructureTol && std::abs(a(1, 1)) < kStructureTol;
}

std::vector<Operator> resolve_observables(const ScenarioConfig& config) {
    std::vector<Operator> out;
    for (std::size_t i = 0; i < config.observables.size(); ++i) {
        try {
            out.push_back(config.observables[i].resolve(config.system.dim));
        } catch (const InvalidArgument& e) {
            fail(index("observables", i), e.what());
        }
    }
    return out;
}

DiscreteBath require_discrete(const Bath& bath, std::string_view method) {
    if (const auto* d = std::get_if<DiscreteBath>(&bath)) return *d;
    fail("bath", fmt::format("method '{}' needs an explicit mode list (modes or fourier)", method));
}

void require_vacuum(const ScenarioConfig& config, std::string_view method) {
    if (!config.bath.z0.empty()) fail("bath.z0", fmt::format("method '{}' requires the vacuum initial bath", method));
}

std::vector<TraceRow> deterministic_rows(double t, std::span<const double> grid, const std::vector<cplx>& values) {
    std::vector<TraceRow> rows;
    rows.reserve(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) rows.push_back({t, grid[k], values[k], 0.0, 0.0});
    return rows;
}

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

void run_mc(const ScenarioConfig& config, const McMethod& m, const RunOptions& opts, const SystemSpec& sys,
            const std::vector<Operator>& obs, CorrelationTrace& trace) {
    const DiscreteBath bath = require_discrete(resolve_bath(config), "mc");
    OStrategy strategy = OStrategy::ZerothOrder;
    if (m.strategy) {
        strategy = *m.strategy;
    } else if (commutator(sys.h_sys(), sys.coupling()).norm() < kStructureTol) {
        strategy = OStrategy::Commuting;
    }
    std::unique_ptr<StochasticModel> model;
    try {
        model = std::make_unique<StochasticModel>(sys, bath, strategy, config.bath.z0);
    } catch (const InvalidArgument& e) {
        fail("method.mc.o_strategy", e.what());
    }
    MCRequest req;
    req.observables = obs;
    if (obs.size() == 2) req.fixed_times = {config.times.t};
    req.t1_grid = config.times.t_prime;
    MCOptions options;
    options.n_traj = m.n_traj;
    options.seed = opts.seed_override.value_or(m.seed);
    options.dt = m.dt;
    options.threads = std::max(1u, opts.threads);
    const MCEstimate est = mc_correlation(*model, req, options);

    trace.metadata.emplace_back("seed", std::to_string(est.seed));
    trace.metadata.emplace_back("n_traj", std::to_string(est.n_traj));
    trace.metadata.emplace_back("dt", fmt_double(est.dt));
    trace.metadata.emplace_back("o_strategy", strategy == OStrategy::Commuting ? "commuting" : "zeroth_order");
    trace.metadata.emplace_back("n_overflow", std::to_string(est.n_overflow));
    trace.metadata.emplace_back("max_abs_sample", fmt_double(est.max_abs_sample));
    for (std::size_t k = 0; k < req.t1_grid.size(); ++k) {
        const MCPoint& p = est.points[k];
        trace.rows.push_back({config.times.t, req.t1_grid[k], p.mean, p.se_re, p.se_im});
    }
}

void run_weak_ode(const ScenarioConfig& config, const WeakOdeMethod& m, const SystemSpec& sys,
                  const std::vector<Operator>& obs, CorrelationTrace& trace) {
    require_vacuum(config, "weak_ode");
    const WeakCouplingModel model(sys, resolve_bath(config));
    const auto& grid = config.times.t_prime;
    std::vector<cplx> values;
    if (obs.size() == 2) {
        values = two_time_correlation(model, obs[0], obs[1], config.times.t, grid, m.dt, m.mode);
    } else {
        const OneTimeTrace one = one_time_evolve(model, grid, m.dt);
        const Vector x = model.basis().expand(obs[0]);
        for (const Vector& v : one.values) values.push_back(x.cwiseProduct(v).sum());
    }
    trace.metadata.emplace_back("dt", fmt_double(m.dt));
    trace.metadata.emplace_back("mode", m.mode == QrtMode::Full ? "full" : "qrt_truncated");
    trace.rows = deterministic_rows(config.times.t, grid, values);
}

void run_exact_dephasing(const ScenarioConfig& config, const ExactDephasingMethod& m, const SystemSpec& sys,
                         const std::vector<Operator>& obs, CorrelationTrace& trace) {
    require_vacuum(config, "exact_dephasing");
    if (sys.dim() != 2) fail("system", "exact_dephasing needs a qubit");
    const Operator& h = sys.h_sys();
    if (std::abs(h(0, 1)) > kStructureTol || std::abs(h(0, 0) + h(1, 1)) > kStructureTol) {
        fail("system", "exact_dephasing needs H_S = (omega/2) sigma_z");
    }
    if (!close_to(sys.coupling(), ops::sigma_z())) fail("system.coupling", "exact_dephasing needs L = sigma_z");
    if (obs.size() != 2) fail("observables", "exact_dephasing needs two observables [A, B]");

    DephasingScenario sc;
    sc.omega = 2.0 * h(0, 0).real();
    sc.bath = scaled(resolve_bath(config), sys.coupling_scale());
    sc.psi01 = sys.psi0()(0);
    sc.psi02 = sys.psi0()(1);

    const Operator& a = obs[0];
    const Operator& b = obs[1];
    const double t = config.times.t;
    std::vector<cplx> values;
    for (double tp : config.times.t_prime) {
        if (tp < t) fail("times.t_prime", "every t' must be >= t");
    }
    if (is_offdiagonal_qubit(a) && close_to(b, ops::sigma_z())) {
        sc.alpha_a = a(0, 1);
        sc.beta_a = a(1, 0);
        for (double tp : config.times.t_prime) values.push_back(c_offdiag_sigmaz(sc, tp, t));
    } else if (close_to(a, ops::sigma_z()) && close_to(b, ops::sigma_z())) {
        for (double tp : config.times.t_prime) values.push_back(c_sigmaz_sigmaz(sc, tp, t));
    } else if (is_offdiagonal_qubit(a) && is_offdiagonal_qubit(b)) {
        sc.alpha_a = a(0, 1);
        sc.beta_a = a(1, 0);
        sc.alpha_b = b(0, 1);
        sc.beta_b = b(1, 0);
        for (double tp : config.times.t_prime) {
            const DTildeExpression d =
                m.dtilde == "printed" ? DTildeExpression::printed(tp, t, *m.tau) : DTildeExpression::exact(tp, t);
            values.push_back(c_offdiag_offdiag(sc, tp, t, d));
        }
    } else {
        fail("observables",
             "exact_dephasing covers (off-diagonal, sigma_z), (sigma_z, sigma_z) and (off-diagonal, off-diagonal)");
    }
    trace.metadata.emplace_back("dtilde", m.tau ? fmt::format("{} tau={}", m.dtilde, fmt_double(*m.tau)) : m.dtilde);
    trace.rows = deterministic_rows(t, config.times.t_prime, values);
}

void run_oracle(const ScenarioConfig& config, const OracleMethod& m, const SystemSpec& sys,
                const std::vector<Operator>& obs, CorrelationTrace& trace) {
    const DiscreteBath bath = require_discrete(resolve_bath(config), "oracle");
    FockTruncation trunc;
    trunc.n_max = m.n_max;
    std::unique_ptr<Oracle> oracle;
    try {
        oracle = std::make_unique<Oracle>(sys, bath, trunc);
    } catch (const InvalidArgument& e) {
        fail("method.oracle.n_max", e.what());
    }
    OracleRequest req;
    req.observables = obs;
    if (obs.size() == 2) req.fixed_times = {config.times.t};
    req.t1_grid = config.times.t_prime;
    req.z0 = config.bath.z0;
    const OracleResult res = oracle_correlation(*oracle, req);
    trace.metadata.emplace_back("n_max", std::to_string(m.n_max));
    trace.metadata.emplace_back("max_leakage", fmt::format("{:.3g}", res.max_leakage));
    for (const auto& w : res.warnings) trace.metadata.emplace_back("warning", w);
    trace.rows = deterministic_rows(config.times.t, req.t1_grid, res.values);
}

// ---- presets ----------------------------------------------------------------

ScenarioConfig fig1_base(bool sigma_y_probe) {
    ScenarioConfig c;
    c.system.omega_required = true;
    c.system.coupling = OperatorSpec::named("sigma_z");
    c.system.coupling_scale = 1.0;
    c.system.psi0 = Vector(2);
    c.system.psi0 << cplx(1, 2), cplx(1, 1);
    c.bath.kind = BathConfig::Kind::Modes;
    c.bath.modes = {{1.0, 6.0}, {1.0, 2.0}};
    if (sigma_y_probe) {
        c.observables = {OperatorSpec::named("sigma_x"), OperatorSpec::named("sigma_y")};
        c.times.t = 0.5;
        c.times.grid = TimeGrid{0.5, 3.5, 0.01};
    } else {
        c.observables = {OperatorSpec::named("sigma_x"), OperatorSpec::named("sigma_z")};
        c.times.t = 0.0;
        c.times.grid = TimeGrid{0.0, 3.0, 0.01};
    }
    c.times.t_prime = expand_grid(*c.times.grid, "times");
    return c;
}

ScenarioConfig dissipative_base(double lambda, double t, double span) {
    ScenarioConfig c;
    c.system.omega = 0.1;
    c.system.coupling = OperatorSpec::named("sigma_12");
    c.system.coupling_scale = lambda;
    c.system.psi0 = Vector(2);
    c.system.psi0 << cplx(1, 2), cplx(1, 1);
    c.observables = {OperatorSpec::named("sigma_x"), OperatorSpec::named("sigma_x")};
    c.times.t = t;
    c.times.grid = TimeGrid{t, t + span, 0.1};
    c.times.t_prime = expand_grid(*c.times.grid, "times");
    return c;
}

}  // namespace

Operator OperatorSpec::resolve(int dim) const {
    if (name.empty()) {
        if (entries.rows() != dim) {
            throw InvalidArgument(fmt::format("operator has dimension {}, system has {}", entries.rows(), dim));
        }
        return Operator(entries);
    }
    if (name == "identity") return ops::identity(dim);
    if (dim != 2) throw InvalidArgument(fmt::format("'{}' is a qubit operator", name));
    if (name == "sigma_x") return ops::sigma_x();
    if (name == "sigma_y") return ops::sigma_y();
    if (name == "sigma_z") return ops::sigma_z();
    if (name == "sigma_12") return ops::sigma_12();
    throw InvalidArgument(fmt::format("unknown operator name '{}'", name));
}

std::string_view method_name(const Method& m) {
    constexpr std::string_view names[] = {"mc", "weak_ode", "exact_dephasing", "oracle"};
    return names[m.index()];
}

ScenarioConfig parse_scenario(std::string_view json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::parse_error& e) {
        const auto [line, col] = line_column(json_text, e.byte > 0 ? e.byte - 1 : 0);
        throw ConfigError(fmt::format("config syntax error at line {}, column {}: {}", line, col, e.what()));
    }
    expect_keys(root, {"system", "bath", "observables", "times", "method", "output"}, "");
    ScenarioConfig c;
    c.system = parse_system(require(root, "system", ""), "system");
    c.bath = parse_bath(require(root, "bath", ""), "bath");
    const json& obs = require(root, "observables", "");
    if (!obs.is_array() || obs.empty() || obs.size() > 2) fail("observables", "expected [A] or [A, B]");
    for (std::size_t i = 0; i < obs.size(); ++i) c.observables.push_back(operator_value(obs[i], index("observables", i)));
    c.times = parse_times(require(root, "times", ""), "times");
    c.method = parse_method(require(root, "method", ""), "method");
    if (root.contains("output")) {
        if (!root["output"].is_string()) fail("output", "expected a path string");
        c.output = root["output"].get<std::string>();
    }
    return c;
}

ScenarioConfig load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open config '{}'", path));
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string scenario_to_json(const ScenarioConfig& c) {
    json sys = json::object();
    if (c.system.omega_required) {
        sys["omega"] = std::string(kRequiredUserInput);
    } else if (c.system.omega) {
        sys["omega"] = *c.system.omega;
    } else {
        sys["h_sys"] = matrix_json(c.system.h_sys);
    }
    sys["dim"] = c.system.dim;
    sys["coupling"] = operator_json(c.system.coupling);
    sys["coupling_scale"] = c.system.coupling_scale;
    json psi = json::array();
    for (Eigen::Index i = 0; i < c.system.psi0.size(); ++i) psi.push_back(complex_json(c.system.psi0(i)));
    sys["psi0"] = std::move(psi);

    json bath = json::object();
    switch (c.bath.kind) {
        case BathConfig::Kind::Modes: {
            json modes = json::array();
            for (const Mode& m : c.bath.modes) modes.push_back({{"g", complex_json(m.g)}, {"omega", m.omega}});
            bath["modes"] = std::move(modes);
            break;
        }
        case BathConfig::Kind::Exponential:
            bath["exponential"] = {{"gamma", c.bath.gamma}};
            break;
        case BathConfig::Kind::Fourier:
            bath["fourier"] = {{"gamma", c.bath.fourier.gamma}, {"T", c.bath.fourier.T}, {"nu", c.bath.fourier.nu}};
            break;
    }
    if (!c.bath.z0.empty()) {
        json z = json::array();
        for (cplx v : c.bath.z0) z.push_back(complex_json(v));
        bath["z0"] = std::move(z);
    }

    json obs = json::array();
    for (const auto& o : c.observables) obs.push_back(operator_json(o));

    json times = {{"t", c.times.t}};
    if (c.times.grid) {
        times["t_prime_start"] = c.times.grid->start;
        times["t_prime_end"] = c.times.grid->end;
        times["step"] = c.times.grid->step;
    } else {
        times["t_prime"] = c.times.t_prime;
    }

    json method = json::object();
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            json body = json::object();
            if constexpr (std::is_same_v<T, McMethod>) {
                body["n_traj"] = m.n_traj;
                body["seed"] = m.seed;
                if (m.dt > 0.0) body["dt"] = m.dt;
                if (m.strategy) body["o_strategy"] = *m.strategy == OStrategy::Commuting ? "commuting" : "zeroth_order";
            } else if constexpr (std::is_same_v<T, WeakOdeMethod>) {
                body["dt"] = m.dt;
                body["mode"] = m.mode == QrtMode::Full ? "full" : "qrt_truncated";
            } else if constexpr (std::is_same_v<T, ExactDephasingMethod>) {
                body["dtilde"] = m.dtilde;
                if (m.tau) body["tau"] = *m.tau;
            } else {
                body["n_max"] = m.n_max;
            }
            method[std::string(method_name(c.method))] = std::move(body);
        },
        c.method);

    json root = {{"system", sys}, {"bath", bath}, {"observables", obs}, {"times", times}, {"method", method}};
    if (!c.output.empty()) root["output"] = c.output;
    return root.dump(2) + "\n";
}

std::vector<std::string> preset_names() {
    return {"fig1a", "fig1a-exact", "fig1b", "fig1b-exact", "fig1b-qrt", "fig1b-oracle", "fig2", "fig2-ode", "fig3",
            "fig3-qrt"};
}

ScenarioConfig preset(std::string_view name) {
    ScenarioConfig c;
    if (name == "fig1a") {
        c = fig1_base(false);
        c.method = McMethod{100000, 1, 1e-3, OStrategy::Commuting};
    } else if (name == "fig1a-exact") {
        c = fig1_base(false);
        c.method = ExactDephasingMethod{};
    } else if (name == "fig1b") {
        c = fig1_base(true);
        c.method = McMethod{10000, 1, 1e-3, OStrategy::Commuting};
    } else if (name == "fig1b-exact") {
        c = fig1_base(true);
        c.method = ExactDephasingMethod{};
    } else if (name == "fig1b-qrt") {
        c = fig1_base(true);
        c.method = WeakOdeMethod{1e-3, QrtMode::QrtTruncated};
    } else if (name == "fig1b-oracle") {
        c = fig1_base(true);
        c.method = OracleMethod{30};
    } else if (name == "fig2" || name == "fig2-ode") {
        c = dissipative_base(0.2, 1.0, 15.0);
        c.bath.kind = BathConfig::Kind::Fourier;
        c.bath.fourier = {1.0, 40.0, 8};
        if (name == "fig2") {
            c.method = McMethod{1000000, 1, 0.02, OStrategy::ZerothOrder};
        } else {
            c.method = WeakOdeMethod{1e-3, QrtMode::Full};
        }
    } else if (name == "fig3" || name == "fig3-qrt") {
        c = dissipative_base(0.4, 10.0, 20.0);
        c.bath.kind = BathConfig::Kind::Exponential;
        c.bath.gamma = 1.0;
        c.method = WeakOdeMethod{1e-3, name == "fig3" ? QrtMode::Full : QrtMode::QrtTruncated};
    } else {
        throw ConfigError(fmt::format("unknown preset '{}'; known: {}", name, fmt::join(preset_names(), ", ")));
    }
    c.output = std::string(name) + ".csv";
    return c;
}

SystemSpec resolve_system(const ScenarioConfig& config) {
    const SystemConfig& s = config.system;
    if (s.omega_required) {
        fail("system.omega", fmt::format("is {}; set the qubit frequency before running", kRequiredUserInput));
    }
    Vector psi = s.psi0 / s.psi0.norm();
    Operator l;
    try {
        l = s.coupling.resolve(s.dim);
    } catch (const InvalidArgument& e) {
        fail("system.coupling", e.what());
    }
    try {
        if (s.omega) return SystemSpec::qubit(*s.omega, l, s.coupling_scale, psi);
        return SystemSpec(Operator(s.h_sys), l, s.coupling_scale, psi);
    } catch (const InvalidArgument& e) {
        fail("system", e.what());
    }
}

Bath resolve_bath(const ScenarioConfig& config) {
    const BathConfig& b = config.bath;
    switch (b.kind) {
        case BathConfig::Kind::Modes:
            return DiscreteBath(b.modes);
        case BathConfig::Kind::Exponential:
            return ExponentialBCF::decaying(b.gamma);
        case BathConfig::Kind::Fourier:
            return fourier_bath(b.fourier);
    }
    fail("bath", "unknown kind");
}

CorrelationTrace run_scenario(const ScenarioConfig& config, const RunOptions& options) {
    const SystemSpec sys = resolve_system(config);
    const std::vector<Operator> obs = resolve_observables(config);
    if (obs.size() == 2) {
        for (double tp : config.times.t_prime) {
            if (tp < config.times.t) fail("times.t_prime", "every t' must be >= t");
        }
    } else if (config.times.t_prime.front() < 0.0) {
        fail("times.t_prime", "times must be >= 0");
    }

    CorrelationTrace trace;
    trace.metadata.emplace_back("version", version_string());
    trace.metadata.emplace_back("method", std::string(method_name(config.method)));
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, McMethod>) {
                run_mc(config, m, options, sys, obs, trace);
            } else if constexpr (std::is_same_v<T, WeakOdeMethod>) {
                run_weak_ode(config, m, sys, obs, trace);
            } else if constexpr (std::is_same_v<T, ExactDephasingMethod>) {
                run_exact_dephasing(config, m, sys, obs, trace);
            } else {
                run_oracle(config, m, sys, obs, trace);
            }
        },
        config.method);
    trace.validate();
    return trace;
}

std::string version_string() { return fmt::format("mtcf {} ({})", MTCF_VERSION_STRING, MTCF_GIT_DESCRIBE_STRING); }

}  // namespace mtcf
