#include "mtcf/weak_coupling.hpp"

#include <cmath>
#include <functional>

namespace mtcf {

namespace {

constexpr double kCommutatorTol = 1e-12;

Matrix rows_of(const OperatorBasis& basis, const std::function<Operator(const Operator&)>& f) {
    const auto n = static_cast<Eigen::Index>(basis.size());
    Matrix out(n, n);
    for (Eigen::Index mu = 0; mu < n; ++mu) out.row(mu) = basis.expand(f(basis[static_cast<std::size_t>(mu)])).transpose();
    return out;
}

// Fixed-step RK4 through a list of snapshot times; `rhs(s, y)` returns dy/ds.
template <class State, class Rhs, class OnSnapshot>
void integrate(State y, double t0, std::span<const double> grid, double dt, Rhs&& rhs, OnSnapshot&& on_snapshot) {
    double current = t0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double target = grid[k];
        if (target < current) throw InvalidArgument("integration grid must be non-decreasing");
        const double span = target - current;
        if (span > 0.0) {
            const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
            const double h = span / static_cast<double>(n);
            for (std::size_t j = 0; j < n; ++j) {
                const double s = current + h * static_cast<double>(j);
                const State k1 = rhs(s, y);
                const State k2 = rhs(s + 0.5 * h, State(y + (0.5 * h) * k1));
                const State k3 = rhs(s + 0.5 * h, State(y + (0.5 * h) * k2));
                const State k4 = rhs(j + 1 == n ? target : s + h, State(y + h * k3));
                y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            }
        }
        current = target;
        on_snapshot(k, y);
    }
}

}  // namespace

WeakCouplingModel::WeakCouplingModel(SystemSpec sys, const Bath& bath)
    : sys_(std::move(sys)),
      bath_(scaled(bath, sys_.coupling_scale())),
      basis_(sys_.dim()),
      products_(basis_.product_table()),
      components_(eigen_decompose(sys_, sys_.coupling())) {
    const Operator& h = sys_.h_sys();
    const Operator& l = sys_.coupling();
    const Operator ldag = l.adjoint();

    g_free_ = rows_of(basis_, [&](const Operator& b) { return kI * commutator(h, b); });
    for (const auto& comp : components_.components) {
        const Operator lk = comp.op;
        p_.push_back(rows_of(basis_, [&](const Operator& b) { return lk.adjoint() * commutator(b, l); }));
        q_.push_back(rows_of(basis_, [&](const Operator& b) { return commutator(ldag, b) * lk; }));
        b_.push_back(rows_of(basis_, [&](const Operator& b) { return commutator(b, lk); }));
    }
    a_ = rows_of(basis_, [&](const Operator& b) { return commutator(ldag, b); });
}

std::pair<Operator, Operator> WeakCouplingModel::kernels(double s) const {
    Matrix s2 = Matrix::Zero(sys_.dim(), sys_.dim());
    for (const auto& comp : components_.components) {
        s2 += memory_coefficient(bath_, comp.frequency, 0.0, s, s) * comp.op.matrix();
    }
    return {Operator(s2.adjoint()), Operator(s2)};
}

Matrix WeakCouplingModel::generator(double s) const {
    Matrix g = g_free_;
    for (std::size_t k = 0; k < components_.components.size(); ++k) {
        const cplx m = memory_coefficient(bath_, components_.components[k].frequency, 0.0, s, s);
        g += std::conj(m) * p_[k] + m * q_[k];
    }
    return g;
}

cplx WeakCouplingModel::cross_kernel(std::size_t k, double t_prime, double t) const {
    return kernel_integral(bath_, components_.components.at(k).frequency, 0.0, t, t_prime, t);
}

OneTimeTrace one_time_evolve(const WeakCouplingModel& model, std::span<const double> grid, double dt) {
    if (!(dt > 0.0)) throw InvalidArgument("one_time_evolve: dt must be positive");
    if (!grid.empty() && grid.front() < 0.0) throw InvalidArgument("one_time_evolve: times must be >= 0");
    const SystemSpec& sys = model.system();
    const Operator rho(sys.psi0() * sys.psi0().adjoint());
    Vector v0(static_cast<Eigen::Index>(model.basis().size()));
    for (std::size_t mu = 0; mu < model.basis().size(); ++mu) {
        v0(static_cast<Eigen::Index>(mu)) = (model.basis()[mu].matrix() * rho.matrix()).trace();
    }
    OneTimeTrace out;
    out.times.assign(grid.begin(), grid.end());
    out.values.resize(grid.size());
    integrate(
        v0, 0.0, grid, dt, [&](double s, const Vector& v) -> Vector { return model.generator(s) * v; },
        [&](std::size_t k, const Vector& v) { out.values[k] = v; });
    return out;
}

cplx TwoTimeTrace::pair(std::size_t k, const Vector& a_coeffs, const Vector& b_coeffs) const {
    return (a_coeffs.transpose() * c.at(k) * b_coeffs)(0, 0);
}

TwoTimeTrace two_time_evolve(const WeakCouplingModel& model, double t, std::span<const double> t_prime_grid, double dt,
                             QrtMode mode) {
    if (!(t >= 0.0)) throw InvalidArgument("two_time_evolve: t must be >= 0");
    for (double tp : t_prime_grid) {
        if (tp < t) throw InvalidArgument("two_time_evolve: every t' must be >= t");
    }
    const double t_arr[] = {t};
    const Vector v = one_time_evolve(model, t_arr, dt).values.front();

    const std::size_t n = model.basis().size();
    const ProductTable& c = model.products();
    Matrix c0(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = 0; nu < n; ++nu) {
            cplx sum = 0.0;
            for (std::size_t rho = 0; rho < n; ++rho) sum += c(mu, nu, rho) * v(static_cast<Eigen::Index>(rho));
            c0(static_cast<Eigen::Index>(mu), static_cast<Eigen::Index>(nu)) = sum;
        }
    }

    const Matrix& a = model.dagger_commutator();
    const auto& b = model.component_commutators();
    std::vector<Matrix> bt;
    for (const auto& bk : b) bt.push_back(bk.transpose());

    TwoTimeTrace out;
    out.t = t;
    out.t_prime.assign(t_prime_grid.begin(), t_prime_grid.end());
    out.c.resize(t_prime_grid.size());
    integrate(
        c0, t, t_prime_grid, dt,
        [&](double s, const Matrix& cm) -> Matrix {
            Matrix d = model.generator(s) * cm;
            if (mode == QrtMode::Full) {
                const Matrix ac = a * cm;
                for (std::size_t k = 0; k < bt.size(); ++k) d += model.cross_kernel(k, s, t) * (ac * bt[k]);
            }
            return d;
        },
        [&](std::size_t k, const Matrix& cm) { out.c[k] = cm; });
    return out;
}

std::vector<cplx> two_time_correlation(const WeakCouplingModel& model, const Operator& a, const Operator& b, double t,
                                       std::span<const double> t_prime_grid, double dt, QrtMode mode) {
    const TwoTimeTrace trace = two_time_evolve(model, t, t_prime_grid, dt, mode);
    const Vector x = model.basis().expand(a);
    const Vector y = model.basis().expand(b);
    std::vector<cplx> out(t_prime_grid.size());
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = trace.pair(k, x, y);
    return out;
}

QrtReport qrt_condition_check(const SystemSpec& sys, const Operator& a, const Operator& b) {
    QrtReport r{};
    r.a_commutator_zero = commutator(sys.coupling().adjoint(), a).norm() < kCommutatorTol;
    r.b_commutator_zero = true;
    for (const auto& comp : eigen_decompose(sys, sys.coupling()).components) {
        if (commutator(b, comp.op).norm() >= kCommutatorTol) r.b_commutator_zero = false;
    }
    r.qrt_predicted_valid = r.a_commutator_zero || r.b_commutator_zero;
    return r;
}

}  // namespace mtcf
