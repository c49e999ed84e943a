// Shared fixtures and test-only numerical oracles.
#pragma once

#include <cmath>
#include <functional>
#include <random>

#include "mtcf/bath.hpp"
#include "mtcf/operator.hpp"

namespace testing {

using mtcf::cplx;
using mtcf::Matrix;
using mtcf::Vector;

inline constexpr double kPi = 3.14159265358979323846;

/// ((1 + 2i)|+> + (1 + i)|->) / sqrt(7).
inline Vector fig1_psi0() {
    Vector v(2);
    v << cplx(1, 2) / std::sqrt(7.0), cplx(1, 1) / std::sqrt(7.0);
    return v;
}

/// Two modes g = 1 at w = 6 and w = 2.
inline mtcf::DiscreteBath fig1_bath() { return mtcf::DiscreteBath({{1.0, 6.0}, {1.0, 2.0}}); }

inline mtcf::SystemSpec dephasing_system(double lambda, double omega = 2.0) {
    return mtcf::SystemSpec::qubit(omega, mtcf::ops::sigma_z(), lambda, fig1_psi0());
}

inline Matrix random_matrix(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix m(dim, dim);
    for (int r = 0; r < dim; ++r) {
        for (int c = 0; c < dim; ++c) m(r, c) = cplx(n(rng), n(rng));
    }
    return m;
}

inline Matrix random_hermitian(std::mt19937_64& rng, int dim) {
    const Matrix m = random_matrix(rng, dim);
    return 0.5 * (m + m.adjoint());
}

inline Vector random_state(std::mt19937_64& rng, int dim) {
    std::normal_distribution<double> n(0.0, 1.0);
    Vector v(dim);
    for (int i = 0; i < dim; ++i) v(i) = cplx(n(rng), n(rng));
    return v / v.norm();
}

namespace detail {

// Gauss-Kronrod 7/15 nodes on [-1, 1].
inline constexpr double kXgk[8] = {0.991455371120812639, 0.949107912342758525, 0.864864423359769073,
                                   0.741531185599394440, 0.586087235467691130, 0.405845151377397167,
                                   0.207784955007898468, 0.000000000000000000};
inline constexpr double kWgk[8] = {0.022935322010529225, 0.063092092629978553, 0.104790010322250184,
                                   0.140653259715525919, 0.169004726639267903, 0.190350578064785410,
                                   0.204432940075298892, 0.209482141084727828};
inline constexpr double kWg[4] = {0.129484966168869693, 0.279705391489276668, 0.381830050505118945,
                                  0.417959183673469388};

inline cplx gk15(const std::function<cplx(double)>& f, double a, double b, double& err) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    const cplx fc = f(c);
    cplx kronrod = fc * kWgk[7];
    cplx gauss = fc * kWg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = h * kXgk[j];
        const cplx s = f(c - dx) + f(c + dx);
        kronrod += kWgk[j] * s;
        if (j % 2 == 1) gauss += kWg[j / 2] * s;
    }
    err = std::abs((kronrod - gauss) * h);
    return kronrod * h;
}

inline cplx adapt(const std::function<cplx(double)>& f, double a, double b, double tol, int depth) {
    double err = 0.0;
    const cplx v = gk15(f, a, b, err);
    if (err <= tol || depth >= 40) return v;
    const double m = 0.5 * (a + b);
    return adapt(f, a, m, 0.5 * tol, depth + 1) + adapt(f, m, b, 0.5 * tol, depth + 1);
}

}  // namespace detail

/// Adaptive Gauss-Kronrod quadrature, used only as an independent reference.
inline cplx integrate(const std::function<cplx(double)>& f, double a, double b, double tol = 1e-13) {
    if (a == b) return 0.0;
    if (b < a) return -integrate(f, b, a, tol);
    return detail::adapt(f, a, b, tol, 0);
}

inline double max_abs_diff(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace testing
