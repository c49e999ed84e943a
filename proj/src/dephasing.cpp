#include "mtcf/dephasing.hpp"

#include <cmath>

#include "mtcf/error.hpp"

namespace mtcf {

namespace {

constexpr cplx kIm{0.0, 1.0};

void check_times(double t_prime, double t) {
    if (!(t >= 0.0) || !(t_prime >= t)) throw InvalidArgument("dephasing correlation requires t' >= t >= 0");
}

}  // namespace

void DephasingScenario::validate() const {
    const double norm2 = std::norm(psi01) + std::norm(psi02);
    if (std::abs(norm2 - 1.0) > 1e-12) throw InvalidArgument("dephasing scenario: psi0 must be normalized");
    if (!std::isfinite(omega)) throw InvalidArgument("dephasing scenario: omega must be finite");
}

cplx c_offdiag_sigmaz(const DephasingScenario& sc, double t_prime, double t) {
    check_times(t_prime, t);
    sc.validate();
    const cplx decay = std::exp(-2.0 * double_integral_I(sc.bath, 0.0, t_prime, 0.0, t_prime));
    const cplx phase = std::exp(-kIm * sc.omega * t_prime);
    return decay * (sc.beta_a * std::conj(sc.psi02) * sc.psi01 * phase -
                    sc.alpha_a * std::conj(sc.psi01) * sc.psi02 / phase);
}

cplx c_sigmaz_sigmaz(const DephasingScenario& sc, double t_prime, double t) {
    check_times(t_prime, t);
    sc.validate();
    return 1.0;
}

DTildeExpression DTildeExpression::printed(double t_prime, double t, double tau) {
    return DTildeExpression({
        {1.0, 0.0, t_prime, 0.0, tau, true},
        {1.0, t, t_prime, t, tau, false},
        {1.0, 0.0, t, 0.0, tau, false},
        {1.0, 0.0, t_prime, t, t_prime, false},
        {-1.0, t, t_prime, 0.0, t, false},
        {-1.0, 0.0, t_prime, 0.0, t, false},
    });
}

DTildeExpression DTildeExpression::exact(double t_prime, double t) {
    return DTildeExpression({
        {-2.0, t, t_prime, t, t_prime, false},
        {2.0, 0.0, t_prime, 0.0, t, false},
        {-2.0, 0.0, t, 0.0, t_prime, false},
    });
}

cplx DTildeExpression::evaluate(const Bath& bath) const {
    cplx sum = 0.0;
    for (const auto& term : terms_) {
        const cplx v = double_integral_I(bath, term.a, term.b, term.c, term.d);
        sum += term.coeff * (term.conj_alpha ? std::conj(v) : v);
    }
    return sum;
}

cplx c_offdiag_offdiag(const DephasingScenario& sc, double t_prime, double t, const DTildeExpression& dtilde) {
    check_times(t_prime, t);
    sc.validate();
    const cplx phase = std::exp(kIm * sc.omega * (t_prime - t));
    const cplx pre = sc.alpha_a * sc.beta_b * std::norm(sc.psi01) * phase +
                     sc.alpha_b * sc.beta_a * std::norm(sc.psi02) / phase;
    return std::exp(dtilde.evaluate(sc.bath)) * pre;
}

}  // namespace mtcf
