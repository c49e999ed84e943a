// dephasing.hpp - closed-form two-time correlations of the pure-dephasing
// qubit, H_S = (w/2) sigma_z and L = sigma_z.
//
// Off-diagonal observables are parametrised as [[0, a], [b, 0]]. All bath
// dependence enters through I_{ac}^{bd} = int_a^b int_c^d alpha(tau - s).

#pragma once

#include <vector>

#include "mtcf/bath.hpp"

namespace mtcf {

struct DephasingScenario {
    double omega = 0.0;
    Bath bath;  ///< already includes the coupling scale
    cplx psi01;  ///< amplitude on |+>
    cplx psi02;  ///< amplitude on |->
    cplx alpha_a = 0.0, beta_a = 0.0;
    cplx alpha_b = 0.0, beta_b = 0.0;

    void validate() const;
};

/// <A(t') sigma_z(t)> = e^{-2 I_00^{t't'}} (b psi02^* psi01 e^{-iwt'} - a psi01^* psi02 e^{iwt'}); independent of t.
cplx c_offdiag_sigmaz(const DephasingScenario& sc, double t_prime, double t);

/// <sigma_z(t') sigma_z(t)> = 1.
cplx c_sigmaz_sigmaz(const DephasingScenario& sc, double t_prime, double t);

/// One signed double-integral term coeff * I_{ac}^{bd}(alpha or conj alpha).
struct ITerm {
    double coeff;
    double a, b, c, d;
    bool conj_alpha = false;
};

/// Exponent of the off-diagonal/off-diagonal correlation, assembled from I terms.
class DTildeExpression {
public:
    DTildeExpression() = default;
    explicit DTildeExpression(std::vector<ITerm> terms) : terms_(std::move(terms)) {}

    /// The published six-term combination with its free symbol tau set to
    /// `tau`. Kept for comparison; it does not match the oracle.
    static DTildeExpression printed(double t_prime, double t, double tau);

    /// -2 I_{tt}^{t't'} + 2 I_{00}^{t't} - 2 I_{00}^{tt'}, obtained from the
    /// displaced-oscillator solution. Agrees with the Fock-space oracle.
    static DTildeExpression exact(double t_prime, double t);

    const std::vector<ITerm>& terms() const { return terms_; }
    cplx evaluate(const Bath& bath) const;

private:
    std::vector<ITerm> terms_;
};

/// e^{D} (a b' |psi01|^2 e^{iw(t'-t)} + a' b |psi02|^2 e^{-iw(t'-t)}) with D from `dtilde`.
cplx c_offdiag_offdiag(const DephasingScenario& sc, double t_prime, double t, const DTildeExpression& dtilde);

}  // namespace mtcf
