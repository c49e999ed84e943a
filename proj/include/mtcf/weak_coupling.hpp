// weak_coupling.hpp - second-order equations for one- and two-time
// correlation functions, with and without the term that breaks the
// quantum regression theorem.
//
// Every basis pair C[mu][nu](t', t) = <B_mu(t') B_nu(t)> is evolved at once:
//
//   dC/dt' = G(t') C + sum_k h_k(t', t) a C b_k^T
//
// where G is the one-time generator A -> i[H_S, A] + S1 [A, L] + [L^dag, A] S2,
// a expands [L^dag, B_mu], b_k expands [B_nu, L_k] for each eigenoperator
// component L_k of L, and h_k(t', t) = int_0^t alpha(t' - tau) e^{-i W_k (tau - t)}.
// Dropping the second term gives the regression-theorem evolution.
//
// The bath must start in the vacuum.

#pragma once

#include <span>
#include <vector>

#include "mtcf/bath.hpp"
#include "mtcf/operator.hpp"

namespace mtcf {

enum class QrtMode { Full, QrtTruncated };

class WeakCouplingModel {
public:
    /// `bath` is unscaled; alpha picks up lambda^2 from the system.
    WeakCouplingModel(SystemSpec sys, const Bath& bath);

    const SystemSpec& system() const { return sys_; }
    const Bath& scaled_bath() const { return bath_; }
    const OperatorBasis& basis() const { return basis_; }
    const ProductTable& products() const { return products_; }
    const EigenOperatorDecomposition& components() const { return components_; }

    /// Memory kernels (S1, S2) at time s; S1 = S2^dagger.
    std::pair<Operator, Operator> kernels(double s) const;
    /// One-time generator in the basis: row mu holds the expansion of G(B_mu).
    Matrix generator(double s) const;
    /// h_k(t', t) for component k.
    cplx cross_kernel(std::size_t k, double t_prime, double t) const;

    const Matrix& dagger_commutator() const { return a_; }
    const std::vector<Matrix>& component_commutators() const { return b_; }

private:
    SystemSpec sys_;
    Bath bath_;
    OperatorBasis basis_;
    ProductTable products_;
    EigenOperatorDecomposition components_;
    Matrix g_free_;
    std::vector<Matrix> p_, q_;  // coefficients of conj(m_k) and m_k in G
    Matrix a_;
    std::vector<Matrix> b_;
};

struct OneTimeTrace {
    std::vector<double> times;
    std::vector<Vector> values;  ///< <B_mu(s)> per time
};

/// Expectation vector v_mu(s) = <B_mu(s)> on a non-decreasing grid starting at or after 0.
OneTimeTrace one_time_evolve(const WeakCouplingModel& model, std::span<const double> grid, double dt);

struct TwoTimeTrace {
    double t = 0.0;
    std::vector<double> t_prime;
    std::vector<Matrix> c;  ///< C[mu][nu](t', t) per t' entry

    /// sum_{mu nu} x_mu y_nu C[mu][nu] for A = sum x_mu B_mu, B = sum y_nu B_nu.
    cplx pair(std::size_t k, const Vector& a_coeffs, const Vector& b_coeffs) const;
};

/// Two-time correlations for t' on a non-decreasing grid with every t' >= t >= 0.
TwoTimeTrace two_time_evolve(const WeakCouplingModel& model, double t, std::span<const double> t_prime_grid, double dt,
                             QrtMode mode);

/// <A(t') B(t)> for each grid entry.
std::vector<cplx> two_time_correlation(const WeakCouplingModel& model, const Operator& a, const Operator& b, double t,
                                       std::span<const double> t_prime_grid, double dt, QrtMode mode);

struct QrtReport {
    bool a_commutator_zero;    ///< [L^dagger, A] = 0
    bool b_commutator_zero;    ///< [B, L_k] = 0 for every eigenoperator component
    bool qrt_predicted_valid;  ///< either of the above
};

QrtReport qrt_condition_check(const SystemSpec& sys, const Operator& a, const Operator& b);

}  // namespace mtcf
