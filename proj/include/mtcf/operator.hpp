// operator.hpp - finite-dimensional operator algebra for the system side.
//
// Holds the system description (H_S, coupling L, coupling scale, initial
// state), commutators, conjugation by the free system evolution, the
// eigenoperator decomposition of an operator with respect to H_S, and a
// linear basis of operators used to close the two-time equations.

#pragma once

#include <complex>
#include <cstddef>
#include <vector>

#include <Eigen/Dense>

#include "mtcf/error.hpp"

namespace mtcf {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

inline constexpr cplx kI{0.0, 1.0};

/// Square complex matrix acting on the system Hilbert space.
class Operator {
public:
    Operator() = default;
    explicit Operator(Matrix m);

    static Operator zero(int dim);
    static Operator identity(int dim);

    int dim() const { return static_cast<int>(m_.rows()); }
    const Matrix& matrix() const { return m_; }
    cplx operator()(int r, int c) const { return m_(r, c); }

    Operator adjoint() const { return Operator(m_.adjoint()); }
    /// Frobenius norm.
    double norm() const { return m_.norm(); }
    bool is_hermitian(double tol) const;

    Operator operator+(const Operator& o) const;
    Operator operator-(const Operator& o) const;
    Operator operator*(const Operator& o) const;
    Operator operator*(cplx s) const { return Operator(m_ * s); }
    friend Operator operator*(cplx s, const Operator& o) { return o * s; }
    Vector operator*(const Vector& v) const;

    bool operator==(const Operator& o) const { return m_ == o.m_; }

private:
    Matrix m_;
};

namespace ops {
Operator identity(int dim = 2);
Operator sigma_x();
Operator sigma_y();
Operator sigma_z();
/// |1><2| with |2> the upper (+omega/2) level, i.e. the lowering operator.
/// In the (|+>, |->) ordering this is the matrix with a single 1 at (1, 0).
Operator sigma_12();
/// Qubit operator [[0, a], [b, 0]].
Operator offdiag(cplx a, cplx b);
}  // namespace ops

Operator commutator(const Operator& x, const Operator& y);

/// Finite system: H_S, coupling L, coupling scale lambda and |psi0>.
///
/// The Hermitian eigensystem of H_S is computed once at construction and
/// reused by every conjugation.
class SystemSpec {
public:
    SystemSpec(Operator h_sys, Operator coupling, double coupling_scale, Vector psi0);

    /// H_S = (omega/2) sigma_z.
    static SystemSpec qubit(double omega, Operator coupling, double coupling_scale, Vector psi0);

    int dim() const { return h_.dim(); }
    const Operator& h_sys() const { return h_; }
    const Operator& coupling() const { return l_; }
    double coupling_scale() const { return lambda_; }
    const Vector& psi0() const { return psi0_; }

    const Eigen::VectorXd& energies() const { return energies_; }
    const Matrix& eigenvectors() const { return eigvecs_; }

    /// Same system with another coupling scale.
    SystemSpec with_coupling_scale(double lambda) const;

private:
    Operator h_;
    Operator l_;
    double lambda_;
    Vector psi0_;
    Eigen::VectorXd energies_;
    Matrix eigvecs_;
};

/// exp(i H_S s) X exp(-i H_S s).
Operator free_conjugate(const SystemSpec& sys, const Operator& x, double s);

/// exp(-i H_S s) |psi>.
Vector free_evolve(const SystemSpec& sys, const Vector& psi, double s);

struct EigenComponent {
    double frequency;  ///< Omega: exp(iH s) X_k exp(-iH s) = exp(-i Omega s) X_k
    Operator op;
};

struct EigenOperatorDecomposition {
    std::vector<EigenComponent> components;  ///< ascending in frequency

    Operator reconstruct(int dim) const;
};

/// Bohr frequencies closer than this are merged into one component.
inline constexpr double kFrequencyMergeTol = 1e-9;

EigenOperatorDecomposition eigen_decompose(const SystemSpec& sys, const Operator& x);

/// Rank-3 structure constants: B_mu B_nu = sum_rho c(mu, nu, rho) B_rho.
class ProductTable {
public:
    ProductTable() = default;
    explicit ProductTable(std::size_t n) : n_(n), c_(n * n * n) {}

    std::size_t size() const { return n_; }
    cplx& operator()(std::size_t mu, std::size_t nu, std::size_t rho) {
        return c_[(mu * n_ + nu) * n_ + rho];
    }
    cplx operator()(std::size_t mu, std::size_t nu, std::size_t rho) const {
        return c_[(mu * n_ + nu) * n_ + rho];
    }

private:
    std::size_t n_ = 0;
    std::vector<cplx> c_;
};

/// Ordered spanning set of dim^2 operators, identity first.
///
/// For dim == 2 the order is (I, sigma_x, sigma_y, sigma_z). Larger
/// dimensions use I followed by the matrix units E_ij with (i, j) != (0, 0).
class OperatorBasis {
public:
    explicit OperatorBasis(int dim);
    explicit OperatorBasis(std::vector<Operator> elements);

    int dim() const { return dim_; }
    std::size_t size() const { return elements_.size(); }
    const Operator& operator[](std::size_t i) const { return elements_[i]; }
    const std::vector<Operator>& elements() const { return elements_; }

    /// Coefficients x with X = sum_mu x_mu B_mu.
    Vector expand(const Operator& x) const;
    Operator reconstruct(const Vector& coeffs) const;
    ProductTable product_table() const;

private:
    void factorize();

    int dim_;
    std::vector<Operator> elements_;
    Eigen::PartialPivLU<Matrix> gram_lu_;
};

}  // namespace mtcf
