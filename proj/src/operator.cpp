#include "mtcf/operator.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mtcf {

namespace {

bool all_finite(const Matrix& m) {
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        if (!std::isfinite(m.data()[i].real()) || !std::isfinite(m.data()[i].imag())) return false;
    }
    return true;
}

void require_same_dim(const Operator& a, const Operator& b, const char* what) {
    if (a.dim() != b.dim()) {
        throw InvalidArgument(std::string(what) + ": dimension mismatch (" + std::to_string(a.dim()) +
                              " vs " + std::to_string(b.dim()) + ")");
    }
}

}  // namespace

Operator::Operator(Matrix m) : m_(std::move(m)) {
    if (m_.rows() != m_.cols()) throw InvalidArgument("operator matrix must be square");
    if (!all_finite(m_)) throw InvalidArgument("operator has non-finite entries");
}

Operator Operator::zero(int dim) { return Operator(Matrix::Zero(dim, dim)); }
Operator Operator::identity(int dim) { return Operator(Matrix::Identity(dim, dim)); }

bool Operator::is_hermitian(double tol) const {
    return (m_ - m_.adjoint()).cwiseAbs().maxCoeff() <= tol;
}

Operator Operator::operator+(const Operator& o) const {
    require_same_dim(*this, o, "operator+");
    return Operator(m_ + o.m_);
}

Operator Operator::operator-(const Operator& o) const {
    require_same_dim(*this, o, "operator-");
    return Operator(m_ - o.m_);
}

Operator Operator::operator*(const Operator& o) const {
    require_same_dim(*this, o, "operator*");
    return Operator(m_ * o.m_);
}

Vector Operator::operator*(const Vector& v) const {
    if (v.size() != m_.cols()) throw InvalidArgument("operator * vector: dimension mismatch");
    return m_ * v;
}

namespace ops {

Operator identity(int dim) { return Operator::identity(dim); }

Operator sigma_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return Operator(m);
}

Operator sigma_y() {
    Matrix m(2, 2);
    m << 0.0, -kI, kI, 0.0;
    return Operator(m);
}

Operator sigma_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return Operator(m);
}

Operator sigma_12() {
    Matrix m = Matrix::Zero(2, 2);
    m(1, 0) = 1.0;
    return Operator(m);
}

Operator offdiag(cplx a, cplx b) {
    Matrix m = Matrix::Zero(2, 2);
    m(0, 1) = a;
    m(1, 0) = b;
    return Operator(m);
}

}  // namespace ops

Operator commutator(const Operator& x, const Operator& y) {
    require_same_dim(x, y, "commutator");
    return Operator(x.matrix() * y.matrix() - y.matrix() * x.matrix());
}

SystemSpec::SystemSpec(Operator h_sys, Operator coupling, double coupling_scale, Vector psi0)
    : h_(std::move(h_sys)), l_(std::move(coupling)), lambda_(coupling_scale), psi0_(std::move(psi0)) {
    if (h_.dim() == 0) throw InvalidArgument("system dimension must be positive");
    require_same_dim(h_, l_, "SystemSpec coupling");
    if (!h_.is_hermitian(1e-12)) throw InvalidArgument("h_sys is not Hermitian");
    if (!(coupling_scale >= 0.0) || !std::isfinite(coupling_scale)) {
        throw InvalidArgument("coupling_scale must be finite and >= 0");
    }
    if (psi0_.size() != h_.dim()) throw InvalidArgument("psi0 length does not match system dimension");
    if (std::abs(psi0_.norm() - 1.0) > 1e-12) throw InvalidArgument("psi0 must have unit norm");

    Matrix herm = 0.5 * (h_.matrix() + h_.matrix().adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    energies_ = es.eigenvalues();
    eigvecs_ = es.eigenvectors();
}

SystemSpec SystemSpec::qubit(double omega, Operator coupling, double coupling_scale, Vector psi0) {
    return SystemSpec(ops::sigma_z() * cplx(0.5 * omega), std::move(coupling), coupling_scale,
                      std::move(psi0));
}

SystemSpec SystemSpec::with_coupling_scale(double lambda) const {
    return SystemSpec(h_, l_, lambda, psi0_);
}

Operator free_conjugate(const SystemSpec& sys, const Operator& x, double s) {
    if (x.dim() != sys.dim()) throw InvalidArgument("free_conjugate: dimension mismatch");
    const Matrix& u = sys.eigenvectors();
    const auto& e = sys.energies();
    Matrix xt = u.adjoint() * x.matrix() * u;
    for (int a = 0; a < xt.rows(); ++a) {
        for (int b = 0; b < xt.cols(); ++b) xt(a, b) *= std::exp(kI * ((e(a) - e(b)) * s));
    }
    return Operator(u * xt * u.adjoint());
}

Vector free_evolve(const SystemSpec& sys, const Vector& psi, double s) {
    const Matrix& u = sys.eigenvectors();
    Vector w = u.adjoint() * psi;
    for (int a = 0; a < w.size(); ++a) w(a) *= std::exp(-kI * (sys.energies()(a) * s));
    return u * w;
}

Operator EigenOperatorDecomposition::reconstruct(int dim) const {
    Matrix sum = Matrix::Zero(dim, dim);
    for (const auto& c : components) sum += c.op.matrix();
    return Operator(sum);
}

EigenOperatorDecomposition eigen_decompose(const SystemSpec& sys, const Operator& x) {
    if (x.dim() != sys.dim()) throw InvalidArgument("eigen_decompose: dimension mismatch");
    const Matrix& u = sys.eigenvectors();
    const auto& e = sys.energies();
    const Matrix xt = u.adjoint() * x.matrix() * u;
    const double cutoff = 1e-14 * std::max(1.0, x.norm());

    struct Entry {
        double omega;
        int a, b;
    };
    std::vector<Entry> entries;
    for (int a = 0; a < xt.rows(); ++a) {
        for (int b = 0; b < xt.cols(); ++b) {
            if (std::abs(xt(a, b)) > cutoff) entries.push_back({e(b) - e(a), a, b});
        }
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& l, const Entry& r) { return l.omega < r.omega; });

    EigenOperatorDecomposition out;
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i;
        double sum = 0.0;
        Matrix mask = Matrix::Zero(xt.rows(), xt.cols());
        while (j < entries.size() && entries[j].omega - entries[i].omega <= kFrequencyMergeTol) {
            mask(entries[j].a, entries[j].b) = xt(entries[j].a, entries[j].b);
            sum += entries[j].omega;
            ++j;
        }
        out.components.push_back({sum / static_cast<double>(j - i), Operator(u * mask * u.adjoint())});
        i = j;
    }
    return out;
}

OperatorBasis::OperatorBasis(int dim) : dim_(dim) {
    if (dim <= 0) throw InvalidArgument("basis dimension must be positive");
    if (dim == 2) {
        elements_ = {ops::identity(2), ops::sigma_x(), ops::sigma_y(), ops::sigma_z()};
    } else {
        elements_.push_back(Operator::identity(dim));
        for (int i = 0; i < dim; ++i) {
            for (int j = 0; j < dim; ++j) {
                if (i == 0 && j == 0) continue;
                Matrix m = Matrix::Zero(dim, dim);
                m(i, j) = 1.0;
                elements_.emplace_back(m);
            }
        }
    }
    factorize();
}

OperatorBasis::OperatorBasis(std::vector<Operator> elements) : elements_(std::move(elements)) {
    if (elements_.empty()) throw InvalidArgument("empty operator basis");
    dim_ = elements_.front().dim();
    if (elements_.size() != static_cast<std::size_t>(dim_ * dim_)) {
        throw InvalidArgument("operator basis must have dim^2 elements");
    }
    for (const auto& b : elements_) {
        if (b.dim() != dim_) throw InvalidArgument("operator basis elements differ in dimension");
    }
    factorize();
}

void OperatorBasis::factorize() {
    const auto n = static_cast<Eigen::Index>(elements_.size());
    Matrix gram(n, n);
    for (Eigen::Index m = 0; m < n; ++m) {
        for (Eigen::Index k = 0; k < n; ++k) {
            gram(m, k) = (elements_[m].matrix().adjoint() * elements_[k].matrix()).trace();
        }
    }
    Eigen::FullPivLU<Matrix> check(gram);
    if (!check.isInvertible()) throw InvalidArgument("operator basis Gram matrix is singular");
    gram_lu_ = Eigen::PartialPivLU<Matrix>(gram);
}

Vector OperatorBasis::expand(const Operator& x) const {
    if (x.dim() != dim_) throw InvalidArgument("basis expand: dimension mismatch");
    Vector rhs(static_cast<Eigen::Index>(elements_.size()));
    for (std::size_t m = 0; m < elements_.size(); ++m) {
        // tr(B^dagger X) without forming the product
        rhs(static_cast<Eigen::Index>(m)) = elements_[m].matrix().conjugate().cwiseProduct(x.matrix()).sum();
    }
    return gram_lu_.solve(rhs);
}

Operator OperatorBasis::reconstruct(const Vector& coeffs) const {
    Matrix sum = Matrix::Zero(dim_, dim_);
    for (std::size_t m = 0; m < elements_.size(); ++m) sum += coeffs(static_cast<Eigen::Index>(m)) * elements_[m].matrix();
    return Operator(sum);
}

ProductTable OperatorBasis::product_table() const {
    const std::size_t n = elements_.size();
    ProductTable table(n);
    for (std::size_t mu = 0; mu < n; ++mu) {
        for (std::size_t nu = 0; nu < n; ++nu) {
            Vector c = expand(elements_[mu] * elements_[nu]);
            for (std::size_t rho = 0; rho < n; ++rho) table(mu, nu, rho) = c(static_cast<Eigen::Index>(rho));
        }
    }
    return table;
}

}  // namespace mtcf
