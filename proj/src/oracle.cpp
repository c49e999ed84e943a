#include "mtcf/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <fmt/format.h>

#include "mtcf/error.hpp"

namespace mtcf {

namespace {

constexpr cplx kIm{0.0, 1.0};

struct DisjointSets {
    std::vector<std::size_t> parent;

    explicit DisjointSets(std::size_t n) : parent(n) { std::iota(parent.begin(), parent.end(), std::size_t{0}); }

    std::size_t find(std::size_t x) {
        while (parent[x] != x) {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        return x;
    }

    void unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
};

}  // namespace

std::size_t fock_dimension(std::size_t n_modes, int n_max) {
    std::size_t d = 1;
    for (std::size_t m = 0; m < n_modes; ++m) d *= static_cast<std::size_t>(n_max + 1);
    return d;
}

Matrix build_hamiltonian(const SystemSpec& sys, const DiscreteBath& bath, const FockTruncation& trunc) {
    if (trunc.n_max < 1) throw InvalidArgument("Fock truncation needs n_max >= 1");
    const std::size_t n_modes = bath.size();
    const std::size_t bath_dim = fock_dimension(n_modes, trunc.n_max);
    const auto sys_dim = static_cast<std::size_t>(sys.dim());
    const std::size_t dim = sys_dim * bath_dim;
    if (dim > trunc.dimension_cap) {
        throw InvalidArgument(fmt::format("oracle dimension {} exceeds cap {}", dim, trunc.dimension_cap));
    }
    const auto base = static_cast<std::size_t>(trunc.n_max + 1);
    const double lambda = sys.coupling_scale();
    const Matrix& hs = sys.h_sys().matrix();
    const Matrix& l = sys.coupling().matrix();

    Matrix h = Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    auto at = [&](std::size_t s, std::size_t j) { return static_cast<Eigen::Index>(s * bath_dim + j); };

    for (std::size_t j = 0; j < bath_dim; ++j) {
        std::size_t rem = j;
        std::size_t stride = bath_dim;
        double energy = 0.0;
        for (std::size_t m = 0; m < n_modes; ++m) {
            stride /= base;
            const std::size_t n = rem / stride;
            rem %= stride;
            const Mode& mode = bath.modes()[m];
            energy += mode.omega * static_cast<double>(n);
            if (n + 1 >= base) continue;
            const cplx amp = lambda * mode.g * std::sqrt(static_cast<double>(n + 1));
            const std::size_t j_up = j + stride;
            for (std::size_t s = 0; s < sys_dim; ++s) {
                for (std::size_t sp = 0; sp < sys_dim; ++sp) {
                    const cplx lss = l(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(sp));
                    if (lss == cplx{0.0}) continue;
                    const cplx v = amp * lss;
                    h(at(s, j_up), at(sp, j)) += v;
                    h(at(sp, j), at(s, j_up)) += std::conj(v);
                }
            }
        }
        for (std::size_t s = 0; s < sys_dim; ++s) {
            for (std::size_t sp = 0; sp < sys_dim; ++sp) {
                h(at(s, j), at(sp, j)) += hs(static_cast<Eigen::Index>(s), static_cast<Eigen::Index>(sp));
            }
            h(at(s, j), at(s, j)) += energy;
        }
    }
    return h;
}

Vector coherent_state(std::span<const cplx> z, int n_max) {
    const auto base = static_cast<Eigen::Index>(n_max + 1);
    Vector out = Vector::Ones(1);
    for (const cplx zm : z) {
        Vector mode(base);
        mode(0) = 1.0;
        for (Eigen::Index n = 1; n < base; ++n) mode(n) = mode(n - 1) * zm / std::sqrt(static_cast<double>(n));
        Vector next(out.size() * base);
        for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * base, base) = out(i) * mode;
        out = std::move(next);
    }
    return out / out.norm();
}

Oracle::Oracle(SystemSpec sys, const DiscreteBath& bath, FockTruncation trunc)
    : sys_(std::move(sys)),
      trunc_(trunc),
      n_modes_(bath.size()),
      bath_dim_(fock_dimension(bath.size(), trunc.n_max)),
      dim_(static_cast<std::size_t>(sys_.dim()) * bath_dim_),
      h_(build_hamiltonian(sys_, bath, trunc_)) {
    DisjointSets sets(dim_);
    for (Eigen::Index c = 0; c < h_.cols(); ++c) {
        for (Eigen::Index r = 0; r < c; ++r) {
            if (h_(r, c) != cplx{0.0}) sets.unite(static_cast<std::size_t>(r), static_cast<std::size_t>(c));
        }
    }
    std::vector<std::size_t> block_of(dim_, dim_);
    for (std::size_t i = 0; i < dim_; ++i) {
        const std::size_t root = sets.find(i);
        if (block_of[root] == dim_) {
            block_of[root] = blocks_.size();
            blocks_.emplace_back();
        }
        blocks_[block_of[root]].indices.push_back(static_cast<Eigen::Index>(i));
    }
    for (auto& block : blocks_) {
        const auto n = static_cast<Eigen::Index>(block.indices.size());
        Matrix sub(n, n);
        for (Eigen::Index r = 0; r < n; ++r) {
            for (Eigen::Index c = 0; c < n; ++c) sub(r, c) = h_(block.indices[r], block.indices[c]);
        }
        Eigen::SelfAdjointEigenSolver<Matrix> solver(sub);
        if (solver.info() != Eigen::Success) throw Error("oracle: eigensolver failed");
        block.energies = solver.eigenvalues();
        block.vectors = solver.eigenvectors();
    }

    const auto base = static_cast<std::size_t>(trunc_.n_max + 1);
    top_level_.assign(bath_dim_, 0);
    for (std::size_t j = 0; j < bath_dim_; ++j) {
        std::size_t rem = j;
        for (std::size_t m = 0; m < n_modes_; ++m) {
            if (rem % base == base - 1) top_level_[j] = 1;
            rem /= base;
        }
    }
}

std::vector<std::size_t> Oracle::block_sizes() const {
    std::vector<std::size_t> out;
    for (const auto& b : blocks_) out.push_back(b.indices.size());
    return out;
}

Vector Oracle::propagate(const Vector& psi, double tau) const {
    if (static_cast<std::size_t>(psi.size()) != dim_) throw InvalidArgument("oracle: state dimension mismatch");
    Vector out(psi.size());
    for (const auto& block : blocks_) {
        const auto n = static_cast<Eigen::Index>(block.indices.size());
        Vector part(n);
        for (Eigen::Index i = 0; i < n; ++i) part(i) = psi(block.indices[i]);
        Vector coeffs = block.vectors.adjoint() * part;
        for (Eigen::Index i = 0; i < n; ++i) coeffs(i) *= std::exp(-kIm * block.energies(i) * tau);
        part = block.vectors * coeffs;
        for (Eigen::Index i = 0; i < n; ++i) out(block.indices[i]) = part(i);
    }
    return out;
}

Vector Oracle::apply_system(const Operator& x, const Vector& psi) const {
    if (x.dim() != sys_.dim()) throw InvalidArgument("oracle: observable dimension mismatch");
    if (static_cast<std::size_t>(psi.size()) != dim_) throw InvalidArgument("oracle: state dimension mismatch");
    const auto bd = static_cast<Eigen::Index>(bath_dim_);
    Vector out = Vector::Zero(psi.size());
    for (Eigen::Index s = 0; s < x.dim(); ++s) {
        for (Eigen::Index sp = 0; sp < x.dim(); ++sp) {
            const cplx v = x.matrix()(s, sp);
            if (v != cplx{0.0}) out.segment(s * bd, bd) += v * psi.segment(sp * bd, bd);
        }
    }
    return out;
}

Vector Oracle::initial_state(std::span<const cplx> z0) const {
    Vector bath_state;
    if (z0.empty()) {
        bath_state = Vector::Zero(static_cast<Eigen::Index>(bath_dim_));
        bath_state(0) = 1.0;
    } else {
        if (z0.size() != n_modes_) throw InvalidArgument("oracle: z0 needs one label per mode");
        bath_state = coherent_state(z0, trunc_.n_max);
    }
    const auto bd = static_cast<Eigen::Index>(bath_dim_);
    Vector out(static_cast<Eigen::Index>(dim_));
    for (Eigen::Index s = 0; s < sys_.dim(); ++s) out.segment(s * bd, bd) = sys_.psi0()(s) * bath_state;
    return out;
}

double Oracle::top_level_population(const Vector& psi) const {
    double p = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
        if (top_level_[i % bath_dim_]) p += std::norm(psi(static_cast<Eigen::Index>(i)));
    }
    return p;
}

OracleResult oracle_correlation(const Oracle& oracle, const OracleRequest& request) {
    const std::size_t n_obs = request.observables.size();
    if (n_obs == 0 || request.fixed_times.size() + 1 != n_obs) {
        throw InvalidArgument("oracle: need one fixed time per observable after the first");
    }
    // Exact propagation does not need time ordering; only finiteness and t >= 0.
    for (double ti : request.fixed_times) {
        if (!(ti >= 0.0) || !std::isfinite(ti)) throw InvalidArgument("oracle: times must be finite and >= 0");
    }
    for (double t1 : request.t1_grid) {
        if (!(t1 >= 0.0) || !std::isfinite(t1)) throw InvalidArgument("oracle: times must be finite and >= 0");
    }

    OracleResult result;
    auto track = [&](const Vector& v) {
        const double n2 = v.squaredNorm();
        if (n2 > 0.0) result.max_leakage = std::max(result.max_leakage, oracle.top_level_population(v) / n2);
    };

    const Vector psi0 = oracle.initial_state(request.z0);
    Vector ket = psi0;
    // fixed_times holds t_2 >= ... >= t_N; walk it from the end.
    double current = 0.0;
    for (std::size_t i = n_obs; i-- > 1;) {
        const double ti = request.fixed_times[i - 1];
        ket = oracle.propagate(ket, ti - current);
        track(ket);
        ket = oracle.apply_system(request.observables[i], ket);
        current = ti;
    }

    result.values.reserve(request.t1_grid.size());
    for (double t1 : request.t1_grid) {
        const Vector bra = oracle.propagate(psi0, t1);
        const Vector k1 = oracle.propagate(ket, t1 - current);
        track(bra);
        track(k1);
        result.max_norm_error = std::max(result.max_norm_error, std::abs(bra.norm() - 1.0));
        result.values.push_back(bra.dot(oracle.apply_system(request.observables.front(), k1)));
    }
    if (result.max_leakage > 0.0 && result.max_leakage > oracle.truncation().leakage_threshold) {
        result.warnings.push_back(
            fmt::format("Fock truncation leakage {:.3g} exceeds threshold", result.max_leakage));
    }
    return result;
}

}  // namespace mtcf
