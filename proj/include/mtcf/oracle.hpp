// oracle.hpp - exact propagation of system plus a few bath modes on a
// truncated Fock space.
//
// Full-space index = system index * bath_dim + bath index, the bath index
// being mixed-radix over modes with mode 0 most significant. The Hamiltonian
// is split into the connected components of its sparsity graph and each block
// is diagonalised once; every propagation reuses those eigensystems.

#pragma once

#include <span>
#include <string>
#include <vector>

#include "mtcf/bath.hpp"
#include "mtcf/operator.hpp"

namespace mtcf {

struct FockTruncation {
    int n_max = 30;                     ///< occupation cutoff, the same for every mode
    double leakage_threshold = 1e-8;    ///< warn above this top-level population
    std::size_t dimension_cap = 2 * 31 * 31;
};

/// Number of bath basis states, (n_max + 1)^modes.
std::size_t fock_dimension(std::size_t n_modes, int n_max);

/// H_S + lambda (L sum g a^dag + L^dag sum g^* a) + sum w a^dag a for an unscaled bath.
Matrix build_hamiltonian(const SystemSpec& sys, const DiscreteBath& bath, const FockTruncation& trunc);

/// Normalised truncated coherent state of all modes, a_n|z> = z_n|z> up to truncation.
Vector coherent_state(std::span<const cplx> z, int n_max);

class Oracle {
public:
    Oracle(SystemSpec sys, const DiscreteBath& bath, FockTruncation trunc);

    std::size_t dim() const { return dim_; }
    std::size_t bath_dim() const { return bath_dim_; }
    const FockTruncation& truncation() const { return trunc_; }
    const Matrix& hamiltonian() const { return h_; }
    /// Sizes of the diagonalised blocks.
    std::vector<std::size_t> block_sizes() const;

    /// exp(-i H tau) psi.
    Vector propagate(const Vector& psi, double tau) const;
    /// X (x) identity applied to a full-space vector.
    Vector apply_system(const Operator& x, const Vector& psi) const;
    /// |psi0> (x) |coherent z0>; z0 empty means vacuum.
    Vector initial_state(std::span<const cplx> z0) const;
    /// Population of states with any mode at n_max.
    double top_level_population(const Vector& psi) const;

private:
    struct Block {
        std::vector<Eigen::Index> indices;
        Eigen::VectorXd energies;
        Matrix vectors;
    };

    SystemSpec sys_;
    FockTruncation trunc_;
    std::size_t n_modes_;
    std::size_t bath_dim_;
    std::size_t dim_;
    Matrix h_;
    std::vector<Block> blocks_;
    std::vector<char> top_level_;  // per bath index
};

struct OracleRequest {
    std::vector<Operator> observables;  ///< A_1..A_N
    std::vector<double> fixed_times;    ///< t_2..t_N, any order
    std::vector<double> t1_grid;
    std::vector<cplx> z0;               ///< initial coherent labels; empty for vacuum
};

struct OracleResult {
    std::vector<cplx> values;  ///< one per t1_grid entry
    double max_leakage = 0.0;
    double max_norm_error = 0.0;
    std::vector<std::string> warnings;
};

/// <Psi0| A_1(t_1) ... A_N(t_N) |Psi0> evaluated by alternating exact steps.
OracleResult oracle_correlation(const Oracle& oracle, const OracleRequest& request);

}  // namespace mtcf
