// stochastic.hpp - coherent-label Monte-Carlo for multi-time correlations.
//
// Each trajectory draws Bargmann labels z_1..z_N from the Gaussian measure,
// integrates the reduced propagators G(z_i^* z_{i+1} | t_i t_{i+1}) acting on
// system vectors, and forms the sample <chi|A_1 phi> where the ket chain
// carries A_N ... A_1 and the bra is a forward propagation with labels
// (z_1, z_0). The sample mean converges to <A_1(t_1) ... A_N(t_N)>.
//
// The labels are drawn from the plain measure and the segment prefactor
// exp(z_i^* . z_{i+1}) is carried exactly, so samples are heavy tailed.
// Standard errors and the largest |sample| are always reported.

#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "mtcf/bath.hpp"
#include "mtcf/operator.hpp"

namespace mtcf {

enum class OStrategy {
    Commuting,    ///< O = L; requires [H_S, L] = 0
    ZerothOrder,  ///< O(tau) = V_{tau - s} L at the current time s
};

/// z[0] is the initial bath label, z[1..N] are sampled.
struct NoiseLabels {
    std::vector<std::vector<cplx>> z;
};

NoiseLabels sample_labels(std::mt19937_64& rng, std::size_t n_modes, int n_times, std::span<const cplx> z0);

/// z_t = i sum_n conj(g_n) z_n exp(-i w_n t) for an already-scaled bath.
cplx noise_eval(std::span<const cplx> labels, const DiscreteBath& bath, double t);

/// Per-trajectory seed derived from (master seed, trajectory index).
std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index);

class StochasticModel {
public:
    /// `bath` is unscaled; the system's coupling scale is folded into every g_n.
    StochasticModel(SystemSpec sys, const DiscreteBath& bath, OStrategy strategy, std::vector<cplx> z0 = {});

    const SystemSpec& system() const { return sys_; }
    const DiscreteBath& scaled_bath() const { return bath_; }
    OStrategy strategy() const { return strategy_; }
    const EigenOperatorDecomposition& memory_components() const { return components_; }
    const std::vector<cplx>& z0() const { return z0_; }
    std::size_t n_modes() const { return bath_.size(); }

    /// -i H_S - L^dagger sum_k m_k(s) L_k for a segment starting at t_lo.
    Matrix deterministic_generator(double t_lo, double s) const;

    /// Default RK4 step: 1e-3 * min(1, 2 pi / max |w_n|).
    double default_dt() const;

private:
    SystemSpec sys_;
    DiscreteBath bath_;
    Bath memory_bath_;
    OStrategy strategy_;
    EigenOperatorDecomposition components_;
    std::vector<cplx> z0_;
};

/// exp(z_bra^* . z_ket) G-evolution of psi_in from t_lo to t_hi by fixed-step RK4.
/// Throws OverflowError (carrying `seed`) if the state stops being finite.
Vector propagate_segment(const StochasticModel& model, std::span<const cplx> z_bra, std::span<const cplx> z_ket,
                         double t_lo, double t_hi, const Vector& psi_in, double dt, std::uint64_t seed = 0);

/// Observables A_1..A_N, fixed later times t_2 > ... > t_N, and a grid of t_1
/// values (non-decreasing, each >= t_2, or >= 0 when N = 1).
struct MCRequest {
    std::vector<Operator> observables;
    std::vector<double> fixed_times;
    std::vector<double> t1_grid;
};

struct MCOptions {
    std::size_t n_traj = 1000;
    std::uint64_t seed = 1;
    double dt = 0.0;  ///< <= 0 selects the model default
    unsigned threads = 1;
    std::size_t block_size = 256;
    /// Abort when more than this fraction of trajectories overflow.
    double max_overflow_fraction = 1e-3;
};

struct MCPoint {
    cplx mean;
    double se_re = 0.0;
    double se_im = 0.0;
};

struct MCEstimate {
    std::vector<MCPoint> points;  ///< one per t1_grid entry
    std::size_t n_traj = 0;       ///< trajectories entering the mean
    std::size_t n_overflow = 0;
    std::uint64_t seed = 0;
    double dt = 0.0;
    double max_abs_sample = 0.0;
};

MCEstimate mc_correlation(const StochasticModel& model, const MCRequest& request, const MCOptions& options);

}  // namespace mtcf
