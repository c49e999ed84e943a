#include "mtcf/stochastic.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <thread>

namespace mtcf {

namespace {

// Precomputed, trajectory-independent data for one propagation segment.
// Point 2j is the start of step j, 2j+1 its midpoint and 2j+2 its end.
struct SegmentPlan {
    double t_lo = 0.0;
    int dim = 0;
    std::size_t n_modes = 0;
    std::vector<double> h;
    std::vector<cplx> phasor;  // per point: exp(-i w_n s)
    std::vector<cplx> kmat;    // per point: deterministic generator, row-major
    std::vector<std::size_t> snapshot_steps;

    std::size_t n_steps() const { return h.size(); }
};

SegmentPlan make_plan(const StochasticModel& model, double t_lo, std::span<const double> targets, double dt) {
    SegmentPlan plan;
    plan.t_lo = t_lo;
    plan.dim = model.system().dim();
    plan.n_modes = model.n_modes();

    std::vector<double> times{t_lo};
    double current = t_lo;
    for (double target : targets) {
        if (target < current) throw InvalidArgument("segment snapshot times must be non-decreasing");
        const double span = target - current;
        if (span > 0.0) {
            const auto n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(span / dt - 1e-9)));
            const double h = span / static_cast<double>(n);
            for (std::size_t k = 0; k < n; ++k) {
                const double s = current + h * static_cast<double>(k);
                plan.h.push_back(h);
                times.push_back(s + 0.5 * h);
                times.push_back(k + 1 == n ? target : s + h);
            }
        }
        current = target;
        plan.snapshot_steps.push_back(plan.h.size());
    }

    const auto d2 = static_cast<std::size_t>(plan.dim * plan.dim);
    plan.phasor.resize(times.size() * plan.n_modes);
    plan.kmat.resize(times.size() * d2);
    const auto& modes = model.scaled_bath().modes();
    for (std::size_t p = 0; p < times.size(); ++p) {
        for (std::size_t n = 0; n < plan.n_modes; ++n) {
            plan.phasor[p * plan.n_modes + n] = std::exp(cplx(0.0, -modes[n].omega * times[p]));
        }
        const Matrix k = model.deterministic_generator(t_lo, times[p]);
        for (int r = 0; r < plan.dim; ++r) {
            for (int c = 0; c < plan.dim; ++c) plan.kmat[p * d2 + static_cast<std::size_t>(r * plan.dim + c)] = k(r, c);
        }
    }
    return plan;
}

bool finite_state(const cplx* y, int dim) {
    for (int i = 0; i < dim; ++i) {
        if (!std::isfinite(y[i].real()) || !std::isfinite(y[i].imag())) return false;
    }
    return true;
}

// Scratch space and the fixed-step RK4 kernel for one worker.
class SegmentRunner {
public:
    explicit SegmentRunner(const StochasticModel& model)
        : dim_(model.system().dim()),
          d2_(static_cast<std::size_t>(dim_ * dim_)),
          l_(d2_),
          ldag_(d2_),
          m0_(d2_),
          m1_(d2_),
          m2_(d2_),
          k_(4 * static_cast<std::size_t>(dim_)),
          tmp_(static_cast<std::size_t>(dim_)) {
        const Matrix& l = model.system().coupling().matrix();
        for (int r = 0; r < dim_; ++r) {
            for (int c = 0; c < dim_; ++c) {
                l_[static_cast<std::size_t>(r * dim_ + c)] = l(r, c);
                ldag_[static_cast<std::size_t>(r * dim_ + c)] = std::conj(l(c, r));
            }
        }
    }

    // Integrates y in place through the plan; calls on_snapshot(k, y) at every
    // snapshot. Returns false as soon as the state is not finite.
    template <class OnSnapshot>
    bool run(const SegmentPlan& plan, const cplx* u_bra, const cplx* u_ket, cplx* y, OnSnapshot&& on_snapshot) {
        std::size_t next = 0;
        const std::size_t n_snap = plan.snapshot_steps.size();
        auto flush = [&](std::size_t done) {
            while (next < n_snap && plan.snapshot_steps[next] == done) {
                if (!finite_state(y, dim_)) return false;
                on_snapshot(next, y);
                ++next;
            }
            return true;
        };
        if (!flush(0)) return false;
        if (plan.n_steps() > 0) generator(plan, 0, u_bra, u_ket, m0_.data());
        cplx* k1 = k_.data();
        cplx* k2 = k1 + dim_;
        cplx* k3 = k2 + dim_;
        cplx* k4 = k3 + dim_;
        for (std::size_t j = 0; j < plan.n_steps(); ++j) {
            const double h = plan.h[j];
            generator(plan, 2 * j + 1, u_bra, u_ket, m1_.data());
            generator(plan, 2 * j + 2, u_bra, u_ket, m2_.data());
            apply(m0_.data(), y, k1);
            for (int i = 0; i < dim_; ++i) tmp_[i] = y[i] + 0.5 * h * k1[i];
            apply(m1_.data(), tmp_.data(), k2);
            for (int i = 0; i < dim_; ++i) tmp_[i] = y[i] + 0.5 * h * k2[i];
            apply(m1_.data(), tmp_.data(), k3);
            for (int i = 0; i < dim_; ++i) tmp_[i] = y[i] + h * k3[i];
            apply(m2_.data(), tmp_.data(), k4);
            for (int i = 0; i < dim_; ++i) y[i] += (h / 6.0) * (k1[i] + 2.0 * (k2[i] + k3[i]) + k4[i]);
            std::swap(m0_, m2_);
            if (!flush(j + 1)) return false;
        }
        return finite_state(y, dim_);
    }

private:
    void generator(const SegmentPlan& plan, std::size_t p, const cplx* u_bra, const cplx* u_ket, cplx* m) const {
        const cplx* ph = plan.phasor.data() + p * plan.n_modes;
        cplx zb = 0.0, zk = 0.0;
        for (std::size_t n = 0; n < plan.n_modes; ++n) {
            zb += u_bra[n] * ph[n];
            zk += u_ket[n] * ph[n];
        }
        zb = std::conj(zb);
        const cplx* k = plan.kmat.data() + p * d2_;
        for (std::size_t e = 0; e < d2_; ++e) m[e] = k[e] + zb * l_[e] - zk * ldag_[e];
    }

    void apply(const cplx* m, const cplx* x, cplx* out) const {
        for (int r = 0; r < dim_; ++r) {
            cplx acc = 0.0;
            for (int c = 0; c < dim_; ++c) acc += m[r * dim_ + c] * x[c];
            out[r] = acc;
        }
    }

    int dim_;
    std::size_t d2_;
    std::vector<cplx> l_, ldag_;
    std::vector<cplx> m0_, m1_, m2_;
    std::vector<cplx> k_, tmp_;
};

// u_n = i conj(g_n) z_n, so that z_t = sum_n u_n exp(-i w_n t).
void noise_coefficients(const DiscreteBath& bath, std::span<const cplx> z, cplx* u) {
    const auto& modes = bath.modes();
    for (std::size_t n = 0; n < modes.size(); ++n) u[n] = cplx(0.0, 1.0) * std::conj(modes[n].g) * z[n];
}

cplx label_overlap(std::span<const cplx> bra, std::span<const cplx> ket) {
    cplx s = 0.0;
    for (std::size_t n = 0; n < bra.size(); ++n) s += std::conj(bra[n]) * ket[n];
    return s;
}

void apply_operator(const Matrix& a, const cplx* x, cplx* out, int dim) {
    for (int r = 0; r < dim; ++r) {
        cplx acc = 0.0;
        for (int c = 0; c < dim; ++c) acc += a(r, c) * x[c];
        out[r] = acc;
    }
}

// Welford accumulator for the real and imaginary parts of one grid point.
struct Moments {
    double n = 0.0;
    double mean_re = 0.0, m2_re = 0.0;
    double mean_im = 0.0, m2_im = 0.0;

    void add(cplx x) {
        n += 1.0;
        const double dr = x.real() - mean_re;
        mean_re += dr / n;
        m2_re += dr * (x.real() - mean_re);
        const double di = x.imag() - mean_im;
        mean_im += di / n;
        m2_im += di * (x.imag() - mean_im);
    }

    static Moments merge(const Moments& a, const Moments& b) {
        if (a.n == 0.0) return b;
        if (b.n == 0.0) return a;
        Moments out;
        out.n = a.n + b.n;
        const double dr = b.mean_re - a.mean_re;
        const double di = b.mean_im - a.mean_im;
        out.mean_re = a.mean_re + dr * b.n / out.n;
        out.mean_im = a.mean_im + di * b.n / out.n;
        out.m2_re = a.m2_re + b.m2_re + dr * dr * a.n * b.n / out.n;
        out.m2_im = a.m2_im + b.m2_im + di * di * a.n * b.n / out.n;
        return out;
    }
};

struct BlockResult {
    std::vector<Moments> moments;
    std::size_t n_overflow = 0;
    std::size_t first_overflow = std::numeric_limits<std::size_t>::max();
    double max_abs = 0.0;
};

BlockResult merge_blocks(const std::vector<BlockResult>& blocks, std::size_t lo, std::size_t hi) {
    if (hi - lo == 1) return blocks[lo];
    const std::size_t mid = lo + (hi - lo) / 2;
    BlockResult a = merge_blocks(blocks, lo, mid);
    const BlockResult b = merge_blocks(blocks, mid, hi);
    for (std::size_t k = 0; k < a.moments.size(); ++k) a.moments[k] = Moments::merge(a.moments[k], b.moments[k]);
    a.n_overflow += b.n_overflow;
    a.first_overflow = std::min(a.first_overflow, b.first_overflow);
    a.max_abs = std::max(a.max_abs, b.max_abs);
    return a;
}

void validate_request(const StochasticModel& model, const MCRequest& req) {
    const int dim = model.system().dim();
    if (req.observables.empty()) throw InvalidArgument("mc_correlation: at least one observable required");
    for (const auto& a : req.observables) {
        if (a.dim() != dim) throw InvalidArgument("mc_correlation: observable dimension mismatch");
    }
    if (req.fixed_times.size() + 1 != req.observables.size()) {
        throw InvalidArgument("mc_correlation: need one fixed time per observable after the first");
    }
    double prev = std::numeric_limits<double>::infinity();
    for (double t : req.fixed_times) {
        if (!(t >= 0.0) || t > prev) throw InvalidArgument("mc_correlation: fixed times must be non-increasing and >= 0");
        prev = t;
    }
    if (req.t1_grid.empty()) throw InvalidArgument("mc_correlation: empty time grid");
    const double t2 = req.fixed_times.empty() ? 0.0 : req.fixed_times.front();
    for (std::size_t k = 0; k < req.t1_grid.size(); ++k) {
        if (!(req.t1_grid[k] >= t2)) throw InvalidArgument("mc_correlation: t1 grid must not precede t2");
        if (k > 0 && req.t1_grid[k] < req.t1_grid[k - 1]) {
            throw InvalidArgument("mc_correlation: t1 grid must be non-decreasing");
        }
    }
}

}  // namespace

NoiseLabels sample_labels(std::mt19937_64& rng, std::size_t n_modes, int n_times, std::span<const cplx> z0) {
    NoiseLabels out;
    out.z.resize(static_cast<std::size_t>(n_times) + 1);
    out.z[0].assign(n_modes, cplx(0.0));
    for (std::size_t n = 0; n < std::min(n_modes, z0.size()); ++n) out.z[0][n] = z0[n];
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    for (int i = 1; i <= n_times; ++i) {
        auto& zi = out.z[static_cast<std::size_t>(i)];
        zi.resize(n_modes);
        for (auto& z : zi) {
            const double re = normal(rng);
            const double im = normal(rng);
            z = cplx(re, im);
        }
    }
    return out;
}

cplx noise_eval(std::span<const cplx> labels, const DiscreteBath& bath, double t) {
    if (labels.size() != bath.size()) throw InvalidArgument("noise_eval: label count does not match mode count");
    cplx sum = 0.0;
    const auto& modes = bath.modes();
    for (std::size_t n = 0; n < modes.size(); ++n) {
        sum += std::conj(modes[n].g) * labels[n] * std::exp(cplx(0.0, -modes[n].omega * t));
    }
    return cplx(0.0, 1.0) * sum;
}

std::uint64_t trajectory_seed(std::uint64_t master, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master), static_cast<std::uint32_t>(master >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    std::uint32_t out[2];
    seq.generate(out, out + 2);
    return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

StochasticModel::StochasticModel(SystemSpec sys, const DiscreteBath& bath, OStrategy strategy, std::vector<cplx> z0)
    : sys_(std::move(sys)),
      bath_(bath.scaled(sys_.coupling_scale())),
      memory_bath_(bath_),
      strategy_(strategy),
      z0_(std::move(z0)) {
    if (z0_.empty()) z0_.assign(bath_.size(), cplx(0.0));
    if (z0_.size() != bath_.size()) throw InvalidArgument("initial bath label length does not match mode count");
    if (strategy_ == OStrategy::Commuting) {
        if (commutator(sys_.h_sys(), sys_.coupling()).norm() >= 1e-12) {
            throw InvalidArgument("COMMUTING O-strategy requires [H_S, L] = 0");
        }
        components_.components.push_back({0.0, sys_.coupling()});
    } else {
        components_ = eigen_decompose(sys_, sys_.coupling());
    }
}

Matrix StochasticModel::deterministic_generator(double t_lo, double s) const {
    Matrix memory = Matrix::Zero(sys_.dim(), sys_.dim());
    for (const auto& c : components_.components) {
        memory += memory_coefficient(memory_bath_, c.frequency, t_lo, s, s) * c.op.matrix();
    }
    return -kI * sys_.h_sys().matrix() - sys_.coupling().matrix().adjoint() * memory;
}

double StochasticModel::default_dt() const {
    const double w = bath_.max_abs_frequency();
    return 1e-3 * (w > 0.0 ? std::min(1.0, 2.0 * std::numbers::pi / w) : 1.0);
}

Vector propagate_segment(const StochasticModel& model, std::span<const cplx> z_bra, std::span<const cplx> z_ket,
                         double t_lo, double t_hi, const Vector& psi_in, double dt, std::uint64_t seed) {
    if (t_hi < t_lo) throw InvalidArgument("propagate_segment: requires t_hi >= t_lo");
    if (!(dt > 0.0)) throw InvalidArgument("propagate_segment: dt must be positive");
    if (z_bra.size() != model.n_modes() || z_ket.size() != model.n_modes()) {
        throw InvalidArgument("propagate_segment: label length does not match mode count");
    }
    if (psi_in.size() != model.system().dim()) throw InvalidArgument("propagate_segment: state dimension mismatch");

    const double targets[] = {t_hi};
    const SegmentPlan plan = make_plan(model, t_lo, targets, dt);
    std::vector<cplx> ub(model.n_modes()), uk(model.n_modes());
    noise_coefficients(model.scaled_bath(), z_bra, ub.data());
    noise_coefficients(model.scaled_bath(), z_ket, uk.data());

    Vector y = std::exp(label_overlap(z_bra, z_ket)) * psi_in;
    SegmentRunner runner(model);
    if (!runner.run(plan, ub.data(), uk.data(), y.data(), [](std::size_t, const cplx*) {})) {
        throw OverflowError("propagate_segment: non-finite state (trajectory seed " + std::to_string(seed) + ")", seed);
    }
    return y;
}

MCEstimate mc_correlation(const StochasticModel& model, const MCRequest& req, const MCOptions& opt) {
    validate_request(model, req);
    if (opt.n_traj == 0) throw InvalidArgument("mc_correlation: n_traj must be positive");
    const double dt = opt.dt > 0.0 ? opt.dt : model.default_dt();
    const int dim = model.system().dim();
    const std::size_t n_obs = req.observables.size();
    const std::size_t n_grid = req.t1_grid.size();
    const std::size_t n_modes = model.n_modes();

    // times[i] = t_i for i = 1..N, times[N+1] = 0
    std::vector<double> times(n_obs + 2, 0.0);
    times[1] = req.t1_grid.front();
    for (std::size_t i = 0; i < req.fixed_times.size(); ++i) times[i + 2] = req.fixed_times[i];

    // Ket segments for i = N..2 over (t_{i+1}, t_i), then the final ket and bra plans.
    std::vector<SegmentPlan> fixed_plans(n_obs + 1);
    for (std::size_t i = n_obs; i >= 2; --i) {
        const double target[] = {times[i]};
        fixed_plans[i] = make_plan(model, times[i + 1], target, dt);
    }
    const double t2 = n_obs >= 2 ? times[2] : 0.0;
    const SegmentPlan ket_plan = make_plan(model, t2, req.t1_grid, dt);
    const SegmentPlan bra_plan = n_obs >= 2 ? make_plan(model, 0.0, req.t1_grid, dt) : SegmentPlan{};

    double z0_norm2 = 0.0;
    for (const auto& z : model.z0()) z0_norm2 += std::norm(z);
    const double weight = std::exp(-z0_norm2);

    std::vector<Matrix> obs;
    for (const auto& a : req.observables) obs.push_back(a.matrix());

    const std::size_t block = std::max<std::size_t>(1, opt.block_size);
    const std::size_t n_blocks = (opt.n_traj + block - 1) / block;
    std::vector<BlockResult> results(n_blocks);
    std::atomic<std::size_t> next_block{0};

    auto worker = [&]() {
        SegmentRunner runner(model);
        std::vector<cplx> u((n_obs + 1) * n_modes);
        std::vector<cplx> phi(static_cast<std::size_t>(dim)), chi(static_cast<std::size_t>(dim));
        std::vector<cplx> scratch(static_cast<std::size_t>(dim));
        std::vector<cplx> ket(n_grid * static_cast<std::size_t>(dim));
        std::vector<cplx> samples(n_grid);

        for (std::size_t b = next_block.fetch_add(1); b < n_blocks; b = next_block.fetch_add(1)) {
            BlockResult res;
            res.moments.resize(n_grid);
            const std::size_t begin = b * block;
            const std::size_t end = std::min(opt.n_traj, begin + block);
            for (std::size_t traj = begin; traj < end; ++traj) {
                std::mt19937_64 rng(trajectory_seed(opt.seed, traj));
                const NoiseLabels labels = sample_labels(rng, n_modes, static_cast<int>(n_obs), model.z0());
                for (std::size_t i = 0; i <= n_obs; ++i) {
                    noise_coefficients(model.scaled_bath(), labels.z[i], u.data() + i * n_modes);
                }
                auto label = [&](std::size_t i) -> std::span<const cplx> { return labels.z[i > n_obs ? 0 : i]; };
                auto coeff = [&](std::size_t i) { return u.data() + (i > n_obs ? 0 : i) * n_modes; };

                bool ok = true;
                for (int r = 0; r < dim; ++r) phi[r] = model.system().psi0()(r);
                for (std::size_t i = n_obs; i >= 2 && ok; --i) {
                    const cplx pre = std::exp(label_overlap(label(i), label(i + 1)));
                    for (auto& x : phi) x *= pre;
                    ok = runner.run(fixed_plans[i], coeff(i), coeff(i + 1), phi.data(),
                                    [](std::size_t, const cplx*) {});
                    if (ok) {
                        apply_operator(obs[i - 1], phi.data(), scratch.data(), dim);
                        std::swap(phi, scratch);
                    }
                }
                if (ok) {
                    const cplx pre = std::exp(label_overlap(label(1), label(2)));
                    for (auto& x : phi) x *= pre;
                    ok = runner.run(ket_plan, coeff(1), coeff(2), phi.data(), [&](std::size_t k, const cplx* y) {
                        cplx* out = ket.data() + k * static_cast<std::size_t>(dim);
                        apply_operator(obs[0], y, out, dim);
                        if (n_obs == 1) {
                            cplx s = 0.0;
                            for (int r = 0; r < dim; ++r) s += std::conj(y[r]) * out[r];
                            samples[k] = s * weight;
                        }
                    });
                }
                if (ok && n_obs >= 2) {
                    const cplx pre = std::exp(label_overlap(label(1), label(0)));
                    for (int r = 0; r < dim; ++r) chi[r] = pre * model.system().psi0()(r);
                    ok = runner.run(bra_plan, coeff(1), coeff(0), chi.data(), [&](std::size_t k, const cplx* y) {
                        const cplx* out = ket.data() + k * static_cast<std::size_t>(dim);
                        cplx s = 0.0;
                        for (int r = 0; r < dim; ++r) s += std::conj(y[r]) * out[r];
                        samples[k] = s * weight;
                    });
                }
                if (ok) {
                    for (const auto& s : samples) {
                        if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) ok = false;
                    }
                }
                if (!ok) {
                    ++res.n_overflow;
                    res.first_overflow = std::min(res.first_overflow, traj);
                    continue;
                }
                for (std::size_t k = 0; k < n_grid; ++k) {
                    res.moments[k].add(samples[k]);
                    res.max_abs = std::max(res.max_abs, std::abs(samples[k]));
                }
            }
            results[b] = std::move(res);
        }
    };

    const unsigned n_threads = std::max(1u, std::min<unsigned>(opt.threads, static_cast<unsigned>(n_blocks)));
    if (n_threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (unsigned w = 0; w < n_threads; ++w) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    const BlockResult total = merge_blocks(results, 0, n_blocks);
    const auto limit = static_cast<double>(opt.n_traj) * opt.max_overflow_fraction;
    if (total.n_overflow > 0 && (static_cast<double>(total.n_overflow) > limit || total.n_overflow == opt.n_traj)) {
        const std::uint64_t bad = trajectory_seed(opt.seed, total.first_overflow);
        throw OverflowError("mc_correlation: " + std::to_string(total.n_overflow) + " of " +
                                std::to_string(opt.n_traj) + " trajectories overflowed (first: index " +
                                std::to_string(total.first_overflow) + ", seed " + std::to_string(bad) + ")",
                            bad);
    }

    MCEstimate est;
    est.n_traj = opt.n_traj - total.n_overflow;
    est.n_overflow = total.n_overflow;
    est.seed = opt.seed;
    est.dt = dt;
    est.max_abs_sample = total.max_abs;
    est.points.resize(n_grid);
    for (std::size_t k = 0; k < n_grid; ++k) {
        const Moments& m = total.moments[k];
        MCPoint& p = est.points[k];
        p.mean = cplx(m.mean_re, m.mean_im);
        if (m.n > 1.0) {
            p.se_re = std::sqrt(m.m2_re / (m.n - 1.0) / m.n);
            p.se_im = std::sqrt(m.m2_im / (m.n - 1.0) / m.n);
        }
    }
    return est;
}

}  // namespace mtcf
