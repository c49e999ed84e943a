#include <doctest.h>

#include <cmath>

#include "mtcf/oracle.hpp"
#include "mtcf/stochastic.hpp"
#include "support.hpp"

using namespace mtcf;

namespace {

struct Stat {
    std::size_t n = 0;
    cplx sum = 0.0;
    double sum_re2 = 0.0, sum_im2 = 0.0;

    void add(cplx x) {
        ++n;
        sum += x;
        sum_re2 += x.real() * x.real();
        sum_im2 += x.imag() * x.imag();
    }
    cplx mean() const { return sum / static_cast<double>(n); }
    double se_re() const {
        const double m = mean().real();
        return std::sqrt((sum_re2 / n - m * m) / (n - 1.0));
    }
    double se_im() const {
        const double m = mean().imag();
        return std::sqrt((sum_im2 / n - m * m) / (n - 1.0));
    }
};

bool within(const MCPoint& p, cplx expected, double k) {
    return std::abs(p.mean.real() - expected.real()) <= k * p.se_re + 1e-12 &&
           std::abs(p.mean.imag() - expected.imag()) <= k * p.se_im + 1e-12;
}

// <psi|e^{iHt'} A e^{-iH(t'-t)} B e^{-iHt}|psi> for the bare system.
cplx free_correlation(const SystemSpec& sys, const Operator& a, const Operator& b, double tp, double t) {
    const Vector ket = free_evolve(sys, b * free_evolve(sys, sys.psi0(), t), tp - t);
    const Vector bra = free_evolve(sys, sys.psi0(), tp);
    return bra.dot(a * ket);
}

}  // namespace

TEST_CASE("label statistics") {
    std::mt19937_64 rng(2024);
    Stat abs2, sq;
    for (int i = 0; i < 100000; ++i) {
        const auto labels = sample_labels(rng, 1, 1, {});
        REQUIRE(labels.z.size() == 2);
        CHECK(labels.z[0][0] == cplx(0.0));
        const cplx z = labels.z[1][0];
        abs2.add(std::norm(z));
        sq.add(z * z);
    }
    CHECK(std::abs(abs2.mean().real() - 1.0) < 4.0 * abs2.se_re());
    CHECK(std::abs(sq.mean().real()) < 4.0 * sq.se_re());
    CHECK(std::abs(sq.mean().imag()) < 4.0 * sq.se_im());
}

TEST_CASE("initial labels are copied") {
    std::mt19937_64 rng(1);
    const std::vector<cplx> z0{cplx(0.3, 0.1), cplx(-0.2, 0.0)};
    const auto labels = sample_labels(rng, 2, 3, z0);
    REQUIRE(labels.z.size() == 4);
    CHECK(labels.z[0] == z0);
}

TEST_CASE("noise_eval examples") {
    const DiscreteBath one({{1.0, 2.0}});
    const std::vector<cplx> zero{0.0};
    const std::vector<cplx> unit{1.0};
    CHECK(noise_eval(zero, one, 0.7) == cplx(0.0));
    CHECK(std::abs(noise_eval(unit, one, 0.0) - cplx(0.0, 1.0)) < 1e-15);
    CHECK_THROWS_AS(noise_eval(std::vector<cplx>{1.0, 2.0}, one, 0.0), InvalidArgument);
}

TEST_CASE("noise autocorrelation reproduces alpha") {
    const DiscreteBath bath = testing::fig1_bath();
    std::mt19937_64 rng(99);
    Stat s;
    const double t = 1.1, u = 0.8;
    for (int i = 0; i < 100000; ++i) {
        const auto labels = sample_labels(rng, bath.size(), 1, {});
        s.add(noise_eval(labels.z[1], bath, t) * std::conj(noise_eval(labels.z[1], bath, u)));
    }
    const cplx expected = alpha_eval(bath, t - u);
    CHECK(std::abs(s.mean().real() - expected.real()) < 4.0 * s.se_re());
    CHECK(std::abs(s.mean().imag() - expected.imag()) < 4.0 * s.se_im());
}

TEST_CASE("trajectory seeds are distinct and reproducible") {
    CHECK(trajectory_seed(1, 0) == trajectory_seed(1, 0));
    CHECK(trajectory_seed(1, 0) != trajectory_seed(1, 1));
    CHECK(trajectory_seed(1, 5) != trajectory_seed(2, 5));
}

TEST_CASE("model construction") {
    const auto sx = SystemSpec::qubit(2.0, ops::sigma_x(), 1.0, testing::fig1_psi0());
    CHECK_THROWS_AS(StochasticModel(sx, testing::fig1_bath(), OStrategy::Commuting), InvalidArgument);
    CHECK_NOTHROW(StochasticModel(sx, testing::fig1_bath(), OStrategy::ZerothOrder));
    CHECK_THROWS_AS(StochasticModel(testing::dephasing_system(1.0), testing::fig1_bath(), OStrategy::Commuting, {1.0}),
                    InvalidArgument);
    const StochasticModel m(testing::dephasing_system(0.5), testing::fig1_bath(), OStrategy::Commuting);
    CHECK(std::abs(m.scaled_bath().modes()[0].g - 0.5) < 1e-15);
    CHECK(m.default_dt() == doctest::Approx(1e-3));
    const StochasticModel fast(testing::dephasing_system(0.5), DiscreteBath({{1.0, 20.0}}), OStrategy::Commuting);
    CHECK(fast.default_dt() == doctest::Approx(1e-3 * 2.0 * testing::kPi / 20.0));
}

TEST_CASE("propagate_segment with zero couplings is free evolution") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_x(), 0.0, testing::fig1_psi0());
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::ZerothOrder);
    const std::vector<cplx> zb{cplx(0.4, -0.3), cplx(1.2, 0.5)};
    const std::vector<cplx> zk{cplx(-0.7, 0.2), cplx(0.1, 0.9)};
    const cplx pre = std::exp(std::conj(zb[0]) * zk[0] + std::conj(zb[1]) * zk[1]);
    const Vector out = propagate_segment(model, zb, zk, 0.3, 1.8, sys.psi0(), 1e-3);
    const Vector expected = pre * free_evolve(sys, sys.psi0(), 1.5);
    CHECK((out - expected).norm() < 1e-8);
}

TEST_CASE("propagate_segment over an empty interval is the label prefactor") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_x(), 1.0, testing::fig1_psi0());
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::ZerothOrder);
    const std::vector<cplx> zb{cplx(0.4, -0.3), cplx(1.2, 0.5)};
    const std::vector<cplx> zk{cplx(-0.7, 0.2), cplx(0.1, 0.9)};
    const cplx pre = std::exp(std::conj(zb[0]) * zk[0] + std::conj(zb[1]) * zk[1]);
    const Vector out = propagate_segment(model, zb, zk, 0.9, 0.9, sys.psi0(), 1e-3);
    CHECK(out == Vector(pre * sys.psi0()));
    CHECK_THROWS_AS(propagate_segment(model, zb, zk, 1.0, 0.9, sys.psi0(), 1e-3), InvalidArgument);
    CHECK_THROWS_AS(propagate_segment(model, zb, zk, 0.0, 0.9, sys.psi0(), 0.0), InvalidArgument);
}

TEST_CASE("propagate_segment matches the vacuum element of the exact propagator") {
    const auto sys = testing::dephasing_system(1.0);
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::Commuting);
    const std::vector<cplx> vac{0.0, 0.0};
    const Vector out = propagate_segment(model, vac, vac, 0.0, 1.0, sys.psi0(), 1e-4);

    const Oracle oracle(sys, testing::fig1_bath(), FockTruncation{});
    const Vector full = oracle.propagate(oracle.initial_state({}), 1.0);
    Vector expected(2);
    for (int s = 0; s < 2; ++s) expected(s) = full(static_cast<Eigen::Index>(s * oracle.bath_dim()));
    CHECK((out - expected).norm() < 1e-6);
}

TEST_CASE("RK4 convergence order") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_x(), 0.7, testing::fig1_psi0());
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::ZerothOrder);
    const std::vector<cplx> zb{cplx(0.4, -0.3), cplx(0.2, 0.5)};
    const std::vector<cplx> zk{cplx(-0.7, 0.2), cplx(0.1, 0.3)};
    const Vector ref = propagate_segment(model, zb, zk, 0.0, 1.0, sys.psi0(), 0.02 / 16);
    const double e1 = (propagate_segment(model, zb, zk, 0.0, 1.0, sys.psi0(), 0.02) - ref).norm();
    const double e2 = (propagate_segment(model, zb, zk, 0.0, 1.0, sys.psi0(), 0.01) - ref).norm();
    MESSAGE("RK4 errors " << e1 << " " << e2 << " order " << std::log2(e1 / e2));
    CHECK(std::log2(e1 / e2) >= 3.5);
}

TEST_CASE("overflow carries the seed") {
    const auto sys = testing::dephasing_system(1.0);
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::Commuting);
    const std::vector<cplx> big{cplx(1e200, 0.0), 0.0};
    try {
        (void)propagate_segment(model, big, big, 0.0, 0.1, sys.psi0(), 1e-3, 42);
        FAIL("expected overflow");
    } catch (const OverflowError& e) {
        CHECK(e.seed() == 42);
    }
}

TEST_CASE("MC at zero coupling gives the free correlation") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_x(), 0.0, testing::fig1_psi0());
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::ZerothOrder);
    const MCRequest req{{ops::sigma_x(), ops::sigma_y()}, {0.4}, {0.4, 1.0, 1.9}};
    MCOptions opt;
    opt.n_traj = 2000;
    opt.dt = 1e-3;
    const auto est = mc_correlation(model, req, opt);
    REQUIRE(est.points.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) {
        const cplx expected = free_correlation(sys, ops::sigma_x(), ops::sigma_y(), req.t1_grid[k], 0.4);
        CHECK(within(est.points[k], expected, 4.0));
    }
}

TEST_CASE("MC one-time sigma_z is conserved under dephasing") {
    const StochasticModel model(testing::dephasing_system(1.0), testing::fig1_bath(), OStrategy::Commuting);
    const MCRequest req{{ops::sigma_z()}, {}, {0.0, 0.5, 1.5}};
    MCOptions opt;
    opt.n_traj = 4000;
    opt.dt = 1e-3;
    const auto est = mc_correlation(model, req, opt);
    CHECK(est.n_overflow == 0);
    for (const auto& p : est.points) CHECK(within(p, 3.0 / 7.0, 4.0));
}

TEST_CASE("MC is bit-identical across worker counts") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_12(), 0.3, testing::fig1_psi0());
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::ZerothOrder);
    const MCRequest req{{ops::sigma_x(), ops::sigma_x()}, {0.2}, {0.2, 0.6}};
    MCOptions opt;
    opt.n_traj = 700;
    opt.seed = 77;
    opt.dt = 2e-3;
    const auto one = mc_correlation(model, req, opt);
    opt.threads = 4;
    const auto four = mc_correlation(model, req, opt);
    REQUIRE(one.points.size() == four.points.size());
    for (std::size_t k = 0; k < one.points.size(); ++k) {
        CHECK(one.points[k].mean == four.points[k].mean);
        CHECK(one.points[k].se_re == four.points[k].se_re);
        CHECK(one.points[k].se_im == four.points[k].se_im);
    }
    opt.seed = 78;
    const auto other = mc_correlation(model, req, opt);
    CHECK(other.points[1].mean != one.points[1].mean);
}

TEST_CASE("segment chaining agrees with the estimator") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_x(), 0.5, testing::fig1_psi0());
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::ZerothOrder);
    const double t2 = 0.7, t1 = 1.2, dt = 1e-3;
    MCOptions opt;
    opt.n_traj = 3000;
    opt.seed = 5;
    opt.dt = dt;

    Stat manual;
    for (std::size_t traj = 0; traj < opt.n_traj; ++traj) {
        std::mt19937_64 rng(trajectory_seed(opt.seed, traj));
        const auto z = sample_labels(rng, model.n_modes(), 2, model.z0()).z;
        Vector phi = propagate_segment(model, z[2], z[0], 0.0, t2, sys.psi0(), dt);
        phi = propagate_segment(model, z[1], z[2], t2, t1, phi, dt);
        const Vector chi = propagate_segment(model, z[1], z[0], 0.0, t1, sys.psi0(), dt);
        manual.add(chi.dot(phi));
    }
    const auto two = mc_correlation(model, {{ops::identity(), ops::identity()}, {t2}, {t1}}, opt);
    const auto one = mc_correlation(model, {{ops::identity()}, {}, {t1}}, opt);

    CHECK(std::abs(manual.mean() - two.points[0].mean) < 1e-8 * (1.0 + std::abs(manual.mean())));
    const double se_re = std::hypot(two.points[0].se_re, one.points[0].se_re);
    const double se_im = std::hypot(two.points[0].se_im, one.points[0].se_im);
    CHECK(std::abs(two.points[0].mean.real() - one.points[0].mean.real()) < 4.0 * se_re);
    CHECK(std::abs(two.points[0].mean.imag() - one.points[0].mean.imag()) < 4.0 * se_im);
    CHECK(within(one.points[0], 1.0, 4.0));
    CHECK(within(two.points[0], 1.0, 4.0));
}

TEST_CASE("MC with an initial coherent bath state matches the oracle") {
    const auto sys = testing::dephasing_system(1.0);
    const std::vector<cplx> z0{cplx(0.3, 0.0), cplx(0.0, -0.2)};
    const StochasticModel model(sys, testing::fig1_bath(), OStrategy::Commuting, z0);
    const MCRequest req{{ops::sigma_x(), ops::sigma_z()}, {0.3}, {0.5, 1.0}};
    MCOptions opt;
    opt.n_traj = 4000;
    opt.dt = 1e-3;
    const auto est = mc_correlation(model, req, opt);

    FockTruncation trunc;
    trunc.n_max = 14;
    const Oracle oracle(sys, testing::fig1_bath(), trunc);
    const auto ref = oracle_correlation(oracle, {req.observables, req.fixed_times, req.t1_grid, z0});
    for (std::size_t k = 0; k < 2; ++k) CHECK(within(est.points[k], ref.values[k], 4.0));
}

TEST_CASE("MC request validation") {
    const StochasticModel model(testing::dephasing_system(1.0), testing::fig1_bath(), OStrategy::Commuting);
    MCOptions opt;
    opt.n_traj = 10;
    CHECK_THROWS_AS(mc_correlation(model, {{}, {}, {1.0}}, opt), InvalidArgument);
    CHECK_THROWS_AS(mc_correlation(model, {{ops::sigma_x(), ops::sigma_z()}, {}, {1.0}}, opt), InvalidArgument);
    CHECK_THROWS_AS(mc_correlation(model, {{ops::sigma_x(), ops::sigma_z()}, {0.5}, {0.4}}, opt), InvalidArgument);
    CHECK_THROWS_AS(mc_correlation(model, {{ops::sigma_x()}, {}, {1.0, 0.5}}, opt), InvalidArgument);
    opt.n_traj = 0;
    CHECK_THROWS_AS(mc_correlation(model, {{ops::sigma_x()}, {}, {1.0}}, opt), InvalidArgument);
}
