#include <doctest.h>

#include <limits>

#include "mtcf/operator.hpp"
#include "support.hpp"

using namespace mtcf;
using testing::kPi;

namespace {

double dist(const Operator& a, const Operator& b) { return (a - b).norm(); }

}  // namespace

TEST_CASE("operator rejects non-square and non-finite matrices") {
    CHECK_THROWS_AS(Operator(Matrix::Zero(2, 3)), InvalidArgument);
    Matrix m = Matrix::Identity(2, 2);
    m(0, 1) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(Operator{m}, InvalidArgument);
    CHECK_THROWS_AS(ops::sigma_x() + Operator::identity(3), InvalidArgument);
}

TEST_CASE("adjoint is an involution") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 10; ++i) {
        const Operator x(testing::random_matrix(rng, 3));
        CHECK(x.adjoint().adjoint() == x);
    }
}

TEST_CASE("commutator examples") {
    CHECK(commutator(ops::sigma_z(), ops::sigma_z()).norm() == 0.0);
    CHECK(dist(commutator(ops::sigma_z(), ops::sigma_x()), 2.0 * kI * ops::sigma_y()) < 1e-15);
    CHECK(dist(commutator(ops::sigma_12(), ops::sigma_12().adjoint()), -1.0 * ops::sigma_z()) < 1e-15);
}

TEST_CASE("sigma_12 lowers from the upper level") {
    // |+> is index 0 with energy +w/2.
    Vector plus(2);
    plus << 1.0, 0.0;
    const Vector out = ops::sigma_12() * plus;
    CHECK(std::abs(out(0)) == 0.0);
    CHECK(std::abs(out(1) - 1.0) == 0.0);
}

TEST_CASE("free_conjugate examples") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_z(), 1.0, testing::fig1_psi0());
    CHECK(dist(free_conjugate(sys, ops::sigma_z(), 0.83), ops::sigma_z()) < 1e-14);

    for (double s : {0.0, 0.4, -1.3, 2.7}) {
        const Operator expected = std::exp(-2.0 * kI * s) * ops::sigma_12();
        CHECK(dist(free_conjugate(sys, ops::sigma_12(), s), expected) < 1e-14);
    }
    // exp(iHs)|+><-|exp(-iHs) = e^{iws}|+><-|, so sigma_x -> cos(ws) sigma_x - sin(ws) sigma_y.
    CHECK(dist(free_conjugate(sys, ops::sigma_x(), kPi / 4), -1.0 * ops::sigma_y()) < 1e-14);
}

TEST_CASE("free_conjugate keeps Hermitian operators Hermitian") {
    std::mt19937_64 rng(5);
    const Vector psi = testing::random_state(rng, 3);
    const SystemSpec sys(Operator(testing::random_hermitian(rng, 3)), Operator(testing::random_matrix(rng, 3)), 0.5,
                         psi);
    for (int i = 0; i < 10; ++i) {
        const Operator x(testing::random_hermitian(rng, 3));
        for (double s : {0.1, 1.7, -4.2}) CHECK(free_conjugate(sys, x, s).is_hermitian(1e-12));
    }
}

TEST_CASE("system spec validation") {
    Matrix h = Matrix::Zero(2, 2);
    h(0, 1) = 1.0;
    CHECK_THROWS_AS(SystemSpec(Operator(h), ops::sigma_z(), 1.0, testing::fig1_psi0()), InvalidArgument);
    Vector bad = testing::fig1_psi0() * 1.001;
    CHECK_THROWS_AS(SystemSpec::qubit(1.0, ops::sigma_z(), 1.0, bad), InvalidArgument);
    CHECK_THROWS_AS(SystemSpec::qubit(1.0, ops::sigma_z(), -0.1, testing::fig1_psi0()), InvalidArgument);
    CHECK_NOTHROW(SystemSpec::qubit(1.0, ops::sigma_z(), 0.0, testing::fig1_psi0()));
}

TEST_CASE("eigen_decompose examples") {
    const auto sys = SystemSpec::qubit(2.0, ops::sigma_z(), 1.0, testing::fig1_psi0());

    const auto z = eigen_decompose(sys, ops::sigma_z());
    REQUIRE(z.components.size() == 1);
    CHECK(z.components[0].frequency == doctest::Approx(0.0));

    const auto l = eigen_decompose(sys, ops::sigma_12());
    REQUIRE(l.components.size() == 1);
    CHECK(l.components[0].frequency == doctest::Approx(2.0));

    const auto x = eigen_decompose(sys, ops::sigma_x());
    REQUIRE(x.components.size() == 2);
    CHECK(x.components[0].frequency == doctest::Approx(-2.0));
    CHECK(x.components[1].frequency == doctest::Approx(2.0));
    CHECK(dist(x.reconstruct(2), ops::sigma_x()) < 1e-12);
}

TEST_CASE("eigen_decompose reconstructs and satisfies the eigen relation") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> probe(-3.0, 3.0);
    for (int trial = 0; trial < 10; ++trial) {
        const int dim = 2 + trial % 3;
        const SystemSpec sys(Operator(testing::random_hermitian(rng, dim)), Operator::identity(dim), 1.0,
                             testing::random_state(rng, dim));
        const Operator x(testing::random_matrix(rng, dim));
        const auto dec = eigen_decompose(sys, x);
        CHECK(dist(dec.reconstruct(dim), x) < 1e-12);
        for (std::size_t k = 1; k < dec.components.size(); ++k) {
            CHECK(dec.components[k].frequency > dec.components[k - 1].frequency);
        }
        for (const auto& c : dec.components) {
            const Operator at37 = free_conjugate(sys, c.op, 0.37);
            CHECK(dist(at37, std::exp(-kI * c.frequency * 0.37) * c.op) < 1e-10);
            for (int p = 0; p < 5; ++p) {
                const double s = probe(rng);
                CHECK(dist(free_conjugate(sys, c.op, s), std::exp(-kI * c.frequency * s) * c.op) < 1e-10);
            }
        }
    }
}

TEST_CASE("degenerate Bohr frequencies merge into one component") {
    Matrix h = Matrix::Zero(3, 3);
    h(0, 0) = 1.0;
    h(1, 1) = 1.0 + 1e-11;
    h(2, 2) = -1.0;
    Vector psi = Vector::Zero(3);
    psi(0) = 1.0;
    const SystemSpec sys(Operator(h), Operator::identity(3), 1.0, psi);
    Matrix x = Matrix::Zero(3, 3);
    x(2, 0) = 1.0;
    x(2, 1) = 1.0;
    const auto dec = eigen_decompose(sys, Operator(x));
    CHECK(dec.components.size() == 1);
}

TEST_CASE("qubit basis expansion examples") {
    const OperatorBasis basis(2);
    REQUIRE(basis.size() == 4);
    const Vector e = basis.expand(ops::identity());
    CHECK(std::abs(e(0) - 1.0) < 1e-15);
    CHECK(e.tail(3).norm() < 1e-15);

    const ProductTable c = basis.product_table();
    CHECK(std::abs(c(1, 2, 3) - kI) < 1e-14);
    CHECK(std::abs(c(1, 2, 0)) < 1e-14);
    CHECK(std::abs(c(1, 2, 1)) < 1e-14);
    CHECK(std::abs(c(1, 2, 2)) < 1e-14);
    CHECK(std::abs(c(1, 1, 0) - 1.0) < 1e-14);
}

TEST_CASE("basis expand/reconstruct round trip and product table") {
    std::mt19937_64 rng(23);
    for (int dim : {2, 3}) {
        const OperatorBasis basis(dim);
        const ProductTable c = basis.product_table();
        const auto n = basis.size();
        for (int trial = 0; trial < 100; ++trial) {
            const Operator x(testing::random_matrix(rng, dim));
            const Operator y(testing::random_matrix(rng, dim));
            const Vector ex = basis.expand(x);
            const Vector ey = basis.expand(y);
            CHECK(dist(basis.reconstruct(ex), x) < 1e-12 * (1.0 + x.norm()));
            Vector prod = Vector::Zero(static_cast<Eigen::Index>(n));
            for (std::size_t mu = 0; mu < n; ++mu) {
                for (std::size_t nu = 0; nu < n; ++nu) {
                    for (std::size_t rho = 0; rho < n; ++rho) {
                        prod(static_cast<Eigen::Index>(rho)) +=
                            ex(static_cast<Eigen::Index>(mu)) * ey(static_cast<Eigen::Index>(nu)) * c(mu, nu, rho);
                    }
                }
            }
            CHECK(dist(basis.reconstruct(prod), x * y) < 1e-10);
        }
    }
}

TEST_CASE("singular basis is rejected") {
    std::vector<Operator> els{ops::identity(), ops::sigma_x(), ops::sigma_x(), ops::sigma_z()};
    CHECK_THROWS_AS(OperatorBasis{els}, InvalidArgument);
}
