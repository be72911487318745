#include "degflow/errors.hpp"
#include "degflow/profile.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace degflow;

namespace {

QuantileProfile random_quantiles(std::mt19937_64& rng, std::size_t n) {
    std::exponential_distribution<double> gap(1.0);
    std::normal_distribution<double> start(0.0, 2.0);
    std::vector<double> y(n);
    y[0] = start(rng);
    for (std::size_t i = 1; i < n; ++i) y[i] = y[i - 1] + 1e-3 + gap(rng) / n;
    return QuantileProfile(std::move(y));
}

}  // namespace

TEST_CASE("profile layouts and masses") {
    const auto nod = DensityProfile::nodal({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    CHECK(nod.mass() == doctest::Approx(1.0));
    CHECK(nod.first_moment() == doctest::Approx(1.0));
    CHECK(nod.value_at(0.5) == doctest::Approx(0.5));
    CHECK(nod.value_at(3.0) == 0.0);

    const auto cell = DensityProfile::cellwise({0.0, 0.5, 2.0}, {1.0, 1.0 / 3.0});
    CHECK(cell.mass() == doctest::Approx(1.0));
    CHECK(cell.sample_points()[1] == doctest::Approx(1.25));
    CHECK(cell.value_at(0.5) == doctest::Approx(1.0 / 3.0));

    CHECK_THROWS_AS(DensityProfile::nodal({0.0, 1.0}, {1.0}), ShapeError);
    CHECK_THROWS_AS(DensityProfile::cellwise({0.0, 1.0}, {1.0, 2.0}), ShapeError);
    CHECK_THROWS(DensityProfile::nodal({0.0, 0.0, 1.0}, {1.0, 1.0, 1.0}));
    CHECK_THROWS(DensityProfile::nodal({0.0, 1.0}, {-1.0, 1.0}));
}

TEST_CASE("quantiles of a uniform density") {
    const auto rho = DensityProfile::cellwise({0.0, 2.0}, {0.5});
    const auto Y = density_to_quantiles(rho, 8);
    for (std::size_t i = 0; i < Y.n(); ++i) CHECK(Y[i] == doctest::Approx(2.0 * Y.omega(i)));
    CHECK_THROWS_AS(density_to_quantiles(DensityProfile::cellwise({0.0, 1.0}, {0.5}), 8), MassError);
}

TEST_CASE("Gaussian quantiles match the inverse error function") {
    const auto rho = testutil::gaussian(0.3, 0.7, 20001);
    const auto Y = density_to_quantiles(rho, 200);
    const auto q = testutil::gaussian_quantiles(0.3, 0.7, 200);
    for (std::size_t i = 0; i < 200; ++i) CHECK(Y[i] == doctest::Approx(q[i]).epsilon(1e-5));
}

TEST_CASE("quantiles to density round trip") {
    std::mt19937_64 rng(3);
    const auto Y = random_quantiles(rng, 64);
    const auto rho = quantiles_to_density(Y, EndCells::Mirrored);
    CHECK(rho.mass() == doctest::Approx(1.0).epsilon(1e-13));
    const auto dropped = quantiles_to_density(Y, EndCells::Dropped);
    CHECK(dropped.mass() == doctest::Approx(1.0 - 1.0 / 64).epsilon(1e-13));
    const auto Y2 = density_to_quantiles(rho, 64);
    for (std::size_t i = 0; i < 64; ++i) CHECK(Y2[i] == doctest::Approx(Y[i]).epsilon(1e-12));
}

TEST_CASE("quantile profile validation") {
    CHECK_THROWS_AS(QuantileProfile({0.0, 0.0, 1.0}), MonotonicityError);
    CHECK_THROWS_AS(QuantileProfile({0.0, NAN}), MonotonicityError);
}

TEST_CASE("wasserstein2 metric axioms on random triples") {
    std::mt19937_64 rng(99);
    for (int t = 0; t < 100; ++t) {
        const auto A = random_quantiles(rng, 50), B = random_quantiles(rng, 50), C = random_quantiles(rng, 50);
        const double ab = wasserstein2(A, B), bc = wasserstein2(B, C), ac = wasserstein2(A, C);
        CHECK(wasserstein2(A, A) == 0.0);
        CHECK(ab > 0.0);
        CHECK(ab == doctest::Approx(wasserstein2(B, A)));
        CHECK(ac <= ab + bc + 1e-12);
    }
    CHECK_THROWS_AS(wasserstein2(QuantileProfile({0.0, 1.0}), QuantileProfile({0.0, 1.0, 2.0})), ShapeError);
}

TEST_CASE("wasserstein2 translation equivariance and uniform oracle") {
    std::mt19937_64 rng(5);
    const auto A = random_quantiles(rng, 40);
    CHECK(wasserstein2(A, A.shifted(0.75)) == doctest::Approx(0.75).epsilon(1e-12));

    const std::size_t n = 10000;
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (i + 0.5) / n;
        a[i] = w;
        b[i] = 2 * w;
    }
    const double w2 = wasserstein2(QuantileProfile(a), QuantileProfile(b));
    CHECK(std::abs(w2 * w2 - 1.0 / 3.0) <= 1e-6);
}

TEST_CASE("Gaussian W2 closed form") {
    // W2^2(N(m1,s1^2), N(m2,s2^2)) = (m1-m2)^2 + (s1-s2)^2
    const auto A = QuantileProfile(testutil::gaussian_quantiles(0.0, 1.0, 4000));
    const auto B = QuantileProfile(testutil::gaussian_quantiles(0.5, 1.5, 4000));
    CHECK(wasserstein2(A, B) == doctest::Approx(std::sqrt(0.25 + 0.25)).epsilon(2e-3));
}

TEST_CASE("second moment and L1 distance") {
    const auto rho = testutil::gaussian(0.0, 0.5, 8001);
    CHECK(second_moment(rho) == doctest::Approx(0.25).epsilon(1e-6));
    const auto shifted = testutil::gaussian(0.1, 0.5, 8001);
    // ||N(0,s) - N(d,s)||_1 = 2 erf(d / (2 sqrt(2) s))
    CHECK(l1_distance(rho, shifted) == doctest::Approx(2.0 * std::erf(0.1 / (2 * std::sqrt(2.0) * 0.5))).epsilon(1e-4));
    CHECK(l1_distance(rho, rho) == 0.0);
}
