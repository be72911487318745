#include "degflow/energy.hpp"
#include "degflow/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>

using namespace degflow;

namespace {

const auto kEntropy = InternalEnergy::entropy(InternalEnergy::LinearCase{});

std::vector<double> uniform_quantiles(std::size_t n, double lo, double hi) {
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) y[i] = lo + (hi - lo) * (i + 0.5) / n;
    return y;
}

}  // namespace

TEST_CASE("energy densities and their derivatives") {
    for (const auto& en : {kEntropy, InternalEnergy::power(2.0), InternalEnergy::power(3.5)}) {
        CHECK(en.phi(0.0) == 0.0);
        auto phi = [&](double s) { return en.phi(s); };
        auto phi1 = [&](double s) { return en.phi_d1(s); };
        auto psi = [&](double z) { return en.psi(z); };
        auto psi1 = [&](double z) { return en.psi_d1(z); };
        for (double s : {0.2, 1.0, 3.7}) {
            CHECK(testutil::rel_err(en.phi_d1(s), testutil::d1(phi, s)) < 1e-7);
            CHECK(testutil::rel_err(en.phi_d2(s), testutil::d1(phi1, s)) < 1e-7);
            CHECK(en.psi(s) == doctest::Approx(en.phi(s) / s));
            CHECK(testutil::rel_err(en.psi_d1(s), testutil::d1(psi, s)) < 1e-7);
            CHECK(testutil::rel_err(en.psi_d2(s), testutil::d1(psi1, s)) < 1e-7);
            CHECK(en.density_integrand(1.7, s) == doctest::Approx(en.phi(1.7 * s) / 1.7));
        }
    }
}

TEST_CASE("energy kinds") {
    CHECK(kEntropy.is_entropy());
    CHECK(kEntropy.m() == 1.0);
    const auto pm = InternalEnergy::power(3.0);
    CHECK(pm.m() == 3.0);
    CHECK(pm.growth().m == 3.0);
    CHECK(pm.phi(2.0) == doctest::Approx(4.0));
    CHECK_THROWS_AS(InternalEnergy::power(1.0), DomainError);
    CHECK_THROWS_AS(InternalEnergy::power(0.5), DomainError);
}

TEST_CASE("quantile energy of a uniform density under the power energy") {
    const auto unit = CoefficientField::unit_test_coefficient();
    const auto en = InternalEnergy::power(2.0);
    for (std::size_t n : {16u, 256u}) {
        const auto Y = QuantileProfile(uniform_quantiles(n, 0.0, 1.0));
        CHECK(energy_quantile_form(Y, unit, en) == doctest::Approx(1.0 - 1.0 / n).epsilon(1e-12));
        CHECK(energy_quantile_form(Y, unit, en, EndCells::Mirrored) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("Gaussian entropy agrees between the two forms") {
    // \int rho log rho = -1/2 log(2 pi e sigma^2)
    const double sigma = 0.8;
    const double exact = -0.5 * std::log(2.0 * M_PI * M_E * sigma * sigma);
    const auto unit = CoefficientField::unit_test_coefficient();
    const auto rho = testutil::gaussian(0.0, sigma, 8001);
    CHECK(energy_density_form(rho, unit, kEntropy) == doctest::Approx(exact).epsilon(1e-6));
    CHECK(entropy(rho) == doctest::Approx(exact).epsilon(1e-6));
    const auto Y = density_to_quantiles(rho, 2000);
    CHECK(energy_quantile_form(Y, unit, kEntropy, EndCells::Mirrored) == doctest::Approx(exact).epsilon(5e-3));
}

TEST_CASE("potential energy term") {
    const auto c = CoefficientField::unit_test_coefficient(PotentialSpec::quadratic(0.5));
    const auto Y = QuantileProfile(testutil::gaussian_quantiles(0.0, 1.0, 4000));
    const auto zero = CoefficientField::unit_test_coefficient();
    const double internal = energy_quantile_form(Y, zero, kEntropy);
    CHECK(energy_quantile_form(Y, c, kEntropy) - internal == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("weighted L^m norm") {
    const auto unit = CoefficientField::unit_test_coefficient();
    const auto rho = DensityProfile::cellwise({0.0, 0.5, 1.5}, {1.0, 0.5});
    CHECK(weighted_lm_norm(rho, unit, 2.0) == doctest::Approx(0.5 + 0.25));
    const auto map = CoordinateMap::build(MobilityFunction::power(2.0));
    const auto c = CoefficientField::from_map(map, PotentialSpec::zero());
    // a = cosh^2 y, so the weight a^{m-1} exceeds one away from 0
    CHECK(weighted_lm_norm(rho, c, 2.0) > 0.75);
}

TEST_CASE("energy input validation") {
    const auto unit = CoefficientField::unit_test_coefficient();
    CHECK_THROWS_AS(energy_quantile_form(std::vector<double>{0.0, 1.0, 1.0}, unit, kEntropy), MonotonicityError);
    CHECK_THROWS_AS(energy_quantile_form(std::vector<double>{0.0}, unit, kEntropy), ShapeError);
}

TEST_CASE("energy is translation invariant without potential") {
    const auto unit = CoefficientField::unit_test_coefficient();
    const auto Y = QuantileProfile(testutil::gaussian_quantiles(0.0, 0.6, 300));
    const auto en = InternalEnergy::power(2.5);
    CHECK(energy_quantile_form(Y.shifted(3.0), unit, en) == doctest::Approx(energy_quantile_form(Y, unit, en)));
}
