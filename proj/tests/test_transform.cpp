#include "degflow/errors.hpp"
#include "degflow/transform.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace degflow;

TEST_CASE("p = 2 map is atanh") {
    const auto map = CoordinateMap::build(MobilityFunction::power(2.0));
    for (double x : {-0.99, -0.5, 0.0, 0.3, 0.999999}) {
        CHECK(map.alpha(x) == doctest::Approx(std::atanh(x)).epsilon(1e-14));
        CHECK(map.alpha_inv(std::atanh(x)) == doctest::Approx(x).epsilon(1e-14));
    }
}

TEST_CASE("p = 4 map has a closed form") {
    // \int_0^x dz/(1-z^2)^2 = x/(2(1-x^2)) + atanh(x)/2
    const auto map = CoordinateMap::build(MobilityFunction::power(4.0));
    for (double x : {-0.999, -0.7, -0.1, 0.0, 0.2, 0.8, 0.9999}) {
        const double exact = x / (2.0 * (1.0 - x * x)) + 0.5 * std::atanh(x);
        CHECK(map.alpha(x) == doctest::Approx(exact).epsilon(1e-11));
    }
}

TEST_CASE("p = 3 map has a closed form") {
    // \int_0^x dz/(1-z^2)^{3/2} = x / sqrt(1 - x^2)
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    for (double x : {-0.9999, -0.5, 0.25, 0.99}) {
        CHECK(map.alpha(x) == doctest::Approx(x / std::sqrt(1.0 - x * x)).epsilon(1e-11));
    }
}

TEST_CASE("alpha is odd and increasing, alpha_inv inverts it") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(-0.9999, 0.9999);
    for (double p : {2.5, 3.0, 4.0}) {
        const auto map = CoordinateMap::build(MobilityFunction::power(p));
        double prev = -INFINITY;
        for (double x : interior_grid(301)) {
            const double y = map.alpha(x);
            CHECK(y > prev);
            prev = y;
            CHECK(map.alpha(-x) == doctest::Approx(-y).epsilon(1e-12));
        }
        for (int i = 0; i < 200; ++i) {
            const double x = ux(rng);
            CHECK(std::abs(map.alpha_inv(map.alpha(x)) - x) <= 1e-10);
        }
        // far tails: x sits within a few ulps of +-1, so allow alpha'(x) times an ulp
        const auto g = MobilityFunction::power(p);
        for (double y : {-500.0, -50.0, 50.0, 500.0}) {
            const double x = map.alpha_inv(y);
            const double ulp_slack = 4.0 * std::numeric_limits<double>::epsilon() / g.eval(x);
            CHECK(std::abs(map.alpha(x) - y) <= 1e-8 * std::abs(y) + ulp_slack);
        }
    }
}

TEST_CASE("map construction and domain errors") {
    CHECK_THROWS_AS(CoordinateMap::build(MobilityFunction::power(1.0)), SlowDecayError);
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    CHECK_THROWS_AS(map.alpha(1.0), DomainError);
    CHECK_THROWS_AS(map.alpha(-1.5), DomainError);
    CHECK_THROWS_AS(map.alpha_inv(NAN), DomainError);
}

TEST_CASE("coefficient field identities") {
    for (double p : {2.0, 3.0, 4.0}) {
        const auto g = MobilityFunction::power(p);
        const auto map = CoordinateMap::build(g);
        const auto c = CoefficientField::from_map(map, PotentialSpec::zero());
        auto a = [&](double y) { return c.a(y); };
        for (double y : {-3.0, -1.0, -0.2, 0.0, 0.5, 2.0}) {
            const auto s = c.sample(y);
            CHECK(s.a * g.eval(s.x) == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(s.a >= 1.0);
            CHECK(testutil::rel_err(s.ratio1, testutil::d1(a, y) / s.a) < 1e-6);
            CHECK(testutil::rel_err(s.ratio2, testutil::d2(a, y) / s.a) < 1e-5);
            CHECK(std::abs(s.ratio1) <= p + 1e-12);
            CHECK(y * s.ratio1 >= 0.0);
        }
    }
}

TEST_CASE("transformed potential derivatives") {
    const auto g = MobilityFunction::power(3.0);
    const auto map = CoordinateMap::build(g);
    const auto c = CoefficientField::from_map(map, PotentialSpec::quadratic(0.7));
    auto V = [&](double y) { return c.V(y); };
    for (double y : {-2.0, -0.3, 0.6, 1.5}) {
        const auto s = c.sample(y);
        CHECK(s.V == doctest::Approx(0.7 * s.x * s.x));
        CHECK(testutil::rel_err(s.V_d1, testutil::d1(V, y)) < 1e-7);
        CHECK(testutil::rel_err(s.V_d2, testutil::d2(V, y)) < 1e-5);
    }
    CHECK(c.L_bound() > 0.0);
    CHECK(std::isfinite(c.lambda_gW1()));
}

TEST_CASE("unit test coefficient") {
    const auto c = CoefficientField::unit_test_coefficient(PotentialSpec::quadratic(0.5));
    CHECK(c.is_unit());
    CHECK_FALSE(c.has_map());
    CHECK_THROWS_AS(c.map(), DomainError);
    const auto s = c.sample(1.3);
    CHECK(s.a == 1.0);
    CHECK(s.ratio1 == 0.0);
    CHECK(s.V == doctest::Approx(0.5 * 1.69));
    CHECK(s.V_d2 == doctest::Approx(1.0));
    CHECK(c.lambda_gW1() == doctest::Approx(1.0));
}

TEST_CASE("rescaling preserves mass exactly for cellwise profiles") {
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    const auto u = DensityProfileX::cellwise({-0.5, -0.1, 0.2, 0.6}, {0.5, 1.2, 1.0});
    const auto r = rescale_u_to_rho(u, map);
    CHECK(r.source_mass == doctest::Approx(u.mass()));
    CHECK(std::abs(r.relative_deviation()) < 1e-13);
    const auto back = rescale_rho_to_u(r.profile, map);
    CHECK(std::abs(back.relative_deviation()) < 1e-13);
    for (std::size_t i = 0; i < u.size(); ++i) {
        CHECK(back.profile.values()[i] == doctest::Approx(u.values()[i]).epsilon(1e-10));
        CHECK(back.profile.grid()[i] == doctest::Approx(u.grid()[i]).epsilon(1e-10));
    }
}

TEST_CASE("nodal rescaling is pointwise rho = g u") {
    const auto g = MobilityFunction::power(2.0);
    const auto map = CoordinateMap::build(g);
    std::vector<double> xs, us;
    for (int i = 0; i <= 400; ++i) {
        const double x = -0.9 + 1.8 * i / 400.0;
        xs.push_back(x);
        us.push_back(0.75 * (1.0 - x * x / 0.81) / 0.9);
    }
    const auto u = DensityProfileX::nodal(xs, us);
    const auto r = rescale_u_to_rho(u, map);
    for (std::size_t i = 0; i < xs.size(); ++i) {
        CHECK(r.profile.grid()[i] == doctest::Approx(std::atanh(xs[i])));
        CHECK(r.profile.values()[i] == doctest::Approx(g.eval(xs[i]) * us[i]));
    }
    CHECK(std::abs(r.relative_deviation()) < 1e-3);
}
