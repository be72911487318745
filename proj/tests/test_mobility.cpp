#include "degflow/errors.hpp"
#include "degflow/mobility.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace degflow;

namespace {

// \int_0^1 (1 - z^2)^{-p/2} dz = sqrt(pi) Gamma(1 - p/2) / (2 Gamma((3 - p)/2)) for p < 2.
double power_osgood(double p) {
    return std::sqrt(M_PI) * std::tgamma(1.0 - p / 2.0) / (2.0 * std::tgamma((3.0 - p) / 2.0));
}

}  // namespace

TEST_CASE("power mobility values and symmetry") {
    for (double p : {0.5, 1.0, 2.0, 3.0, 4.0}) {
        const auto g = MobilityFunction::power(p);
        CHECK(g.eval(0.0) == doctest::Approx(1.0));
        CHECK(g.eval(1.0) == 0.0);
        CHECK(g.eval(-1.0) == 0.0);
        for (double x : {0.1, 0.5, 0.9, 0.999}) {
            CHECK(g.eval(x) == doctest::Approx(g.eval(-x)).epsilon(1e-15));
            CHECK(g.eval(x) == doctest::Approx(std::pow(1.0 - x * x, p / 2.0)).epsilon(1e-12));
        }
    }
}

TEST_CASE("power mobility derivatives agree with finite differences") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(-0.95, 0.95);
    for (double p : {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0}) {
        const auto g = MobilityFunction::power(p);
        auto f = [&](double x) { return g.eval(x); };
        auto f1 = [&](double x) { return g.eval_d1(x); };
        for (int i = 0; i < 20; ++i) {
            const double x = ux(rng);
            CHECK(testutil::rel_err(g.eval_d1(x), testutil::d1(f, x)) < 1e-7);
            CHECK(testutil::rel_err(g.eval_d2(x), testutil::d1(f1, x)) < 1e-7);
            const auto j = g.jet(x);
            CHECK(j.g == doctest::Approx(g.eval(x)).epsilon(1e-14));
            CHECK(j.d1 == doctest::Approx(g.eval_d1(x)).epsilon(1e-14));
            CHECK(j.d2 == doctest::Approx(g.eval_d2(x)).epsilon(1e-14));
            CHECK(g.g3_quantity(x) == doctest::Approx(j.d1 * j.d1 - j.g * j.d2).epsilon(1e-10));
        }
    }
}

TEST_CASE("g3 quantity of the p = 2 family is 2(1 + x^2)") {
    const auto g = MobilityFunction::power(2.0);
    for (double x : {-0.9, -0.3, 0.0, 0.4, 0.99}) CHECK(g.g3_quantity(x) == doctest::Approx(2.0 * (1.0 + x * x)));
}

TEST_CASE("power family decay classification") {
    for (double p : {0.5, 1.0, 1.5}) {
        const auto d = classify_decay(MobilityFunction::power(p));
        CHECK(d.kind == DecayClass::Kind::Slow);
        CHECK(d.l == doctest::Approx(power_osgood(p)).epsilon(1e-9));
    }
    CHECK(std::abs(classify_decay(MobilityFunction::power(1.0)).l - M_PI / 2) <= 1e-8);
    for (double p : {2.0, 2.5, 3.0, 4.0}) CHECK(classify_decay(MobilityFunction::power(p)).is_fast());
    CHECK(MobilityFunction::power(3.0).decay_class().is_fast());
}

TEST_CASE("custom mobilities start unknown and are classified by the heuristic") {
    auto quad = MobilityFunction::custom([](double x) { return (1 - x) * (1 + x); }, [](double x) { return -2 * x; },
                                         [](double) { return -2.0; }, "1-x^2");
    CHECK(quad.decay_class().kind == DecayClass::Kind::Unknown);
    CHECK(classify_decay(quad).is_fast());

    auto root = MobilityFunction::custom([](double x) { return std::sqrt((1 - x) * (1 + x)); },
                                         [](double x) { return -x / std::sqrt((1 - x) * (1 + x)); },
                                         [](double x) { return -1.0 / std::pow((1 - x) * (1 + x), 1.5); });
    const auto d = classify_decay(root);
    CHECK(d.kind == DecayClass::Kind::Slow);
    CHECK(d.l == doctest::Approx(M_PI / 2).epsilon(1e-3));
}

TEST_CASE("assumption report") {
    const auto r2 = check_assumptions(MobilityFunction::power(2.0), 1001);
    CHECK(r2.g1);
    CHECK(r2.g3);
    CHECK(r2.C_g == doctest::Approx(4.0).epsilon(1e-2));
    CHECK(r2.g3_min == doctest::Approx(2.0));
    CHECK(r2.endpoint_gap == doctest::Approx(1.0 / 1002.0));

    const auto r1 = check_assumptions(MobilityFunction::power(1.0), 1001);
    CHECK(r1.g1);
    CHECK(r1.C_g > 100.0);  // (1 + x^2)/(1 - x^2) grows without bound

    auto bad = MobilityFunction::custom([](double x) { return 1.0 - x; }, [](double) { return -1.0; },
                                        [](double) { return 0.0; });
    CHECK_FALSE(check_assumptions(bad, 101).g1);
    CHECK_THROWS_AS(check_assumptions(MobilityFunction::power(2.0), 8), DomainError);

    auto negative = MobilityFunction::custom([](double x) { return x; }, [](double) { return 1.0; },
                                             [](double) { return 0.0; });
    CHECK_THROWS_AS(check_assumptions(negative, 101), DomainError);
}

TEST_CASE("interior grid stays inside the interval") {
    const auto xs = interior_grid(99);
    REQUIRE(xs.size() == 99);
    CHECK(xs.front() == doctest::Approx(-(1.0 - 1.0 / 100.0)));
    CHECK(xs.back() == doctest::Approx(1.0 - 1.0 / 100.0));
    for (std::size_t i = 1; i < xs.size(); ++i) CHECK(xs[i] > xs[i - 1]);
}
