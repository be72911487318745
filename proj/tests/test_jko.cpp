#include "degflow/errors.hpp"
#include "degflow/jko.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace degflow;

namespace {

const auto kEntropy = InternalEnergy::entropy(InternalEnergy::LinearCase{});

JkoConfig small_config(double T = 0.05, int n = 60, double tau = 5e-3) {
    JkoConfig c;
    c.T = T;
    c.n = n;
    c.tau = tau;
    return c;
}

double variance(const QuantileProfile& Y) {
    const double m = Y.mean();
    return Y.second_moment() - m * m;
}

}  // namespace

TEST_CASE("JKO gradient agrees with finite differences") {
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    const std::vector<CoefficientField> coeffs{CoefficientField::unit_test_coefficient(),
                                               CoefficientField::unit_test_coefficient(PotentialSpec::quadratic(0.5)),
                                               CoefficientField::from_map(map, PotentialSpec::quadratic(0.2))};
    const auto Yq = testutil::gaussian_quantiles(0.1, 0.4, 30);
    auto P = Yq;
    for (double& p : P) p *= 0.97;
    for (const auto& c : coeffs) {
        for (const auto& en : {kEntropy, InternalEnergy::power(2.0), InternalEnergy::power(3.0)}) {
            const auto g = jko_gradient(Yq, P, c, en, 0.01);
            for (std::size_t i = 0; i < Yq.size(); i += 3) {
                auto f = [&](double v) {
                    auto Y = Yq;
                    Y[i] = v;
                    return jko_objective(Y, P, c, en, 0.01);
                };
                const double h = 1e-6;
                CHECK(testutil::rel_err(g[i], testutil::d1(f, Yq[i], h)) < 1e-5);
            }
        }
    }
}

TEST_CASE("one JKO step lowers the objective relative to staying put") {
    const auto c = CoefficientField::unit_test_coefficient();
    const auto Y0 = QuantileProfile(testutil::gaussian_quantiles(0.0, 0.5, 50));
    JkoStepStats st;
    const auto Y1 = jko_step(Y0, c, kEntropy, 1e-2, small_config(), &st);
    CHECK(st.iterations >= 1);
    CHECK(st.grad_norm < 1e-8);
    CHECK(st.objective < jko_objective(Y0.values(), Y0.values(), c, kEntropy, 1e-2));
    CHECK(variance(Y1) > variance(Y0));
}

TEST_CASE("JKO step is translation equivariant without potential") {
    const auto c = CoefficientField::unit_test_coefficient();
    const auto Y0 = QuantileProfile(testutil::gaussian_quantiles(0.0, 0.5, 40));
    const auto en = InternalEnergy::power(2.0);
    const auto a = jko_step(Y0, c, en, 1e-2, small_config());
    const auto b = jko_step(Y0.shifted(1.5), c, en, 1e-2, small_config());
    for (std::size_t i = 0; i < a.n(); ++i) CHECK(b[i] - 1.5 == doctest::Approx(a[i]).epsilon(1e-9));
}

TEST_CASE("heat flow with unit coefficient spreads like the heat kernel") {
    const auto c = CoefficientField::unit_test_coefficient();
    const auto cfg = small_config(0.1, 100, 2e-3);
    const auto tr = run_flow(testutil::gaussian(0.2, 0.5), c, kEntropy, cfg);
    REQUIRE(tr.profiles.size() == 51);
    CHECK(tr.profiles.back().mean() == doctest::Approx(0.2).epsilon(1e-9));
    // Var(t) = sigma^2 + 2t; the discrete profile is a little narrower
    CHECK(variance(tr.profiles.back()) == doctest::Approx(0.25 + 0.2).epsilon(2e-2));
    for (std::size_t k = 1; k < tr.diagnostics.size(); ++k) {
        CHECK(tr.diagnostics.energy[k] <= tr.diagnostics.energy[k - 1] + 1e-10);
    }
    CHECK(tr.diagnostics.w2_step.front() == 0.0);
}

TEST_CASE("trajectory interpolant picks the step ending after t") {
    const auto c = CoefficientField::unit_test_coefficient();
    const auto tr = run_flow(testutil::gaussian(0.0, 0.5), c, kEntropy, small_config(0.02, 30, 5e-3));
    CHECK(&tr.at(0.0) == &tr.profiles[0]);
    CHECK(&tr.at(-1.0) == &tr.profiles[0]);
    CHECK(&tr.at(0.001) == &tr.profiles[1]);
    CHECK(&tr.at(0.005) == &tr.profiles[1]);
    CHECK(&tr.at(0.0051) == &tr.profiles[2]);
    CHECK(&tr.at(1.0) == &tr.profiles.back());
}

TEST_CASE("flows are deterministic") {
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    const auto c = CoefficientField::from_map(map, PotentialSpec::zero());
    const auto cfg = small_config(0.02, 40, 5e-3);
    const auto a = run_flow(testutil::gaussian(0.0, 0.3), c, kEntropy, cfg);
    const auto b = run_flow(testutil::gaussian(0.0, 0.3), c, kEntropy, cfg);
    for (std::size_t k = 0; k < a.profiles.size(); ++k) {
        for (std::size_t i = 0; i < a.profiles[k].n(); ++i) CHECK(a.profiles[k][i] == b.profiles[k][i]);
    }
}

TEST_CASE("porous medium flow conserves the centre and dissipates energy") {
    const auto c = CoefficientField::unit_test_coefficient();
    const auto tr = run_flow(testutil::gaussian(0.0, 0.4), c, InternalEnergy::power(2.0), small_config(0.05, 60, 5e-3));
    CHECK(std::abs(tr.profiles.back().mean()) < 1e-9);
    CHECK(tr.diagnostics.energy.back() < tr.diagnostics.energy.front());
    CHECK(tr.diagnostics.lm_exponent == 2.0);
}

TEST_CASE("a-priori estimates hold on a short heat run with degenerate mobility") {
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    const auto c = CoefficientField::from_map(map, PotentialSpec::zero());
    const auto tr = run_flow(testutil::gaussian(0.0, 0.1), c, kEntropy, small_config(0.05, 80, 2e-3));
    const auto e = check_estimates(tr, c, kEntropy);
    CHECK(e.energy_pass);
    CHECK(e.w2_sum_pass);
    CHECK(e.holder_pass);
    CHECK(e.holder_pairs == 100);
    CHECK(e.gronwall_pass);
    // same seed, same pairs
    CHECK(check_estimates(tr, c, kEntropy).holder_max_ratio == e.holder_max_ratio);
}

TEST_CASE("contraction in a confining potential") {
    const auto c = CoefficientField::unit_test_coefficient(PotentialSpec::quadratic(0.5));
    const auto cfg = small_config(0.3, 60, 5e-3);
    const auto r = contraction_test(testutil::gaussian(-0.5, 0.4), testutil::gaussian(0.6, 0.5), c, kEntropy, cfg, 1.0,
                                    {0.1, 0.3});
    CHECK(r.pass);
    REQUIRE(r.mean_gap.size() == 2);
    CHECK(r.mean_gap[1] == doctest::Approx(-1.1 * std::exp(-0.3)).epsilon(2e-2));
    CHECK_THROWS_AS(contraction_test(testutil::gaussian(0, 0.4), testutil::gaussian(0.1, 0.4), c, kEntropy, cfg, 1.0,
                                     {0.5}),
                    TimeRangeError);
}

TEST_CASE("configuration validation") {
    JkoConfig c;
    c.tau = 0.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = JkoConfig{};
    c.n = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
    c = JkoConfig{};
    c.tau = 1.0;
    c.T = 0.5;
    CHECK_THROWS_AS(c.validate(), ConfigError);
}
