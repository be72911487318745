#include "degflow/convexity.hpp"
#include "degflow/errors.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace degflow;

namespace {

const auto kEntropy = InternalEnergy::entropy(InternalEnergy::LinearCase{});

const NamedCheck& find(const ConvexityReport& r, const std::string& name) {
    auto it = std::find_if(r.conditions.begin(), r.conditions.end(), [&](const NamedCheck& c) { return c.name == name; });
    REQUIRE(it != r.conditions.end());
    return *it;
}

// inf over u in [0,1] of p (1-u)^{p-2} (1 - (p-1) u), by brute force.
double heat_lambda_bruteforce(double p) {
    double best = INFINITY;
    for (int k = 0; k <= 200000; ++k) {
        const double u = k / 200000.0;
        best = std::min(best, p * std::pow(1.0 - u, p - 2.0) * (1.0 - (p - 1.0) * u));
    }
    return best;
}

}  // namespace

TEST_CASE("heat lambda closed forms") {
    CHECK(heat_lambda(MobilityFunction::power(2.0)) == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(heat_lambda(MobilityFunction::power(3.0)) + 0.375) <= 1e-6);
    CHECK(heat_lambda(MobilityFunction::power(4.0)) == doctest::Approx(-128.0 / 243.0).epsilon(1e-8));
    for (double p : {2.5, 3.3, 5.0}) {
        CHECK(heat_lambda(MobilityFunction::power(p)) == doctest::Approx(heat_lambda_bruteforce(p)).epsilon(1e-6));
    }
    CHECK_THROWS_AS(heat_lambda(MobilityFunction::power(1.0)), SlowDecayError);
}

TEST_CASE("heat lambda of a custom mobility matches the power rule") {
    auto g = MobilityFunction::custom([](double x) { return std::pow((1 - x) * (1 + x), 1.5); },
                                      [](double x) { return -3.0 * x * std::sqrt((1 - x) * (1 + x)); },
                                      [](double x) {
                                          const double s = std::sqrt((1 - x) * (1 + x));
                                          return -3.0 * s + 3.0 * x * x / s;
                                      })
                 .with_decay_class(DecayClass::fast());
    CHECK(heat_lambda(g) == doctest::Approx(-0.375).epsilon(1e-5));
}

TEST_CASE("Hessian of f agrees with finite differences") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> up(-2.0, 2.0), uq(-1.5, 1.5);
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    const auto coeff = CoefficientField::from_map(map, PotentialSpec::quadratic(0.3));
    for (const auto& en : {kEntropy, InternalEnergy::power(2.0), InternalEnergy::power(3.0)}) {
        for (int i = 0; i < 20; ++i) {
            const double p = up(rng), q = std::exp(uq(rng)), lambda = 0.25;
            auto f = [&](double pp, double qq) { return f_value(pp, qq, coeff, en, lambda); };
            const double hp = 1e-4 * std::max(1.0, std::abs(p)), hq = 1e-4 * q;
            const double fpp = (f(p + hp, q) - 2 * f(p, q) + f(p - hp, q)) / (hp * hp);
            const double fqq = (f(p, q + hq) - 2 * f(p, q) + f(p, q - hq)) / (hq * hq);
            const double fpq = (f(p + hp, q + hq) - f(p + hp, q - hq) - f(p - hp, q + hq) + f(p - hp, q - hq)) /
                               (4 * hp * hq);
            const auto H = hessian_f(p, q, coeff, en, lambda);
            const double scale = std::abs(H[0][0]) + std::abs(H[0][1]) + std::abs(H[1][1]);
            CHECK(std::abs(H[0][0] - fpp) <= 1e-5 * scale);
            CHECK(std::abs(H[0][1] - fpq) <= 1e-5 * scale);
            CHECK(std::abs(H[1][1] - fqq) <= 1e-5 * scale);
            CHECK(H[0][1] == H[1][0]);
        }
    }
}

TEST_CASE("PSD test") {
    CHECK(is_psd({{{1.0, 0.0}, {0.0, 1.0}}}));
    CHECK(is_psd({{{1.0, 1.0}, {1.0, 1.0}}}));
    CHECK_FALSE(is_psd({{{1.0, 2.0}, {2.0, 1.0}}}));
    CHECK_FALSE(is_psd({{{-1.0, 0.0}, {0.0, 1.0}}}));
}

TEST_CASE("unit coefficient with quadratic potential is 1-convex") {
    const auto coeff = CoefficientField::unit_test_coefficient(PotentialSpec::quadratic(0.5));
    const auto r = certify_convexity(coeff, kEntropy, 1.0);
    CHECK(r.lambda_best == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(r.all_pass());
    CHECK(r.regime == Regime::General);
    const auto worse = certify_convexity(coeff, kEntropy, 1.1);
    CHECK_FALSE(worse.all_pass());
}

TEST_CASE("grid certificate of the heat case approaches the closed form") {
    const auto map = CoordinateMap::build(MobilityFunction::power(3.0));
    const auto coeff = CoefficientField::from_map(map, PotentialSpec::zero());
    const auto r = certify_convexity(coeff, kEntropy, -0.375);
    CHECK(r.regime == Regime::Heat);
    CHECK(r.all_pass());
    // the grid only samples finitely many points, so its certificate is at
    // least the true modulus and close to it
    CHECK(r.lambda_best >= -0.375 - 1e-9);
    CHECK(r.lambda_best <= -0.375 + 5e-3);
    CHECK(r.psd_grid.size() == 64);
    CHECK(r.psd_grid.front().size() == 64);
}

TEST_CASE("porous medium region") {
    const auto zero = PotentialSpec::zero();
    const auto ok = porous_medium_conditions(3.0, MobilityFunction::power(4.0), zero);
    CHECK(ok.all_pass());
    CHECK(ok.regime == Regime::PorousMedium);
    CHECK(find(ok, "g^(1/m) concave").pass);
    CHECK(find(ok, "psd_certified_on_grid").pass);

    const auto a = porous_medium_conditions(2.0, MobilityFunction::power(5.0), zero);
    CHECK_FALSE(find(a, "g^(1/m) concave").pass);
    CHECK_FALSE(a.all_pass());

    const auto b = porous_medium_conditions(3.0, MobilityFunction::power(8.0), zero);
    CHECK_FALSE(find(b, "g^(1/m) concave").pass);
    CHECK_FALSE(find(b, "det H_f >= 0 on grid").pass);

    const auto c = porous_medium_conditions(1.5, MobilityFunction::power(3.0), zero);
    CHECK(find(c, "g^(1/m) concave").pass);
    CHECK(find(c, "g^(2-m) concave").pass);  // p <= 2/(2-m) = 4
    const auto d = porous_medium_conditions(1.5, MobilityFunction::power(5.0), zero);
    CHECK_FALSE(find(d, "g^(2-m) concave").pass);

    CHECK_THROWS_AS(porous_medium_conditions(1.0, MobilityFunction::power(3.0), zero), DomainError);
}

TEST_CASE("Fokker-Planck modulus adds the potential part") {
    const auto g = MobilityFunction::power(2.0);
    const auto fp = fokker_planck_lambdas(g, PotentialSpec::quadratic(1.0));
    CHECK(fp.lambda_d == doctest::Approx(0.0).epsilon(1e-9));
    // g^2 W'' + g g' W' = 2(1-x^2)^2 - 4x^2(1-x^2) = 2(1-x^2)(1-3x^2), minimised at x^2 = 2/3
    CHECK(fp.lambda_W == doctest::Approx(-2.0 / 3.0).epsilon(1e-6));
    CHECK(fp.lambda() == doctest::Approx(fp.lambda_d + fp.lambda_W));
}
