#include "degflow/mobility.hpp"

#include "degflow/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace degflow {

std::string DecayClass::name() const {
    switch (kind) {
        case Kind::Fast: return "fast";
        case Kind::Slow: return "slow";
        case Kind::Unknown: break;
    }
    return "unknown";
}

MobilityFunction MobilityFunction::power(double p) {
    if (!(p > 0.0) || !std::isfinite(p)) {
        throw DomainError("power mobility requires p > 0, got " + std::to_string(p));
    }
    MobilityFunction m;
    m.kind_ = Kind::PowerFamily;
    m.p_ = p;
    m.label_ = "power(p=" + std::to_string(p) + ")";
    // (1-x)(1+x) keeps full relative accuracy of 1-x^2 near the endpoints
    m.g_ = [p](double x) { return std::pow((1.0 - x) * (1.0 + x), 0.5 * p); };
    m.d1_ = [p](double x) { return -p * x * std::pow((1.0 - x) * (1.0 + x), 0.5 * p - 1.0); };
    m.d2_ = [p](double x) {
        const double s = (1.0 - x) * (1.0 + x);
        return -p * std::pow(s, 0.5 * p - 2.0) * (1.0 - (p - 1.0) * x * x);
    };
    if (p >= 2.0) {
        m.decay_ = DecayClass::fast();
    } else {
        m.decay_ = DecayClass::slow(osgood_integral(m));
    }
    return m;
}

MobilityFunction MobilityFunction::custom(Fn g, Fn d1, Fn d2, std::string label) {
    if (!g || !d1 || !d2) {
        throw DomainError("custom mobility needs g, g' and g''");
    }
    MobilityFunction m;
    m.kind_ = Kind::Custom;
    m.p_ = std::numeric_limits<double>::quiet_NaN();
    m.label_ = std::move(label);
    m.g_ = std::move(g);
    m.d1_ = std::move(d1);
    m.d2_ = std::move(d2);
    return m;
}

double MobilityFunction::eval(double x) const { return g_(x); }
double MobilityFunction::eval_d1(double x) const { return d1_(x); }
double MobilityFunction::eval_d2(double x) const { return d2_(x); }

MobilityJet MobilityFunction::jet(double x) const {
    if (kind_ == Kind::PowerFamily) {
        // one pow call instead of three
        const double s = (1.0 - x) * (1.0 + x);
        const double sh = std::pow(s, 0.5 * p_ - 2.0);
        const double g = sh * s * s;
        return {g, -p_ * x * sh * s, -p_ * sh * (1.0 - (p_ - 1.0) * x * x)};
    }
    return {g_(x), d1_(x), d2_(x)};
}

double MobilityFunction::g3_quantity(double x) const {
    if (kind_ == Kind::PowerFamily) {
        const double s = (1.0 - x) * (1.0 + x);
        return p_ * std::pow(s, p_ - 2.0) * (1.0 + x * x);
    }
    const auto j = jet(x);
    return j.d1 * j.d1 - j.g * j.d2;
}

MobilityFunction MobilityFunction::with_decay_class(DecayClass d) const {
    MobilityFunction m = *this;
    m.decay_ = d;
    return m;
}

std::vector<double> interior_grid(int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    const double edge = 1.0 - 1.0 / (n + 1.0);
    for (int k = 0; k < n; ++k) {
        xs[static_cast<std::size_t>(k)] = -edge + 2.0 * edge * k / (n - 1.0);
    }
    return xs;
}

AssumptionReport check_assumptions(const MobilityFunction& g, int grid_n) {
    if (grid_n < 16) {
        throw DomainError("check_assumptions requires grid_n >= 16");
    }
    AssumptionReport r;
    r.grid_n = grid_n;
    r.endpoint_gap = 1.0 / (grid_n + 1.0);
    r.g_at_zero = g.eval(0.0);
    r.g_at_left = g.eval(-1.0);
    r.g_at_right = g.eval(1.0);

    bool bounded = true;
    bool max_at_zero = true;
    r.C_g = -std::numeric_limits<double>::infinity();
    r.g3_min = std::numeric_limits<double>::infinity();
    r.max_g = -std::numeric_limits<double>::infinity();
    for (double x : interior_grid(grid_n)) {
        const auto j = g.jet(x);
        if (!std::isfinite(j.g) || j.g < 0.0) {
            throw DomainError("mobility is negative or non-finite at x=" + std::to_string(x));
        }
        r.max_g = std::max(r.max_g, j.g);
        if (j.g > 1.0 + 1e-12) bounded = false;
        if (j.g > r.g_at_zero + 1e-12) max_at_zero = false;
        const double q = g.g3_quantity(x);
        r.C_g = std::max(r.C_g, q);
        r.g3_min = std::min(r.g3_min, q);
    }
    const bool vanish = std::isfinite(r.g_at_left) && std::isfinite(r.g_at_right) &&
                        std::abs(r.g_at_left) <= 1e-8 && std::abs(r.g_at_right) <= 1e-8;
    r.g1 = bounded && max_at_zero && vanish && std::abs(r.g_at_zero - 1.0) <= 1e-12;
    r.g3 = std::isfinite(r.C_g) && r.g3_min >= -1e-10;
    return r;
}

double osgood_integral(const MobilityFunction& g, double tol) {
    // z = 1 - s^2 moves the endpoint singularity of 1/g to s = 0 and softens it.
    // power family: 1 - z^2 = s^2 (2 - s^2) exactly, so no cancellation at s -> 0
    const bool power = g.kind() == MobilityFunction::Kind::PowerFamily;
    auto integrand = [&g, power](double s) {
        if (power) return 2.0 * std::pow(s, 1.0 - g.p()) * std::pow(2.0 - s * s, -0.5 * g.p());
        const double z = std::min(1.0 - s * s, std::nextafter(1.0, 0.0));
        return 2.0 * s / g.eval(z);
    };
    boost::math::quadrature::tanh_sinh<double> integrator;
    double err = 0.0;
    const double val = integrator.integrate(integrand, 0.0, 1.0, tol, &err);
    return val;
}

namespace {

double segment_integral(const MobilityFunction& g, double a, double b) {
    auto inv = [&g](double z) { return 1.0 / g.eval(z); };
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(inv, a, b, 12, 1e-13);
}

}  // namespace

DecayClass classify_decay(const MobilityFunction& g, double tol) {
    if (g.kind() == MobilityFunction::Kind::PowerFamily) {
        if (g.p() >= 2.0) return DecayClass::fast();
        return DecayClass::slow(osgood_integral(g));
    }

    // Truncated integrals I_k = \int_0^{1-2^{-k}} dz/g, k = 4..24, accumulated
    // segment by segment. Successive differences decay geometrically iff the
    // full integral converges.
    constexpr int k_first = 4;
    constexpr int k_last = 24;
    std::vector<double> partial;
    double acc = segment_integral(g, 0.0, 1.0 - std::ldexp(1.0, -k_first));
    partial.push_back(acc);
    for (int k = k_first + 1; k <= k_last; ++k) {
        acc += segment_integral(g, 1.0 - std::ldexp(1.0, -(k - 1)), 1.0 - std::ldexp(1.0, -k));
        if (!std::isfinite(acc)) return DecayClass::fast();
        partial.push_back(acc);
    }
    std::vector<double> diffs;
    for (std::size_t i = 1; i < partial.size(); ++i) diffs.push_back(partial[i] - partial[i - 1]);

    // geometric mean of the last five difference ratios
    double log_ratio = 0.0;
    int used = 0;
    for (std::size_t i = diffs.size() - 5; i < diffs.size(); ++i) {
        if (!(diffs[i - 1] > 0.0) || !(diffs[i] > 0.0)) {
            throw InconclusiveError("non-positive increments of the truncated Osgood integral");
        }
        log_ratio += std::log(diffs[i] / diffs[i - 1]);
        ++used;
    }
    const double ratio = std::exp(log_ratio / used);
    if (ratio >= 1.0 - tol) return DecayClass::fast();
    if (ratio <= 1.0 - 5.0 * tol) {
        const double tail = diffs.back() * ratio / (1.0 - ratio);
        return DecayClass::slow(partial.back() + tail);
    }
    throw InconclusiveError("Osgood heuristic inconclusive: increment ratio " + std::to_string(ratio));
}

}  // namespace degflow
