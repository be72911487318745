#include "degflow/transform.hpp"

#include "degflow/errors.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace degflow {

namespace {

constexpr double kNodeStep = 1.0 / 16.0;
constexpr int kNodeHalf = 224;  // s in [-14, 14]

bool is_p2(const MobilityFunction& g) {
    return g.kind() == MobilityFunction::Kind::PowerFamily && g.p() == 2.0;
}

}  // namespace

CoordinateMap CoordinateMap::build(const MobilityFunction& g, double quad_tol) {
    if (!(quad_tol > 0.0)) throw DomainError("quad_tol must be positive");
    DecayClass decay = g.decay_class();
    if (decay.kind == DecayClass::Kind::Unknown) decay = classify_decay(g);
    if (!decay.is_fast()) {
        throw SlowDecayError("mobility " + g.label() + " has " + decay.name() +
                             " decay; the coordinate map needs fast decay");
    }

    auto t = std::make_shared<Table>(Table{g.with_decay_class(decay), quad_tol, is_p2(g), {}, {}});
    if (!t->closed_form) {
        const std::size_t count = 2 * kNodeHalf + 1;
        t->ss.resize(count);
        t->alphas.assign(count, 0.0);
        for (int k = -kNodeHalf; k <= kNodeHalf; ++k) {
            t->ss[static_cast<std::size_t>(k + kNodeHalf)] = k * kNodeStep;
        }
        CoordinateMap tmp(t);
        const auto mid = static_cast<std::size_t>(kNodeHalf);
        for (std::size_t i = mid + 1; i < count; ++i) {
            t->alphas[i] = t->alphas[i - 1] + tmp.integral(t->ss[i - 1], t->ss[i]);
        }
        for (std::size_t i = mid; i-- > 0;) {
            t->alphas[i] = t->alphas[i + 1] - tmp.integral(t->ss[i], t->ss[i + 1]);
        }
        for (std::size_t i = 0; i < count; ++i) {
            if (!std::isfinite(t->alphas[i]) || (i > 0 && !(t->alphas[i] > t->alphas[i - 1]))) {
                throw ConvergenceError("coordinate map table is not finite and increasing near x=" +
                                       std::to_string(std::tanh(t->ss[i])));
            }
        }
    }
    return CoordinateMap(std::move(t));
}

double CoordinateMap::density_s(double s) const {
    const auto& g = table_->g;
    const double c = std::cosh(s);
    // power family: (1 - x^2)^(1 - p/2) = cosh(s)^(p - 2), exact in s
    if (g.kind() == MobilityFunction::Kind::PowerFamily) return std::pow(c, g.p() - 2.0);
    return 1.0 / (c * c * g.eval(std::tanh(s)));
}

double CoordinateMap::integral(double a, double b) const {
    if (a == b) return 0.0;
    auto f = [this](double s) { return density_s(s); };
    // The depth cap bounds the work when a custom g is only known to rounding
    // accuracy near the endpoints; nodes are 1/16 apart so smooth integrands
    // converge on the first pass.
    return boost::math::quadrature::gauss_kronrod<double, 15>::integrate(f, a, b, 8, table_->tol);
}

double CoordinateMap::alpha_s(double s) const {
    const auto& ss = table_->ss;
    const double pos = std::clamp(std::round(s / kNodeStep), -double(kNodeHalf), double(kNodeHalf));
    const auto k = static_cast<std::size_t>(pos + kNodeHalf);
    return table_->alphas[k] + integral(ss[k], s);
}

double CoordinateMap::alpha(double x) const {
    if (!(x > -1.0 && x < 1.0)) {
        throw DomainError("alpha is defined on (-1,1), got x=" + std::to_string(x));
    }
    if (table_->closed_form) return std::atanh(x);
    return alpha_s(std::atanh(x));
}

double CoordinateMap::alpha_inv(double y) const {
    if (std::isnan(y)) throw DomainError("alpha_inv of NaN");
    if (table_->closed_form) return std::tanh(y);
    if (y == 0.0) return 0.0;

    const auto& ss = table_->ss;
    const auto& as = table_->alphas;
    const double s_max = std::atanh(std::nextafter(1.0, 0.0));

    // Bracket [lo, hi] in s with alpha(lo) <= y <= alpha(hi).
    double lo, hi, s;
    auto it = std::upper_bound(as.begin(), as.end(), y);
    if (it == as.begin()) {
        lo = -s_max;
        hi = ss.front();
        if (y < alpha_s(lo)) return std::nextafter(-1.0, 0.0);
        s = hi;
    } else if (it == as.end()) {
        lo = ss.back();
        hi = s_max;
        if (y > alpha_s(hi)) return std::nextafter(1.0, 0.0);
        s = lo;
    } else {
        const auto k = static_cast<std::size_t>(it - as.begin());
        lo = ss[k - 1];
        hi = ss[k];
        // cubic Hermite guess from the node values and slopes
        const double h = hi - lo;
        const double t = (y - as[k - 1]) / (as[k] - as[k - 1]);
        const double d0 = density_s(lo) * h, d1 = density_s(hi) * h;
        // two Newton steps on the cubic Hermite interpolant of alpha
        double u = t;
        for (int i = 0; i < 2; ++i) {
            const double u2 = u * u, u3 = u2 * u;
            const double val = (2 * u3 - 3 * u2 + 1) * as[k - 1] + (u3 - 2 * u2 + u) * d0 +
                               (-2 * u3 + 3 * u2) * as[k] + (u3 - u2) * d1 - y;
            const double der = (6 * u2 - 6 * u) * as[k - 1] + (3 * u2 - 4 * u + 1) * d0 +
                               (-6 * u2 + 6 * u) * as[k] + (3 * u2 - 2 * u) * d1;
            if (der > 0.0) u -= val / der;
        }
        s = (u > 0.0 && u < 1.0) ? lo + u * h : lo + t * h;
    }

    const double ytol = table_->tol * (1.0 + std::abs(y));
    for (int iter = 0; iter < 200; ++iter) {
        const double r = alpha_s(s) - y;
        if (std::abs(r) <= ytol) return std::tanh(s);
        if (r > 0.0) hi = s; else lo = s;
        if (std::nextafter(lo, hi) >= hi) return std::tanh(std::abs(alpha_s(lo) - y) < std::abs(alpha_s(hi) - y) ? lo : hi);
        double next = s - r / density_s(s);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        s = next;
    }
    throw ConvergenceError("alpha_inv did not converge at y=" + std::to_string(y));
}

CoefficientField CoefficientField::from_map(const CoordinateMap& map, const PotentialSpec& W, int grid_n) {
    CoefficientField c;
    c.map_ = map;
    c.W_ = W;
    c.closed_p2_ = is_p2(map.mobility());
    if (W.is_zero()) return c;

    const auto& g = map.mobility();
    double sup_L = -std::numeric_limits<double>::infinity();
    double inf_l = std::numeric_limits<double>::infinity();
    for (double x : interior_grid(grid_n)) {
        const auto gj = g.jet(x);
        const auto wj = W.jet(x);
        if (!(wj.W >= 0.0)) {
            throw DomainError("potential is negative or non-finite at x=" + std::to_string(x));
        }
        sup_L = std::max(sup_L, 2.0 * gj.g * gj.d1 * wj.d1 + gj.g * gj.g * wj.d2);
        inf_l = std::min(inf_l, gj.g * gj.g * wj.d2 + gj.g * gj.d1 * wj.d1);
    }
    c.L_bound_ = sup_L;
    c.lambda_gW1_ = inf_l;
    return c;
}

CoefficientField CoefficientField::unit_test_coefficient(const PotentialSpec& V) {
    CoefficientField c;
    c.W_ = V;
    if (V.is_zero()) return c;
    double sup_L = -std::numeric_limits<double>::infinity();
    double inf_l = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= 4000; ++k) {
        const double y = -20.0 + 0.01 * k;
        const auto j = V.jet(y);
        if (!(j.W >= 0.0)) throw DomainError("potential is negative or non-finite at y=" + std::to_string(y));
        sup_L = std::max(sup_L, j.d2);
        inf_l = std::min(inf_l, j.d2);
    }
    c.L_bound_ = sup_L;
    c.lambda_gW1_ = inf_l;
    return c;
}

const CoordinateMap& CoefficientField::map() const {
    if (!map_) throw DomainError("unit test coefficient has no coordinate map");
    return *map_;
}

CoefficientSample CoefficientField::sample_x(double x) const {
    if (!map_) throw DomainError("sample_x needs a coefficient built from a coordinate map");
    const auto gj = map_->mobility().jet(x);
    const auto wj = W_.jet(x);
    CoefficientSample s;
    s.x = x;
    s.a = 1.0 / gj.g;
    s.ratio1 = -gj.d1;
    s.ratio2 = map_->mobility().g3_quantity(x);
    s.V = wj.W;
    s.V_d1 = gj.g * wj.d1;
    s.V_d2 = gj.g * gj.g * wj.d2 + gj.g * gj.d1 * wj.d1;
    return s;
}

CoefficientSample CoefficientField::sample(double y) const {
    CoefficientSample s;
    if (!map_) {
        const auto j = W_.jet(y);
        s.x = y;
        s.V = j.W;
        s.V_d1 = j.d1;
        s.V_d2 = j.d2;
        return s;
    }
    if (closed_p2_) {
        // g = sech^2 y written without the 1 - tanh^2 cancellation
        const double th = std::tanh(y);
        const double ch = std::cosh(y);
        const double g = 1.0 / (ch * ch);
        const double gd1 = -2.0 * th;
        s.x = th;
        s.a = ch * ch;
        s.ratio1 = 2.0 * th;
        s.ratio2 = 2.0 * (1.0 + th * th);
        if (!W_.is_zero()) {
            const auto wj = W_.jet(th);
            s.V = wj.W;
            s.V_d1 = g * wj.d1;
            s.V_d2 = g * g * wj.d2 + g * gd1 * wj.d1;
        }
        return s;
    }
    return sample_x(map_->alpha_inv(y));
}

RescaleResult<DensityProfile> rescale_u_to_rho(const DensityProfileX& u, const CoordinateMap& map) {
    const auto xs = u.grid();
    const auto us = u.values();
    std::vector<double> ys(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) ys[i] = map.alpha(xs[i]);

    RescaleResult<DensityProfile> r;
    r.source_mass = u.mass();
    std::vector<double> vals(us.size());
    if (u.is_cellwise()) {
        for (std::size_t j = 0; j < us.size(); ++j) vals[j] = us[j] * (xs[j + 1] - xs[j]) / (ys[j + 1] - ys[j]);
        r.profile = DensityProfile::cellwise(std::move(ys), std::move(vals));
    } else {
        const auto& g = map.mobility();
        for (std::size_t i = 0; i < us.size(); ++i) vals[i] = g.eval(xs[i]) * us[i];
        r.profile = DensityProfile::nodal(std::move(ys), std::move(vals));
    }
    r.mass = r.profile.mass();
    return r;
}

RescaleResult<DensityProfileX> rescale_rho_to_u(const DensityProfile& rho, const CoordinateMap& map) {
    const auto ys = rho.grid();
    const auto rs = rho.values();
    std::vector<double> xs(ys.size());
    for (std::size_t i = 0; i < ys.size(); ++i) xs[i] = map.alpha_inv(ys[i]);

    RescaleResult<DensityProfileX> r;
    r.source_mass = rho.mass();
    std::vector<double> vals(rs.size());
    if (rho.is_cellwise()) {
        for (std::size_t j = 0; j < rs.size(); ++j) vals[j] = rs[j] * (ys[j + 1] - ys[j]) / (xs[j + 1] - xs[j]);
        r.profile = DensityProfileX::cellwise(std::move(xs), std::move(vals));
    } else {
        const auto& g = map.mobility();
        for (std::size_t i = 0; i < rs.size(); ++i) vals[i] = rs[i] / g.eval(xs[i]);
        r.profile = DensityProfileX::nodal(std::move(xs), std::move(vals));
    }
    r.mass = r.profile.mass();
    return r;
}

}  // namespace degflow
