#include "degflow/convexity.hpp"

#include "degflow/errors.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace degflow {

Matrix2 hessian_f(const CoefficientSample& s, double q, const InternalEnergy& en, double lambda) {
    if (!(q > 0.0)) throw DomainError("hessian_f needs q > 0");
    const double z = s.a / q;
    const double d1 = en.psi_d1(z) * z;      // z psi'
    const double d2 = en.psi_d2(z) * z * z;  // z^2 psi''
    Matrix2 H;
    H[0][0] = s.ratio1 * s.ratio1 * d2 + s.ratio2 * d1 + s.V_d2 - lambda;
    H[0][1] = -(s.ratio1 / q) * (d2 + d1);
    H[1][0] = H[0][1];
    H[1][1] = (d2 + 2.0 * d1) / (q * q);
    return H;
}

Matrix2 hessian_f(double p, double q, const CoefficientField& coeff, const InternalEnergy& en, double lambda) {
    if (!(q > 0.0)) throw DomainError("hessian_f needs q > 0");
    return hessian_f(coeff.sample(p), q, en, lambda);
}

double f_value(double p, double q, const CoefficientField& coeff, const InternalEnergy& en, double lambda) {
    if (!(q > 0.0)) throw DomainError("f needs q > 0");
    const auto s = coeff.sample(p);
    return en.psi(s.a / q) + s.V - 0.5 * lambda * p * p;
}

bool is_psd(const Matrix2& H, double rel_tol) {
    const double scale = std::max({std::abs(H[0][0]), std::abs(H[1][1]), std::abs(H[0][1])});
    if (!std::isfinite(scale)) return false;
    const double det = H[0][0] * H[1][1] - H[0][1] * H[1][0];
    const double det_scale = std::abs(H[0][0] * H[1][1]) + H[0][1] * H[1][0];
    return H[0][0] >= -rel_tol * scale && H[1][1] >= -rel_tol * scale && det >= -rel_tol * det_scale;
}

std::string regime_name(Regime r) {
    switch (r) {
        case Regime::Heat: return "heat";
        case Regime::LinearFP: return "linear_fokker_planck";
        case Regime::PorousMedium: return "porous_medium";
        case Regime::General: break;
    }
    return "general";
}

bool ConvexityReport::all_pass() const {
    return std::all_of(conditions.begin(), conditions.end(), [](const NamedCheck& c) { return c.pass; });
}

namespace {

struct Entries {
    double h11_0, h12, h22;
};

bool grid_psd(const std::vector<Entries>& cells, double lambda) {
    for (const auto& e : cells) {
        if (!is_psd({{{e.h11_0 - lambda, e.h12}, {e.h12, e.h22}}})) return false;
    }
    return true;
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

ConvexityReport certify_convexity(const CoefficientField& coeff, const InternalEnergy& en, double lambda,
                                  const ConvexityGrid& grid, double bisect_tol) {
    if (grid.p_points < 2 || grid.q_points < 2 || !(grid.q_min > 0.0) || !(grid.q_max > grid.q_min)) {
        throw DomainError("convexity grid needs >= 2 points per axis and 0 < q_min < q_max");
    }
    ConvexityReport r;
    r.grid = grid;
    r.lambda_tested = lambda;
    r.m = en.m();
    if (en.is_entropy()) {
        r.regime = coeff.is_unit() ? Regime::General
                                   : (coeff.potential().is_zero() ? Regime::Heat : Regime::LinearFP);
    } else {
        r.regime = Regime::PorousMedium;
    }

    std::vector<CoefficientSample> samples;
    if (coeff.has_map()) {
        for (double x : interior_grid(grid.p_points)) {
            samples.push_back(coeff.sample_x(x));
            r.p_grid.push_back(coeff.map().alpha(x));
        }
    } else {
        for (int i = 0; i < grid.p_points; ++i) {
            const double y = -grid.p_half_width + 2.0 * grid.p_half_width * i / (grid.p_points - 1.0);
            samples.push_back(coeff.sample(y));
            r.p_grid.push_back(y);
        }
    }
    const double lq0 = std::log(grid.q_min), lq1 = std::log(grid.q_max);
    for (int j = 0; j < grid.q_points; ++j) {
        r.q_grid.push_back(std::exp(lq0 + (lq1 - lq0) * j / (grid.q_points - 1.0)));
    }

    std::vector<Entries> cells;
    cells.reserve(samples.size() * r.q_grid.size());
    double candidate = std::numeric_limits<double>::infinity();
    bool h22_ok = true;
    r.psd_grid.assign(samples.size(), std::vector<bool>(r.q_grid.size(), false));
    for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t j = 0; j < r.q_grid.size(); ++j) {
            const auto H = hessian_f(samples[i], r.q_grid[j], en, 0.0);
            cells.push_back({H[0][0], H[0][1], H[1][1]});
            if (H[1][1] > 0.0) {
                candidate = std::min(candidate, H[0][0] - H[0][1] * H[0][1] / H[1][1]);
            } else if (H[1][1] < 0.0 || H[0][1] != 0.0) {
                h22_ok = false;
            } else {
                candidate = std::min(candidate, H[0][0]);
            }
            r.psd_grid[i][j] = is_psd({{{H[0][0] - lambda, H[0][1]}, {H[0][1], H[1][1]}}});
        }
    }

    r.lambda_best = -std::numeric_limits<double>::infinity();
    if (h22_ok && std::isfinite(candidate)) {
        // bracket [lo, hi] with psd(lo) true and psd(hi) false, then bisect
        double step = 1e-6 * (1.0 + std::abs(candidate));
        double lo = candidate - step;
        while (!grid_psd(cells, lo) && step < 1e6 * (1.0 + std::abs(candidate))) {
            step *= 2.0;
            lo = candidate - step;
        }
        if (grid_psd(cells, lo)) {
            step = 1e-6 * (1.0 + std::abs(candidate));
            double hi = candidate + step;
            for (int k = 0; k < 200 && grid_psd(cells, hi); ++k) {
                step *= 2.0;
                hi = candidate + step;
            }
            for (int k = 0; k < 200 && hi - lo > bisect_tol * std::max(1.0, std::abs(lo)); ++k) {
                const double mid = 0.5 * (lo + hi);
                (grid_psd(cells, mid) ? lo : hi) = mid;
            }
            r.lambda_best = lo;
        }
    }

    bool all = true;
    for (const auto& row : r.psd_grid) all = all && std::all_of(row.begin(), row.end(), [](bool b) { return b; });
    r.conditions.push_back({"psd_certified_on_grid", all,
                            "lambda=" + num(lambda) + ", " + std::to_string(grid.p_points) + "x" +
                                std::to_string(grid.q_points) + " (p,q) points, q in [" + num(grid.q_min) + ", " +
                                num(grid.q_max) + "]"});
    return r;
}

double heat_lambda(const MobilityFunction& g, int grid_n) {
    DecayClass d = g.decay_class();
    if (d.kind == DecayClass::Kind::Unknown) d = classify_decay(g);
    if (!d.is_fast()) throw SlowDecayError("heat_lambda needs a fast-decay mobility");

    if (g.kind() == MobilityFunction::Kind::PowerFamily) {
        // -g g'' = p (1-u)^{p-2} (1 - (p-1) u), u = x^2 in [0,1]; the value at
        // u = 1 is the endpoint limit, which is 0 for p >= 2.
        const double p = g.p();
        auto h = [p](double u) { return p * std::pow(1.0 - u, p - 2.0) * (1.0 - (p - 1.0) * u); };
        const int m = 2000;
        int best = 0;
        double best_v = h(0.0);
        for (int k = 1; k <= m; ++k) {
            const double v = h(static_cast<double>(k) / m);
            if (v < best_v) {
                best_v = v;
                best = k;
            }
        }
        const double a = std::max(0.0, (best - 1.0) / m);
        const double b = std::min(1.0, (best + 1.0) / m);
        const auto res = boost::math::tools::brent_find_minima(h, a, b, 52);
        return std::min(best_v, res.second);
    }

    auto h = [&g](double x) {
        const auto j = g.jet(x);
        return -j.g * j.d2;
    };
    const auto xs = interior_grid(grid_n);
    std::size_t best = 0;
    double best_v = h(xs[0]);
    for (std::size_t k = 1; k < xs.size(); ++k) {
        const double v = h(xs[k]);
        if (v < best_v) {
            best_v = v;
            best = k;
        }
    }
    const double a = xs[best == 0 ? 0 : best - 1];
    const double b = xs[std::min(best + 1, xs.size() - 1)];
    const auto res = boost::math::tools::brent_find_minima(h, a, b, 52);
    return std::min(best_v, res.second);
}

FokkerPlanckLambdas fokker_planck_lambdas(const MobilityFunction& g, const PotentialSpec& W, int grid_n) {
    FokkerPlanckLambdas out;
    out.lambda_d = heat_lambda(g, grid_n);
    if (W.is_zero()) return out;
    double inf_w = std::numeric_limits<double>::infinity();
    for (double x : interior_grid(grid_n)) {
        const auto gj = g.jet(x);
        const auto wj = W.jet(x);
        inf_w = std::min(inf_w, gj.g * gj.g * wj.d2 + gj.g * gj.d1 * wj.d1);
    }
    out.lambda_W = inf_w;
    return out;
}

ConvexityReport porous_medium_conditions(double m, const MobilityFunction& g, const PotentialSpec& W, double lambda,
                                         const ConvexityGrid& grid) {
    if (!(m > 1.0)) throw DomainError("porous medium conditions need m > 1");
    const auto en = InternalEnergy::power(m);
    const auto map = CoordinateMap::build(g);
    const auto coeff = CoefficientField::from_map(map, W);
    ConvexityReport r = certify_convexity(coeff, en, lambda, grid);
    r.regime = Regime::PorousMedium;

    // x-grid minima of the two sign conditions
    double det_min = std::numeric_limits<double>::infinity();
    double c11_min = std::numeric_limits<double>::infinity();
    for (double x : interior_grid(4001)) {
        const auto j = g.jet(x);
        const double gp2 = j.d1 * j.d1, ggpp = j.g * j.d2;
        const double scale = gp2 + std::abs(ggpp);
        det_min = std::min(det_min, ((m - 1.0) * gp2 - m * ggpp) / (scale > 0 ? scale : 1.0));
        c11_min = std::min(c11_min, ((m - 1.0) * gp2 - ggpp) / (scale > 0 ? scale : 1.0));
    }
    const bool power = g.kind() == MobilityFunction::Kind::PowerFamily;
    const double p = g.p();

    NamedCheck root{"g^(1/m) concave", false, ""};
    if (power) {
        root.pass = p <= 2.0 * m;
        root.detail = "power family rule p <= 2m: p=" + num(p) + ", 2m=" + num(2.0 * m) +
                      "; grid min of normalised (m-1)(g')^2 - m g g'' = " + num(det_min);
    } else {
        root.pass = det_min >= -1e-12;
        root.detail = "grid min of normalised (m-1)(g')^2 - m g g'' = " + num(det_min);
    }

    NamedCheck c11;
    if (m > 2.0) {
        c11.name = "g^(2-m) convex";
    } else if (m < 2.0) {
        c11.name = "g^(2-m) concave";
    } else {
        c11.name = "(g')^2 - g g'' >= 0";
    }
    if (power) {
        c11.pass = m >= 2.0 || p <= 2.0 / (2.0 - m);
        c11.detail = (m >= 2.0 ? std::string("holds for every p when m >= 2")
                               : "power family rule p <= 2/(2-m) = " + num(2.0 / (2.0 - m)) + ", p=" + num(p)) +
                     "; grid min of normalised (m-1)(g')^2 - g g'' = " + num(c11_min);
    } else {
        c11.pass = c11_min >= -1e-12;
        c11.detail = "grid min of normalised (m-1)(g')^2 - g g'' = " + num(c11_min);
    }

    bool h11_ok = true, det_ok = true;
    for (double x : interior_grid(grid.p_points)) {
        const auto s = coeff.sample_x(x);
        for (double q : r.q_grid) {
            const auto H = hessian_f(s, q, en, lambda);
            const double scale = std::abs(H[0][0]) + std::abs(H[0][1]) + std::abs(H[1][1]);
            h11_ok = h11_ok && H[0][0] >= -1e-12 * scale;
            const double det = H[0][0] * H[1][1] - H[0][1] * H[0][1];
            det_ok = det_ok && det >= -1e-12 * (std::abs(H[0][0] * H[1][1]) + H[0][1] * H[0][1]);
        }
    }

    std::vector<NamedCheck> conds{root, c11, {"(H_f)_11 >= 0 on grid", h11_ok, "lambda=" + num(lambda)},
                                  {"det H_f >= 0 on grid", det_ok, "lambda=" + num(lambda)}};
    conds.insert(conds.end(), r.conditions.begin(), r.conditions.end());
    r.conditions = std::move(conds);
    return r;
}

}  // namespace degflow
