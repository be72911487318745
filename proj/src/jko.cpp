#include "degflow/jko.hpp"

#include "degflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <random>
#include <string>

namespace degflow {

void JkoConfig::validate() const {
    if (!(tau > 0.0) || !std::isfinite(tau)) throw ConfigError("jko.tau must be positive");
    if (!(tau <= T)) throw ConfigError("jko.tau must not exceed jko.T");
    if (n < 2) throw ConfigError("jko.n must be at least 2");
    if (!(newton_tol > 0.0)) throw ConfigError("jko.newton_tol must be positive");
    if (max_newton < 1) throw ConfigError("jko.max_newton must be at least 1");
}

const QuantileProfile& FlowTrajectory::at(double t) const {
    if (profiles.empty()) throw ShapeError("empty trajectory");
    if (t <= 0.0 || tau <= 0.0) return profiles.front();
    auto k = static_cast<std::size_t>(std::ceil(t / tau - 1e-9));
    k = std::min(k, profiles.size() - 1);
    return profiles[k];
}

namespace {

struct CellTerms {
    double e = 0, ec = 0, ed = 0, ecc = 0, ecd = 0, edd = 0;
};

// Energy of one cell, e(c, d) = dw psi(a(c) dw / d), and its derivatives in the
// midpoint c and the gap d.
CellTerms cell_terms(const CoefficientSample& s, double d, double dw, const InternalEnergy& en) {
    CellTerms t;
    double p1, p2;  // z psi'(z), z^2 psi''(z)
    if (en.is_entropy()) {
        t.e = dw * (std::log(s.a) + std::log(dw) - std::log(d));
        p1 = 1.0;
        p2 = -1.0;
    } else {
        const double z = s.a * dw / d;
        t.e = dw * en.psi(z);
        p1 = en.psi_d1(z) * z;
        p2 = en.psi_d2(z) * z * z;
    }
    const double r1 = s.ratio1, r2 = s.ratio2;
    t.ec = dw * p1 * r1;
    t.ed = -dw * p1 / d;
    t.ecc = dw * (p2 * r1 * r1 + p1 * r2);
    t.ecd = -dw * r1 * (p2 + p1) / d;
    t.edd = dw * (p2 + 2.0 * p1) / (d * d);
    return t;
}

struct Model {
    double phi = 0.0;
    std::vector<double> grad;
    std::vector<double> diag;
    std::vector<double> off;  // off[i] couples i and i+1
};

// Objective (and optionally gradient/Hessian). Returns false when Y is not
// strictly increasing or a term is not finite.
bool evaluate(std::span<const double> Y, std::span<const double> P, const CoefficientField& coeff,
              const InternalEnergy& en, double tau, bool derivs, Model& out) {
    const std::size_t n = Y.size();
    const double dw = 1.0 / static_cast<double>(n);
    const bool has_V = !coeff.potential().is_zero();
    double phi = 0.0;
    if (derivs) {
        out.grad.assign(n, 0.0);
        out.diag.assign(n, 0.0);
        out.off.assign(n - 1, 0.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double dy = Y[i] - P[i];
        phi += 0.5 * dw * dy * dy / tau;
        if (derivs) {
            out.grad[i] += dw * dy / tau;
            out.diag[i] += dw / tau;
        }
        if (has_V) {
            const auto s = coeff.sample(Y[i]);
            phi += dw * s.V;
            if (derivs) {
                out.grad[i] += dw * s.V_d1;
                out.diag[i] += dw * s.V_d2;
            }
        }
    }
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double d = Y[i + 1] - Y[i];
        if (!(d > 0.0)) return false;
        const auto s = coeff.sample(0.5 * (Y[i] + Y[i + 1]));
        const auto t = cell_terms(s, d, dw, en);
        phi += t.e;
        if (derivs) {
            out.grad[i] += 0.5 * t.ec - t.ed;
            out.grad[i + 1] += 0.5 * t.ec + t.ed;
            out.diag[i] += 0.25 * t.ecc - t.ecd + t.edd;
            out.diag[i + 1] += 0.25 * t.ecc + t.ecd + t.edd;
            out.off[i] += 0.25 * t.ecc - t.edd;
        }
    }
    out.phi = phi;
    if (!std::isfinite(phi)) return false;
    if (derivs) {
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(out.grad[i]) || !std::isfinite(out.diag[i])) return false;
        }
    }
    return true;
}

// Solves (T + shift I) x = b for symmetric tridiagonal T via LDL^T.
// Returns false on a non-positive pivot.
bool solve_tridiagonal(const std::vector<double>& diag, const std::vector<double>& off, double shift,
                       const std::vector<double>& b, std::vector<double>& x) {
    const std::size_t n = diag.size();
    std::vector<double> d(n), l(n > 0 ? n - 1 : 0);
    x = b;
    d[0] = diag[0] + shift;
    if (!(d[0] > 0.0)) return false;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        l[i] = off[i] / d[i];
        d[i + 1] = diag[i + 1] + shift - l[i] * off[i];
        if (!(d[i + 1] > 1e-14 * std::abs(diag[i + 1] + shift)) || !std::isfinite(d[i + 1])) return false;
        x[i + 1] -= l[i] * x[i];
    }
    for (std::size_t i = 0; i < n; ++i) x[i] /= d[i];
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= l[i] * x[i + 1];
    return true;
}

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

}  // namespace

double jko_objective(std::span<const double> Y, std::span<const double> P, const CoefficientField& coeff,
                     const InternalEnergy& en, double tau) {
    if (Y.size() != P.size()) throw ShapeError("jko_objective: size mismatch");
    Model m;
    if (!evaluate(Y, P, coeff, en, tau, false, m)) {
        for (std::size_t i = 0; i + 1 < Y.size(); ++i) {
            if (!(Y[i + 1] > Y[i])) throw MonotonicityError("quantiles not strictly increasing at " + std::to_string(i + 1));
        }
        throw NonFiniteError("jko objective is not finite");
    }
    return m.phi;
}

std::vector<double> jko_gradient(std::span<const double> Y, std::span<const double> P,
                                  const CoefficientField& coeff, const InternalEnergy& en, double tau) {
    if (Y.size() != P.size()) throw ShapeError("jko_gradient: size mismatch");
    Model m;
    if (!evaluate(Y, P, coeff, en, tau, true, m)) throw NonFiniteError("jko gradient is not finite");
    return m.grad;
}

QuantileProfile jko_step(const QuantileProfile& Y_prev, const CoefficientField& coeff, const InternalEnergy& en,
                         double tau, const JkoConfig& cfg, JkoStepStats* stats) {
    if (!(tau > 0.0)) throw DomainError("jko_step needs tau > 0");
    const auto P = Y_prev.values();
    const std::size_t n = P.size();
    const double min_gap = 1e-14 * Y_prev.range();
    const double eps = std::numeric_limits<double>::epsilon();

    std::vector<double> Y(P.begin(), P.end());
    std::vector<double> step(n), trial(n);
    Model model, trial_model;
    int shifts = 0;

    for (int it = 0;; ++it) {
        if (!evaluate(Y, P, coeff, en, tau, true, model)) {
            throw NonFiniteError("jko objective not finite at Newton iterate " + std::to_string(it));
        }
        const double gnorm = sup_norm(model.grad);
        if (gnorm <= cfg.newton_tol * (1.0 + std::abs(model.phi))) {
            if (stats) *stats = {it, model.phi, gnorm, shifts};
            return QuantileProfile(std::move(Y));
        }
        if (it >= cfg.max_newton) {
            throw ConvergenceError("Newton did not converge in " + std::to_string(cfg.max_newton) +
                                   " iterations (gradient " + std::to_string(gnorm) + ")");
        }

        double shift = 0.0;
        const double dscale = sup_norm(model.diag);
        while (!solve_tridiagonal(model.diag, model.off, shift, model.grad, step)) {
            shift = shift == 0.0 ? 1e-10 * (1.0 + dscale) : 10.0 * shift;
            ++shifts;
            if (shift > 1e20 * (1.0 + dscale)) throw ConvergenceError("Hessian shift diverged");
        }
        double slope = 0.0;
        for (std::size_t i = 0; i < n; ++i) slope -= model.grad[i] * step[i];
        if (!(slope < 0.0)) {
            // not a descent direction: fall back to scaled gradient descent
            for (std::size_t i = 0; i < n; ++i) step[i] = model.grad[i] / model.diag[i];
            slope = 0.0;
            for (std::size_t i = 0; i < n; ++i) slope -= model.grad[i] * step[i];
        }

        const double slack = 10.0 * eps * (1.0 + std::abs(model.phi));
        double t = 1.0;
        bool accepted = false;
        for (int ls = 0; ls < 60; ++ls, t *= 0.5) {
            bool feasible = true;
            for (std::size_t i = 0; i < n; ++i) trial[i] = Y[i] - t * step[i];
            for (std::size_t i = 0; i + 1 < n && feasible; ++i) feasible = trial[i + 1] - trial[i] > min_gap;
            if (!feasible) continue;
            if (!evaluate(trial, P, coeff, en, tau, false, trial_model)) continue;
            if (trial_model.phi <= model.phi + 1e-4 * t * slope + slack) {
                accepted = true;
                break;
            }
        }
        if (!accepted) {
            throw ConvergenceError("line search failed at Newton iterate " + std::to_string(it) + " (gradient " +
                                   std::to_string(gnorm) + ")");
        }
        Y.swap(trial);
    }
}

namespace {

void record(Diagnostics& d, double t, const QuantileProfile& Y, const QuantileProfile* prev,
            const CoefficientField& coeff, const InternalEnergy& en, int iterations) {
    d.time.push_back(t);
    d.energy.push_back(energy_quantile_form(Y, coeff, en));
    d.entropy.push_back(entropy(quantiles_to_density(Y)));
    d.w2_step.push_back(prev ? wasserstein2(*prev, Y) : 0.0);
    d.m2.push_back(Y.second_moment());
    d.weighted_lm.push_back(weighted_lm_norm(quantiles_to_density(Y, EndCells::Dropped), coeff, d.lm_exponent));
    d.newton_iterations.push_back(iterations);
}

}  // namespace

FlowTrajectory run_flow(const QuantileProfile& Y0, const CoefficientField& coeff, const InternalEnergy& en,
                        const JkoConfig& cfg) {
    cfg.validate();
    FlowTrajectory traj;
    traj.tau = cfg.tau;
    auto& d = traj.diagnostics;
    d.lm_exponent = en.is_entropy() ? 2.0 : en.m();

    const double F0 = energy_quantile_form(Y0, coeff, en);
    if (!std::isfinite(F0)) throw DomainError("initial datum has infinite energy");

    traj.times.push_back(0.0);
    traj.profiles.push_back(Y0);
    record(d, 0.0, Y0, nullptr, coeff, en, 0);

    const auto steps = static_cast<long>(std::ceil(cfg.T / cfg.tau - 1e-9));
    for (long k = 1; k <= steps; ++k) {
        JkoStepStats st;
        auto Y = jko_step(traj.profiles.back(), coeff, en, cfg.tau, cfg, &st);
        const double t = static_cast<double>(k) * cfg.tau;
        record(d, t, Y, &traj.profiles.back(), coeff, en, st.iterations);
        const double Fprev = d.energy[d.energy.size() - 2], Fnow = d.energy.back();
        if (Fnow > Fprev + cfg.newton_tol * (1.0 + std::abs(Fprev))) {
            throw ConvergenceError("energy increased at step " + std::to_string(k) + ": " + std::to_string(Fprev) +
                                   " -> " + std::to_string(Fnow));
        }
        traj.times.push_back(t);
        traj.profiles.push_back(std::move(Y));
    }
    return traj;
}

FlowTrajectory run_flow(const DensityProfile& rho0, const CoefficientField& coeff, const InternalEnergy& en,
                        const JkoConfig& cfg) {
    cfg.validate();
    return run_flow(density_to_quantiles(rho0, static_cast<std::size_t>(cfg.n), cfg.mass_tol), coeff, en, cfg);
}

EstimateReport check_estimates(const FlowTrajectory& traj, const CoefficientField& coeff, const InternalEnergy& en,
                               double newton_tol, int pairs, std::uint64_t seed) {
    EstimateReport r;
    const auto& d = traj.diagnostics;
    if (traj.empty() || d.size() == 0) return r;
    const double tau = traj.tau;
    r.F0 = d.energy.front();
    const double T = traj.times.back();

    // Hoelder
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, T);
    const double c = std::sqrt(2.0 * std::max(r.F0, 0.0));
    r.holder_pairs = pairs;
    r.holder_pass = true;
    for (int k = 0; k < pairs; ++k) {
        const double s = uni(rng), t = uni(rng);
        const double w = wasserstein2(traj.at(s), traj.at(t));
        const double bound = c * std::sqrt(std::max(tau, std::abs(t - s)));
        const double ratio = bound > 0.0 ? w / bound : (w > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
        r.holder_max_ratio = std::max(r.holder_max_ratio, ratio);
    }
    r.holder_pass = r.holder_max_ratio <= 1.0;

    // squared increments
    for (double w : d.w2_step) r.w2_sq_sum += w * w;
    r.w2_sq_bound = 2.0 * tau * r.F0;
    r.w2_sum_pass = r.w2_sq_sum <= r.w2_sq_bound;

    // energy monotonicity
    r.energy_pass = true;
    for (std::size_t k = 1; k < d.size(); ++k) {
        const double inc = d.energy[k] - d.energy[k - 1];
        r.max_energy_increase = std::max(r.max_energy_increase, inc);
        if (inc > newton_tol * (1.0 + std::abs(d.energy[k - 1]))) r.energy_pass = false;
    }

    // second moment
    const double m20 = d.m2.front();
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double t = d.time[k];
        const double bound = 2.0 * m20 + 4.0 * std::max(r.F0, 0.0) * std::max(tau, t);
        r.m2_max_ratio = std::max(r.m2_max_ratio, bound > 0.0 ? d.m2[k] / bound : 0.0);
        r.m2_fitted_C = std::max(r.m2_fitted_C, (d.m2[k] - 2.0 * m20) / (1.0 + t));
    }
    r.m2_pass = r.m2_max_ratio <= 1.0;

    // weighted L^m Gronwall
    r.L = coeff.L_bound();
    const double lm0 = d.weighted_lm.front();
    for (std::size_t k = 0; k < d.size(); ++k) {
        const double bound = std::exp((d.lm_exponent - 1.0) * r.L * d.time[k]) * lm0;
        r.gronwall_max_ratio = std::max(r.gronwall_max_ratio, d.weighted_lm[k] / bound);
    }
    r.gronwall_pass = r.gronwall_max_ratio <= 1.0 + 1e-8;

    r.entropy_initial = d.entropy.front();
    r.entropy_final = d.entropy.back();
    r.entropy_min = *std::min_element(d.entropy.begin(), d.entropy.end());
    (void)en;
    return r;
}

ContractionReport contraction_test(const DensityProfile& rho0_a, const DensityProfile& rho0_b,
                                   const CoefficientField& coeff, const InternalEnergy& en, const JkoConfig& cfg,
                                   double k, const std::vector<double>& times) {
    cfg.validate();
    const auto n = static_cast<std::size_t>(cfg.n);
    const auto Ya = density_to_quantiles(rho0_a, n, cfg.mass_tol);
    const auto Yb = density_to_quantiles(rho0_b, n, cfg.mass_tol);

    auto fa = std::async(std::launch::async, [&] { return run_flow(Ya, coeff, en, cfg); });
    auto fb = std::async(std::launch::async, [&] { return run_flow(Yb, coeff, en, cfg); });
    const FlowTrajectory ta = fa.get();
    const FlowTrajectory tb = fb.get();

    ContractionReport r;
    r.k = k;
    r.slack = 10.0 * (cfg.tau + 1.0 / cfg.n);
    r.w2_initial = wasserstein2(ta.profiles.front(), tb.profiles.front());
    const double w0sq = r.w2_initial * r.w2_initial;
    r.times = times.empty() ? ta.times : times;
    for (double t : r.times) {
        if (t < 0.0 || t > ta.times.back() + 1e-12) {
            throw TimeRangeError("contraction time " + std::to_string(t) + " outside the run");
        }
        const auto idx = std::min(static_cast<std::size_t>(std::llround(t / cfg.tau)), ta.profiles.size() - 1);
        const auto& A = ta.profiles[idx];
        const auto& B = tb.profiles[idx];
        const double w = wasserstein2(A, B);
        r.w2.push_back(w);
        double ratio;
        if (w0sq > 0.0) {
            ratio = w * w * std::exp(k * ta.times[idx]) / w0sq;
        } else {
            ratio = w > 0.0 ? std::numeric_limits<double>::infinity() : 0.0;
        }
        r.ratio.push_back(ratio);
        r.mean_gap.push_back(A.mean() - B.mean());
        r.max_ratio = std::max(r.max_ratio, ratio);
    }
    r.pass = r.max_ratio <= 1.0 + r.slack;
    return r;
}

}  // namespace degflow
