#pragma once

#include "degflow/energy.hpp"
#include "degflow/profile.hpp"
#include "degflow/transform.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace degflow {

struct JkoConfig {
    double tau = 1e-3;
    int n = 200;
    double T = 0.5;
    double newton_tol = 1e-10;
    int max_newton = 100;
    /// Mass tolerance when converting the initial density to quantiles.
    double mass_tol = 1e-6;

    /// Throws ConfigError unless tau > 0, tau <= T, n >= 2, newton_tol > 0,
    /// max_newton >= 1.
    void validate() const;
};

/// Per-step series; index k belongs to time k*tau.
struct Diagnostics {
    std::vector<double> time;
    std::vector<double> energy;       // discrete F^a (the functional the step minimises)
    std::vector<double> entropy;      // H of the induced piecewise-constant density
    std::vector<double> w2_step;      // W2(rho^{k-1}, rho^k); 0 at k = 0
    std::vector<double> m2;           // second moment of the quantile profile
    std::vector<double> weighted_lm;  // \int a^{m-1} rho^m, interior cells
    double lm_exponent = 2.0;         // m of weighted_lm (the energy's m, or 2 for the entropy)
    std::vector<int> newton_iterations;

    std::size_t size() const { return time.size(); }
};

struct FlowTrajectory {
    double tau = 0.0;
    std::vector<double> times;
    std::vector<QuantileProfile> profiles;
    Diagnostics diagnostics;

    bool empty() const { return profiles.empty(); }
    /// Piecewise-constant interpolant: rho^k on ((k-1) tau, k tau], rho^0 at t <= 0.
    const QuantileProfile& at(double t) const;
};

struct JkoStepStats {
    int iterations = 0;
    double objective = 0.0;
    double grad_norm = 0.0;
    int shifts = 0;  // Levenberg shifts applied to indefinite Hessians
};

/// Discrete penalised functional
///   Phi(Y) = (1/2 tau) sum dw (Y_i - P_i)^2 + energy_quantile_form(Y).
double jko_objective(std::span<const double> Y, std::span<const double> P, const CoefficientField& coeff,
                     const InternalEnergy& en, double tau);
/// Analytic gradient of jko_objective.
std::vector<double> jko_gradient(std::span<const double> Y, std::span<const double> P,
                                 const CoefficientField& coeff, const InternalEnergy& en, double tau);

/// One minimising-movement step by damped Newton on the tridiagonal Hessian.
/// Throws ConvergenceError after cfg.max_newton iterations.
QuantileProfile jko_step(const QuantileProfile& Y_prev, const CoefficientField& coeff, const InternalEnergy& en,
                         double tau, const JkoConfig& cfg, JkoStepStats* stats = nullptr);

/// Iterates jko_step N = ceil(T/tau) times. Rejects an initial datum with
/// non-finite energy (DomainError) and stops with ConvergenceError when the
/// energy increases by more than newton_tol (1 + |F|).
FlowTrajectory run_flow(const DensityProfile& rho0, const CoefficientField& coeff, const InternalEnergy& en,
                        const JkoConfig& cfg);
FlowTrajectory run_flow(const QuantileProfile& Y0, const CoefficientField& coeff, const InternalEnergy& en,
                        const JkoConfig& cfg);

struct EstimateReport {
    double F0 = 0.0;

    // Hoelder: W2(rho(s), rho(t)) <= sqrt(2 F0) max(tau, |t-s|)^{1/2}
    int holder_pairs = 0;
    double holder_max_ratio = 0.0;  // max of lhs / rhs
    bool holder_pass = false;

    // sum of squared W2 increments <= 2 tau F0
    double w2_sq_sum = 0.0;
    double w2_sq_bound = 0.0;
    bool w2_sum_pass = false;

    // energy non-increasing up to newton_tol (1 + |F|)
    double max_energy_increase = 0.0;
    bool energy_pass = false;

    // m2(t) <= 2 m2(0) + 4 F0 max(tau, t); fitted C in m2(t) <= 2 m2(0) + C (1 + t)
    double m2_fitted_C = 0.0;
    double m2_max_ratio = 0.0;
    bool m2_pass = false;

    // weighted L^m: norm(t) <= exp((m-1) L t) norm(0)
    double L = 0.0;
    double gronwall_max_ratio = 0.0;
    bool gronwall_pass = false;

    // entropy series, descriptive only
    double entropy_initial = 0.0;
    double entropy_final = 0.0;
    double entropy_min = 0.0;

    bool all_pass() const { return holder_pass && w2_sum_pass && energy_pass && m2_pass && gronwall_pass; }
};

/// Evaluates the a-priori estimates on a trajectory. F0 is the discrete
/// energy at step 0; Hoelder pairs are drawn uniformly from [0, T] with the
/// given seed.
EstimateReport check_estimates(const FlowTrajectory& traj, const CoefficientField& coeff, const InternalEnergy& en,
                               double newton_tol = 1e-10, int pairs = 100, std::uint64_t seed = 12345);

struct ContractionReport {
    double k = 0.0;
    double slack = 0.0;
    double w2_initial = 0.0;
    std::vector<double> times;
    std::vector<double> w2;          // W2(rho(t), eta(t))
    std::vector<double> ratio;       // W2^2(t) e^{k t} / W2^2(0); 0 when both distances vanish
    std::vector<double> mean_gap;    // mean(rho(t)) - mean(eta(t))
    double max_ratio = 0.0;
    bool pass = false;
};

/// Runs the two flows concurrently and compares them at `times` (default:
/// every step). Passes when max ratio <= 1 + 10 (tau + 1/n).
ContractionReport contraction_test(const DensityProfile& rho0_a, const DensityProfile& rho0_b,
                                   const CoefficientField& coeff, const InternalEnergy& en, const JkoConfig& cfg,
                                   double k, const std::vector<double>& times = {});

}  // namespace degflow
