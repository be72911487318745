#pragma once

#include "degflow/energy.hpp"
#include "degflow/mobility.hpp"
#include "degflow/potential.hpp"
#include "degflow/transform.hpp"

#include <array>
#include <string>
#include <vector>

namespace degflow {

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Hessian in (p,q) of f(p,q) = psi(a(p)/q) + V(p) - lambda p^2 / 2, q > 0.
/// With z = a/q and the log-derivatives r1 = a'/a, r2 = a''/a:
///   H11 = r1^2 z^2 psi'' + r2 z psi' + V'' - lambda
///   H12 = -(r1/q) (z^2 psi'' + z psi')
///   H22 = (z^2 psi'' + 2 z psi') / q^2
/// Throws DomainError for q <= 0.
Matrix2 hessian_f(double p, double q, const CoefficientField& coeff, const InternalEnergy& en, double lambda);
/// Same, from an already evaluated coefficient sample.
Matrix2 hessian_f(const CoefficientSample& s, double q, const InternalEnergy& en, double lambda);

/// f itself, for finite-difference checks.
double f_value(double p, double q, const CoefficientField& coeff, const InternalEnergy& en, double lambda);

/// Entry signs plus determinant, with a relative round-off allowance.
bool is_psd(const Matrix2& H, double rel_tol = 1e-12);

enum class Regime { Heat, LinearFP, PorousMedium, General };
std::string regime_name(Regime r);

struct NamedCheck {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Where the Hessian is sampled. The p-points are images alpha(x_i) of a
/// uniform interior x-grid (for the unit test coefficient, a uniform y-grid
/// on [-p_half_width, p_half_width]); q is log-spaced on [q_min, q_max].
struct ConvexityGrid {
    int p_points = 64;
    int q_points = 64;
    double q_min = 1e-3;
    double q_max = 1e3;
    double p_half_width = 6.0;
};

struct ConvexityReport {
    double lambda_best = 0.0;      // largest lambda with an all-true grid; -inf if none
    double lambda_tested = 0.0;    // lambda used for psd_grid and the conditions
    std::vector<std::vector<bool>> psd_grid;  // [p index][q index] at lambda_tested
    std::vector<double> p_grid;
    std::vector<double> q_grid;
    Regime regime = Regime::General;
    double m = 1.0;                // energy exponent, 1 for the entropy
    std::vector<NamedCheck> conditions;
    ConvexityGrid grid;
    bool all_pass() const;
};

/// Grid certification of lambda-convexity of f. lambda_best is refined by
/// bisection to within `bisect_tol`.
ConvexityReport certify_convexity(const CoefficientField& coeff, const InternalEnergy& en, double lambda = 0.0,
                                  const ConvexityGrid& grid = {}, double bisect_tol = 1e-7);

/// inf_x (-g g''). Power family: closed form in u = x^2, minimised by Brent
/// on [0,1] including the endpoint limit. Custom: interior grid minimum
/// refined by Brent between the neighbouring grid points.
/// Throws SlowDecayError for slow-decay mobilities.
double heat_lambda(const MobilityFunction& g, int grid_n = 20001);

struct FokkerPlanckLambdas {
    double lambda_d = 0.0;  // inf(-g g'')
    double lambda_W = 0.0;  // inf(g^2 W'' + g g' W')
    double lambda() const { return lambda_d + lambda_W; }
};

FokkerPlanckLambdas fokker_planck_lambdas(const MobilityFunction& g, const PotentialSpec& W, int grid_n = 20001);

/// Porous-medium classification for phi(s) = s^m/(m-1): concavity of
/// g^{1/m}, the sign of the (1,1) entry (m-1)(g')^2 - g g'' (convexity of
/// g^{2-m} for m > 2, concavity for m < 2) and grid PSD at `lambda`.
/// Throws DomainError unless m > 1.
ConvexityReport porous_medium_conditions(double m, const MobilityFunction& g, const PotentialSpec& W,
                                         double lambda = 0.0, const ConvexityGrid& grid = {});

}  // namespace degflow
