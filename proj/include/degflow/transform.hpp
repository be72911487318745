#pragma once

#include "degflow/mobility.hpp"
#include "degflow/potential.hpp"
#include "degflow/profile.hpp"

#include <memory>
#include <optional>
#include <vector>

namespace degflow {

/// y = alpha(x) = \int_0^x dz/g(z), a bijection (-1,1) -> R for fast-decay g.
///
/// The power family with p = 2 uses alpha = atanh. Everything else goes
/// through a table of alpha at graded nodes x = tanh(s), built once by
/// adaptive Gauss-Kronrod on each segment; evaluation integrates from the
/// nearest node and inversion runs a bracketed Newton iteration with
/// alpha' = 1/g.
class CoordinateMap {
public:
    /// Throws SlowDecayError unless the mobility is classified Fast.
    static CoordinateMap build(const MobilityFunction& g, double quad_tol = 1e-12);

    const MobilityFunction& mobility() const { return table_->g; }
    double quad_tol() const { return table_->tol; }

    double alpha(double x) const;
    /// Throws ConvergenceError if the Newton/bisection loop stalls.
    double alpha_inv(double y) const;

private:
    struct Table {
        MobilityFunction g;
        double tol = 1e-12;
        bool closed_form = false;
        std::vector<double> ss;      // nodes in s = atanh(x), uniformly spaced
        std::vector<double> alphas;  // alpha at the nodes
    };
    explicit CoordinateMap(std::shared_ptr<const Table> t) : table_(std::move(t)) {}

    /// d alpha / ds = (1 - x^2) / g(x) at x = tanh(s).
    double density_s(double s) const;
    /// Integral of density_s over [a, b].
    double integral(double a, double b) const;
    /// alpha as a function of s.
    double alpha_s(double s) const;

    std::shared_ptr<const Table> table_;
};

/// Transformed coefficients at one point, all computed from x-side formulas:
///   a = 1/g, a'/a = -g', a''/a = (g')^2 - g g'',
///   V = W, V' = g W', V'' = g^2 W'' + g g' W'.
struct CoefficientSample {
    double x = 0.0;  // alpha^{-1}(y); equals y for test coefficients
    double a = 1.0;
    double ratio1 = 0.0;  // a'/a
    double ratio2 = 0.0;  // a''/a
    double V = 0.0;
    double V_d1 = 0.0;
    double V_d2 = 0.0;
};

/// a(y), V(y) and their derivatives on the line, plus the grid estimates of
/// the potential assumptions. Immutable; cheap to copy.
class CoefficientField {
public:
    /// Built from a coordinate map and a potential on (-1,1). Throws
    /// DomainError if W is negative on the assumption grid.
    static CoefficientField from_map(const CoordinateMap& map, const PotentialSpec& W, int grid_n = 4001);

    /// Test-only constant coefficient a = 1 with V given directly on the
    /// line. No admissible mobility produces it; it isolates the solvers
    /// against exact heat / Fokker-Planck solutions.
    static CoefficientField unit_test_coefficient(const PotentialSpec& V = PotentialSpec::zero());

    CoefficientSample sample(double y) const;
    /// x-side evaluation, no inversion. Requires a coordinate map.
    CoefficientSample sample_x(double x) const;

    double a(double y) const { return sample(y).a; }
    double a_ratio1(double y) const { return sample(y).ratio1; }
    double a_ratio2(double y) const { return sample(y).ratio2; }
    double V(double y) const { return sample(y).V; }
    double V_d1(double y) const { return sample(y).V_d1; }
    double V_d2(double y) const { return sample(y).V_d2; }

    bool has_map() const { return map_.has_value(); }
    const CoordinateMap& map() const;
    const PotentialSpec& potential() const { return W_; }
    bool is_unit() const { return !map_.has_value(); }

    /// sup over the grid of [g^2 W']_x  (a (V'/a)' for the unit coefficient).
    double L_bound() const { return L_bound_; }
    /// inf over the grid of g^2 W'' + g g' W'  (V'' for the unit coefficient).
    double lambda_gW1() const { return lambda_gW1_; }

private:
    CoefficientField() = default;

    std::optional<CoordinateMap> map_;
    PotentialSpec W_;
    bool closed_p2_ = false;
    double L_bound_ = 0.0;
    double lambda_gW1_ = 0.0;
};

template <class P>
struct RescaleResult {
    P profile;
    double source_mass = 0.0;
    double mass = 0.0;
    double relative_deviation() const { return (mass - source_mass) / source_mass; }
};

/// rho(alpha(x)) = g(x) u(x). Nodal profiles are mapped pointwise onto the
/// image grid; cellwise profiles transfer each cell's mass exactly. The mass
/// is reported, never renormalised.
RescaleResult<DensityProfile> rescale_u_to_rho(const DensityProfileX& u, const CoordinateMap& map);

/// u(x) = a(alpha(x)) rho(alpha(x)); inverse of rescale_u_to_rho.
RescaleResult<DensityProfileX> rescale_rho_to_u(const DensityProfile& rho, const CoordinateMap& map);

}  // namespace degflow
