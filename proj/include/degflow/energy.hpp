#pragma once

#include "degflow/profile.hpp"
#include "degflow/transform.hpp"

#include <span>
#include <string>

namespace degflow {

/// Growth data of phi'': c_m s^{m-2} <= phi''(s) <= C_mu s^{mu-2}.
struct GrowthData {
    double m = 1.0;
    double mu = 1.0;
    double c_m = 1.0;
    double C_mu = 1.0;
};

/// Internal energy density phi and the reduced function psi(z) = phi(z)/z.
///
///   Entropy:  phi(s) = s log s,        psi(z) = log z
///   Power(m): phi(s) = s^m / (m - 1),  psi(z) = z^{m-1} / (m - 1)
///
/// The entropy has m = 1 in the growth sandwich, so it sits outside the
/// m > 1 regime of the theory; constructing it requires the LinearCase tag.
class InternalEnergy {
public:
    enum class Kind { Entropy, Power };
    struct LinearCase {};

    static InternalEnergy entropy(LinearCase);
    /// Throws DomainError unless m > 1.
    static InternalEnergy power(double m);

    Kind kind() const { return kind_; }
    bool is_entropy() const { return kind_ == Kind::Entropy; }
    /// Exponent m; 1 for the entropy.
    double m() const { return m_; }
    std::string name() const;
    GrowthData growth() const;

    double phi(double s) const;
    double phi_d1(double s) const;
    double phi_d2(double s) const;
    double psi(double z) const;
    double psi_d1(double z) const;
    double psi_d2(double z) const;

    /// phi(a rho)/a, computed without forming a*rho when a is large.
    double density_integrand(double a, double rho) const;

private:
    Kind kind_ = Kind::Entropy;
    double m_ = 1.0;
};

/// F^a[rho] = \int phi(a rho)/a dy + \int V rho dy. Trapezoid on nodal
/// profiles; midpoint in each cell for cellwise ones. Cells or nodes with
/// rho = 0 contribute nothing. Throws NonFiniteError (naming y) on overflow.
double energy_density_form(const DensityProfile& rho, const CoefficientField& coeff, const InternalEnergy& en);

/// Quantile form of F^a:
///   \sum_{i<n} dw psi(a(Ybar_i) dw / (Y_{i+1} - Y_i)) + \sum_i dw V(Y_i),
/// Ybar_i the cell midpoint. With EndCells::Mirrored two half-weight terms
/// for the mirrored end cells of `quantiles_to_density` are added, which makes
/// the value match the density form on the induced piecewise-constant density.
double energy_quantile_form(const QuantileProfile& Y, const CoefficientField& coeff, const InternalEnergy& en,
                            EndCells ends = EndCells::Dropped);
/// Same, on raw values; throws MonotonicityError on a non-increasing pair.
double energy_quantile_form(std::span<const double> Y, const CoefficientField& coeff, const InternalEnergy& en,
                            EndCells ends = EndCells::Dropped);

/// H[rho] = \int rho log rho dy with 0 log 0 = 0.
double entropy(const DensityProfile& rho);

/// \int a^{m-1} rho^m dy. Throws DomainError unless m > 1 and NonFiniteError
/// on overflow.
double weighted_lm_norm(const DensityProfile& rho, const CoefficientField& coeff, double m);

}  // namespace degflow
