#pragma once

#include <span>
#include <vector>

namespace degflow {

/// How (grid, values) encode a density.
///  Nodal:    values at grid nodes, piecewise linear in between (trapezoid mass).
///  Cellwise: grid holds cell edges, values.size() == grid.size()-1, constant
///            on each cell (exact mass).
enum class Layout { Nodal, Cellwise };

struct YSpace {};  // the transformed variable y on the whole line
struct XSpace {};  // the original variable x in (-1,1)

/// Non-negative density sampled on a strictly increasing grid. The Space tag
/// keeps profiles in the two variables from being mixed up.
template <class Space>
class Profile {
public:
    Profile() = default;

    static Profile nodal(std::vector<double> grid, std::vector<double> values);
    static Profile cellwise(std::vector<double> edges, std::vector<double> values);

    Layout layout() const { return layout_; }
    bool is_cellwise() const { return layout_ == Layout::Cellwise; }
    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    double lo() const { return grid_.front(); }
    double hi() const { return grid_.back(); }

    /// Trapezoid integral (nodal) or exact cell sum (cellwise).
    double mass() const;
    /// Integral of y * density, same rule as mass().
    double first_moment() const;
    /// Integral of y^2 * density, same rule as mass().
    double second_moment() const;
    /// Pointwise value; 0 outside the support. Cellwise profiles return the
    /// value of the cell containing y (right-continuous).
    double value_at(double y) const;
    /// Cell centres (cellwise) or the nodes themselves (nodal).
    std::vector<double> sample_points() const;

    /// Same data, tagged for the other space. Used by the coordinate transform.
    template <class Other>
    Profile<Other> retag() const {
        return layout_ == Layout::Nodal ? Profile<Other>::nodal(grid_, values_)
                                        : Profile<Other>::cellwise(grid_, values_);
    }

private:
    Layout layout_ = Layout::Nodal;
    std::vector<double> grid_;
    std::vector<double> values_;
};

using DensityProfile = Profile<YSpace>;
using DensityProfileX = Profile<XSpace>;

/// Quantile function sampled at the midpoints omega_i = (i - 1/2)/n.
class QuantileProfile {
public:
    QuantileProfile() = default;
    /// Throws MonotonicityError unless strictly increasing and finite.
    explicit QuantileProfile(std::vector<double> values);

    std::size_t n() const { return values_.size(); }
    double d_omega() const { return 1.0 / static_cast<double>(values_.size()); }
    double omega(std::size_t i) const { return (static_cast<double>(i) + 0.5) * d_omega(); }
    std::span<const double> values() const { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    double mean() const;
    /// \sum d_omega Y_i^2.
    double second_moment() const;
    /// Y_n - Y_1.
    double range() const { return values_.back() - values_.front(); }

    QuantileProfile shifted(double c) const;

private:
    std::vector<double> values_;
};

/// CDF by the profile's own rule, inverted by piecewise-linear interpolation
/// at omega_i, choosing the infimum on flat stretches. Throws MassError when
/// the mass differs from one by more than `mass_tol`.
QuantileProfile density_to_quantiles(const DensityProfile& rho, std::size_t n, double mass_tol = 1e-6);

enum class EndCells {
    Mirrored,  // add half-mass cells of half width at both ends: total mass 1
    Dropped,   // only the n-1 interior cells: total mass 1 - d_omega
};

/// Piecewise-constant density d_omega / (Y_{i+1} - Y_i) on [Y_i, Y_{i+1}].
DensityProfile quantiles_to_density(const QuantileProfile& Y, EndCells ends = EndCells::Mirrored);

/// Exact 1D quadratic Wasserstein distance between equal-n quantile profiles.
/// Throws ShapeError on mismatched n.
double wasserstein2(const QuantileProfile& A, const QuantileProfile& B);

double second_moment(const DensityProfile& rho);

/// L1 distance between two profiles, exact for the piecewise linear/constant
/// interpretation of each layout.
template <class Space>
double l1_distance(const Profile<Space>& a, const Profile<Space>& b);

}  // namespace degflow
