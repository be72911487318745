#pragma once

#include "degflow/energy.hpp"
#include "degflow/jko.hpp"
#include "degflow/mobility.hpp"
#include "degflow/potential.hpp"
#include "degflow/profile.hpp"
#include "degflow/transform.hpp"

#include <string>
#include <vector>

namespace degflow {

struct FdConfig {
    enum class Domain { Y, X };
    Domain domain = Domain::Y;
    double L = 8.0;      // half width of the truncated y-interval
    int cells = 400;
    double cfl = 0.9;
    double T = 0.25;
    /// Extra snapshot times in (0, T); 0 and T are always saved.
    std::vector<double> save_times;
    /// If positive, also save every `save_interval`.
    double save_interval = 0.0;

    /// Throws ConfigError on cells < 16, L <= 0, cfl outside (0,1], T <= 0.
    void validate() const;
};

/// Cellwise snapshots of an explicit finite-volume run.
template <class Space>
struct DensityTrajectory {
    std::vector<double> times;
    std::vector<Profile<Space>> profiles;
    std::vector<double> mass;
    long steps = 0;
    double dt_min = 0.0;
    double dt_max = 0.0;
    double min_value = 0.0;  // smallest cell average seen during the run
    std::string scheme;

    bool empty() const { return profiles.empty(); }
};

using FdTrajectory = DensityTrajectory<YSpace>;
using FdTrajectoryX = DensityTrajectory<XSpace>;

/// rho_t = (rho (phi'(a rho) + V)_y)_y on [-L, L] with zero flux at +-L.
/// Upwind fluxes rho_up * v with v = -(xi_{j+1} - xi_j)/dy and
/// xi = phi'(a rho) + V (entropy: rho floored at 1e-300 inside the log).
///
/// The step is dt = cfl * min(dy^2 / (2 D), 1 / R) where D is the largest edge
/// diffusivity rho a phi''(a rho) and R the largest cell outflow rate; the
/// second bound is what keeps every cell average non-negative. Steps are
/// clipped to land on the save times.
/// Throws CflError if dt degenerates and BlowupError on a non-finite state.
FdTrajectory solve_rescaled(const DensityProfile& rho0, const CoefficientField& coeff, const InternalEnergy& en,
                            const FdConfig& cfg);

/// u_t = (g^2 u (phi'(u) + W)_x)_x on (-1,1), cells of equal width, edge
/// mobility g^2 at the cell edges. No boundary condition is imposed: g
/// vanishes at +-1, so the two boundary fluxes are zero.
/// Throws DomainError if g(+-1) != 0.
FdTrajectoryX solve_original(const DensityProfileX& u0, const MobilityFunction& g, const PotentialSpec& W,
                             const InternalEnergy& en, const FdConfig& cfg);

/// Piecewise-constant densities of a JKO trajectory (mirrored end cells).
FdTrajectory to_density_trajectory(const FlowTrajectory& traj);

/// Cell averages of a profile over the given edges (exact for both layouts).
template <class Space>
std::vector<double> project_to_cells(const Profile<Space>& p, const std::vector<double>& edges);

struct ComparisonReport {
    std::vector<double> times;
    std::vector<double> w2;
    std::vector<double> l1;
    double max_w2() const;
    double max_l1() const;
};

/// W2 (FD density converted to quantiles at the JKO resolution) and L1 at the
/// requested times. The JKO side uses its piecewise-constant interpolant; the
/// FD side needs a snapshot within 1e-9 of each time.
/// Throws TimeRangeError otherwise or when a time lies outside either run.
ComparisonReport compare_jko_fd(const FlowTrajectory& traj_jko, const FdTrajectory& traj_fd,
                                const std::vector<double>& times);

}  // namespace degflow
