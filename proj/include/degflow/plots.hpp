#pragma once

#include "degflow/fdsolver.hpp"
#include "degflow/jko.hpp"

#include <string>
#include <vector>

namespace degflow {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

/// Static SVG line plot, one polyline per series with one vertex per point.
std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel);

struct PlotResult {
    std::vector<std::string> files;
    std::vector<std::string> warnings;
};

/// densities.svg (snapshot overlay, at most `max_curves` evenly chosen
/// snapshots) plus energy.svg, entropy.svg and m2.svg against time. An empty
/// trajectory writes nothing and returns a warning.
PlotResult emit_plots(const FlowTrajectory& traj, const std::string& out_dir, std::size_t max_curves = 6);
/// Snapshot overlay and mass series of a finite-volume run.
template <class Space>
PlotResult emit_plots(const DensityTrajectory<Space>& traj, const std::string& out_dir, std::size_t max_curves = 6);

}  // namespace degflow
