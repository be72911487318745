#include "degflow/plots.hpp"

#include "degflow/csv.hpp"
#include "degflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace degflow {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 20, kTop = 40, kBottom = 50;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf", "#7f7f7f"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string fmt(double v, const char* f = "%.4g") {
    char buf[32];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open " + path + " for writing");
    os << text;
}

std::vector<std::size_t> pick(std::size_t count, std::size_t max_curves) {
    std::vector<std::size_t> idx;
    if (count == 0) return idx;
    const std::size_t k = std::min(count, std::max<std::size_t>(max_curves, 1));
    for (std::size_t i = 0; i < k; ++i) {
        idx.push_back(k == 1 ? 0 : i * (count - 1) / (k - 1));
    }
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
    return idx;
}

}  // namespace

std::string svg_line_plot(const std::vector<Series>& series, const std::string& title, const std::string& xlabel,
                          const std::string& ylabel) {
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : series) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            x0 = std::min(x0, s.x[i]);
            x1 = std::max(x1, s.x[i]);
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    }
    if (!(x1 >= x0)) x0 = 0, x1 = 1;
    if (!(y1 >= y0)) y0 = 0, y1 = 1;
    if (x1 == x0) x0 -= 0.5, x1 += 0.5;
    if (y1 == y0) y0 -= 0.5, y1 += 0.5;
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - x0) / (x1 - x0) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - y0) / (y1 - y0)) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
       << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(title)
       << "</text>\n";
    os << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << pw << "\" height=\"" << ph
       << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = x0 + (x1 - x0) * k / 4.0, yv = y0 + (y1 - y0) * k / 4.0;
        os << "<text x=\"" << fmt(px(xv), "%.1f") << "\" y=\"" << kHeight - kBottom + 16
           << "\" text-anchor=\"middle\">" << fmt(xv) << "</text>\n";
        os << "<text x=\"" << kLeft - 6 << "\" y=\"" << fmt(py(yv) + 4, "%.1f") << "\" text-anchor=\"end\">"
           << fmt(yv) << "</text>\n";
    }
    os << "<text x=\"" << kLeft + pw / 2 << "\" y=\"" << kHeight - 10 << "\" text-anchor=\"middle\">"
       << escape(xlabel) << "</text>\n";
    os << "<text x=\"16\" y=\"" << kTop + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << kTop + ph / 2 << ")\">" << escape(ylabel) << "</text>\n";

    for (std::size_t s = 0; s < series.size(); ++s) {
        const auto& ser = series[s];
        const char* colour = kColours[s % (sizeof kColours / sizeof *kColours)];
        os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
        const std::size_t n = std::min(ser.x.size(), ser.y.size());
        for (std::size_t i = 0; i < n; ++i) {
            os << (i ? " " : "") << fmt(px(ser.x[i]), "%.2f") << ',' << fmt(py(ser.y[i]), "%.2f");
        }
        os << "\"/>\n";
        if (!ser.label.empty()) {
            const double ly = kTop + 14 + 15.0 * static_cast<double>(s);
            os << "<text x=\"" << kLeft + pw - 8 << "\" y=\"" << ly << "\" text-anchor=\"end\" fill=\"" << colour
               << "\">" << escape(ser.label) << "</text>\n";
        }
    }
    os << "</svg>\n";
    return os.str();
}

PlotResult emit_plots(const FlowTrajectory& traj, const std::string& out_dir, std::size_t max_curves) {
    PlotResult res;
    if (traj.empty()) {
        res.warnings.push_back("empty trajectory: no plots written");
        return res;
    }
    std::vector<Series> dens;
    for (std::size_t k : pick(traj.profiles.size(), max_curves)) {
        const auto rho = quantiles_to_density(traj.profiles[k]);
        dens.push_back({"t=" + fmt(traj.times[k]), rho.sample_points(),
                        std::vector<double>(rho.values().begin(), rho.values().end())});
    }
    const auto& d = traj.diagnostics;
    const std::vector<std::pair<std::string, const std::vector<double>*>> diag{
        {"energy", &d.energy}, {"entropy", &d.entropy}, {"m2", &d.m2}};

    write_file(out_dir + "/densities.svg", svg_line_plot(dens, "density snapshots", "y", "rho"));
    res.files.push_back(out_dir + "/densities.svg");
    for (const auto& [name, vals] : diag) {
        const std::string path = out_dir + "/" + name + ".svg";
        write_file(path, svg_line_plot({{name, d.time, *vals}}, name + " vs time", "t", name));
        res.files.push_back(path);
    }
    return res;
}

template <class Space>
PlotResult emit_plots(const DensityTrajectory<Space>& traj, const std::string& out_dir, std::size_t max_curves) {
    PlotResult res;
    if (traj.empty()) {
        res.warnings.push_back("empty trajectory: no plots written");
        return res;
    }
    std::vector<Series> dens;
    for (std::size_t k : pick(traj.profiles.size(), max_curves)) {
        const auto& p = traj.profiles[k];
        dens.push_back({"t=" + fmt(traj.times[k]), p.sample_points(),
                        std::vector<double>(p.values().begin(), p.values().end())});
    }
    write_file(out_dir + "/densities.svg", svg_line_plot(dens, "density snapshots", "position", "density"));
    res.files.push_back(out_dir + "/densities.svg");
    write_file(out_dir + "/mass.svg", svg_line_plot({{"mass", traj.times, traj.mass}}, "mass vs time", "t", "mass"));
    res.files.push_back(out_dir + "/mass.svg");
    return res;
}

template PlotResult emit_plots(const DensityTrajectory<YSpace>&, const std::string&, std::size_t);
template PlotResult emit_plots(const DensityTrajectory<XSpace>&, const std::string&, std::size_t);

}  // namespace degflow
