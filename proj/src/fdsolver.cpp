#include "degflow/fdsolver.hpp"

#include "degflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

namespace degflow {

void FdConfig::validate() const {
    if (cells < 16) throw ConfigError("fd.cells must be at least 16");
    if (domain == Domain::Y && !(L > 0.0)) throw ConfigError("fd.L must be positive");
    if (!(cfl > 0.0 && cfl <= 1.0)) throw ConfigError("fd.cfl must lie in (0, 1]");
    if (!(T > 0.0) || !std::isfinite(T)) throw ConfigError("fd.T must be positive");
    if (save_interval < 0.0) throw ConfigError("fd.save_interval must be non-negative");
}

template <class Space>
std::vector<double> project_to_cells(const Profile<Space>& p, const std::vector<double>& edges) {
    const auto grid = p.grid();
    const auto vals = p.values();
    // cumulative mass at the breakpoints
    std::vector<double> M(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double h = grid[k] - grid[k - 1];
        M[k] = M[k - 1] + (p.is_cellwise() ? vals[k - 1] * h : 0.5 * (vals[k] + vals[k - 1]) * h);
    }
    auto cdf = [&](double y) {
        if (y <= grid.front()) return 0.0;
        if (y >= grid.back()) return M.back();
        const auto k = static_cast<std::size_t>(std::upper_bound(grid.begin(), grid.end(), y) - grid.begin()) - 1;
        const double s = y - grid[k];
        if (p.is_cellwise()) return M[k] + vals[k] * s;
        const double h = grid[k + 1] - grid[k];
        return M[k] + vals[k] * s + 0.5 * (vals[k + 1] - vals[k]) * s * s / h;
    };
    std::vector<double> out(edges.size() - 1);
    double prev = cdf(edges[0]);
    for (std::size_t j = 0; j + 1 < edges.size(); ++j) {
        const double next = cdf(edges[j + 1]);
        out[j] = std::max(0.0, next - prev) / (edges[j + 1] - edges[j]);
        prev = next;
    }
    return out;
}

template std::vector<double> project_to_cells(const Profile<YSpace>&, const std::vector<double>&);
template std::vector<double> project_to_cells(const Profile<XSpace>&, const std::vector<double>&);

namespace {

struct StepProblem {
    std::vector<double> edges;
    std::vector<double> weight;  // edge mobility; zero at both boundary edges
    std::function<void(const std::vector<double>&, std::vector<double>&)> xi;
    std::function<double(std::size_t, double)> diffusivity;  // cell j, value
};

std::vector<double> snapshot_times(const FdConfig& cfg) {
    std::vector<double> ts{0.0, cfg.T};
    for (double t : cfg.save_times) {
        if (!(t >= 0.0 && t <= cfg.T)) throw TimeRangeError("save time " + std::to_string(t) + " outside [0, T]");
        ts.push_back(t);
    }
    if (cfg.save_interval > 0.0) {
        for (double t = cfg.save_interval; t < cfg.T; t += cfg.save_interval) ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12; }),
             ts.end());
    return ts;
}

template <class Space, class Snapshot>
DensityTrajectory<Space> integrate(std::vector<double> rho, const StepProblem& pb, const FdConfig& cfg,
                                   Snapshot&& snapshot) {
    DensityTrajectory<Space> traj;
    const std::size_t N = rho.size();
    const double dx = (pb.edges.back() - pb.edges.front()) / static_cast<double>(N);
    const auto saves = snapshot_times(cfg);

    std::vector<double> xi(N), flux(N + 1, 0.0), out_rate(N);
    traj.dt_min = std::numeric_limits<double>::infinity();
    traj.min_value = *std::min_element(rho.begin(), rho.end());
    snapshot(traj, 0.0, rho);

    double t = 0.0;
    std::size_t next_save = 1;
    while (next_save < saves.size()) {
        pb.xi(rho, xi);
        double Dmax = 0.0, Rmax = 0.0;
        std::fill(out_rate.begin(), out_rate.end(), 0.0);
        // boundary edges 0 and N carry zero flux
        for (std::size_t k = 1; k < N; ++k) {
            const double w = pb.weight[k];
            const double v = -(xi[k] - xi[k - 1]) / dx;
            const std::size_t donor = v > 0.0 ? k - 1 : k;
            flux[k] = w * rho[donor] * v;
            out_rate[donor] += w * std::abs(v) / dx;
            Dmax = std::max(Dmax, w * std::max(pb.diffusivity(k - 1, rho[k - 1]), pb.diffusivity(k, rho[k])));
        }
        for (double r : out_rate) Rmax = std::max(Rmax, r);

        double dt = std::numeric_limits<double>::infinity();
        if (Dmax > 0.0) dt = std::min(dt, cfg.cfl * dx * dx / (2.0 * Dmax));
        if (Rmax > 0.0) dt = std::min(dt, cfg.cfl / Rmax);
        const double remaining = saves[next_save] - t;
        if (!std::isfinite(dt)) dt = remaining;
        if (!(dt > 1e-14 * cfg.T)) {
            throw CflError("time step degenerated to " + std::to_string(dt) + " at t=" + std::to_string(t));
        }
        traj.dt_min = std::min(traj.dt_min, dt);
        traj.dt_max = std::max(traj.dt_max, dt);
        bool hit = false;
        if (dt >= remaining) {
            dt = remaining;
            hit = true;
        }

        for (std::size_t j = 0; j < N; ++j) {
            rho[j] -= dt / dx * (flux[j + 1] - flux[j]);
            if (!std::isfinite(rho[j])) {
                throw BlowupError("non-finite cell average at t=" + std::to_string(t) + ", cell " + std::to_string(j));
            }
            traj.min_value = std::min(traj.min_value, rho[j]);
        }
        ++traj.steps;
        t = hit ? saves[next_save] : t + dt;
        if (hit) {
            snapshot(traj, t, rho);
            ++next_save;
        }
    }
    return traj;
}

double cell_mass(const std::vector<double>& edges, const std::vector<double>& v) {
    double m = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) m += v[j] * (edges[j + 1] - edges[j]);
    return m;
}

std::vector<double> clamp_nonneg(const std::vector<double>& v) {
    std::vector<double> out(v);
    for (double& x : out) x = std::max(x, 0.0);
    return out;
}

}  // namespace

FdTrajectory solve_rescaled(const DensityProfile& rho0, const CoefficientField& coeff, const InternalEnergy& en,
                            const FdConfig& cfg) {
    cfg.validate();
    if (cfg.domain != FdConfig::Domain::Y) throw ConfigError("solve_rescaled needs the y domain");
    const std::size_t N = static_cast<std::size_t>(cfg.cells);
    StepProblem pb;
    pb.edges.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) pb.edges[k] = -cfg.L + 2.0 * cfg.L * static_cast<double>(k) / N;
    pb.weight.assign(N + 1, 1.0);
    pb.weight.front() = pb.weight.back() = 0.0;

    std::vector<double> a(N), loga(N), V(N);
    for (std::size_t j = 0; j < N; ++j) {
        const auto s = coeff.sample(0.5 * (pb.edges[j] + pb.edges[j + 1]));
        a[j] = s.a;
        loga[j] = std::log(s.a);
        V[j] = s.V;
    }
    if (en.is_entropy()) {
        pb.xi = [&](const std::vector<double>& r, std::vector<double>& xi) {
            for (std::size_t j = 0; j < r.size(); ++j) xi[j] = loga[j] + std::log(std::max(r[j], 1e-300)) + 1.0 + V[j];
        };
        pb.diffusivity = [](std::size_t, double r) { return r > 0.0 ? 1.0 : 0.0; };
    } else {
        pb.xi = [&](const std::vector<double>& r, std::vector<double>& xi) {
            for (std::size_t j = 0; j < r.size(); ++j) xi[j] = en.phi_d1(a[j] * r[j]) + V[j];
        };
        pb.diffusivity = [&](std::size_t j, double r) { return r > 0.0 ? r * a[j] * en.phi_d2(a[j] * r) : 0.0; };
    }

    auto rho = project_to_cells(rho0, pb.edges);
    const double lost = rho0.mass() - cell_mass(pb.edges, rho);
    if (std::abs(lost) > 1e-8) {
        throw DomainError("initial density has mass " + std::to_string(lost) + " outside [-L, L]");
    }

    auto snap = [&](FdTrajectory& tr, double t, const std::vector<double>& r) {
        auto p = DensityProfile::cellwise(pb.edges, clamp_nonneg(r));
        tr.times.push_back(t);
        tr.mass.push_back(cell_mass(pb.edges, r));
        tr.profiles.push_back(std::move(p));
    };
    auto traj = integrate<YSpace>(std::move(rho), pb, cfg, snap);
    traj.scheme = "explicit upwind finite volume, zero flux at +-L";
    return traj;
}

FdTrajectoryX solve_original(const DensityProfileX& u0, const MobilityFunction& g, const PotentialSpec& W,
                             const InternalEnergy& en, const FdConfig& cfg) {
    cfg.validate();
    if (cfg.domain != FdConfig::Domain::X) throw ConfigError("solve_original needs the x domain");
    const double gl = g.eval(-1.0), gr = g.eval(1.0);
    if (!(std::abs(gl) <= 1e-12 && std::abs(gr) <= 1e-12)) {
        throw DomainError("solve_original needs g(+-1) = 0; got g(-1)=" + std::to_string(gl) +
                          ", g(1)=" + std::to_string(gr));
    }
    const std::size_t N = static_cast<std::size_t>(cfg.cells);
    StepProblem pb;
    pb.edges.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) pb.edges[k] = -1.0 + 2.0 * static_cast<double>(k) / N;
    pb.edges.front() = -1.0;
    pb.edges.back() = 1.0;
    pb.weight.resize(N + 1);
    for (std::size_t k = 0; k <= N; ++k) {
        const double gk = g.eval(pb.edges[k]);
        pb.weight[k] = gk * gk;
    }

    std::vector<double> Wc(N);
    for (std::size_t j = 0; j < N; ++j) Wc[j] = W.eval(0.5 * (pb.edges[j] + pb.edges[j + 1]));
    if (en.is_entropy()) {
        pb.xi = [&](const std::vector<double>& u, std::vector<double>& xi) {
            for (std::size_t j = 0; j < u.size(); ++j) xi[j] = std::log(std::max(u[j], 1e-300)) + 1.0 + Wc[j];
        };
        pb.diffusivity = [](std::size_t, double u) { return u > 0.0 ? 1.0 : 0.0; };
    } else {
        pb.xi = [&](const std::vector<double>& u, std::vector<double>& xi) {
            for (std::size_t j = 0; j < u.size(); ++j) xi[j] = en.phi_d1(u[j]) + Wc[j];
        };
        pb.diffusivity = [&](std::size_t, double u) { return u > 0.0 ? u * en.phi_d2(u) : 0.0; };
    }

    auto u = project_to_cells(u0, pb.edges);
    auto snap = [&](FdTrajectoryX& tr, double t, const std::vector<double>& v) {
        tr.times.push_back(t);
        tr.mass.push_back(cell_mass(pb.edges, v));
        tr.profiles.push_back(DensityProfileX::cellwise(pb.edges, clamp_nonneg(v)));
    };
    auto traj = integrate<XSpace>(std::move(u), pb, cfg, snap);
    traj.scheme = "explicit upwind finite volume on (-1,1), edge mobility g^2, no boundary condition";
    return traj;
}

FdTrajectory to_density_trajectory(const FlowTrajectory& traj) {
    FdTrajectory out;
    for (std::size_t k = 0; k < traj.profiles.size(); ++k) {
        out.times.push_back(traj.times[k]);
        out.profiles.push_back(quantiles_to_density(traj.profiles[k]));
        out.mass.push_back(out.profiles.back().mass());
    }
    out.scheme = "jko";
    return out;
}

double ComparisonReport::max_w2() const { return w2.empty() ? 0.0 : *std::max_element(w2.begin(), w2.end()); }
double ComparisonReport::max_l1() const { return l1.empty() ? 0.0 : *std::max_element(l1.begin(), l1.end()); }

ComparisonReport compare_jko_fd(const FlowTrajectory& traj_jko, const FdTrajectory& traj_fd,
                                const std::vector<double>& times) {
    if (traj_jko.empty() || traj_fd.empty()) throw TimeRangeError("cannot compare an empty trajectory");
    ComparisonReport r;
    const std::size_t n = traj_jko.profiles.front().n();
    for (double t : times) {
        if (t < 0.0 || t > traj_jko.times.back() + 1e-9) {
            throw TimeRangeError("time " + std::to_string(t) + " outside the JKO run");
        }
        std::size_t idx = traj_fd.times.size();
        for (std::size_t k = 0; k < traj_fd.times.size(); ++k) {
            if (std::abs(traj_fd.times[k] - t) <= 1e-9) idx = k;
        }
        if (idx == traj_fd.times.size()) throw TimeRangeError("no FD snapshot at t=" + std::to_string(t));
        const auto& Yj = traj_jko.at(t);
        const auto& rho = traj_fd.profiles[idx];
        const auto Yf = density_to_quantiles(rho, n, 1e-6);
        r.times.push_back(t);
        r.w2.push_back(wasserstein2(Yj, Yf));
        r.l1.push_back(l1_distance(quantiles_to_density(Yj), rho));
    }
    return r;
}

}  // namespace degflow
