#include "degflow/profile.hpp"

#include "degflow/errors.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace degflow {

namespace {

void check_grid(std::span<const double> grid) {
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (!std::isfinite(grid[i])) throw DomainError("non-finite grid point at index " + std::to_string(i));
        if (i > 0 && !(grid[i] > grid[i - 1])) {
            throw MonotonicityError("grid not strictly increasing at index " + std::to_string(i));
        }
    }
}

void check_values(std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i]) || values[i] < 0.0) {
            throw DomainError("density value negative or non-finite at index " + std::to_string(i));
        }
    }
}

// Linear interpolation of nodal data; x must lie in [grid.front(), grid.back()].
double interp_nodal(std::span<const double> grid, std::span<const double> values, double x) {
    auto it = std::upper_bound(grid.begin(), grid.end(), x);
    if (it == grid.begin()) return values.front();
    if (it == grid.end()) return values.back();
    const auto k = static_cast<std::size_t>(it - grid.begin());
    const double t = (x - grid[k - 1]) / (grid[k] - grid[k - 1]);
    return values[k - 1] + t * (values[k] - values[k - 1]);
}

// Integral of |f| over an interval of width w where f is linear with end values fa, fb.
double abs_linear_integral(double fa, double fb, double w) {
    if ((fa >= 0.0 && fb >= 0.0) || (fa <= 0.0 && fb <= 0.0)) {
        return 0.5 * (std::abs(fa) + std::abs(fb)) * w;
    }
    const double s = std::abs(fa) + std::abs(fb);
    return 0.5 * w * (fa * fa + fb * fb) / s;
}

}  // namespace

template <class Space>
Profile<Space> Profile<Space>::nodal(std::vector<double> grid, std::vector<double> values) {
    if (grid.size() != values.size() || grid.size() < 2) {
        throw ShapeError("nodal profile needs matching grid/value sizes >= 2");
    }
    check_grid(grid);
    check_values(values);
    Profile p;
    p.layout_ = Layout::Nodal;
    p.grid_ = std::move(grid);
    p.values_ = std::move(values);
    return p;
}

template <class Space>
Profile<Space> Profile<Space>::cellwise(std::vector<double> edges, std::vector<double> values) {
    if (edges.size() != values.size() + 1 || values.empty()) {
        throw ShapeError("cellwise profile needs edges.size() == values.size() + 1");
    }
    check_grid(edges);
    check_values(values);
    Profile p;
    p.layout_ = Layout::Cellwise;
    p.grid_ = std::move(edges);
    p.values_ = std::move(values);
    return p;
}

template <class Space>
double Profile<Space>::mass() const {
    double m = 0.0;
    if (layout_ == Layout::Nodal) {
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            m += 0.5 * (values_[i] + values_[i - 1]) * (grid_[i] - grid_[i - 1]);
        }
    } else {
        for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * (grid_[i + 1] - grid_[i]);
    }
    return m;
}

template <class Space>
double Profile<Space>::first_moment() const {
    double m = 0.0;
    if (layout_ == Layout::Nodal) {
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            m += 0.5 * (grid_[i] * values_[i] + grid_[i - 1] * values_[i - 1]) * (grid_[i] - grid_[i - 1]);
        }
    } else {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double a = grid_[i], b = grid_[i + 1];
            m += values_[i] * 0.5 * (b * b - a * a);
        }
    }
    return m;
}

template <class Space>
double Profile<Space>::second_moment() const {
    double m = 0.0;
    if (layout_ == Layout::Nodal) {
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            const double a = grid_[i - 1], b = grid_[i];
            m += 0.5 * (b * b * values_[i] + a * a * values_[i - 1]) * (b - a);
        }
    } else {
        for (std::size_t i = 0; i < values_.size(); ++i) {
            const double a = grid_[i], b = grid_[i + 1];
            m += values_[i] * (b * b * b - a * a * a) / 3.0;
        }
    }
    return m;
}

template <class Space>
double Profile<Space>::value_at(double y) const {
    if (y < grid_.front() || y > grid_.back()) return 0.0;
    if (layout_ == Layout::Nodal) return interp_nodal(grid_, values_, y);
    auto it = std::upper_bound(grid_.begin(), grid_.end(), y);
    auto k = static_cast<std::size_t>(it - grid_.begin());
    if (k == 0) return 0.0;
    if (k > values_.size()) k = values_.size();
    return values_[k - 1];
}

template <class Space>
std::vector<double> Profile<Space>::sample_points() const {
    if (layout_ == Layout::Nodal) return grid_;
    std::vector<double> c(values_.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = 0.5 * (grid_[i] + grid_[i + 1]);
    return c;
}

template class Profile<YSpace>;
template class Profile<XSpace>;

QuantileProfile::QuantileProfile(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() < 2) throw ShapeError("quantile profile needs n >= 2");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) throw MonotonicityError("non-finite quantile at index " + std::to_string(i));
        if (i > 0 && !(values_[i] > values_[i - 1])) {
            throw MonotonicityError("quantiles not strictly increasing at index " + std::to_string(i));
        }
    }
}

double QuantileProfile::mean() const {
    double s = 0.0;
    for (double y : values_) s += y;
    return s * d_omega();
}

double QuantileProfile::second_moment() const {
    double s = 0.0;
    for (double y : values_) s += y * y;
    return s * d_omega();
}

QuantileProfile QuantileProfile::shifted(double c) const {
    std::vector<double> v(values_);
    for (double& y : v) y += c;
    return QuantileProfile(std::move(v));
}

QuantileProfile density_to_quantiles(const DensityProfile& rho, std::size_t n, double mass_tol) {
    if (n < 2) throw ShapeError("density_to_quantiles needs n >= 2");
    const double total = rho.mass();
    if (!(std::abs(total - 1.0) <= mass_tol)) {
        throw MassError("density mass " + std::to_string(total) + " deviates from 1 beyond tolerance");
    }
    const auto grid = rho.grid();
    const auto vals = rho.values();

    // CDF at the breakpoints; linear in between for both layouts.
    std::vector<double> cdf(grid.size(), 0.0);
    for (std::size_t k = 1; k < grid.size(); ++k) {
        const double w = grid[k] - grid[k - 1];
        const double inc = rho.is_cellwise() ? vals[k - 1] * w : 0.5 * (vals[k] + vals[k - 1]) * w;
        cdf[k] = cdf[k - 1] + inc;
    }

    std::vector<double> Y(n);
    std::size_t k = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const double target = (static_cast<double>(i) + 0.5) / static_cast<double>(n) * total;
        while (k < cdf.size() - 1 && cdf[k] <= target) ++k;
        const double lo = cdf[k - 1], hi = cdf[k];
        const double t = hi > lo ? (target - lo) / (hi - lo) : 0.0;
        Y[i] = grid[k - 1] + t * (grid[k] - grid[k - 1]);
    }
    return QuantileProfile(std::move(Y));
}

DensityProfile quantiles_to_density(const QuantileProfile& Y, EndCells ends) {
    const std::size_t n = Y.n();
    const double dw = Y.d_omega();
    std::vector<double> edges;
    std::vector<double> vals;
    edges.reserve(n + 2);
    vals.reserve(n + 1);
    const double first_gap = Y[1] - Y[0];
    const double last_gap = Y[n - 1] - Y[n - 2];
    if (ends == EndCells::Mirrored) {
        edges.push_back(Y[0] - 0.5 * first_gap);
        vals.push_back(dw / first_gap);
    }
    for (std::size_t i = 0; i < n; ++i) edges.push_back(Y[i]);
    for (std::size_t i = 0; i + 1 < n; ++i) vals.push_back(dw / (Y[i + 1] - Y[i]));
    if (ends == EndCells::Mirrored) {
        edges.push_back(Y[n - 1] + 0.5 * last_gap);
        vals.push_back(dw / last_gap);
    }
    return DensityProfile::cellwise(std::move(edges), std::move(vals));
}

double wasserstein2(const QuantileProfile& A, const QuantileProfile& B) {
    if (A.n() != B.n()) {
        throw ShapeError("wasserstein2 needs equal resolutions, got " + std::to_string(A.n()) + " and " +
                         std::to_string(B.n()));
    }
    double s = 0.0;
    for (std::size_t i = 0; i < A.n(); ++i) {
        const double d = A[i] - B[i];
        s += d * d;
    }
    return std::sqrt(s * A.d_omega());
}

double second_moment(const DensityProfile& rho) { return rho.second_moment(); }

template <class Space>
double l1_distance(const Profile<Space>& a, const Profile<Space>& b) {
    std::vector<double> pts;
    pts.insert(pts.end(), a.grid().begin(), a.grid().end());
    pts.insert(pts.end(), b.grid().begin(), b.grid().end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());

    // value of p on the open interval (s,t), evaluated at one end
    auto eval = [](const Profile<Space>& p, double s, double t, double at) {
        const double mid = 0.5 * (s + t);
        if (mid < p.lo() || mid > p.hi()) return 0.0;
        if (p.is_cellwise()) return p.value_at(mid);
        return interp_nodal(p.grid(), p.values(), at);
    };

    double total = 0.0;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double s = pts[i - 1], t = pts[i];
        const double da = eval(a, s, t, s) - eval(b, s, t, s);
        const double db = eval(a, s, t, t) - eval(b, s, t, t);
        total += abs_linear_integral(da, db, t - s);
    }
    return total;
}

template double l1_distance(const Profile<YSpace>&, const Profile<YSpace>&);
template double l1_distance(const Profile<XSpace>&, const Profile<XSpace>&);

}  // namespace degflow
