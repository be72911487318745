#pragma once

#include "degflow/profile.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <functional>
#include <vector>

namespace testutil {

// Centered differences with step h.
inline double d1(const std::function<double(double)>& f, double x, double h = 1e-5) {
    return (f(x + h) - f(x - h)) / (2.0 * h);
}
inline double d2(const std::function<double(double)>& f, double x, double h = 1e-4) {
    return (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h);
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline degflow::DensityProfile gaussian(double mean, double sigma, int n = 4001, double width = 12.0) {
    std::vector<double> g(static_cast<std::size_t>(n)), v(g.size());
    for (int i = 0; i < n; ++i) {
        const double y = mean - width * sigma + 2.0 * width * sigma * i / (n - 1.0);
        const double z = (y - mean) / sigma;
        g[static_cast<std::size_t>(i)] = y;
        v[static_cast<std::size_t>(i)] = std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * M_PI));
    }
    return degflow::DensityProfile::nodal(std::move(g), std::move(v));
}

// Exact quantiles of N(mean, sigma^2) at the midpoints (i + 1/2)/n.
inline std::vector<double> gaussian_quantiles(double mean, double sigma, std::size_t n) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double w = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
        q[i] = mean + sigma * std::sqrt(2.0) * boost::math::erf_inv(2.0 * w - 1.0);
    }
    return q;
}

}  // namespace testutil
