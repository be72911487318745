#include "degflow/energy.hpp"

#include "degflow/errors.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace degflow {

InternalEnergy InternalEnergy::entropy(LinearCase) {
    InternalEnergy e;
    e.kind_ = Kind::Entropy;
    e.m_ = 1.0;
    return e;
}

InternalEnergy InternalEnergy::power(double m) {
    if (!(m > 1.0) || !std::isfinite(m)) {
        throw DomainError("power energy requires m > 1, got " + std::to_string(m));
    }
    InternalEnergy e;
    e.kind_ = Kind::Power;
    e.m_ = m;
    return e;
}

std::string InternalEnergy::name() const {
    if (is_entropy()) return "entropy";
    return "power(m=" + std::to_string(m_) + ")";
}

GrowthData InternalEnergy::growth() const {
    // phi'' = s^{-1} for the entropy and m s^{m-2} for the power law
    if (is_entropy()) return {1.0, 1.0, 1.0, 1.0};
    return {m_, m_, m_, m_};
}

double InternalEnergy::phi(double s) const {
    if (s == 0.0) return 0.0;
    if (is_entropy()) return s * std::log(s);
    return std::pow(s, m_) / (m_ - 1.0);
}

double InternalEnergy::phi_d1(double s) const {
    if (is_entropy()) return std::log(s) + 1.0;
    return m_ / (m_ - 1.0) * std::pow(s, m_ - 1.0);
}

double InternalEnergy::phi_d2(double s) const {
    if (is_entropy()) return 1.0 / s;
    return m_ * std::pow(s, m_ - 2.0);
}

double InternalEnergy::psi(double z) const {
    if (is_entropy()) return std::log(z);
    return std::pow(z, m_ - 1.0) / (m_ - 1.0);
}

double InternalEnergy::psi_d1(double z) const {
    if (is_entropy()) return 1.0 / z;
    return std::pow(z, m_ - 2.0);
}

double InternalEnergy::psi_d2(double z) const {
    if (is_entropy()) return -1.0 / (z * z);
    return (m_ - 2.0) * std::pow(z, m_ - 3.0);
}

double InternalEnergy::density_integrand(double a, double rho) const {
    if (rho == 0.0) return 0.0;
    if (is_entropy()) return rho * (std::log(a) + std::log(rho));
    return std::pow(a, m_ - 1.0) * std::pow(rho, m_) / (m_ - 1.0);
}

namespace {

template <class F>
double integrate_profile(const DensityProfile& rho, const CoefficientField& coeff, F&& integrand) {
    const auto grid = rho.grid();
    const auto vals = rho.values();
    auto checked = [&](double y, double r) {
        if (r == 0.0) return 0.0;
        const double v = integrand(coeff.sample(y), r);
        if (!std::isfinite(v)) throw NonFiniteError("energy integrand overflows at y=" + std::to_string(y));
        return v;
    };
    double total = 0.0;
    if (rho.is_cellwise()) {
        for (std::size_t j = 0; j < vals.size(); ++j) {
            total += (grid[j + 1] - grid[j]) * checked(0.5 * (grid[j] + grid[j + 1]), vals[j]);
        }
    } else {
        double prev = checked(grid[0], vals[0]);
        for (std::size_t i = 1; i < grid.size(); ++i) {
            const double cur = checked(grid[i], vals[i]);
            total += 0.5 * (prev + cur) * (grid[i] - grid[i - 1]);
            prev = cur;
        }
    }
    return total;
}

}  // namespace

double energy_density_form(const DensityProfile& rho, const CoefficientField& coeff, const InternalEnergy& en) {
    return integrate_profile(rho, coeff, [&en](const CoefficientSample& s, double r) {
        return en.density_integrand(s.a, r) + s.V * r;
    });
}

double energy_quantile_form(std::span<const double> Y, const CoefficientField& coeff, const InternalEnergy& en,
                            EndCells ends) {
    const std::size_t n = Y.size();
    if (n < 2) throw ShapeError("quantile energy needs n >= 2");
    const double dw = 1.0 / static_cast<double>(n);
    auto cell = [&](double centre, double gap) {
        const double z = coeff.a(centre) * dw / gap;
        const double v = en.psi(z);
        if (!std::isfinite(v)) throw NonFiniteError("quantile energy overflows at y=" + std::to_string(centre));
        return v;
    };
    double total = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double gap = Y[i + 1] - Y[i];
        if (!(gap > 0.0)) throw MonotonicityError("quantiles not strictly increasing at index " + std::to_string(i + 1));
        total += dw * cell(0.5 * (Y[i] + Y[i + 1]), gap);
    }
    if (ends == EndCells::Mirrored) {
        const double g0 = Y[1] - Y[0];
        const double g1 = Y[n - 1] - Y[n - 2];
        total += 0.5 * dw * cell(Y[0] - 0.25 * g0, g0);
        total += 0.5 * dw * cell(Y[n - 1] + 0.25 * g1, g1);
    }
    if (!coeff.potential().is_zero()) {
        for (std::size_t i = 0; i < n; ++i) total += dw * coeff.V(Y[i]);
    }
    return total;
}

double energy_quantile_form(const QuantileProfile& Y, const CoefficientField& coeff, const InternalEnergy& en,
                            EndCells ends) {
    return energy_quantile_form(Y.values(), coeff, en, ends);
}

double entropy(const DensityProfile& rho) {
    const auto grid = rho.grid();
    const auto vals = rho.values();
    auto h = [](double r) { return r > 0.0 ? r * std::log(r) : 0.0; };
    double total = 0.0;
    if (rho.is_cellwise()) {
        for (std::size_t j = 0; j < vals.size(); ++j) total += (grid[j + 1] - grid[j]) * h(vals[j]);
    } else {
        for (std::size_t i = 1; i < grid.size(); ++i) {
            total += 0.5 * (h(vals[i]) + h(vals[i - 1])) * (grid[i] - grid[i - 1]);
        }
    }
    return total;
}

double weighted_lm_norm(const DensityProfile& rho, const CoefficientField& coeff, double m) {
    if (!(m > 1.0)) throw DomainError("weighted L^m norm needs m > 1");
    return integrate_profile(rho, coeff, [m](const CoefficientSample& s, double r) {
        return std::pow(s.a, m - 1.0) * std::pow(r, m);
    });
}

}  // namespace degflow
