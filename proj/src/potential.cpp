#include "degflow/potential.hpp"

#include "degflow/errors.hpp"

#include <cmath>

namespace degflow {

PotentialSpec PotentialSpec::zero() { return PotentialSpec{}; }

PotentialSpec PotentialSpec::quadratic(double c) {
    if (!(c >= 0.0) || !std::isfinite(c)) {
        throw DomainError("quadratic potential needs c >= 0 (W must be non-negative)");
    }
    PotentialSpec w;
    w.kind_ = Kind::Quadratic;
    w.c_ = c;
    w.label_ = "quadratic(c=" + std::to_string(c) + ")";
    return w;
}

PotentialSpec PotentialSpec::custom(Fn W, Fn d1, Fn d2, std::string label) {
    if (!W || !d1 || !d2) throw DomainError("custom potential needs W, W' and W''");
    PotentialSpec w;
    w.kind_ = Kind::Custom;
    w.label_ = std::move(label);
    w.W_ = std::move(W);
    w.d1_ = std::move(d1);
    w.d2_ = std::move(d2);
    return w;
}

PotentialJet PotentialSpec::jet(double x) const {
    switch (kind_) {
        case Kind::Zero: return {0.0, 0.0, 0.0};
        case Kind::Quadratic: return {c_ * x * x, 2.0 * c_ * x, 2.0 * c_};
        case Kind::Custom: break;
    }
    return {W_(x), d1_(x), d2_(x)};
}

}  // namespace degflow
