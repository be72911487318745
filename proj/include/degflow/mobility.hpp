#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace degflow {

/// Fast decay: 1/g is not integrable at the endpoints (Osgood condition),
/// so the coordinate map sends (-1,1) onto the whole line. Slow decay: the
/// integral of 1/g over (0,1) is finite and equal to `l`.
struct DecayClass {
    enum class Kind { Fast, Slow, Unknown };
    Kind kind = Kind::Unknown;
    double l = 0.0;  // only meaningful for Slow

    static DecayClass fast() { return {Kind::Fast, 0.0}; }
    static DecayClass slow(double l) { return {Kind::Slow, l}; }
    static DecayClass unknown() { return {Kind::Unknown, 0.0}; }

    bool is_fast() const { return kind == Kind::Fast; }
    std::string name() const;
};

/// g, g', g'' at a single point.
struct MobilityJet {
    double g;
    double d1;
    double d2;
};

/// Spatial mobility g on (-1,1). Immutable after construction.
class MobilityFunction {
public:
    enum class Kind { PowerFamily, Custom };
    using Fn = std::function<double(double)>;

    /// g(x) = (1 - x^2)^{p/2}.
    static MobilityFunction power(double p);
    /// Custom g with analytic first and second derivatives. The decay class
    /// starts Unknown; see `classify_decay`.
    static MobilityFunction custom(Fn g, Fn d1, Fn d2, std::string label = "custom");

    Kind kind() const { return kind_; }
    /// Exponent of the power family; NaN for custom mobilities.
    double p() const { return p_; }
    const std::string& label() const { return label_; }

    double eval(double x) const;
    double eval_d1(double x) const;
    double eval_d2(double x) const;
    MobilityJet jet(double x) const;

    /// (g')^2 - g g''; equals a''/a composed with the coordinate map.
    double g3_quantity(double x) const;

    const DecayClass& decay_class() const { return decay_; }
    /// Copy carrying the given cached classification.
    MobilityFunction with_decay_class(DecayClass d) const;

private:
    MobilityFunction() = default;

    Kind kind_ = Kind::Custom;
    double p_ = 0.0;
    std::string label_;
    Fn g_, d1_, d2_;
    DecayClass decay_;
};

struct AssumptionReport {
    bool g1 = false;             // max at g(0)=1, 0<=g<=1, g(+-1)=0
    bool g3 = false;             // 0 <= (g')^2 - g g'' <= C_g
    double g_at_zero = 0.0;
    double g_at_left = 0.0;      // g(-1)
    double g_at_right = 0.0;     // g(+1)
    double max_g = 0.0;
    double C_g = 0.0;            // sup over the grid of (g')^2 - g g''
    double g3_min = 0.0;         // inf over the grid of (g')^2 - g g''
    int grid_n = 0;
    double endpoint_gap = 0.0;   // distance of the grid ends from +-1
};

/// Uniform grid of n points on [-(1-h), 1-h] with h = 1/(n+1).
std::vector<double> interior_grid(int n);

/// Grid certification of (g1) and (g3). Throws DomainError on negative or
/// non-finite g at a grid point, or when grid_n < 16.
AssumptionReport check_assumptions(const MobilityFunction& g, int grid_n);

/// Osgood classification. Closed-form rule for the power family (fast iff
/// p >= 2, with l computed by quadrature otherwise); for custom mobilities a
/// divergence heuristic on truncated integrals. Throws InconclusiveError when
/// the heuristic cannot decide within `tol`.
DecayClass classify_decay(const MobilityFunction& g, double tol = 1e-2);

/// \int_0^1 dz / g(z) after the substitution z = 1 - s^2 (finite for slow
/// decay; diverges otherwise).
double osgood_integral(const MobilityFunction& g, double tol = 1e-12);

}  // namespace degflow
