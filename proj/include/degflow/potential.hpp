#pragma once

#include <functional>
#include <string>

namespace degflow {

struct PotentialJet {
    double W;
    double d1;
    double d2;
};

/// External potential W on (-1,1) (or on the line, for test coefficients).
class PotentialSpec {
public:
    enum class Kind { Zero, Quadratic, Custom };
    using Fn = std::function<double(double)>;

    static PotentialSpec zero();
    /// W(x) = c x^2, c >= 0.
    static PotentialSpec quadratic(double c);
    static PotentialSpec custom(Fn W, Fn d1, Fn d2, std::string label = "custom");

    Kind kind() const { return kind_; }
    double c() const { return c_; }
    bool is_zero() const { return kind_ == Kind::Zero || (kind_ == Kind::Quadratic && c_ == 0.0); }
    const std::string& label() const { return label_; }

    PotentialJet jet(double x) const;
    double eval(double x) const { return jet(x).W; }

private:
    Kind kind_ = Kind::Zero;
    double c_ = 0.0;
    std::string label_ = "zero";
    Fn W_, d1_, d2_;
};

}  // namespace degflow
