#pragma once

#include "hybridfpca/tensorcore.hpp"

#include <span>
#include <vector>

namespace hybridfpca {

/// Clamped B-spline basis on [lower, upper] with equally spaced interior
/// knots. Degree is min(3, count - 1).
class BSplineBasis {
public:
    BSplineBasis() = default;
    BSplineBasis(double lower, double upper, int count);

    [[nodiscard]] int size() const { return count_; }
    [[nodiscard]] int degree() const { return degree_; }
    [[nodiscard]] double lower() const { return lower_; }
    [[nodiscard]] double upper() const { return upper_; }
    [[nodiscard]] const std::vector<double>& knots() const { return knots_; }

    /// Basis values at x (throws if x is outside [lower, upper]).
    [[nodiscard]] Vector evaluate(double x) const;
    /// points × size() design matrix.
    [[nodiscard]] Matrix design(std::span<const double> points) const;

private:
    double lower_ = 0.0;
    double upper_ = 1.0;
    int count_ = 0;
    int degree_ = 0;
    std::vector<double> knots_;
};

}  // namespace hybridfpca
