#include "hybridfpca/bspline.hpp"

#include "hybridfpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace hybridfpca {

BSplineBasis::BSplineBasis(double lower, double upper, int count)
    : lower_(lower), upper_(upper), count_(count), degree_(std::min(3, count - 1)) {
    if (count < 2) fail(ErrorKind::InvalidConfig, "B-spline basis needs at least 2 functions");
    if (!(upper > lower)) fail(ErrorKind::InvalidGrid, "B-spline domain must have positive length");
    const int interior = count - degree_ - 1;
    knots_.assign(degree_ + 1, lower);
    for (int j = 1; j <= interior; ++j) knots_.push_back(lower + (upper - lower) * j / (interior + 1));
    knots_.insert(knots_.end(), degree_ + 1, upper);
}

Vector BSplineBasis::evaluate(double x) const {
    const double span_tol = 1e-12 * (upper_ - lower_);
    if (x < lower_ - span_tol || x > upper_ + span_tol) {
        fail(ErrorKind::Shape, "B-spline evaluation point " + std::to_string(x) + " outside [" +
                                   std::to_string(lower_) + ", " + std::to_string(upper_) + "]");
    }
    x = std::clamp(x, lower_, upper_);
    // Knot span index mu with t[mu] <= x < t[mu+1]; the right end belongs to the last span.
    int mu = count_ - 1;
    if (x < upper_) {
        mu = static_cast<int>(std::upper_bound(knots_.begin(), knots_.end(), x) - knots_.begin()) - 1;
        mu = std::clamp(mu, degree_, count_ - 1);
    }
    // Cox-de Boor, building degree 0..p values on the span.
    std::vector<double> b(degree_ + 1, 0.0);
    b[0] = 1.0;
    for (int d = 1; d <= degree_; ++d) {
        double saved = 0.0;
        for (int j = 0; j < d; ++j) {
            const double left = knots_[mu + j + 1];
            const double right = knots_[mu + j + 1 - d];
            const double temp = b[j] / (left - right);
            b[j] = saved + (left - x) * temp;
            saved = (x - right) * temp;
        }
        b[d] = saved;
    }
    Vector out = Vector::Zero(count_);
    for (int j = 0; j <= degree_; ++j) out[mu - degree_ + j] = b[j];
    return out;
}

Matrix BSplineBasis::design(std::span<const double> points) const {
    Matrix m(static_cast<Eigen::Index>(points.size()), count_);
    for (std::size_t j = 0; j < points.size(); ++j) m.row(static_cast<Eigen::Index>(j)) = evaluate(points[j]).transpose();
    return m;
}

}  // namespace hybridfpca
