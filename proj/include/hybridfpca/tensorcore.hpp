#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace hybridfpca {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
/// Observed-slice mask, subjects × omega points.
using Mask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Ordered grid with trapezoid quadrature weights.
class Grid1D {
public:
    /// Throws InvalidGrid unless points are strictly increasing with length >= 2.
    static Grid1D trapezoid(std::vector<double> points);
    static Grid1D uniform(double first, double last, int count);

    [[nodiscard]] const std::vector<double>& points() const { return points_; }
    [[nodiscard]] const std::vector<double>& weights() const { return weights_; }
    [[nodiscard]] int size() const { return static_cast<int>(points_.size()); }
    [[nodiscard]] double first() const { return points_.front(); }
    [[nodiscard]] double last() const { return points_.back(); }
    [[nodiscard]] double length() const { return points_.back() - points_.front(); }
    [[nodiscard]] Eigen::Map<const Vector> weight_vector() const {
        return {weights_.data(), static_cast<Eigen::Index>(weights_.size())};
    }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;

private:
    Grid1D() = default;
    std::vector<double> points_;
    std::vector<double> weights_;
};

Grid1D make_trapezoid_grid(std::span<const double> points);

/// Trapezoid weights for an arbitrary strictly increasing point set.
std::vector<double> trapezoid_weights(std::span<const double> points);

/// Sum_j f_j g_j w_j over the grid.
double weighted_inner_product(std::span<const double> f, std::span<const double> g, const Grid1D& grid);

/// Values Y_i(r, omega, s) on shared grids, row-major over
/// (subject, region, omega, s). Immutable after construction.
class HybridTensor {
public:
    /// Validates extents, mask, and finiteness of observed values.
    HybridTensor(int subjects, int regions, Grid1D omega_grid, Grid1D s_grid,
                 std::vector<double> values, std::optional<Mask> observed = std::nullopt);

    [[nodiscard]] int subjects() const { return n_; }
    [[nodiscard]] int regions() const { return r_; }
    [[nodiscard]] int omega_size() const { return omega_.size(); }
    [[nodiscard]] int s_size() const { return s_.size(); }
    [[nodiscard]] const Grid1D& omega_grid() const { return omega_; }
    [[nodiscard]] const Grid1D& s_grid() const { return s_; }
    [[nodiscard]] const std::optional<Mask>& observed_mask() const { return observed_; }
    [[nodiscard]] const std::vector<double>& values() const { return values_; }

    [[nodiscard]] std::size_t index(int i, int r, int w, int s) const {
        return ((static_cast<std::size_t>(i) * r_ + r) * omega_.size() + w) * s_.size() + s;
    }
    [[nodiscard]] double operator()(int i, int r, int w, int s) const { return values_[index(i, r, w, s)]; }
    [[nodiscard]] bool observed(int i, int w) const { return !observed_ || (*observed_)(i, w); }

    /// Block of one subject as a (regions*omega) × s row-major matrix view.
    [[nodiscard]] Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
    subject_block(int i) const;

    /// Trapezoid weights over omega restricted to subject i's observed points
    /// (zero at unobserved points); the full-grid weights when unmasked.
    [[nodiscard]] Vector omega_weights(int i) const;

    /// Same tensor with a subset (or permutation) of subjects.
    [[nodiscard]] HybridTensor select_subjects(std::span<const int> subjects) const;

private:
    int n_;
    int r_;
    Grid1D omega_;
    Grid1D s_;
    std::vector<double> values_;
    std::optional<Mask> observed_;
};

/// Curves on a common grid, subjects × grid points.
class FunctionalSample {
public:
    FunctionalSample(Matrix curves, Grid1D grid);

    [[nodiscard]] const Matrix& curves() const { return curves_; }
    [[nodiscard]] const Grid1D& grid() const { return grid_; }
    [[nodiscard]] int subjects() const { return static_cast<int>(curves_.rows()); }
    [[nodiscard]] int grid_size() const { return grid_.size(); }

    [[nodiscard]] FunctionalSample select_subjects(std::span<const int> subjects) const;

private:
    Matrix curves_;
    Grid1D grid_;
};

struct Centered {
    /// Pointwise mean over (region, omega, s), same layout as one subject.
    std::vector<double> mean;
    HybridTensor demeaned;
};

/// Across-subject mean over observed entries. Unobserved entries of the
/// demeaned tensor are zero; omega slices observed by no subject get mean 0.
Centered center(const HybridTensor& tensor);

}  // namespace hybridfpca
