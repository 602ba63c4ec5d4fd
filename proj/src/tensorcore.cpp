#include "hybridfpca/tensorcore.hpp"

#include "hybridfpca/error.hpp"

#include <cmath>
#include <string>

namespace hybridfpca {

const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::InvalidGrid: return "invalid-grid";
        case ErrorKind::Shape: return "shape";
        case ErrorKind::InsufficientSubjects: return "insufficient-subjects";
        case ErrorKind::InvalidData: return "invalid-data";
        case ErrorKind::InvalidConfig: return "invalid-config";
        case ErrorKind::NumericalFailure: return "numerical-failure";
        case ErrorKind::IllPosedFit: return "ill-posed-fit";
        case ErrorKind::UndefinedCorrelation: return "undefined-correlation";
        case ErrorKind::Io: return "io";
    }
    return "unknown";
}

std::vector<double> trapezoid_weights(std::span<const double> p) {
    const std::size_t n = p.size();
    std::vector<double> w(n, 0.0);
    if (n < 2) return w;
    w[0] = 0.5 * (p[1] - p[0]);
    for (std::size_t j = 1; j + 1 < n; ++j) w[j] = 0.5 * (p[j + 1] - p[j - 1]);
    w[n - 1] = 0.5 * (p[n - 1] - p[n - 2]);
    return w;
}

Grid1D Grid1D::trapezoid(std::vector<double> points) {
    if (points.size() < 2) fail(ErrorKind::InvalidGrid, "grid needs at least 2 points");
    for (std::size_t j = 0; j < points.size(); ++j) {
        if (!std::isfinite(points[j])) fail(ErrorKind::InvalidGrid, "grid point is not finite");
        if (j > 0 && !(points[j] > points[j - 1])) {
            fail(ErrorKind::InvalidGrid, "grid points must be strictly increasing (index " + std::to_string(j) + ")");
        }
    }
    Grid1D g;
    g.weights_ = trapezoid_weights(points);
    g.points_ = std::move(points);
    return g;
}

Grid1D Grid1D::uniform(double first, double last, int count) {
    if (count < 2) fail(ErrorKind::InvalidGrid, "grid needs at least 2 points");
    std::vector<double> p(count);
    for (int j = 0; j < count; ++j) p[j] = first + (last - first) * j / (count - 1);
    p.back() = last;
    return trapezoid(std::move(p));
}

Grid1D make_trapezoid_grid(std::span<const double> points) {
    return Grid1D::trapezoid({points.begin(), points.end()});
}

double weighted_inner_product(std::span<const double> f, std::span<const double> g, const Grid1D& grid) {
    const auto n = static_cast<std::size_t>(grid.size());
    if (f.size() != n || g.size() != n) {
        fail(ErrorKind::Shape, "inner product: curve lengths " + std::to_string(f.size()) + "/" +
                                   std::to_string(g.size()) + " do not match grid size " + std::to_string(n));
    }
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) sum += f[j] * g[j] * grid.weights()[j];
    return sum;
}

HybridTensor::HybridTensor(int subjects, int regions, Grid1D omega_grid, Grid1D s_grid,
                           std::vector<double> values, std::optional<Mask> mask)
    : n_(subjects), r_(regions), omega_(std::move(omega_grid)), s_(std::move(s_grid)),
      values_(std::move(values)), observed_(std::move(mask)) {
    if (n_ < 1 || r_ < 1) fail(ErrorKind::Shape, "tensor needs at least one subject and one region");
    const std::size_t expected = static_cast<std::size_t>(n_) * r_ * omega_.size() * s_.size();
    if (values_.size() != expected) {
        fail(ErrorKind::Shape, "tensor has " + std::to_string(values_.size()) + " values, extents imply " +
                                   std::to_string(expected));
    }
    if (observed_) {
        if (observed_->rows() != n_ || observed_->cols() != omega_.size()) {
            fail(ErrorKind::Shape, "observed mask extents do not match subjects × omega grid");
        }
        for (int i = 0; i < n_; ++i) {
            if (observed_->row(i).count() < 2) {
                fail(ErrorKind::InvalidData, "subject " + std::to_string(i) + " has fewer than 2 observed omega slices");
            }
        }
    }
    for (int i = 0; i < n_; ++i) {
        for (int w = 0; w < omega_.size(); ++w) {
            if (!observed(i, w)) continue;
            for (int r = 0; r < r_; ++r) {
                for (int s = 0; s < s_.size(); ++s) {
                    if (!std::isfinite(values_[index(i, r, w, s)])) {
                        fail(ErrorKind::InvalidData, "non-finite value at subject " + std::to_string(i) +
                                                         ", region " + std::to_string(r) + ", omega " +
                                                         std::to_string(w) + ", s " + std::to_string(s));
                    }
                }
            }
        }
    }
}

Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>
HybridTensor::subject_block(int i) const {
    const auto rows = static_cast<Eigen::Index>(r_) * omega_.size();
    return {values_.data() + index(i, 0, 0, 0), rows, s_.size()};
}

Vector HybridTensor::omega_weights(int i) const {
    if (!observed_) return omega_.weight_vector();
    std::vector<double> pts;
    std::vector<int> idx;
    for (int w = 0; w < omega_.size(); ++w) {
        if ((*observed_)(i, w)) {
            pts.push_back(omega_.points()[w]);
            idx.push_back(w);
        }
    }
    const auto sub = trapezoid_weights(pts);
    Vector out = Vector::Zero(omega_.size());
    for (std::size_t t = 0; t < idx.size(); ++t) out[idx[t]] = sub[t];
    return out;
}

HybridTensor HybridTensor::select_subjects(std::span<const int> subjects) const {
    const std::size_t block = static_cast<std::size_t>(r_) * omega_.size() * s_.size();
    std::vector<double> v;
    v.reserve(block * subjects.size());
    std::optional<Mask> mask;
    if (observed_) mask = Mask(static_cast<Eigen::Index>(subjects.size()), omega_.size());
    for (std::size_t t = 0; t < subjects.size(); ++t) {
        const int i = subjects[t];
        if (i < 0 || i >= n_) fail(ErrorKind::Shape, "subject index out of range");
        v.insert(v.end(), values_.begin() + index(i, 0, 0, 0), values_.begin() + index(i, 0, 0, 0) + block);
        if (mask) mask->row(static_cast<Eigen::Index>(t)) = observed_->row(i);
    }
    return {static_cast<int>(subjects.size()), r_, omega_, s_, std::move(v), std::move(mask)};
}

FunctionalSample::FunctionalSample(Matrix curves, Grid1D grid) : curves_(std::move(curves)), grid_(std::move(grid)) {
    if (curves_.cols() != grid_.size()) {
        fail(ErrorKind::Shape, "sample has " + std::to_string(curves_.cols()) + " columns for a grid of " +
                                   std::to_string(grid_.size()) + " points");
    }
    if (!curves_.allFinite()) fail(ErrorKind::InvalidData, "sample contains non-finite values");
}

FunctionalSample FunctionalSample::select_subjects(std::span<const int> subjects) const {
    Matrix out(static_cast<Eigen::Index>(subjects.size()), curves_.cols());
    for (std::size_t t = 0; t < subjects.size(); ++t) {
        if (subjects[t] < 0 || subjects[t] >= curves_.rows()) fail(ErrorKind::Shape, "subject index out of range");
        out.row(static_cast<Eigen::Index>(t)) = curves_.row(subjects[t]);
    }
    return {std::move(out), grid_};
}

Centered center(const HybridTensor& t) {
    const int n = t.subjects();
    if (n < 2) fail(ErrorKind::InsufficientSubjects, "centering needs at least 2 subjects, got " + std::to_string(n));
    const int R = t.regions(), W = t.omega_size(), S = t.s_size();
    const std::size_t block = static_cast<std::size_t>(R) * W * S;

    std::vector<double> mean(block, 0.0);
    std::vector<int> count(W, 0);
    for (int i = 0; i < n; ++i) {
        for (int w = 0; w < W; ++w) {
            if (!t.observed(i, w)) continue;
            ++count[w];
            for (int r = 0; r < R; ++r) {
                for (int s = 0; s < S; ++s) mean[(static_cast<std::size_t>(r) * W + w) * S + s] += t(i, r, w, s);
            }
        }
    }
    for (int r = 0; r < R; ++r) {
        for (int w = 0; w < W; ++w) {
            for (int s = 0; s < S; ++s) {
                auto& m = mean[(static_cast<std::size_t>(r) * W + w) * S + s];
                m = count[w] > 0 ? m / count[w] : 0.0;
            }
        }
    }

    std::vector<double> z(t.values().size(), 0.0);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < R; ++r) {
            for (int w = 0; w < W; ++w) {
                if (!t.observed(i, w)) continue;
                for (int s = 0; s < S; ++s) {
                    z[t.index(i, r, w, s)] = t(i, r, w, s) - mean[(static_cast<std::size_t>(r) * W + w) * S + s];
                }
            }
        }
    }
    return {std::move(mean), HybridTensor(n, R, t.omega_grid(), t.s_grid(), std::move(z), t.observed_mask())};
}

}  // namespace hybridfpca
