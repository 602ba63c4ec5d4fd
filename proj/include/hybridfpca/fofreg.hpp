#pragma once

#include "hybridfpca/bspline.hpp"
#include "hybridfpca/tensorcore.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hybridfpca {

/// Log-spaced ridge penalties, 10^lo .. 10^hi in `steps` points.
std::vector<double> log_penalty_grid(double lo_exponent = -6.0, double hi_exponent = 2.0, int steps = 17);

struct FofConfig {
    int n_basis_g = 15;
    int n_basis_s = 15;
    double predictor_fve = 0.9;
    std::vector<double> penalty_grid = log_penalty_grid();
    double train_fraction = 0.7;
    std::uint64_t seed = 1;
    /// Upper bound on compression components kept per predictor; 0 = none.
    int max_components = 0;

    /// Throws InvalidConfig on any violated invariant.
    void validate() const;
};

/// Functional PCA of one centered predictor inside the g-spline span.
struct PredictorCompression {
    /// Mean predictor curve on the g grid.
    Vector mean;
    /// Spline coefficients of the compression directions, n_basis_g × K_j.
    /// Directions are orthonormal in L2(g).
    Matrix directions;
    /// Full spectrum of the compressed covariance, descending.
    Vector eigenvalues;
};

struct FofModel {
    Grid1D g_grid;
    Grid1D s_grid;
    BSplineBasis basis_g;
    BSplineBasis basis_s;
    /// m(s) on the response grid.
    Vector intercept;
    /// Pointwise mean of the training responses.
    Vector response_mean;
    /// beta_j(g, s) = basis_g(g)' C_j basis_s(s); C_j is n_basis_g × n_basis_s.
    std::vector<Matrix> coefficients;
    std::vector<PredictorCompression> compression;
    /// Stacked ridge weights, (sum_j K_j) × n_basis_s.
    Matrix regression_weights;
    double chosen_penalty = 0.0;
    double train_mspe = 0.0;
    /// GCV score per entry of the penalty grid.
    std::vector<double> gcv_trace;
    std::vector<double> penalty_grid;

    [[nodiscard]] int predictors() const { return static_cast<int>(coefficients.size()); }
};

/// Predictor compression then ridge on response spline coefficients with
/// the penalty chosen by GCV. Each predictor is centered, projected onto
/// the g-spline basis, and reduced to the leading principal directions
/// reaching predictor_fve (capped by max_components).
FofModel fit_fof(const FunctionalSample& responses, std::span<const FunctionalSample> predictors,
                 const FofConfig& config);

/// Same as fit_fof with a fixed penalty instead of the GCV search.
FofModel fit_fof_fixed_penalty(const FunctionalSample& responses, std::span<const FunctionalSample> predictors,
                               const FofConfig& config, double penalty);

/// m(s) + sum_j int chi_j(g) beta_j(g, s) dg by quadrature.
FunctionalSample predict(const FofModel& model, std::span<const FunctionalSample> predictors);

/// beta_j evaluated on the requested points, g_points × s_points.
Matrix coefficient_surface(const FofModel& model, int j, std::span<const double> g_points,
                           std::span<const double> s_points);

}  // namespace hybridfpca
