#include "hybridfpca/fofreg.hpp"

#include "hybridfpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <string>

namespace hybridfpca {

std::vector<double> log_penalty_grid(double lo_exponent, double hi_exponent, int steps) {
    if (steps < 1) fail(ErrorKind::InvalidConfig, "penalty grid needs at least one step");
    std::vector<double> grid(steps);
    for (int j = 0; j < steps; ++j) {
        const double e = steps == 1 ? lo_exponent : lo_exponent + (hi_exponent - lo_exponent) * j / (steps - 1);
        grid[j] = std::pow(10.0, e);
    }
    return grid;
}

void FofConfig::validate() const {
    if (n_basis_g < 2 || n_basis_s < 2) fail(ErrorKind::InvalidConfig, "n_basis_g and n_basis_s must be >= 2");
    if (!(predictor_fve > 0.0 && predictor_fve <= 1.0)) fail(ErrorKind::InvalidConfig, "predictor_fve must lie in (0, 1]");
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) fail(ErrorKind::InvalidConfig, "train_fraction must lie in (0, 1)");
    if (penalty_grid.empty()) fail(ErrorKind::InvalidConfig, "penalty_grid is empty");
    for (std::size_t j = 0; j < penalty_grid.size(); ++j) {
        if (!(penalty_grid[j] > 0.0) || !std::isfinite(penalty_grid[j])) {
            fail(ErrorKind::InvalidConfig, "penalty_grid entries must be positive and finite");
        }
        if (j > 0 && !(penalty_grid[j] > penalty_grid[j - 1])) {
            fail(ErrorKind::InvalidConfig, "penalty_grid must be sorted ascending");
        }
    }
    if (max_components < 0) fail(ErrorKind::InvalidConfig, "max_components must be >= 0");
}

namespace {

/// Symmetric inverse square root of an SPD matrix.
Matrix inverse_sqrt(const Matrix& g, Matrix* sqrt_out, const char* what) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 1e-12 * es.eigenvalues().maxCoeff()) {
        fail(ErrorKind::IllPosedFit, std::string(what) + " Gram matrix is singular; reduce the basis size or refine the grid");
    }
    if (sqrt_out) *sqrt_out = es.eigenvectors() * es.eigenvalues().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
    return es.eigenvectors() * es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
}

struct Compressed {
    PredictorCompression info;
    /// Quadrature projections chi W Phi, n × n_basis_g (uncentered).
    Matrix scores;
};

Compressed compress_predictor(const FunctionalSample& x, const Matrix& phi, const FofConfig& config) {
    const Vector& w = x.grid().weight_vector();
    const Eigen::Index n = x.subjects();

    Compressed out;
    out.info.mean = x.curves().colwise().mean().transpose();
    const Matrix centered = x.curves().rowwise() - out.info.mean.transpose();

    const Matrix wphi = w.asDiagonal() * phi;
    const Matrix gram = phi.transpose() * wphi;
    Matrix gram_sqrt;
    const Matrix gram_isqrt = inverse_sqrt(gram, &gram_sqrt, "predictor spline");

    // Spline coefficients of the L2 projection of each centered curve.
    const Matrix proj = centered * wphi;
    const Matrix coef = proj * gram.llt().solve(Matrix::Identity(gram.rows(), gram.cols()));
    const Matrix cov = coef.transpose() * coef / static_cast<double>(n);
    Matrix a = gram_sqrt * cov * gram_sqrt;
    a = 0.5 * (a + a.transpose());

    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success) fail(ErrorKind::NumericalFailure, "predictor compression eigensolver failed");
    Vector lam = es.eigenvalues().reverse().cwiseMax(0.0);
    const Matrix u = es.eigenvectors().rowwise().reverse();

    const double total = lam.sum();
    Eigen::Index keep = lam.size();
    if (total > 0.0) {
        double run = 0.0;
        for (Eigen::Index j = 0; j < lam.size(); ++j) {
            run += lam[j];
            if (run / total >= config.predictor_fve - 1e-12) {
                keep = j + 1;
                break;
            }
        }
    } else {
        keep = 1;
    }
    if (config.max_components > 0) keep = std::min<Eigen::Index>(keep, config.max_components);

    out.info.eigenvalues = lam;
    out.info.directions = gram_isqrt * u.leftCols(keep);
    for (Eigen::Index c = 0; c < keep; ++c) {
        Eigen::Index arg = 0;
        out.info.directions.col(c).cwiseAbs().maxCoeff(&arg);
        if (out.info.directions(arg, c) < 0.0) out.info.directions.col(c) *= -1.0;
    }
    out.scores = centered * wphi * out.info.directions;
    return out;
}

void check_predictors(std::span<const FunctionalSample> predictors, Eigen::Index n) {
    if (predictors.empty()) fail(ErrorKind::InvalidConfig, "at least one predictor is required");
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        if (predictors[j].subjects() != n) {
            fail(ErrorKind::Shape, "predictor " + std::to_string(j) + " has " + std::to_string(predictors[j].subjects()) +
                                       " subjects, expected " + std::to_string(n));
        }
        if (!(predictors[j].grid() == predictors[0].grid())) {
            fail(ErrorKind::Shape, "predictor " + std::to_string(j) + " does not share the g grid of predictor 0");
        }
    }
}

double grid_mspe(const Matrix& a, const Matrix& b) {
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

FofModel fit_impl(const FunctionalSample& responses, std::span<const FunctionalSample> predictors,
                  const FofConfig& config, std::optional<double> fixed_penalty) {
    config.validate();
    const Eigen::Index n = responses.subjects();
    check_predictors(predictors, n);
    const auto& g_grid = predictors[0].grid();
    const auto& s_grid = responses.grid();
    if (g_grid.size() < config.n_basis_g) {
        fail(ErrorKind::InvalidConfig, "n_basis_g=" + std::to_string(config.n_basis_g) + " exceeds the g grid size " +
                                           std::to_string(g_grid.size()));
    }
    if (s_grid.size() < config.n_basis_s) {
        fail(ErrorKind::InvalidConfig, "n_basis_s=" + std::to_string(config.n_basis_s) + " exceeds the s grid size " +
                                           std::to_string(s_grid.size()));
    }

    FofModel model{g_grid, s_grid, BSplineBasis(g_grid.first(), g_grid.last(), config.n_basis_g),
                   BSplineBasis(s_grid.first(), s_grid.last(), config.n_basis_s)};
    model.penalty_grid = fixed_penalty ? std::vector<double>{*fixed_penalty} : config.penalty_grid;

    const Matrix phi = model.basis_g.design(g_grid.points());
    const Matrix theta = model.basis_s.design(s_grid.points());
    const Matrix gram_s = theta.transpose() * theta;
    inverse_sqrt(gram_s, nullptr, "response spline");

    // Response: mean curve plus least-squares spline coefficients of the residual curves.
    model.response_mean = responses.curves().colwise().mean().transpose();
    const Matrix yc = responses.curves().rowwise() - model.response_mean.transpose();
    const Matrix cy = gram_s.llt().solve(theta.transpose() * yc.transpose()).transpose();

    std::vector<Compressed> parts;
    parts.reserve(predictors.size());
    Eigen::Index total = 0;
    for (const auto& x : predictors) {
        parts.push_back(compress_predictor(x, phi, config));
        total += parts.back().scores.cols();
    }
    if (n <= total + 1) {
        fail(ErrorKind::IllPosedFit, "ill-posed fit: " + std::to_string(n) + " subjects for " + std::to_string(total) +
                                         " compressed predictor scores across " + std::to_string(predictors.size()) +
                                         " predictors plus an intercept; lower predictor_fve or max_components");
    }
    Matrix z(n, total);
    {
        Eigen::Index c = 0;
        for (const auto& p : parts) {
            z.middleCols(c, p.scores.cols()) = p.scores;
            c += p.scores.cols();
        }
    }

    Eigen::JacobiSVD<Matrix> svd(z, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector sv = svd.singularValues();
    const Matrix ut_cy = svd.matrixU().transpose() * cy;

    auto weights_for = [&](double lambda) {
        const Vector shrink = sv.array() / (sv.array().square() + lambda);
        return Matrix(svd.matrixV() * shrink.asDiagonal() * ut_cy);
    };

    const double nd = static_cast<double>(n);
    model.gcv_trace.reserve(model.penalty_grid.size());
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_index = 0;
    for (std::size_t t = 0; t < model.penalty_grid.size(); ++t) {
        const double lambda = model.penalty_grid[t];
        const Matrix b = weights_for(lambda);
        const Matrix resid = cy - z * b;
        const double rss = (resid * gram_s * resid.transpose()).trace();
        const double df = (sv.array().square() / (sv.array().square() + lambda)).sum();
        const double denom = 1.0 - (1.0 + df) / nd;
        const double gcv = (rss / nd) / (denom * denom);
        model.gcv_trace.push_back(gcv);
        if (gcv < best) {
            best = gcv;
            best_index = t;
        }
    }
    model.chosen_penalty = model.penalty_grid[best_index];
    model.regression_weights = weights_for(model.chosen_penalty);
    if (!model.regression_weights.allFinite()) fail(ErrorKind::NumericalFailure, "non-finite ridge weights");

    Vector offset = Vector::Zero(s_grid.size());
    const Vector& wg = g_grid.weight_vector();
    Eigen::Index row = 0;
    for (auto& p : parts) {
        const Eigen::Index k = p.info.directions.cols();
        Matrix c = p.info.directions * model.regression_weights.middleRows(row, k);
        row += k;
        offset += theta * (c.transpose() * (phi.transpose() * (wg.asDiagonal() * p.info.mean)));
        model.coefficients.push_back(std::move(c));
        model.compression.push_back(std::move(p.info));
    }
    model.intercept = model.response_mean - offset;

    const Matrix fitted = (z * model.regression_weights * theta.transpose()).rowwise() + model.response_mean.transpose();
    model.train_mspe = grid_mspe(responses.curves(), fitted);
    return model;
}

}  // namespace

FofModel fit_fof(const FunctionalSample& responses, std::span<const FunctionalSample> predictors,
                 const FofConfig& config) {
    return fit_impl(responses, predictors, config, std::nullopt);
}

FofModel fit_fof_fixed_penalty(const FunctionalSample& responses, std::span<const FunctionalSample> predictors,
                               const FofConfig& config, double penalty) {
    if (!(penalty > 0.0)) fail(ErrorKind::InvalidConfig, "penalty must be positive");
    return fit_impl(responses, predictors, config, penalty);
}

FunctionalSample predict(const FofModel& model, std::span<const FunctionalSample> predictors) {
    if (static_cast<int>(predictors.size()) != model.predictors()) {
        fail(ErrorKind::Shape, "model has " + std::to_string(model.predictors()) + " predictors, got " +
                                   std::to_string(predictors.size()));
    }
    const Eigen::Index n = predictors[0].subjects();
    for (const auto& x : predictors) {
        if (!(x.grid() == model.g_grid)) fail(ErrorKind::Shape, "predictor grid does not match the training g grid");
        if (x.subjects() != n) fail(ErrorKind::Shape, "predictors disagree on the subject count");
    }
    const Matrix phi = model.basis_g.design(model.g_grid.points());
    const Matrix theta = model.basis_s.design(model.s_grid.points());
    const Matrix wphi = model.g_grid.weight_vector().asDiagonal() * phi;

    Matrix coef_s = Matrix::Zero(n, model.basis_s.size());
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        coef_s.noalias() += (predictors[j].curves() * wphi) * model.coefficients[j];
    }
    Matrix out = (coef_s * theta.transpose()).rowwise() + model.intercept.transpose();
    return {std::move(out), model.s_grid};
}

Matrix coefficient_surface(const FofModel& model, int j, std::span<const double> g_points,
                           std::span<const double> s_points) {
    if (j < 0 || j >= model.predictors()) {
        fail(ErrorKind::InvalidConfig, "predictor index " + std::to_string(j) + " out of range [0, " +
                                           std::to_string(model.predictors()) + ")");
    }
    return model.basis_g.design(g_points) * model.coefficients[j] * model.basis_s.design(s_points).transpose();
}

}  // namespace hybridfpca
