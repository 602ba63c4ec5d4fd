#include "hybridfpca/hpca.hpp"

#include "hybridfpca/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace hybridfpca {

const char* to_string(Dimension d) {
    switch (d) {
        case Dimension::Region: return "region";
        case Dimension::Omega: return "omega";
        case Dimension::S: return "s";
    }
    return "unknown";
}

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Matrix covariance_s(const HybridTensor& z) {
    const int n = z.subjects(), R = z.regions(), W = z.omega_size(), S = z.s_size();
    Matrix c = Matrix::Zero(S, S);
    RowMatrix rows(R, S);
    for (int i = 0; i < n; ++i) {
        const Vector wo = z.omega_weights(i);
        for (int w = 0; w < W; ++w) {
            if (!z.observed(i, w)) continue;
            const double sw = std::sqrt(wo[w]);
            for (int r = 0; r < R; ++r) {
                for (int s = 0; s < S; ++s) rows(r, s) = sw * z(i, r, w, s);
            }
            c.noalias() += rows.transpose() * rows;
        }
    }
    return c / (static_cast<double>(n) * R);
}

Matrix covariance_region(const HybridTensor& z) {
    const int n = z.subjects(), R = z.regions(), W = z.omega_size(), S = z.s_size();
    const Vector& ws = z.s_grid().weight_vector();
    Matrix c = Matrix::Zero(R, R);
    Matrix x(R, S);
    for (int i = 0; i < n; ++i) {
        const Vector wo = z.omega_weights(i);
        for (int w = 0; w < W; ++w) {
            if (!z.observed(i, w)) continue;
            for (int r = 0; r < R; ++r) {
                for (int s = 0; s < S; ++s) x(r, s) = z(i, r, w, s) * std::sqrt(wo[w] * ws[s]);
            }
            c.noalias() += x * x.transpose();
        }
    }
    return c / static_cast<double>(n);
}

Matrix covariance_omega(const HybridTensor& z) {
    const int n = z.subjects(), R = z.regions(), W = z.omega_size(), S = z.s_size();
    const Vector& ws = z.s_grid().weight_vector();
    Matrix c = Matrix::Zero(W, W);
    Eigen::MatrixXi count = Eigen::MatrixXi::Zero(W, W);
    Matrix x(W, static_cast<Eigen::Index>(R) * S);
    for (int i = 0; i < n; ++i) {
        x.setZero();
        for (int w = 0; w < W; ++w) {
            if (!z.observed(i, w)) continue;
            for (int r = 0; r < R; ++r) {
                for (int s = 0; s < S; ++s) x(w, static_cast<Eigen::Index>(r) * S + s) = z(i, r, w, s) * std::sqrt(ws[s]);
            }
        }
        const Matrix p = x * x.transpose() / static_cast<double>(R);
        for (int a = 0; a < W; ++a) {
            if (!z.observed(i, a)) continue;
            for (int b = 0; b < W; ++b) {
                if (!z.observed(i, b)) continue;
                c(a, b) += p(a, b);
                ++count(a, b);
            }
        }
    }
    for (int a = 0; a < W; ++a) {
        for (int b = 0; b < W; ++b) c(a, b) = count(a, b) > 0 ? c(a, b) / count(a, b) : 0.0;
    }
    return c;
}

}  // namespace

Matrix marginal_covariance(const HybridTensor& demeaned, Dimension dimension) {
    Matrix c;
    switch (dimension) {
        case Dimension::Region: c = covariance_region(demeaned); break;
        case Dimension::Omega: c = covariance_omega(demeaned); break;
        case Dimension::S: c = covariance_s(demeaned); break;
    }
    if (!c.allFinite()) fail(ErrorKind::InvalidData, std::string("non-finite marginal covariance for ") + to_string(dimension));
    // Symmetrize away accumulation-order roundoff.
    return 0.5 * (c + c.transpose());
}

MarginalBasis eigendecompose_marginal(const Matrix& cov, const Vector& weights, double fve_target, Dimension dimension,
                                      bool clamp_negative) {
    if (!(fve_target > 0.0 && fve_target <= 1.0)) {
        fail(ErrorKind::InvalidConfig, "fve_target must lie in (0, 1], got " + std::to_string(fve_target));
    }
    const Eigen::Index J = cov.rows();
    if (cov.cols() != J || weights.size() != J || J == 0) fail(ErrorKind::Shape, "covariance/weights extents disagree");
    if ((weights.array() <= 0.0).any()) fail(ErrorKind::InvalidGrid, "inner-product weights must be positive");

    const Vector root = weights.array().sqrt();
    const Matrix a = root.asDiagonal() * cov * root.asDiagonal();
    Eigen::SelfAdjointEigenSolver<Matrix> solver(0.5 * (a + a.transpose()));
    if (solver.info() != Eigen::Success) {
        fail(ErrorKind::NumericalFailure, std::string("eigensolver failed for ") + to_string(dimension));
    }

    MarginalBasis out;
    out.dimension = dimension;
    out.eigenvalues = solver.eigenvalues().reverse();
    const Matrix u = solver.eigenvectors().rowwise().reverse();

    const double top = std::max(0.0, out.eigenvalues[0]);
    const double tol = 1e-10 * std::max(1.0, top);
    for (Eigen::Index j = 0; j < J; ++j) {
        double& lam = out.eigenvalues[j];
        if (lam >= 0.0) continue;
        if (!clamp_negative && lam < -tol) {
            fail(ErrorKind::NumericalFailure, std::string("marginal covariance for ") + to_string(dimension) +
                                                  " has eigenvalue " + std::to_string(lam) + " below clamp tolerance");
        }
        lam = 0.0;
    }

    const double total = out.eigenvalues.sum();
    out.fve.resize(J);
    if (total > 0.0) {
        double run = 0.0;
        for (Eigen::Index j = 0; j < J; ++j) {
            run += out.eigenvalues[j];
            out.fve[j] = std::min(1.0, run / total);
        }
        out.fve[J - 1] = 1.0;
    } else {
        out.fve.setOnes();
    }

    Eigen::Index keep = J;
    for (Eigen::Index j = 0; j < J; ++j) {
        if (out.fve[j] >= fve_target - 1e-12) {
            keep = j + 1;
            break;
        }
    }

    out.vectors = root.cwiseInverse().asDiagonal() * u.leftCols(keep);
    for (Eigen::Index c = 0; c < keep; ++c) {
        Eigen::Index arg = 0;
        out.vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (out.vectors(arg, c) < 0.0) out.vectors.col(c) *= -1.0;
    }
    return out;
}

Matrix compute_scores(const HybridTensor& z, const MarginalBasis& region, const MarginalBasis& omega,
                      const MarginalBasis& s) {
    const int n = z.subjects(), R = z.regions(), W = z.omega_size(), S = z.s_size();
    if (region.vectors.rows() != R || omega.vectors.rows() != W || s.vectors.rows() != S) {
        fail(ErrorKind::Shape, "basis extents do not conform to tensor (" + std::to_string(R) + ", " +
                                   std::to_string(W) + ", " + std::to_string(S) + ")");
    }
    const int K = region.retained(), L = omega.retained(), M = s.retained();
    const Matrix psi_w = z.s_grid().weight_vector().asDiagonal() * s.vectors;

    Matrix scores(n, static_cast<Eigen::Index>(K) * L * M);
    for (int i = 0; i < n; ++i) {
        // (R*W) × M after contracting s.
        const Matrix t1 = z.subject_block(i) * psi_w;
        const Vector wo = z.omega_weights(i);
        const Matrix phi_w = wo.asDiagonal() * omega.vectors;
        // For each region: L × M.
        std::vector<Matrix> t2(R);
        for (int r = 0; r < R; ++r) t2[r] = phi_w.transpose() * t1.middleRows(static_cast<Eigen::Index>(r) * W, W);
        for (int k = 0; k < K; ++k) {
            Matrix acc = Matrix::Zero(L, M);
            for (int r = 0; r < R; ++r) acc += region.vectors(r, k) * t2[r];
            for (int l = 0; l < L; ++l) {
                for (int m = 0; m < M; ++m) scores(i, (static_cast<Eigen::Index>(k) * L + l) * M + m) = acc(l, m);
            }
        }
    }
    return scores;
}

HpcaModel fit_hpca(const HybridTensor& tensor, const HpcaOptions& options) {
    auto centered = center(tensor);
    const HybridTensor& z = centered.demeaned;
    const bool masked = z.observed_mask().has_value();

    HpcaModel model{tensor.omega_grid(), tensor.s_grid()};
    model.regions = tensor.regions();
    model.mean = std::move(centered.mean);
    model.fve_target = options.fve_target;
    model.order = options.ranking;

    model.basis_region = eigendecompose_marginal(marginal_covariance(z, Dimension::Region),
                                                 Vector::Ones(tensor.regions()), options.fve_target, Dimension::Region);
    model.basis_omega = eigendecompose_marginal(marginal_covariance(z, Dimension::Omega),
                                                tensor.omega_grid().weight_vector(), options.fve_target,
                                                Dimension::Omega, masked);
    model.basis_s = eigendecompose_marginal(marginal_covariance(z, Dimension::S), tensor.s_grid().weight_vector(),
                                            options.fve_target, Dimension::S);

    const Matrix raw = compute_scores(z, model.basis_region, model.basis_omega, model.basis_s);
    const int L = model.L(), M = model.M();
    const Eigen::Index total = raw.cols();
    const double n = static_cast<double>(raw.rows());

    std::vector<double> variance(total);
    for (Eigen::Index c = 0; c < total; ++c) {
        const double mu = raw.col(c).mean();
        variance[c] = (raw.col(c).array() - mu).square().sum() / n;
    }

    std::vector<Eigen::Index> order(total);
    std::iota(order.begin(), order.end(), 0);
    if (options.ranking == RankingOrder::Variance) {
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return variance[a] > variance[b]; });
    }

    model.scores.resize(raw.rows(), total);
    model.ranking.reserve(total);
    model.score_variance.reserve(total);
    for (Eigen::Index t = 0; t < total; ++t) {
        const auto c = order[t];
        model.scores.col(t) = raw.col(c);
        const int k = static_cast<int>(c / (L * M));
        const int l = static_cast<int>((c / M) % L);
        const int m = static_cast<int>(c % M);
        model.ranking.push_back({k, l, m});
        model.score_variance.push_back(variance[c]);
    }
    return model;
}

HybridTensor reconstruct(const HpcaModel& model, int q) {
    if (q < 1 || q > model.components()) {
        fail(ErrorKind::InvalidConfig, "reconstruction count q=" + std::to_string(q) + " outside [1, " +
                                           std::to_string(model.components()) + "]");
    }
    const int n = model.subjects(), R = model.regions, W = model.omega_grid.size(), S = model.s_grid.size();
    std::vector<double> out(static_cast<std::size_t>(n) * R * W * S, 0.0);
    const std::size_t block = static_cast<std::size_t>(R) * W * S;
    Eigen::Map<RowMatrix> all(out.data(), n, static_cast<Eigen::Index>(block));

    for (int t = 0; t < q; ++t) {
        const auto& [k, l, m] = model.ranking[t];
        // Component pattern over (r, w, s), row-major.
        RowMatrix pattern(1, static_cast<Eigen::Index>(block));
        for (int r = 0; r < R; ++r) {
            for (int w = 0; w < W; ++w) {
                const double vw = model.basis_region.vectors(r, k) * model.basis_omega.vectors(w, l);
                for (int s = 0; s < S; ++s) {
                    pattern(0, (static_cast<Eigen::Index>(r) * W + w) * S + s) = vw * model.basis_s.vectors(s, m);
                }
            }
        }
        all.noalias() += model.scores.col(t) * pattern;
    }
    return {n, R, model.omega_grid, model.s_grid, std::move(out)};
}

double weighted_squared_norm(const HybridTensor& t) {
    const Vector& ws = t.s_grid().weight_vector();
    double total = 0.0;
    for (int i = 0; i < t.subjects(); ++i) {
        const Vector wo = t.omega_weights(i);
        for (int r = 0; r < t.regions(); ++r) {
            for (int w = 0; w < t.omega_size(); ++w) {
                if (!t.observed(i, w)) continue;
                for (int s = 0; s < t.s_size(); ++s) {
                    const double v = t(i, r, w, s);
                    total += wo[w] * ws[s] * v * v;
                }
            }
        }
    }
    return total;
}

}  // namespace hybridfpca
