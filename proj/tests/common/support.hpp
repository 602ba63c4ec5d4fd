#pragma once

// Straight-loop reference implementations shared by unit and acceptance
// tests. Deliberately naive: no Eigen products, no library helpers beyond
// the tensor accessors.

#include "hybridfpca/hpca.hpp"
#include "hybridfpca/rng.hpp"
#include "hybridfpca/tensorcore.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

namespace hybridfpca::testing {

/// Trapezoid weights written out by hand.
inline std::vector<double> oracle_trapezoid(const std::vector<double>& x) {
    const std::size_t J = x.size();
    std::vector<double> w(J, 0.0);
    for (std::size_t j = 0; j + 1 < J; ++j) {
        const double h = x[j + 1] - x[j];
        w[j] += 0.5 * h;
        w[j + 1] += 0.5 * h;
    }
    return w;
}

/// Strictly increasing random grid on [0, 1] with jittered interior points.
inline Grid1D random_grid(Rng& rng, int count) {
    std::vector<double> x(count);
    for (int j = 0; j < count; ++j) x[j] = static_cast<double>(j) / (count - 1);
    for (int j = 1; j + 1 < count; ++j) x[j] += (rng.uniform() - 0.5) * 0.6 / (count - 1);
    return Grid1D::trapezoid(x);
}

inline HybridTensor random_tensor(Rng& rng, int n, int R, int W, int S, bool uniform_grids = false) {
    Grid1D og = uniform_grids ? Grid1D::uniform(0.0, 1.0, W) : random_grid(rng, W);
    Grid1D sg = uniform_grids ? Grid1D::uniform(0.0, 1.0, S) : random_grid(rng, S);
    std::vector<double> v(static_cast<std::size_t>(n) * R * W * S);
    for (auto& x : v) x = rng.normal();
    return {n, R, std::move(og), std::move(sg), std::move(v)};
}

inline std::vector<double> oracle_mean(const HybridTensor& t) {
    const int n = t.subjects(), R = t.regions(), W = t.omega_size(), S = t.s_size();
    std::vector<double> mean(static_cast<std::size_t>(R) * W * S, 0.0);
    for (int r = 0; r < R; ++r)
        for (int w = 0; w < W; ++w)
            for (int s = 0; s < S; ++s) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i) sum += t(i, r, w, s);
                mean[(static_cast<std::size_t>(r) * W + w) * S + s] = sum / n;
            }
    return mean;
}

/// Dense, unmasked tensors only.
inline Matrix oracle_covariance(const HybridTensor& z, Dimension d) {
    const int n = z.subjects(), R = z.regions(), W = z.omega_size(), S = z.s_size();
    const auto wo = oracle_trapezoid(z.omega_grid().points());
    const auto ws = oracle_trapezoid(z.s_grid().points());
    if (d == Dimension::S) {
        Matrix c(S, S);
        for (int a = 0; a < S; ++a)
            for (int b = 0; b < S; ++b) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int r = 0; r < R; ++r)
                        for (int w = 0; w < W; ++w) sum += wo[w] * z(i, r, w, a) * z(i, r, w, b);
                c(a, b) = sum / (static_cast<double>(n) * R);
            }
        return c;
    }
    if (d == Dimension::Omega) {
        Matrix c(W, W);
        for (int a = 0; a < W; ++a)
            for (int b = 0; b < W; ++b) {
                double sum = 0.0;
                for (int i = 0; i < n; ++i)
                    for (int r = 0; r < R; ++r)
                        for (int s = 0; s < S; ++s) sum += ws[s] * z(i, r, a, s) * z(i, r, b, s);
                c(a, b) = sum / (static_cast<double>(n) * R);
            }
        return c;
    }
    Matrix c(R, R);
    for (int a = 0; a < R; ++a)
        for (int b = 0; b < R; ++b) {
            double sum = 0.0;
            for (int i = 0; i < n; ++i)
                for (int w = 0; w < W; ++w)
                    for (int s = 0; s < S; ++s) sum += wo[w] * ws[s] * z(i, a, w, s) * z(i, b, w, s);
            c(a, b) = sum / n;
        }
    return c;
}

/// xi[i, (k,l,m)] with m fastest.
inline Matrix oracle_scores(const HybridTensor& z, const Matrix& V, const Matrix& phi, const Matrix& psi) {
    const int n = z.subjects(), R = z.regions(), W = z.omega_size(), S = z.s_size();
    const auto wo = oracle_trapezoid(z.omega_grid().points());
    const auto ws = oracle_trapezoid(z.s_grid().points());
    const int K = static_cast<int>(V.cols()), L = static_cast<int>(phi.cols()), M = static_cast<int>(psi.cols());
    Matrix xi(n, K * L * M);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < K; ++k)
            for (int l = 0; l < L; ++l)
                for (int m = 0; m < M; ++m) {
                    double sum = 0.0;
                    for (int r = 0; r < R; ++r)
                        for (int w = 0; w < W; ++w)
                            for (int s = 0; s < S; ++s)
                                sum += z(i, r, w, s) * V(r, k) * phi(w, l) * psi(s, m) * wo[w] * ws[s];
                    xi(i, (k * L + l) * M + m) = sum;
                }
    return xi;
}

inline std::vector<double> oracle_reconstruct(const HpcaModel& model, int q) {
    const int n = model.subjects(), R = model.regions, W = model.omega_grid.size(), S = model.s_grid.size();
    std::vector<double> out(static_cast<std::size_t>(n) * R * W * S, 0.0);
    for (int i = 0; i < n; ++i)
        for (int r = 0; r < R; ++r)
            for (int w = 0; w < W; ++w)
                for (int s = 0; s < S; ++s) {
                    double sum = 0.0;
                    for (int t = 0; t < q; ++t) {
                        const auto& c = model.ranking[t];
                        sum += model.scores(i, t) * model.basis_region.vectors(r, c.k) *
                               model.basis_omega.vectors(w, c.l) * model.basis_s.vectors(s, c.m);
                    }
                    out[((static_cast<std::size_t>(i) * R + r) * W + w) * S + s] = sum;
                }
    return out;
}

inline Matrix oracle_pool(const HybridTensor& t) {
    const int n = t.subjects(), R = t.regions(), W = t.omega_size(), S = t.s_size();
    const auto wo = oracle_trapezoid(t.omega_grid().points());
    Matrix out(n, S);
    for (int i = 0; i < n; ++i)
        for (int s = 0; s < S; ++s) {
            double sum = 0.0;
            for (int r = 0; r < R; ++r)
                for (int w = 0; w < W; ++w) sum += wo[w] * t(i, r, w, s);
            out(i, s) = sum / R;
        }
    return out;
}

/// Weighted Frobenius distance squared between two dense tensors.
inline double oracle_distance2(const HybridTensor& a, const HybridTensor& b) {
    const auto wo = oracle_trapezoid(a.omega_grid().points());
    const auto ws = oracle_trapezoid(a.s_grid().points());
    double sum = 0.0;
    for (int i = 0; i < a.subjects(); ++i)
        for (int r = 0; r < a.regions(); ++r)
            for (int w = 0; w < a.omega_size(); ++w)
                for (int s = 0; s < a.s_size(); ++s) {
                    const double d = a(i, r, w, s) - b(i, r, w, s);
                    sum += wo[w] * ws[s] * d * d;
                }
    return sum;
}

/// Largest |<v_a, v_b>_w - delta_ab| over the basis columns.
inline double orthonormality_defect(const Matrix& v, const std::vector<double>& w) {
    double worst = 0.0;
    for (Eigen::Index a = 0; a < v.cols(); ++a)
        for (Eigen::Index b = 0; b < v.cols(); ++b) {
            double dot = 0.0;
            for (Eigen::Index j = 0; j < v.rows(); ++j) dot += v(j, a) * v(j, b) * w[j];
            worst = std::max(worst, std::abs(dot - (a == b ? 1.0 : 0.0)));
        }
    return worst;
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double worst = a.size() == b.size() ? 0.0 : INFINITY;
    for (std::size_t j = 0; j < std::min(a.size(), b.size()); ++j) worst = std::max(worst, std::abs(a[j] - b[j]));
    return worst;
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return INFINITY;
    return (a - b).cwiseAbs().maxCoeff();
}

/// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
    auto dir = std::filesystem::temp_directory_path() / ("hybridfpca_test_" + name);
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace hybridfpca::testing
