#include "hybridfpca/bspline.hpp"
#include "hybridfpca/error.hpp"
#include "hybridfpca/fofreg.hpp"
#include "hybridfpca/metrics.hpp"
#include "hybridfpca/simgen.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace hybridfpca;
using namespace hybridfpca::testing;

namespace {

FunctionalSample fourier_sample(Rng& rng, int n, const Grid1D& grid, int terms) {
    Matrix x(n, grid.size());
    for (int i = 0; i < n; ++i) {
        Vector a(terms);
        for (int t = 0; t < terms; ++t) a[t] = rng.normal() / (1.0 + t);
        for (int j = 0; j < grid.size(); ++j) {
            double v = 0.0;
            for (int t = 0; t < terms; ++t) v += a[t] * fourier_function(t, grid.points()[j]);
            x(i, j) = v;
        }
    }
    return {x, grid};
}

// Correlation of two flattened matrices, written out.
double flat_cor(const Matrix& a, const Matrix& b) {
    const double ma = a.mean(), mb = b.mean();
    double sab = 0, saa = 0, sbb = 0;
    for (Eigen::Index j = 0; j < a.size(); ++j) {
        const double x = a.data()[j] - ma, y = b.data()[j] - mb;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    return sab / std::sqrt(saa * sbb);
}

}  // namespace

TEST(BSpline, PartitionOfUnity) {
    const BSplineBasis b(0.0, 2.0, 7);
    EXPECT_EQ(b.degree(), 3);
    for (double x : {0.0, 0.13, 0.9, 1.5, 2.0}) EXPECT_NEAR(b.evaluate(x).sum(), 1.0, 1e-14);
    EXPECT_THROW(b.evaluate(2.5), Error);
}

TEST(BSpline, TwoFunctionsAreLinearHats) {
    const BSplineBasis b(0.0, 1.0, 2);
    EXPECT_EQ(b.degree(), 1);
    const Vector v = b.evaluate(0.3);
    EXPECT_NEAR(v[0], 0.7, 1e-15);
    EXPECT_NEAR(v[1], 0.3, 1e-15);
}

TEST(Fof, ConfigValidation) {
    FofConfig c;
    c.n_basis_s = 1;
    EXPECT_THROW(c.validate(), Error);
    c = FofConfig{};
    c.penalty_grid = {1.0, 0.1};
    EXPECT_THROW(c.validate(), Error);
    c = FofConfig{};
    c.penalty_grid = {};
    EXPECT_THROW(c.validate(), Error);
    c = FofConfig{};
    c.train_fraction = 1.0;
    EXPECT_THROW(c.validate(), Error);
    EXPECT_NO_THROW(FofConfig{}.validate());
}

TEST(Fof, ZeroPredictorsGiveMeanCurve) {
    Rng rng(101, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto s = Grid1D::uniform(0, 1, 17);
    const auto y = fourier_sample(rng, 12, s, 5);
    const FunctionalSample zero(Matrix::Zero(12, 21), g);
    FofConfig cfg;
    cfg.n_basis_g = 6;
    cfg.n_basis_s = 6;
    const std::vector<FunctionalSample> xs{zero, zero};
    const auto model = fit_fof(y, xs, cfg);
    const Vector mean = y.curves().colwise().mean().transpose();
    EXPECT_LE(max_abs_diff(Matrix(model.intercept), Matrix(mean)), 1e-12);
    for (int j = 0; j < 2; ++j) {
        EXPECT_LE(coefficient_surface(model, j, g.points(), s.points()).cwiseAbs().maxCoeff(), 1e-12);
    }
    const auto pred = predict(model, xs);
    for (int i = 0; i < 12; ++i) EXPECT_LE((pred.curves().row(i).transpose() - mean).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Fof, SingleBasisOlsOracle) {
    // Response exactly in the span of the two linear hats: y_i = a_i (1 - s) + b_i s.
    Rng rng(103, 0);
    const int n = 15;
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto s = Grid1D::uniform(0, 1, 11);
    std::vector<double> u(n), a(n), b(n);
    Matrix x(n, 21), y(n, 11);
    for (int i = 0; i < n; ++i) {
        u[i] = rng.normal();
        a[i] = 1.0 + 2.0 * u[i] + 0.3 * rng.normal();
        b[i] = -0.5 * u[i] + 0.3 * rng.normal();
        for (int j = 0; j < 21; ++j) x(i, j) = u[i] * (1.0 + g.points()[j] * g.points()[j]);
        for (int j = 0; j < 11; ++j) y(i, j) = a[i] * (1 - s.points()[j]) + b[i] * s.points()[j];
    }
    // Normal equations for [1, u] by hand.
    auto ols_fit = [&](const std::vector<double>& t) {
        double su = 0, suu = 0, st = 0, sut = 0;
        for (int i = 0; i < n; ++i) {
            su += u[i];
            suu += u[i] * u[i];
            st += t[i];
            sut += u[i] * t[i];
        }
        const double det = n * suu - su * su;
        const double c0 = (suu * st - su * sut) / det;
        const double c1 = (n * sut - su * st) / det;
        std::vector<double> f(n);
        for (int i = 0; i < n; ++i) f[i] = c0 + c1 * u[i];
        return f;
    };
    const auto fa = ols_fit(a), fb = ols_fit(b);

    FofConfig cfg;
    cfg.n_basis_g = 6;
    cfg.n_basis_s = 2;
    cfg.predictor_fve = 0.99;
    const std::vector<FunctionalSample> xs{FunctionalSample(x, g)};
    const auto model = fit_fof_fixed_penalty(FunctionalSample(y, s), xs, cfg, 1e-13);
    ASSERT_EQ(model.compression[0].directions.cols(), 1);
    const auto pred = predict(model, xs);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < 11; ++j) {
            const double expected = fa[i] * (1 - s.points()[j]) + fb[i] * s.points()[j];
            EXPECT_NEAR(pred.curves()(i, j), expected, 1e-8);
        }
}

TEST(Fof, InterpolatesRepresentableResponse) {
    Rng rng(107, 0);
    const int n = 30;
    const auto g = Grid1D::uniform(0, 1, 31);
    const auto s = Grid1D::uniform(0, 1, 21);
    const auto x = fourier_sample(rng, n, g, 3);
    // y_i(s) = int x_i(g) beta(g, s) dg with beta in the spline span of s.
    Matrix y(n, 21);
    const BSplineBasis bs(0, 1, 5);
    const Matrix theta = bs.design(s.points());
    for (int i = 0; i < n; ++i) {
        Vector c(5);
        for (int k = 0; k < 5; ++k) {
            double v = 0.0;
            for (int j = 0; j < 31; ++j) v += g.weights()[j] * x.curves()(i, j) * std::cos((k + 1) * g.points()[j]);
            c[k] = v;
        }
        y.row(i) = (theta * c).transpose();
    }
    FofConfig cfg;
    cfg.n_basis_g = 12;
    cfg.n_basis_s = 5;
    cfg.predictor_fve = 1.0;
    const std::vector<FunctionalSample> xs{x};
    const auto model = fit_fof_fixed_penalty(FunctionalSample(y, s), xs, cfg, 1e-13);
    EXPECT_LE(max_abs_diff(predict(model, xs).curves(), y), 1e-6);
}

TEST(Fof, PredictionIsLinearInEachPredictor) {
    Rng rng(109, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto s = Grid1D::uniform(0, 1, 21);
    const auto x1 = fourier_sample(rng, 25, g, 5);
    const auto x2 = fourier_sample(rng, 25, g, 5);
    const auto y = fourier_sample(rng, 25, s, 4);
    FofConfig cfg;
    cfg.n_basis_g = 8;
    cfg.n_basis_s = 8;
    cfg.max_components = 3;
    const std::vector<FunctionalSample> xs{x1, x2};
    const auto model = fit_fof(y, xs, cfg);
    const FunctionalSample twice(2.0 * x1.curves(), g), zero(Matrix::Zero(25, 21), g);
    const auto p1 = predict(model, std::vector{x1, x2}).curves();
    const auto p2 = predict(model, std::vector{twice, x2}).curves();
    const auto p0 = predict(model, std::vector{zero, x2}).curves();
    EXPECT_LE(max_abs_diff(p2 - p0, 2.0 * (p1 - p0)), 1e-10);
}

TEST(Fof, TrainMspeNonincreasingAsPenaltyShrinks) {
    Rng rng(113, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto s = Grid1D::uniform(0, 1, 21);
    const auto x = fourier_sample(rng, 30, g, 6);
    const auto y = fourier_sample(rng, 30, s, 6);
    FofConfig cfg;
    cfg.n_basis_g = 8;
    cfg.n_basis_s = 8;
    cfg.max_components = 5;
    const std::vector<FunctionalSample> xs{x};
    double prev = INFINITY;
    for (double lambda : {100.0, 10.0, 1.0, 0.1, 1e-3, 1e-6}) {
        const double m = fit_fof_fixed_penalty(y, xs, cfg, lambda).train_mspe;
        EXPECT_LE(m, prev * (1 + 1e-12));
        prev = m;
    }
}

TEST(Fof, ChosenPenaltyFromGrid) {
    Rng rng(127, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto x = fourier_sample(rng, 20, g, 5);
    const auto y = fourier_sample(rng, 20, g, 5);
    FofConfig cfg;
    cfg.n_basis_g = 6;
    cfg.n_basis_s = 6;
    cfg.max_components = 3;
    const auto model = fit_fof(y, std::vector{x}, cfg);
    EXPECT_NE(std::find(cfg.penalty_grid.begin(), cfg.penalty_grid.end(), model.chosen_penalty), cfg.penalty_grid.end());
    EXPECT_EQ(model.gcv_trace.size(), cfg.penalty_grid.size());
    EXPECT_TRUE(model.coefficients[0].allFinite());
}

TEST(Fof, PermutationEquivariance) {
    Rng rng(131, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto x = fourier_sample(rng, 16, g, 5);
    const auto y = fourier_sample(rng, 16, g, 5);
    FofConfig cfg;
    cfg.n_basis_g = 6;
    cfg.n_basis_s = 6;
    cfg.max_components = 3;
    std::vector<int> perm(16);
    for (int i = 0; i < 16; ++i) perm[i] = (i * 5) % 16;
    const auto a = predict(fit_fof(y, std::vector{x}, cfg), std::vector{x}).curves();
    const auto px = x.select_subjects(perm);
    const auto b = predict(fit_fof(y.select_subjects(perm), std::vector{px}, cfg), std::vector{px}).curves();
    for (int i = 0; i < 16; ++i) EXPECT_LE((b.row(i) - a.row(perm[i])).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Fof, RecoversRankOneSurface) {
    Rng rng(137, 0);
    const int n = 120;
    const auto g = Grid1D::uniform(0, 1, 31);
    const auto s = Grid1D::uniform(0, 1, 31);
    const auto x = fourier_sample(rng, n, g, 5);
    auto a = [](double t) { return fourier_function(1, t) + 0.5 * fourier_function(2, t); };
    auto b = [](double t) { return 1.0 + t * t; };
    Matrix y(n, 31), truth(31, 31);
    for (int gi = 0; gi < 31; ++gi)
        for (int si = 0; si < 31; ++si) truth(gi, si) = a(g.points()[gi]) * b(s.points()[si]);
    for (int i = 0; i < n; ++i) {
        double proj = 0.0;
        for (int j = 0; j < 31; ++j) proj += g.weights()[j] * x.curves()(i, j) * a(g.points()[j]);
        for (int si = 0; si < 31; ++si) y(i, si) = proj * b(s.points()[si]) + 0.01 * rng.normal();
    }
    FofConfig cfg;
    cfg.predictor_fve = 0.999;
    const auto model = fit_fof(FunctionalSample(y, s), std::vector{x}, cfg);
    const Matrix est = coefficient_surface(model, 0, g.points(), s.points());
    EXPECT_GT(flat_cor(est, truth), 0.8);
}

TEST(Fof, SurfaceAtTrainingGridMatchesRepresentation) {
    Rng rng(139, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto x = fourier_sample(rng, 20, g, 5);
    const auto y = fourier_sample(rng, 20, g, 5);
    FofConfig cfg;
    cfg.n_basis_g = 6;
    cfg.n_basis_s = 6;
    cfg.max_components = 3;
    const auto model = fit_fof(y, std::vector{x}, cfg);
    const Matrix surf = coefficient_surface(model, 0, g.points(), g.points());
    for (int gi = 0; gi < 21; gi += 5)
        for (int si = 0; si < 21; si += 4) {
            const double direct = model.basis_g.evaluate(g.points()[gi]).dot(
                model.coefficients[0] * model.basis_s.evaluate(g.points()[si]));
            EXPECT_NEAR(surf(gi, si), direct, 1e-12);
        }
    EXPECT_THROW(coefficient_surface(model, 1, g.points(), g.points()), Error);
}

TEST(Fof, IllPosedWhenTooFewSubjects) {
    Rng rng(149, 0);
    const auto g = Grid1D::uniform(0, 1, 21);
    const auto x = fourier_sample(rng, 5, g, 7);
    const auto y = fourier_sample(rng, 5, g, 3);
    FofConfig cfg;
    cfg.n_basis_g = 8;
    cfg.n_basis_s = 4;
    cfg.predictor_fve = 1.0;
    try {
        fit_fof(y, std::vector{x, x}, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::IllPosedFit);
        EXPECT_NE(std::string(e.what()).find("5 subjects"), std::string::npos);
    }
}

TEST(Fof, MismatchedGridsAreShapeErrors) {
    Rng rng(151, 0);
    const auto x1 = fourier_sample(rng, 10, Grid1D::uniform(0, 1, 21), 3);
    const auto x2 = fourier_sample(rng, 10, Grid1D::uniform(0, 1, 19), 3);
    const auto y = fourier_sample(rng, 10, Grid1D::uniform(0, 1, 21), 3);
    FofConfig cfg;
    cfg.n_basis_g = 5;
    cfg.n_basis_s = 5;
    cfg.max_components = 1;
    try {
        fit_fof(y, std::vector{x1, x2}, cfg);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::Shape);
    }
    const auto model = fit_fof(y, std::vector{x1}, cfg);
    EXPECT_THROW(predict(model, std::vector{x2}), Error);
}
