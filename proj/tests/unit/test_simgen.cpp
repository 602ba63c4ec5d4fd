#include "hybridfpca/error.hpp"
#include "hybridfpca/hpca.hpp"
#include "hybridfpca/simgen.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace hybridfpca;
using namespace hybridfpca::testing;

TEST(Fourier, OrthonormalOnUnitInterval) {
    const auto g = Grid1D::uniform(0, 1, 401);
    for (int a = 0; a < 5; ++a)
        for (int b = 0; b < 5; ++b) {
            std::vector<double> fa, fb;
            for (double x : g.points()) {
                fa.push_back(fourier_function(a, x));
                fb.push_back(fourier_function(b, x));
            }
            EXPECT_NEAR(weighted_inner_product(fa, fb, g), a == b ? 1.0 : 0.0, 1e-10);
        }
}

TEST(GenHybrid, CompleteHasNoMask) {
    HybridGenConfig cfg;
    const auto d = gen_hybrid(cfg);
    EXPECT_FALSE(d.tensor.observed_mask().has_value());
    EXPECT_EQ(d.tensor.subjects(), 20);
    EXPECT_EQ(d.tensor.regions(), 4);
}

TEST(GenHybrid, SparseKeepsFraction) {
    HybridGenConfig cfg;
    cfg.omega_sampling = OmegaSampling::Sparse;
    const auto d = gen_hybrid(cfg);
    ASSERT_TRUE(d.tensor.observed_mask().has_value());
    const auto& m = *d.tensor.observed_mask();
    for (int i = 0; i < cfg.n; ++i) EXPECT_EQ(m.row(i).count(), std::lround(0.5 * cfg.omega_points));
}

TEST(GenHybrid, SeededRunsAreBitIdentical) {
    HybridGenConfig cfg;
    cfg.seed = 99;
    cfg.stream = 5;
    EXPECT_EQ(gen_hybrid(cfg).tensor.values(), gen_hybrid(cfg).tensor.values());
    auto other = cfg;
    other.stream = 6;
    EXPECT_NE(gen_hybrid(cfg).tensor.values(), gen_hybrid(other).tensor.values());
}

TEST(GenHybrid, InvalidConfig) {
    HybridGenConfig cfg;
    cfg.K_true = 0;
    EXPECT_THROW(gen_hybrid(cfg), Error);
    cfg = HybridGenConfig{};
    cfg.observed_fraction = 0.0;
    cfg.omega_sampling = OmegaSampling::Sparse;
    EXPECT_THROW(gen_hybrid(cfg), Error);
    cfg = HybridGenConfig{};
    cfg.score_sd = {1.0, 2.0};
    EXPECT_THROW(gen_hybrid(cfg), Error);
}

TEST(GenHybrid, NoiselessFitReproducesSignal) {
    HybridGenConfig cfg;
    cfg.n = 15;
    cfg.noise_sd = 0.0;
    const auto d = gen_hybrid(cfg);
    const auto model = fit_hpca(d.tensor, 1.0);
    const auto rec = reconstruct(model, model.components());
    const std::size_t block = model.mean.size();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < rec.values().size(); ++j) {
        const double diff = rec.values()[j] + model.mean[j % block] - d.truth.signal[j];
        num += diff * diff;
        den += d.truth.signal[j] * d.truth.signal[j];
    }
    EXPECT_LE(std::sqrt(num / den), 1e-6);
}

TEST(GenHybrid, ScoreVarianceRecoveryAtN200) {
    HybridGenConfig cfg;
    cfg.n = 200;
    cfg.noise_sd = 0.0;
    cfg.seed = 2024;
    const auto d = gen_hybrid(cfg);
    const auto model = fit_hpca(d.tensor, 0.999999);
    ASSERT_EQ(model.K(), cfg.K_true);
    ASSERT_EQ(model.L(), cfg.L_true);
    ASSERT_EQ(model.M(), cfg.M_true);
    const auto sd = cfg.resolved_score_sd();
    for (int t = 0; t < model.components(); ++t) {
        const auto& c = model.ranking[t];
        const double truth = std::pow(sd[(c.k * cfg.L_true + c.l) * cfg.M_true + c.m], 2);
        EXPECT_LE(std::abs(model.score_variance[t] - truth) / truth, 0.2) << c.k << c.l << c.m;
    }
}

TEST(GenFof, HalfSparseZeroesFiveSurfaces) {
    FofGenConfig cfg;
    cfg.coefficient_mode = CoefficientMode::HalfSparse;
    const auto d = gen_fof(cfg);
    int zero = 0;
    for (int j = 0; j < cfg.p; ++j) zero += d.truth.surface_is_zero(j) ? 1 : 0;
    EXPECT_EQ(zero, 5);
    for (int j = 5; j < 10; ++j) EXPECT_TRUE(d.truth.surface_is_zero(j));
    const std::vector<double> pts{0.0, 0.3, 0.9};
    EXPECT_EQ(d.truth.surface_on(7, pts, pts).cwiseAbs().maxCoeff(), 0.0);

    cfg.coefficient_mode = CoefficientMode::Complete;
    const auto full = gen_fof(cfg);
    for (int j = 0; j < cfg.p; ++j) EXPECT_FALSE(full.truth.surface_is_zero(j));
}

TEST(GenFof, NoNoiseNoSurfaceGivesMean) {
    FofGenConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.surface_scale = 0.0;
    const auto d = gen_fof(cfg);
    const auto& s = d.response.grid().points();
    for (int i = 0; i < cfg.n; ++i)
        for (int j = 0; j < static_cast<int>(s.size()); ++j) EXPECT_NEAR(d.response.curves()(i, j), FofTruth::mean(s[j]), 1e-15);
}

TEST(GenFof, QuadratureMatchesRefinedRiemannSum) {
    FofGenConfig cfg;
    cfg.noise_sd = 0.0;
    cfg.n = 6;
    const auto d = gen_fof(cfg);
    const int fine = 10 * (cfg.g_points - 1);
    const auto& s = d.response.grid().points();
    double worst = 0.0;
    for (int i = 0; i < cfg.n; ++i)
        for (std::size_t si = 0; si < s.size(); ++si) {
            double sum = FofTruth::mean(s[si]);
            for (int j = 0; j < cfg.p; ++j)
                for (int k = 0; k < fine; ++k) {
                    const double g = (k + 0.5) / fine;
                    sum += d.truth.predictor(j, i, g) * d.truth.surface(j, g, s[si]) / fine;
                }
            worst = std::max(worst, std::abs(sum - d.response.curves()(i, static_cast<Eigen::Index>(si))));
        }
    EXPECT_LE(worst, 1e-4);
}

TEST(GenFof, PredictorsMatchTruth) {
    FofGenConfig cfg;
    const auto d = gen_fof(cfg);
    const auto& g = d.predictors[3].grid().points();
    EXPECT_NEAR(d.predictors[3].curves()(2, 4), d.truth.predictor(3, 2, g[4]), 1e-14);
}

TEST(SelectionFixture, ShapesAndDeterminism) {
    SelectionFixtureConfig cfg;
    cfg.n = 20;
    const auto a = gen_selection_fixture(cfg);
    const auto b = gen_selection_fixture(cfg);
    EXPECT_EQ(a.tensor.values(), b.tensor.values());
    ASSERT_EQ(a.predictors.size(), 2u);
    EXPECT_EQ(a.predictors[0].subjects(), 20);
}

namespace {

ScenarioConfig tiny_scenario() {
    ScenarioConfig cfg;
    cfg.replicates = 4;
    cfg.seed = 3;
    cfg.hybrid.omega_points = 11;
    cfg.hybrid.s_points = 11;
    cfg.fof.g_points = 11;
    cfg.fof.s_points = 11;
    cfg.fit.n_basis_g = 6;
    cfg.fit.n_basis_s = 6;
    return cfg;
}

}  // namespace

TEST(Scenario, SingleReplicateCollapsesQuartiles) {
    auto cfg = tiny_scenario();
    cfg.replicates = 1;
    cfg.sample_sizes = {20};
    cfg.omega_modes = {OmegaSampling::Complete};
    cfg.beta_modes = {CoefficientMode::Complete};
    const auto rep = run_scenario1(cfg);
    ASSERT_FALSE(rep.rows.empty());
    for (const auto& row : rep.rows) {
        EXPECT_EQ(row.summary.q1, row.summary.median);
        EXPECT_EQ(row.summary.q3, row.summary.median);
        EXPECT_EQ(row.completed, 1);
    }
}

TEST(Scenario, OneCoversTheFullDesign) {
    const auto rep = run_scenario1(tiny_scenario(), 4);
    std::map<std::string, int> cells;
    for (const auto& r : rep.records) ++cells[r.scenario];
    EXPECT_EQ(cells.size(), 8u);
    for (const auto& [label, count] : cells) EXPECT_EQ(count, 4) << label;
    EXPECT_TRUE(cells.count("n=140|omega=sparse|beta=half_sparse"));
    for (const auto& r : rep.records) EXPECT_TRUE(r.ok) << r.scenario << " " << r.stage << ": " << r.error;
}

TEST(Scenario, ResultsIndependentOfThreads) {
    auto cfg = tiny_scenario();
    cfg.sample_sizes = {20};
    const auto a = run_scenario2(cfg, 1);
    const auto b = run_scenario2(cfg, 3);
    EXPECT_EQ(format_report(a.rows), format_report(b.rows));
}

TEST(Scenario, TwoArmsArePaired) {
    auto cfg = tiny_scenario();
    cfg.sample_sizes = {20};
    const auto rep = run_scenario2(cfg, 2);
    // Digest per (beta, replicate) must agree across the three arms.
    std::map<std::pair<std::string, int>, std::set<std::uint64_t>> digests;
    for (const auto& r : rep.records) {
        ASSERT_TRUE(r.ok) << r.error;
        const auto beta = r.scenario.substr(r.scenario.find("|beta="));
        digests[{beta, r.replicate}].insert(r.construction);
    }
    EXPECT_EQ(digests.size(), 2u * cfg.replicates);
    for (const auto& [key, set] : digests) EXPECT_EQ(set.size(), 1u) << key.first << " " << key.second;
}

TEST(Scenario, OneQualitativeBehaviour) {
    auto cfg = tiny_scenario();
    cfg.replicates = 12;
    cfg.omega_modes = {OmegaSampling::Complete};
    cfg.beta_modes = {CoefficientMode::Complete};
    const auto rep = run_scenario1(cfg, 4);
    int wins = 0, total = 0;
    std::map<std::string, std::vector<double>> test_mspe;
    for (const auto& r : rep.records) {
        ASSERT_TRUE(r.ok) << r.error;
        test_mspe[r.scenario].push_back(r.metrics.at("mspe_pred_test"));
        if (r.metrics.count("cor_pred_train") && r.metrics.count("cor_pred_test")) {
            ++total;
            wins += r.metrics.at("cor_pred_train") >= r.metrics.at("cor_pred_test") ? 1 : 0;
        }
    }
    EXPECT_GT(2 * wins, total);
    const auto small = quartiles(test_mspe.at("n=20|omega=complete|beta=complete")).median;
    const auto large = quartiles(test_mspe.at("n=140|omega=complete|beta=complete")).median;
    EXPECT_LT(large, small);
}

TEST(Scenario, ConfigValidation) {
    ScenarioConfig cfg;
    cfg.replicates = 0;
    EXPECT_THROW(run_scenario2(cfg), Error);
    cfg = ScenarioConfig{};
    cfg.sample_sizes = {};
    EXPECT_THROW(cfg.validate(), Error);
}
