#include "hybridfpca/simgen.hpp"

#include "hybridfpca/error.hpp"
#include "hybridfpca/parallel.hpp"
#include "hybridfpca/pooling.hpp"
#include "hybridfpca/rng.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace hybridfpca {

double fourier_function(int index, double x) {
    if (index == 0) return 1.0;
    const double freq = 2.0 * std::numbers::pi * ((index + 1) / 2);
    return index % 2 == 1 ? std::numbers::sqrt2 * std::sin(freq * x) : std::numbers::sqrt2 * std::cos(freq * x);
}

const char* to_string(OmegaSampling s) { return s == OmegaSampling::Complete ? "complete" : "sparse"; }
const char* to_string(CoefficientMode m) { return m == CoefficientMode::Complete ? "complete" : "half_sparse"; }

std::vector<double> default_score_sd(int K, int L, int M) {
    std::vector<double> sd;
    sd.reserve(static_cast<std::size_t>(K) * L * M);
    for (int k = 0; k < K; ++k)
        for (int l = 0; l < L; ++l)
            for (int m = 0; m < M; ++m) sd.push_back(std::pow(0.8, k + l + m));
    return sd;
}

void HybridGenConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorKind::InvalidConfig, "hybrid generator: " + what); };
    if (n < 2) bad("n must be >= 2");
    if (R < 1 || K_true < 1 || L_true < 1 || M_true < 1) bad("R and true ranks must be >= 1");
    if (K_true > R) bad("K_true exceeds the number of regions");
    if (omega_points < 3 || s_points < 3) bad("grids need at least 3 points");
    // Fourier functions stay exactly orthonormal under the uniform trapezoid rule
    // while twice the top frequency is below the number of intervals.
    if (2 * (L_true / 2) >= omega_points - 1) bad("L_true too large for omega grid");
    if (2 * (M_true / 2) >= s_points - 1) bad("M_true too large for s grid");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) bad("noise_sd must be finite and >= 0");
    if (!(observed_fraction > 0.0 && observed_fraction <= 1.0)) bad("observed_fraction must be in (0, 1]");
    if (!score_sd.empty()) {
        if (score_sd.size() != static_cast<std::size_t>(K_true) * L_true * M_true) {
            bad("score_sd needs K_true*L_true*M_true entries");
        }
        for (double v : score_sd) {
            if (!(v > 0.0) || !std::isfinite(v)) bad("score_sd entries must be positive");
            if (v > score_sd.front()) bad("score_sd must not exceed its first entry");
        }
    }
}

std::vector<double> HybridGenConfig::resolved_score_sd() const {
    return score_sd.empty() ? default_score_sd(K_true, L_true, M_true) : score_sd;
}

namespace {

Matrix orthonormal_columns(const Matrix& raw) {
    Eigen::HouseholderQR<Matrix> qr(raw);
    Matrix q = qr.householderQ() * Matrix::Identity(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < q.cols(); ++c) {
        Eigen::Index at = 0;
        q.col(c).cwiseAbs().maxCoeff(&at);
        if (q(at, c) < 0.0) q.col(c) *= -1.0;
    }
    return q;
}

Matrix fourier_matrix(const std::vector<double>& points, int count) {
    Matrix f(points.size(), count);
    for (std::size_t i = 0; i < points.size(); ++i)
        for (int t = 0; t < count; ++t) f(static_cast<Eigen::Index>(i), t) = fourier_function(t, points[i]);
    return f;
}

}  // namespace

HybridDraw gen_hybrid(const HybridGenConfig& config) {
    config.validate();
    Rng rng(config.seed, config.stream);
    const Grid1D omega = Grid1D::uniform(0.0, 1.0, config.omega_points);
    const Grid1D s = Grid1D::uniform(0.0, 1.0, config.s_points);
    const int n = config.n, R = config.R, W = config.omega_points, S = config.s_points;
    const int K = config.K_true, L = config.L_true, M = config.M_true;

    HybridTruth truth;
    Matrix raw(R, K);
    for (int c = 0; c < K; ++c)
        for (int r = 0; r < R; ++r) raw(r, c) = rng.normal();
    truth.V = orthonormal_columns(raw);
    truth.phi = fourier_matrix(omega.points(), L);
    truth.psi = fourier_matrix(s.points(), M);
    truth.score_sd = config.resolved_score_sd();

    const int KLM = K * L * M;
    truth.scores.resize(n, KLM);
    for (int i = 0; i < n; ++i)
        for (int c = 0; c < KLM; ++c) truth.scores(i, c) = truth.score_sd[c] * rng.normal();

    truth.signal.assign(static_cast<std::size_t>(n) * R * W * S, 0.0);
    std::vector<double> values(truth.signal.size());
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < R; ++r) {
            for (int w = 0; w < W; ++w) {
                for (int t = 0; t < S; ++t) {
                    double v = 0.0;
                    int c = 0;
                    for (int k = 0; k < K; ++k)
                        for (int l = 0; l < L; ++l)
                            for (int m = 0; m < M; ++m, ++c)
                                v += truth.scores(i, c) * truth.V(r, k) * truth.phi(w, l) * truth.psi(t, m);
                    const std::size_t at = ((static_cast<std::size_t>(i) * R + r) * W + w) * S + t;
                    truth.signal[at] = v;
                    values[at] = v + config.noise_sd * rng.normal();
                }
            }
        }
    }

    std::optional<Mask> mask;
    if (config.omega_sampling == OmegaSampling::Sparse) {
        const int keep = std::max(2, static_cast<int>(std::lround(config.observed_fraction * W)));
        mask = Mask::Constant(n, W, false);
        std::vector<int> order(W);
        for (int i = 0; i < n; ++i) {
            for (int w = 0; w < W; ++w) order[w] = w;
            rng.shuffle(std::span<int>(order));
            for (int k = 0; k < std::min(keep, W); ++k) (*mask)(i, order[k]) = true;
            for (int w = 0; w < W; ++w) {
                if ((*mask)(i, w)) continue;
                for (int r = 0; r < R; ++r)
                    for (int t = 0; t < S; ++t)
                        values[((static_cast<std::size_t>(i) * R + r) * W + w) * S + t] =
                            std::numeric_limits<double>::quiet_NaN();
            }
        }
    }
    return HybridDraw{HybridTensor(n, R, omega, s, std::move(values), std::move(mask)), std::move(truth)};
}

void FofGenConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorKind::InvalidConfig, "fof generator: " + what); };
    if (n < 2) bad("n must be >= 2");
    if (p < 1) bad("p must be >= 1");
    if (predictor_terms < 1) bad("predictor_terms must be >= 1");
    if (g_points < predictor_terms + 2 || g_points < 7) bad("g grid too coarse for the predictor curves");
    if (s_points < 7) bad("s grid too coarse for the coefficient surfaces");
    if (!(noise_sd >= 0.0) || !std::isfinite(noise_sd)) bad("noise_sd must be finite and >= 0");
    if (!(surface_scale >= 0.0) || !std::isfinite(surface_scale)) bad("surface_scale must be finite and >= 0");
}

namespace {
constexpr int kSurfaceTerms = 5;
}

double FofTruth::mean(double s) { return 0.5 + fourier_function(1, s); }

double FofTruth::predictor(int j, int i, double g) const {
    const Matrix& b = predictor_coefficients.at(j);
    double v = 0.0;
    for (int t = 0; t < predictor_terms; ++t) v += b(i, t) * fourier_function(t, g);
    return v;
}

double FofTruth::surface(int j, double g, double s) const {
    const Matrix& T = surface_coefficients.at(j);
    double v = 0.0;
    for (int a = 0; a < surface_terms; ++a)
        for (int b = 0; b < surface_terms; ++b) v += T(a, b) * fourier_function(a, g) * fourier_function(b, s);
    return v;
}

Matrix FofTruth::surface_on(int j, std::span<const double> g, std::span<const double> s) const {
    Matrix out(g.size(), s.size());
    for (std::size_t a = 0; a < g.size(); ++a)
        for (std::size_t b = 0; b < s.size(); ++b)
            out(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) = surface(j, g[a], s[b]);
    return out;
}

bool FofTruth::surface_is_zero(int j) const { return surface_coefficients.at(j).isZero(0.0); }

FofDraw gen_fof(const FofGenConfig& config) {
    config.validate();
    Rng rng(config.seed, config.stream);
    const Grid1D g = Grid1D::uniform(0.0, 1.0, config.g_points);
    const Grid1D s = Grid1D::uniform(0.0, 1.0, config.s_points);
    const int n = config.n, p = config.p, T = config.predictor_terms;

    FofTruth truth;
    truth.predictor_terms = T;
    truth.surface_terms = kSurfaceTerms;
    auto decaying_unit = [&]() {
        Vector v(kSurfaceTerms);
        for (int t = 0; t < kSurfaceTerms; ++t) v(t) = rng.normal() / (1.0 + t);
        return Vector(v / v.norm());
    };
    for (int j = 0; j < p; ++j) {
        const Vector c1 = decaying_unit(), d1 = decaying_unit();
        const Vector c2 = decaying_unit(), d2 = decaying_unit();
        truth.surface_coefficients.push_back(config.surface_scale * (2.0 * c1 * d1.transpose() + c2 * d2.transpose()));
    }
    if (config.coefficient_mode == CoefficientMode::HalfSparse) {
        for (int j = p - p / 2; j < p; ++j) truth.surface_coefficients[j].setZero();
    }
    for (int j = 0; j < p; ++j) {
        Matrix b(n, T);
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < T; ++t) b(i, t) = rng.normal() / (1.0 + t);
        truth.predictor_coefficients.push_back(std::move(b));
    }

    const Matrix Fg = fourier_matrix(g.points(), T);
    const Matrix Fg_surface = fourier_matrix(g.points(), kSurfaceTerms);
    const Matrix Fs_surface = fourier_matrix(s.points(), kSurfaceTerms);
    const auto wg = g.weight_vector();

    std::vector<FunctionalSample> predictors;
    Matrix response(n, config.s_points);
    for (int m = 0; m < config.s_points; ++m) response.col(m).setConstant(FofTruth::mean(s.points()[m]));
    for (int j = 0; j < p; ++j) {
        const Matrix chi = truth.predictor_coefficients[j] * Fg.transpose();
        const Matrix theta = Fg_surface * truth.surface_coefficients[j] * Fs_surface.transpose();
        response += chi * wg.asDiagonal() * theta;
        predictors.emplace_back(chi, g);
    }
    for (int i = 0; i < n; ++i)
        for (int m = 0; m < config.s_points; ++m) response(i, m) += config.noise_sd * rng.normal();

    return FofDraw{std::move(predictors), FunctionalSample(std::move(response), s), std::move(truth)};
}

SelectionFixture gen_selection_fixture(const SelectionFixtureConfig& config) {
    const int n = config.n, R = config.R, W = config.omega_points, S = config.s_points;
    const int clutter = (R - 1) * config.clutter_omega;
    if (R < 2 || config.clutter_omega < 1 || config.predictors < 1 || n < clutter + 4) {
        fail(ErrorKind::InvalidConfig, "selection fixture: need R >= 2, clutter >= 1 and n > clutter + 3");
    }
    if (2 * config.clutter_omega + 1 >= W) fail(ErrorKind::InvalidConfig, "selection fixture: omega grid too coarse");
    Rng rng(config.seed, 0);
    const Grid1D omega = Grid1D::uniform(0.0, 1.0, W);
    const Grid1D s = Grid1D::uniform(0.0, 1.0, S);
    const Grid1D g = Grid1D::uniform(0.0, 1.0, config.g_points);
    constexpr int terms = 5;

    // Signal score: linear functional of the predictors, centered and scaled
    // to unit (1/n) variance.
    const Matrix Fg = fourier_matrix(g.points(), terms);
    std::vector<FunctionalSample> predictors;
    Vector xi = Vector::Zero(n);
    for (int j = 0; j < config.predictors; ++j) {
        Matrix b(n, terms);
        for (int i = 0; i < n; ++i)
            for (int t = 0; t < terms; ++t) b(i, t) = rng.normal() / (1.0 + t);
        Vector a = Vector::Zero(terms);
        a(0) = j % 2 == 0 ? 1.0 : -1.0;
        a(1) = 0.5;
        xi += b * a;
        predictors.emplace_back(b * Fg.transpose(), g);
    }
    xi.array() -= xi.mean();
    xi /= std::sqrt(xi.squaredNorm() / n);

    // Clutter scores: centered, orthogonal in-sample to xi and to each other,
    // with (1/n) variances 0.7^2 * 0.85^(2c).
    Matrix eta(n, clutter);
    for (int c = 0; c < clutter; ++c) {
        Vector v(n);
        for (int i = 0; i < n; ++i) v(i) = rng.normal();
        v.array() -= v.mean();
        v -= (xi.dot(v) / xi.squaredNorm()) * xi;
        for (int d = 0; d < c; ++d) v -= (eta.col(d).dot(v) / eta.col(d).squaredNorm()) * eta.col(d);
        eta.col(c) = v * (0.7 * std::pow(0.85, c) / std::sqrt(v.squaredNorm() / n));
    }

    // Region directions with nonzero means so every clutter triplet survives pooling.
    Matrix raw = Matrix::Zero(R, R);
    for (int r = 0; r < R; ++r) raw(r, 0) = 1.0 + 0.5 * r / std::max(1, R - 1);
    for (int k = 1; k < R; ++k) raw(k - 1, k) = 1.0;
    const Matrix V = orthonormal_columns(raw);
    for (int k = 0; k < R; ++k) {
        if (std::abs(V.col(k).mean()) < 1e-3) fail(ErrorKind::NumericalFailure, "selection fixture: degenerate region basis");
    }
    // Odd sine functions: orthonormal on the grid with nonzero integrals.
    Matrix phi(W, config.clutter_omega);
    for (int w = 0; w < W; ++w)
        for (int l = 0; l < config.clutter_omega; ++l)
            phi(w, l) = std::numbers::sqrt2 * std::sin((2 * l + 1) * std::numbers::pi * omega.points()[w]);
    Vector psi(S);
    for (int t = 0; t < S; ++t) psi(t) = std::numbers::sqrt2 * std::sin(std::numbers::pi * s.points()[t]);

    std::vector<double> values(static_cast<std::size_t>(n) * R * W * S);
    for (int i = 0; i < n; ++i) {
        for (int r = 0; r < R; ++r) {
            for (int w = 0; w < W; ++w) {
                double a = xi(i) * V(r, 0) * phi(w, 0);
                int c = 0;
                for (int k = 1; k < R; ++k)
                    for (int l = 0; l < config.clutter_omega; ++l, ++c) a += eta(i, c) * V(r, k) * phi(w, l);
                for (int t = 0; t < S; ++t) {
                    values[((static_cast<std::size_t>(i) * R + r) * W + w) * S + t] =
                        a * psi(t) + config.noise_sd * rng.normal();
                }
            }
        }
    }
    return SelectionFixture{HybridTensor(n, R, omega, s, std::move(values)), std::move(predictors)};
}

void ScenarioConfig::validate() const {
    auto bad = [](const std::string& what) { fail(ErrorKind::InvalidConfig, "scenario: " + what); };
    if (replicates < 1) bad("replicates must be >= 1");
    if (sample_sizes.empty() || omega_modes.empty() || beta_modes.empty()) bad("design lists must be non-empty");
    for (int n : sample_sizes) {
        if (n < 4) bad("sample sizes must be >= 4");
    }
    if (!(fve_target > 0.0 && fve_target <= 1.0)) bad("fve_target must be in (0, 1]");
    if (fof.s_points != hybrid.s_points) bad("fof.s_points must equal hybrid.s_points");
    HybridGenConfig h = hybrid;
    h.n = sample_sizes.front();
    h.validate();
    FofGenConfig f = fof;
    f.n = sample_sizes.front();
    f.validate();
    fit.validate();
}

ScenarioConfig scenario1_full_preset() {
    ScenarioConfig c;
    c.replicates = 100;
    return c;
}

std::vector<std::string> replicate_metric_names(int p) {
    std::vector<std::string> names;
    for (int j = 1; j <= p; ++j) names.push_back("mse_beta_" + std::to_string(j));
    for (const char* m : {"mspe_pred_train", "mspe_pred_test", "cor_pred_train", "cor_pred_test"}) names.emplace_back(m);
    return names;
}

namespace {

constexpr std::uint32_t kHybridPurpose = 0;
constexpr std::uint32_t kFofPurpose = 1;
constexpr std::uint32_t kSplitPurpose = 2;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t k = 0; k < bytes; ++k) {
        h ^= p[k];
        h *= 1099511628211ULL;
    }
    return h;
}

std::uint64_t construction_digest(const Matrix& a, const Split& split) {
    std::uint64_t h = 14695981039346656037ULL;
    h = fnv1a(h, a.data(), sizeof(double) * static_cast<std::size_t>(a.size()));
    h = fnv1a(h, split.train.data(), sizeof(int) * split.train.size());
    h = fnv1a(h, split.test.data(), sizeof(int) * split.test.size());
    return h;
}

FofConfig capped_fit(const ScenarioConfig& config, int n_train, int p) {
    FofConfig fit = config.fit;
    if (config.auto_component_cap && fit.max_components == 0) fit.max_components = std::max(1, (n_train - 2) / p);
    return fit;
}

// Fits D = W + A on the split and fills the per-replicate metrics.
void fit_and_score(ReplicateRecord& rec, const ScenarioConfig& config, const FunctionalSample& w,
                   const FofDraw& fof, const Split& split) {
    const Matrix d = w.curves() + fof.response.curves();
    const FunctionalSample response(d, fof.response.grid());
    const int p = static_cast<int>(fof.predictors.size());
    std::vector<FunctionalSample> x_train, x_test;
    for (const auto& x : fof.predictors) {
        x_train.push_back(x.select_subjects(split.train));
        x_test.push_back(x.select_subjects(split.test));
    }
    const FunctionalSample y_train = response.select_subjects(split.train);
    const FunctionalSample y_test = response.select_subjects(split.test);
    const FofConfig fit_config = capped_fit(config, static_cast<int>(split.train.size()), p);

    rec.stage = "fof fit";
    TimingCapture clock;
    const FofModel model = fit_fof(y_train, x_train, fit_config);
    const FunctionalSample pred_train = predict(model, x_train);
    const FunctionalSample pred_test = predict(model, x_test);
    rec.timing = clock.stop();
    rec.stage = "metrics";

    const auto& gp = fof.predictors.front().grid().points();
    const auto& sp = response.grid().points();
    for (int j = 0; j < p; ++j) {
        rec.metrics["mse_beta_" + std::to_string(j + 1)] =
            mse_beta(fof.truth.surface_on(j, gp, sp), coefficient_surface(model, j, gp, sp));
    }
    rec.metrics["mspe_pred_train"] = prediction_mspe(y_train, pred_train);
    rec.metrics["mspe_pred_test"] = prediction_mspe(y_test, pred_test);
    // A constant prediction leaves the correlation undefined; the metric is
    // then omitted for this replicate.
    try {
        rec.metrics["cor_pred_train"] = prediction_correlation(y_train, pred_train);
    } catch (const Error&) {
    }
    try {
        rec.metrics["cor_pred_test"] = prediction_correlation(y_test, pred_test);
    } catch (const Error&) {
    }
    rec.construction = construction_digest(fof.response.curves(), split);
    rec.stage.clear();
}

}  // namespace

ScenarioReport summarize_records(std::vector<ReplicateRecord> records, int p) {
    ScenarioReport report;
    std::vector<std::string> order;
    for (const auto& r : records) {
        if (std::find(order.begin(), order.end(), r.scenario) == order.end()) order.push_back(r.scenario);
    }
    const auto names = replicate_metric_names(p);
    for (const auto& scenario : order) {
        int completed = 0;
        for (const auto& r : records) completed += (r.scenario == scenario && r.ok) ? 1 : 0;
        for (const auto& name : names) {
            std::vector<double> v;
            for (const auto& r : records) {
                if (r.scenario != scenario || !r.ok) continue;
                if (auto it = r.metrics.find(name); it != r.metrics.end()) v.push_back(it->second);
            }
            if (!v.empty()) report.rows.push_back(ReportRow{name, quartiles(v), scenario, completed});
        }
        std::vector<double> elapsed, user, system;
        for (const auto& r : records) {
            if (r.scenario != scenario || !r.ok) continue;
            elapsed.push_back(r.timing.elapsed);
            if (r.timing.user) user.push_back(*r.timing.user);
            if (r.timing.system) system.push_back(*r.timing.system);
        }
        if (!elapsed.empty()) report.timing_rows.push_back(ReportRow{"time_elapsed", quartiles(elapsed), scenario, completed});
        if (!user.empty()) report.timing_rows.push_back(ReportRow{"time_user", quartiles(user), scenario, completed});
        if (!system.empty()) report.timing_rows.push_back(ReportRow{"time_system", quartiles(system), scenario, completed});
    }
    report.records = std::move(records);
    return report;
}

ScenarioReport run_scenario1(const ScenarioConfig& config, int threads) {
    config.validate();
    struct Cell {
        int n;
        OmegaSampling omega;
        CoefficientMode beta;
        std::string label;
    };
    std::vector<Cell> cells;
    for (int n : config.sample_sizes)
        for (auto om : config.omega_modes)
            for (auto bm : config.beta_modes)
                cells.push_back({n, om, bm,
                                 "n=" + std::to_string(n) + "|omega=" + to_string(om) + "|beta=" + to_string(bm)});

    const int reps = config.replicates;
    std::vector<ReplicateRecord> records(cells.size() * reps);
    parallel_for(records.size(), threads, [&](std::size_t at) {
        const auto c = static_cast<std::uint32_t>(at / reps);
        const auto r = static_cast<std::uint32_t>(at % reps);
        const Cell& cell = cells[c];
        ReplicateRecord& rec = records[at];
        rec.scenario = cell.label;
        rec.replicate = static_cast<int>(r);
        try {
            HybridGenConfig h = config.hybrid;
            h.n = cell.n;
            h.omega_sampling = cell.omega;
            h.seed = config.seed;
            h.stream = stream_id(c, r, kHybridPurpose);
            FofGenConfig f = config.fof;
            f.n = cell.n;
            f.coefficient_mode = cell.beta;
            f.seed = config.seed;
            f.stream = stream_id(c, r, kFofPurpose);
            rec.stage = "hybrid generation";
            const HybridDraw hybrid = gen_hybrid(h);
            rec.stage = "fof generation";
            const FofDraw fof = gen_fof(f);
            rec.stage = "pooling";
            const FunctionalSample w = pool_to_curve(center(hybrid.tensor).demeaned);
            Rng split_rng(config.seed, stream_id(c, r, kSplitPurpose));
            const Split split = train_test_split(cell.n, config.fit.train_fraction, split_rng);
            fit_and_score(rec, config, w, fof, split);
        } catch (const Error& e) {
            rec.ok = false;
            rec.error = e.what();
            rec.metrics.clear();
        }
    });
    return summarize_records(std::move(records), config.fof.p);
}

ScenarioReport run_scenario2(const ScenarioConfig& config, int threads) {
    config.validate();
    const int n = config.sample_sizes.front();
    const int reps = config.replicates;
    const std::vector<std::string> arms = {"HPCA_0", "HPCA_1", "HPCA_All"};
    const std::size_t per_rep = arms.size() * config.beta_modes.size();
    std::vector<ReplicateRecord> records(per_rep * reps);

    parallel_for(static_cast<std::size_t>(reps), threads, [&](std::size_t rr) {
        const auto r = static_cast<std::uint32_t>(rr);
        auto slot = [&](std::size_t b, std::size_t a) -> ReplicateRecord& {
            // Cells are ordered (beta, arm) so the report groups by coefficient mode.
            return records[(b * arms.size() + a) * reps + rr];
        };
        for (std::size_t b = 0; b < config.beta_modes.size(); ++b)
            for (std::size_t a = 0; a < arms.size(); ++a) {
                auto& rec = slot(b, a);
                rec.scenario = "arm=" + arms[a] + "|beta=" + to_string(config.beta_modes[b]);
                rec.replicate = static_cast<int>(r);
            }
        std::vector<FunctionalSample> w;
        std::string stage = "hybrid generation";
        try {
            HybridGenConfig h = config.hybrid;
            h.n = n;
            h.omega_sampling = config.omega_modes.front();
            h.seed = config.seed;
            h.stream = stream_id(0, r, kHybridPurpose);
            const HybridDraw hybrid = gen_hybrid(h);
            stage = "hpca";
            const HpcaModel model = fit_hpca(hybrid.tensor, config.fve_target);
            stage = "pooling";
            w.push_back(pool_to_curve(center(hybrid.tensor).demeaned));
            w.push_back(pool_reconstruction(model, 1));
            w.push_back(pool_reconstruction(model, model.components()));
        } catch (const Error& e) {
            for (std::size_t b = 0; b < config.beta_modes.size(); ++b)
                for (std::size_t a = 0; a < arms.size(); ++a) {
                    slot(b, a).ok = false;
                    slot(b, a).stage = stage;
                    slot(b, a).error = e.what();
                }
            return;
        }
        for (std::size_t b = 0; b < config.beta_modes.size(); ++b) {
            const auto cell = static_cast<std::uint32_t>(b);
            FofGenConfig f = config.fof;
            f.n = n;
            f.coefficient_mode = config.beta_modes[b];
            f.seed = config.seed;
            f.stream = stream_id(cell, r, kFofPurpose);
            const FofDraw fof = gen_fof(f);  // config already validated; cannot fail here
            Rng split_rng(config.seed, stream_id(cell, r, kSplitPurpose));
            const Split split = train_test_split(n, config.fit.train_fraction, split_rng);
            for (std::size_t a = 0; a < arms.size(); ++a) {
                auto& rec = slot(b, a);
                try {
                    fit_and_score(rec, config, w[a], fof, split);
                } catch (const Error& e) {
                    rec.ok = false;
                    rec.error = e.what();
                    rec.metrics.clear();
                }
            }
        }
    });
    return summarize_records(std::move(records), config.fof.p);
}

}  // namespace hybridfpca
