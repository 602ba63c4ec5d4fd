#pragma once

#include "hybridfpca/fofreg.hpp"
#include "hybridfpca/hpca.hpp"
#include "hybridfpca/metrics.hpp"
#include "hybridfpca/tensorcore.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace hybridfpca {

/// Orthonormal Fourier family on [0, 1]: 1, sqrt2 sin(2 pi x), sqrt2 cos(2 pi x),
/// sqrt2 sin(4 pi x), ... (index 0 is the constant).
double fourier_function(int index, double x);

enum class OmegaSampling { Complete, Sparse };
enum class CoefficientMode { Complete, HalfSparse };

const char* to_string(OmegaSampling s);
const char* to_string(CoefficientMode m);

struct HybridGenConfig {
    int n = 20;
    int R = 4;
    int omega_points = 21;
    int s_points = 21;
    int K_true = 2;
    int L_true = 2;
    int M_true = 3;
    /// Per-component score SDs in (k, l, m) order with m fastest; empty
    /// selects default_score_sd().
    std::vector<double> score_sd;
    double noise_sd = 1.0;
    OmegaSampling omega_sampling = OmegaSampling::Complete;
    double observed_fraction = 0.5;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;

    void validate() const;
    [[nodiscard]] std::vector<double> resolved_score_sd() const;
};

/// sd(k,l,m) = 0.8^(k+l+m) over 0-based indices.
std::vector<double> default_score_sd(int K, int L, int M);

/// Ground truth in the shape of an HpcaModel.
struct HybridTruth {
    Matrix V;    ///< R × K, orthonormal columns.
    Matrix phi;  ///< omega points × L.
    Matrix psi;  ///< s points × M.
    /// Subjects × K*L*M in (k, l, m) order, m fastest.
    Matrix scores;
    std::vector<double> score_sd;
    /// Noise-free signal in tensor layout.
    std::vector<double> signal;
};

struct HybridDraw {
    HybridTensor tensor;
    HybridTruth truth;
};

/// Y = sum xi V_k phi_l psi_m + eps. V_k are orthonormalized Gaussian
/// vectors, phi/psi the leading Fourier functions, xi ~ N(0, sd^2) and
/// eps ~ N(0, noise_sd^2). Sparse sampling keeps max(2, round(fraction *
/// omega_points)) slices per subject, chosen uniformly; the rest are NaN
/// and masked out.
HybridDraw gen_hybrid(const HybridGenConfig& config);

struct FofGenConfig {
    int n = 20;
    int p = 10;
    int g_points = 21;
    int s_points = 21;
    CoefficientMode coefficient_mode = CoefficientMode::Complete;
    double noise_sd = 0.1;
    /// Fourier terms in each predictor curve.
    int predictor_terms = 7;
    /// Multiplies every coefficient surface.
    double surface_scale = 0.1;
    std::uint64_t seed = 1;
    std::uint64_t stream = 0;

    void validate() const;
};

/// Analytic description of the regression truth.
struct FofTruth {
    int predictor_terms = 0;
    int surface_terms = 0;
    /// Per predictor: subjects × predictor_terms Fourier coefficients.
    std::vector<Matrix> predictor_coefficients;
    /// Per predictor: theta_j(g, s) = f(g)' T_j f(s), T_j rank 2 (or zero).
    std::vector<Matrix> surface_coefficients;

    [[nodiscard]] static double mean(double s);
    [[nodiscard]] double predictor(int j, int i, double g) const;
    [[nodiscard]] double surface(int j, double g, double s) const;
    [[nodiscard]] Matrix surface_on(int j, std::span<const double> g, std::span<const double> s) const;
    [[nodiscard]] bool surface_is_zero(int j) const;
};

struct FofDraw {
    std::vector<FunctionalSample> predictors;
    /// A_i(s) = m(s) + sum_j int chi_j theta_j dg + eps.
    FunctionalSample response;
    FofTruth truth;
};

/// half_sparse zeroes the last floor(p/2) surfaces (theta_6..theta_10 for p = 10).
FofDraw gen_fof(const FofGenConfig& config);

/// Fixture for selection: a signal triplet whose scores are linear in the
/// predictors, plus in-sample-orthogonal clutter triplets in (region, omega)
/// that carry no predictable signal.
struct SelectionFixtureConfig {
    int n = 40;
    int R = 4;
    int omega_points = 11;
    int s_points = 21;
    int g_points = 21;
    int predictors = 2;
    int clutter_omega = 2;
    double noise_sd = 0.02;
    std::uint64_t seed = 11;
};

struct SelectionFixture {
    HybridTensor tensor;
    std::vector<FunctionalSample> predictors;
};

SelectionFixture gen_selection_fixture(const SelectionFixtureConfig& config);

struct ScenarioConfig {
    HybridGenConfig hybrid;
    FofGenConfig fof;
    FofConfig fit;
    double fve_target = 0.9;
    int replicates = 20;
    std::uint64_t seed = 1;
    /// Scenario 1 design; scenario 2 uses the first sample size only.
    std::vector<int> sample_sizes = {20, 140};
    std::vector<OmegaSampling> omega_modes = {OmegaSampling::Complete, OmegaSampling::Sparse};
    std::vector<CoefficientMode> beta_modes = {CoefficientMode::Complete, CoefficientMode::HalfSparse};
    /// When fit.max_components is 0, cap it at max(1, (n_train - 2) / p).
    bool auto_component_cap = true;

    void validate() const;
};

/// Scenario 1 preset at the full published scale (100 replicates).
ScenarioConfig scenario1_full_preset();

struct ReplicateRecord {
    std::string scenario;
    int replicate = 0;
    bool ok = true;
    /// Pipeline stage that raised `error` (empty on success).
    std::string stage;
    std::string error;
    std::map<std::string, double> metrics;
    Timing timing;
    /// Digest of the shared response part and split, identical across arms
    /// of one replicate.
    std::uint64_t construction = 0;
};

struct ScenarioReport {
    std::vector<ReportRow> rows;
    std::vector<ReportRow> timing_rows;
    std::vector<ReplicateRecord> records;
};

/// Ordered metric names emitted per replicate.
std::vector<std::string> replicate_metric_names(int p);

ScenarioReport run_scenario1(const ScenarioConfig& config, int threads = 1);
ScenarioReport run_scenario2(const ScenarioConfig& config, int threads = 1);

/// Re-aggregates replicate records into report rows (deterministic metrics)
/// and timing rows, preserving first-appearance scenario order.
ScenarioReport summarize_records(std::vector<ReplicateRecord> records, int p);

}  // namespace hybridfpca
