#pragma once

#include "hybridfpca/fofreg.hpp"
#include "hybridfpca/hpca.hpp"
#include "hybridfpca/rng.hpp"
#include "hybridfpca/tensorcore.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace hybridfpca {

/// (1/(n*M)) sum_i sum_m (actual - predicted)^2.
double mspe(const Matrix& actual, const Matrix& predicted);
double mspe(const FunctionalSample& actual, const FunctionalSample& predicted);

/// Test/train MSPE per candidate count q = 0..KLM (index = q). q = 0 is the
/// pooled demeaned data without any decomposition.
struct SelectionResult {
    std::vector<double> mspe_test;
    std::vector<double> mspe_train;
    std::vector<double> seconds;
    int q_min = 0;
    std::uint64_t split_seed = 0;
    std::uint64_t split_stream = 0;
    Split split;

    [[nodiscard]] int candidates() const { return static_cast<int>(mspe_test.size()); }
};

/// Pooled response for candidate q: pooled demeaned data for q = 0, pooled
/// prefix reconstruction otherwise.
FunctionalSample pooled_response(const HpcaModel& model, const HybridTensor& demeaned, int q);

/// Runs the q loop for a fitted model on one split. `threads` caps the
/// number of concurrent per-q fits.
SelectionResult select_with_model(const HpcaModel& model, const HybridTensor& demeaned,
                                  std::span<const FunctionalSample> predictors, const FofConfig& fof,
                                  const Split& split, int threads = 1);

/// Fits HPCA once, draws one seeded split from (fof.seed, stream), and runs
/// the q loop. q_min minimizes test MSPE with ties going to the smaller q.
SelectionResult select_num_components(const HybridTensor& tensor, std::span<const FunctionalSample> predictors,
                                      const FofConfig& fof, double fve_target, int threads = 1,
                                      std::uint64_t stream = 0);

struct ResplitSummary {
    std::vector<SelectionResult> resplits;
    /// Per-q means over resplits.
    std::vector<double> mean_mspe_test;
    std::vector<double> mean_mspe_train;
    std::vector<double> mean_seconds;
    /// argmin of mean_mspe_test.
    int q_min = 0;
    /// How many resplits chose each q.
    std::vector<int> q_min_counts;
    int components = 0;
};

/// Repeats the selection over `resplits` independent splits (streams
/// 0..resplits-1) with one shared HPCA fit.
ResplitSummary select_resplits(const HybridTensor& tensor, std::span<const FunctionalSample> predictors,
                               const FofConfig& fof, const HpcaOptions& hpca, int resplits, int threads = 1);

}  // namespace hybridfpca
