#include "hybridfpca/selection.hpp"

#include "hybridfpca/error.hpp"
#include "hybridfpca/metrics.hpp"
#include "hybridfpca/parallel.hpp"
#include "hybridfpca/pooling.hpp"

#include <string>

namespace hybridfpca {

double mspe(const Matrix& actual, const Matrix& predicted) {
    if (actual.rows() != predicted.rows() || actual.cols() != predicted.cols()) {
        fail(ErrorKind::Shape, "mspe: extents differ");
    }
    return (actual - predicted).squaredNorm() / static_cast<double>(actual.size());
}

double mspe(const FunctionalSample& actual, const FunctionalSample& predicted) {
    return mspe(actual.curves(), predicted.curves());
}

FunctionalSample pooled_response(const HpcaModel& model, const HybridTensor& demeaned, int q) {
    if (q == 0) return pool_to_curve(demeaned);
    return pool_to_curve(reconstruct(model, q));
}

namespace {

std::vector<FunctionalSample> subset(std::span<const FunctionalSample> xs, const std::vector<int>& idx) {
    std::vector<FunctionalSample> out;
    out.reserve(xs.size());
    for (const auto& x : xs) out.push_back(x.select_subjects(idx));
    return out;
}

void check_alignment(int subjects, std::span<const FunctionalSample> predictors) {
    if (predictors.empty()) fail(ErrorKind::InvalidConfig, "selection needs at least one predictor");
    for (std::size_t j = 0; j < predictors.size(); ++j) {
        if (predictors[j].subjects() != subjects) {
            fail(ErrorKind::Shape, "predictor " + std::to_string(j) + " has " +
                                       std::to_string(predictors[j].subjects()) + " subjects; tensor has " +
                                       std::to_string(subjects));
        }
    }
}

}  // namespace

SelectionResult select_with_model(const HpcaModel& model, const HybridTensor& demeaned,
                                  std::span<const FunctionalSample> predictors, const FofConfig& fof,
                                  const Split& split, int threads) {
    check_alignment(demeaned.subjects(), predictors);
    const auto x_train = subset(predictors, split.train);
    const auto x_test = subset(predictors, split.test);

    const int candidates = model.components() + 1;
    SelectionResult result;
    result.split = split;
    result.mspe_test.assign(candidates, 0.0);
    result.mspe_train.assign(candidates, 0.0);
    result.seconds.assign(candidates, 0.0);

    parallel_for(static_cast<std::size_t>(candidates), threads, [&](std::size_t qi) {
        const int q = static_cast<int>(qi);
        TimingCapture clock;
        const FunctionalSample w = pooled_response(model, demeaned, q);
        const FunctionalSample w_train = w.select_subjects(split.train);
        const FunctionalSample w_test = w.select_subjects(split.test);
        const FofModel fit = fit_fof(w_train, x_train, fof);
        result.mspe_train[qi] = mspe(w_train, predict(fit, x_train));
        result.mspe_test[qi] = mspe(w_test, predict(fit, x_test));
        result.seconds[qi] = clock.stop().elapsed;
    });

    result.q_min = 0;
    for (int q = 1; q < candidates; ++q) {
        if (result.mspe_test[q] < result.mspe_test[result.q_min]) result.q_min = q;
    }
    return result;
}

SelectionResult select_num_components(const HybridTensor& tensor, std::span<const FunctionalSample> predictors,
                                      const FofConfig& fof, double fve_target, int threads, std::uint64_t stream) {
    fof.validate();
    check_alignment(tensor.subjects(), predictors);
    const HpcaModel model = fit_hpca(tensor, fve_target);
    const HybridTensor demeaned = center(tensor).demeaned;
    Rng rng(fof.seed, stream);
    auto result = select_with_model(model, demeaned, predictors, fof,
                                    train_test_split(tensor.subjects(), fof.train_fraction, rng), threads);
    result.split_seed = fof.seed;
    result.split_stream = stream;
    return result;
}

ResplitSummary select_resplits(const HybridTensor& tensor, std::span<const FunctionalSample> predictors,
                               const FofConfig& fof, const HpcaOptions& hpca, int resplits, int threads) {
    if (resplits < 1) fail(ErrorKind::InvalidConfig, "resplits must be >= 1");
    fof.validate();
    check_alignment(tensor.subjects(), predictors);
    const HpcaModel model = fit_hpca(tensor, hpca);
    const HybridTensor demeaned = center(tensor).demeaned;

    ResplitSummary summary;
    summary.components = model.components();
    summary.resplits.resize(resplits);
    parallel_for(static_cast<std::size_t>(resplits), threads, [&](std::size_t r) {
        Rng rng(fof.seed, r);
        auto res = select_with_model(model, demeaned, predictors, fof,
                                     train_test_split(tensor.subjects(), fof.train_fraction, rng), 1);
        res.split_seed = fof.seed;
        res.split_stream = r;
        summary.resplits[r] = std::move(res);
    });

    const int candidates = model.components() + 1;
    summary.mean_mspe_test.assign(candidates, 0.0);
    summary.mean_mspe_train.assign(candidates, 0.0);
    summary.mean_seconds.assign(candidates, 0.0);
    summary.q_min_counts.assign(candidates, 0);
    for (const auto& r : summary.resplits) {
        for (int q = 0; q < candidates; ++q) {
            summary.mean_mspe_test[q] += r.mspe_test[q] / resplits;
            summary.mean_mspe_train[q] += r.mspe_train[q] / resplits;
            summary.mean_seconds[q] += r.seconds[q] / resplits;
        }
        ++summary.q_min_counts[r.q_min];
    }
    for (int q = 1; q < candidates; ++q) {
        if (summary.mean_mspe_test[q] < summary.mean_mspe_test[summary.q_min]) summary.q_min = q;
    }
    return summary;
}

}  // namespace hybridfpca
