#pragma once

#include "hybridfpca/tensorcore.hpp"

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace hybridfpca {

/// Mean squared difference over the grid. With `subjects` set, the result
/// is additionally divided by that count (literal replication of the
/// reporting formula whose subject sum is over a subject-free quantity).
double mse_beta(const Matrix& truth, const Matrix& estimate, std::optional<int> subjects = std::nullopt);

/// (1/n) sum_i sum_j (actual - predicted)^2; not divided by the grid size.
double prediction_mspe(const Matrix& actual, const Matrix& predicted);
double prediction_mspe(const FunctionalSample& actual, const FunctionalSample& predicted);

/// Pearson correlation of the flattened arrays. Throws UndefinedCorrelation
/// if either array is constant.
double prediction_correlation(const Matrix& actual, const Matrix& predicted);
double prediction_correlation(const FunctionalSample& actual, const FunctionalSample& predicted);

struct Quartiles {
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
};

/// Linear interpolation between order statistics, p in [0, 1].
double percentile(std::span<const double> values, double p);
Quartiles quartiles(std::span<const double> values);

struct Timing {
    double elapsed = 0.0;
    /// Unset where the platform does not expose CPU times.
    std::optional<double> user;
    std::optional<double> system;
};

/// Captures wall time and calling-thread CPU time around a region.
class TimingCapture {
public:
    TimingCapture();
    [[nodiscard]] Timing stop() const;

private:
    std::chrono::steady_clock::time_point start_;
    std::optional<double> user_;
    std::optional<double> system_;
};

template <typename F>
auto timed(F&& f) {
    TimingCapture capture;
    if constexpr (std::is_void_v<decltype(f())>) {
        f();
        return capture.stop();
    } else {
        auto result = f();
        return std::pair{std::move(result), capture.stop()};
    }
}

/// One row of a Table-shaped report.
struct ReportRow {
    std::string metric;
    Quartiles summary;
    std::string scenario;
    int completed = 0;
};

/// CSV with header `metric,median,q1,q3,scenario,completed`.
std::string format_report(std::span<const ReportRow> rows);

}  // namespace hybridfpca
