#include "hybridfpca/metrics.hpp"

#include "hybridfpca/error.hpp"
#include "hybridfpca/io.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#if defined(__unix__) || defined(__APPLE__)
#include <sys/resource.h>
#define HYBRIDFPCA_HAVE_RUSAGE 1
#endif

namespace hybridfpca {

namespace {

void same_extents(const Matrix& a, const Matrix& b, const char* what) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        fail(ErrorKind::Shape, std::string(what) + ": extents " + std::to_string(a.rows()) + "x" +
                                   std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                                   std::to_string(b.cols()));
    }
}

}  // namespace

double mse_beta(const Matrix& truth, const Matrix& estimate, std::optional<int> subjects) {
    same_extents(truth, estimate, "mse_beta");
    double v = (truth - estimate).squaredNorm() / static_cast<double>(truth.size());
    if (subjects) {
        if (*subjects < 1) fail(ErrorKind::InvalidConfig, "subject divisor must be >= 1");
        v /= *subjects;
    }
    return v;
}

double prediction_mspe(const Matrix& actual, const Matrix& predicted) {
    same_extents(actual, predicted, "prediction_mspe");
    return (actual - predicted).squaredNorm() / static_cast<double>(actual.rows());
}

double prediction_mspe(const FunctionalSample& actual, const FunctionalSample& predicted) {
    return prediction_mspe(actual.curves(), predicted.curves());
}

double prediction_correlation(const Matrix& actual, const Matrix& predicted) {
    same_extents(actual, predicted, "prediction_correlation");
    const auto a = actual.reshaped();
    const auto b = predicted.reshaped();
    const double ma = a.mean(), mb = b.mean();
    const Eigen::ArrayXd da = a.array() - ma;
    const Eigen::ArrayXd db = b.array() - mb;
    const double saa = da.square().sum(), sbb = db.square().sum();
    if (!(saa > 0.0) || !(sbb > 0.0)) fail(ErrorKind::UndefinedCorrelation, "correlation undefined: zero variance");
    return (da * db).sum() / std::sqrt(saa * sbb);
}

double prediction_correlation(const FunctionalSample& actual, const FunctionalSample& predicted) {
    return prediction_correlation(actual.curves(), predicted.curves());
}

double percentile(std::span<const double> values, double p) {
    if (values.empty()) fail(ErrorKind::InvalidData, "percentile of an empty sample");
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double h = std::clamp(p, 0.0, 1.0) * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (h - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

Quartiles quartiles(std::span<const double> values) {
    return {percentile(values, 0.5), percentile(values, 0.25), percentile(values, 0.75)};
}

namespace {

#ifdef HYBRIDFPCA_HAVE_RUSAGE
std::pair<double, double> cpu_times() {
    rusage u{};
#ifdef RUSAGE_THREAD
    getrusage(RUSAGE_THREAD, &u);
#else
    getrusage(RUSAGE_SELF, &u);
#endif
    auto sec = [](const timeval& t) { return static_cast<double>(t.tv_sec) + 1e-6 * static_cast<double>(t.tv_usec); };
    return {sec(u.ru_utime), sec(u.ru_stime)};
}
#endif

}  // namespace

TimingCapture::TimingCapture() : start_(std::chrono::steady_clock::now()) {
#ifdef HYBRIDFPCA_HAVE_RUSAGE
    const auto [user, system] = cpu_times();
    user_ = user;
    system_ = system;
#endif
}

Timing TimingCapture::stop() const {
    Timing t;
    t.elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
#ifdef HYBRIDFPCA_HAVE_RUSAGE
    const auto [user, system] = cpu_times();
    t.user = user - *user_;
    t.system = system - *system_;
#endif
    return t;
}

std::string format_report(std::span<const ReportRow> rows) {
    std::ostringstream out;
    out << "metric,median,q1,q3,scenario,completed\n";
    for (const auto& r : rows) {
        out << r.metric << ',' << format_double(r.summary.median) << ',' << format_double(r.summary.q1) << ','
            << format_double(r.summary.q3) << ',' << r.scenario << ',' << r.completed << '\n';
    }
    return out.str();
}

}  // namespace hybridfpca
