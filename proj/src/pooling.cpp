#include "hybridfpca/pooling.hpp"

#include "hybridfpca/error.hpp"

#include <string>

namespace hybridfpca {

FunctionalSample pool_to_curve(const HybridTensor& t) {
    const int n = t.subjects(), R = t.regions(), W = t.omega_size(), S = t.s_size();
    Matrix out = Matrix::Zero(n, S);
    for (int i = 0; i < n; ++i) {
        const Vector wo = t.omega_weights(i);
        for (int r = 0; r < R; ++r) {
            for (int w = 0; w < W; ++w) {
                if (!t.observed(i, w)) continue;
                for (int s = 0; s < S; ++s) out(i, s) += wo[w] * t(i, r, w, s);
            }
        }
    }
    out /= static_cast<double>(R);
    return {std::move(out), t.s_grid()};
}

FunctionalSample pool_reconstruction(const HpcaModel& model, int q) {
    if (q < 1 || q > model.components()) {
        fail(ErrorKind::InvalidConfig, "pooling count q=" + std::to_string(q) + " outside [1, " +
                                           std::to_string(model.components()) + "]");
    }
    const Vector region_mean = model.basis_region.vectors.colwise().mean();
    const Vector omega_integral = model.basis_omega.vectors.transpose() * model.omega_grid.weight_vector();
    Matrix out = Matrix::Zero(model.subjects(), model.s_grid.size());
    for (int t = 0; t < q; ++t) {
        const auto& [k, l, m] = model.ranking[t];
        const double factor = region_mean[k] * omega_integral[l];
        out.noalias() += (factor * model.scores.col(t)) * model.basis_s.vectors.col(m).transpose();
    }
    return {std::move(out), model.s_grid};
}

}  // namespace hybridfpca
