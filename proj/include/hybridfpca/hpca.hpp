#pragma once

#include "hybridfpca/tensorcore.hpp"

#include <array>
#include <vector>

namespace hybridfpca {

enum class Dimension { Region, Omega, S };

const char* to_string(Dimension d);

/// Eigenbasis of one marginal covariance.
struct MarginalBasis {
    Dimension dimension = Dimension::Region;
    /// Grid (or region) index × retained component. Columns are orthonormal
    /// under the dimension's inner product.
    Matrix vectors;
    /// Full spectrum, descending, clamped at zero.
    Vector eigenvalues;
    /// Cumulative fraction of variance over the full spectrum.
    Vector fve;

    [[nodiscard]] int retained() const { return static_cast<int>(vectors.cols()); }
};

struct Triplet {
    int k = 0;
    int l = 0;
    int m = 0;
    friend bool operator==(const Triplet&, const Triplet&) = default;
    friend auto operator<=>(const Triplet&, const Triplet&) = default;
};

/// How product components are ordered for prefix reconstruction.
enum class RankingOrder {
    /// Descending empirical score variance, ties broken by (k, l, m).
    Variance,
    /// (k, l, m) with m varying fastest.
    Lexicographic,
};

struct HpcaOptions {
    double fve_target = 0.9;
    RankingOrder ranking = RankingOrder::Variance;
};

struct HpcaModel {
    Grid1D omega_grid;
    Grid1D s_grid;
    int regions = 0;
    /// Mean over (region, omega, s) in tensor layout.
    std::vector<double> mean;
    MarginalBasis basis_region;
    MarginalBasis basis_omega;
    MarginalBasis basis_s;
    double fve_target = 0.9;
    RankingOrder order = RankingOrder::Variance;
    /// Subjects × ranked components.
    Matrix scores;
    std::vector<Triplet> ranking;
    std::vector<double> score_variance;

    [[nodiscard]] int K() const { return basis_region.retained(); }
    [[nodiscard]] int L() const { return basis_omega.retained(); }
    [[nodiscard]] int M() const { return basis_s.retained(); }
    [[nodiscard]] int components() const { return static_cast<int>(ranking.size()); }
    [[nodiscard]] int subjects() const { return static_cast<int>(scores.rows()); }
};

/// Marginal covariance of one dimension, contracting the other two by
/// quadrature (omega, s) or plain averaging (region). With a mask, region
/// and s covariances integrate over each subject's observed omega points;
/// the omega covariance averages each entry over the subjects observing
/// both slices.
Matrix marginal_covariance(const HybridTensor& demeaned, Dimension dimension);

/// Weighted eigenproblem: returned vectors v satisfy v' diag(w) v = I.
/// Retains the smallest count with cumulative FVE >= fve_target.
/// `clamp_negative` projects all negative eigenvalues to zero (used for
/// pairwise-complete covariances that need not be PSD); otherwise values
/// below -1e-10 relative to the top eigenvalue raise NumericalFailure.
MarginalBasis eigendecompose_marginal(const Matrix& cov, const Vector& weights, double fve_target,
                                      Dimension dimension = Dimension::Region, bool clamp_negative = false);

/// xi[i, (k,l,m)] with (k,l,m) flattened lexicographically, m fastest.
Matrix compute_scores(const HybridTensor& demeaned, const MarginalBasis& region, const MarginalBasis& omega,
                      const MarginalBasis& s);

HpcaModel fit_hpca(const HybridTensor& tensor, const HpcaOptions& options = {});
inline HpcaModel fit_hpca(const HybridTensor& tensor, double fve_target) {
    return fit_hpca(tensor, HpcaOptions{fve_target, RankingOrder::Variance});
}

/// Sum over the first q ranked components of xi V phi psi. The mean is not
/// added back; the result lives on the dense grids without a mask.
HybridTensor reconstruct(const HpcaModel& model, int q);

/// Weighted squared norm sum_i sum_r int int Z^2 using the tensor's own
/// per-subject omega weights.
double weighted_squared_norm(const HybridTensor& t);

}  // namespace hybridfpca
