#pragma once

#include "hybridfpca/hpca.hpp"
#include "hybridfpca/tensorcore.hpp"

namespace hybridfpca {

/// W_i(s) = (1/R) sum_r int Y_i(r, omega, s) d omega, with no division by
/// the length of the omega domain. Masked tensors integrate each subject
/// over its observed omega points; dense tensors use the full grid.
FunctionalSample pool_to_curve(const HybridTensor& tensor);

/// pool_to_curve(reconstruct(model, q)) without materializing the tensor:
/// sum_t xi_t * mean_r(V_k) * int(phi_l) * psi_m(s).
FunctionalSample pool_reconstruction(const HpcaModel& model, int q);

}  // namespace hybridfpca
