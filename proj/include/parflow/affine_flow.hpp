// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "parflow/tensor.hpp"

namespace parflow {

/// The affine map S -> S P + Q carried by one chunk of steps.
struct AffineFlow {
  Matrix p;
  Matrix q;

  static AffineFlow identity(std::size_t d) { return {Matrix::identity(d), Matrix(d, d)}; }
  std::size_t dim() const noexcept { return p.rows(); }

  Matrix apply(const Matrix& state) const { return add(matmul(state, p), q); }
};

/// W and U in Tensor3 layout (L, R, d): slice k is the transposed d x R
/// coefficient of step k.
struct SolvedCoefficients {
  Tensor3 w;
  Tensor3 u;
};

/// S_1 = S_0 + sum_k (S_0 W_k + U_k) B_k^T. Shared by both chunk backends.
Matrix assemble_state(const Matrix& s0, const SolvedCoefficients& coeffs, const Tensor3& b);

/// (P, Q) = (Id + sum_k W_k B_k^T, sum_k U_k B_k^T).
AffineFlow flow_from_coefficients(const SolvedCoefficients& coeffs, const Tensor3& b);

}  // namespace parflow
