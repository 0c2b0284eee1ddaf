// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "parflow/affine_flow.hpp"
#include "parflow/parallel.hpp"
#include "parflow/tensor.hpp"

namespace parflow {

/// Block lower-triangular system C: blocks with k' > k are zero.
class BlockTriangularSystem {
 public:
  /// Validates the block-triangular shape (throws std::invalid_argument on a
  /// nonzero upper block) and records whether every diagonal block is Id_R.
  explicit BlockTriangularSystem(Gram4 c);

  const Gram4& c() const noexcept { return c_; }
  /// True when every R x R diagonal block is exactly the identity; the
  /// substitution then skips the per-block inversion.
  bool unit_diagonal() const noexcept { return unit_diagonal_; }

 private:
  Gram4 c_;
  bool unit_diagonal_ = false;
};

/// C = Id - M (.) AB^T with M[k,i,k',i'] = [k' < k].
BlockTriangularSystem build_system(const Tensor3& a, const Tensor3& b);

/// Block forward substitution for D = C^{-1}:
///   D[t,t] = C[t,t]^{-1},  D[t,s] = -D[t,t] sum_{r=s}^{t-1} C[t,r] D[r,s]  (s < t).
/// Rows are processed in order; the blocks of one row are independent and
/// are spread over policy.threads. Throws SingularBlockError when a
/// diagonal block's pivot falls below 1e-13 * ||block||_inf.
Gram4 invert_block_triangular(const BlockTriangularSystem& system, const ExecPolicy& policy = {});

/// W = D A, U = D Ã (contraction over the (step, rank) pair). D must be block
/// lower-triangular, as returned by invert_block_triangular.
SolvedCoefficients solve_wu(const Gram4& d, const Tensor3& a, const Tensor3& a_tilde,
                            const ExecPolicy& policy = {});

/// Inverse of one square block by Gauss-Jordan with partial pivoting.
Matrix invert_small(const Matrix& block);

/// Whole tensor-inversion chunk: build, invert, solve.
SolvedCoefficients tensorinv_coefficients(const ChunkInputs& inputs, const ExecPolicy& policy = {});
AffineFlow tensorinv_chunk_flow(const ChunkInputs& inputs, const ExecPolicy& policy = {});

}  // namespace parflow
