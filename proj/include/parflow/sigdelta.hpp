// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <vector>

#include "parflow/affine_flow.hpp"
#include "parflow/parallel.hpp"
#include "parflow/tensor.hpp"

namespace parflow {

/// Cell (m, k) of the triangular grid 0 <= m <= k < L.
struct GridCell {
  std::size_t m = 0;
  std::size_t k = 0;
  friend bool operator==(const GridCell&, const GridCell&) = default;
};

using Wave = std::vector<GridCell>;

/// Wave i holds every cell with m + k = i, in increasing m. 2L - 1 waves.
std::vector<Wave> antidiagonal_schedule(std::size_t steps);

struct WavefrontOptions {
  ExecPolicy exec;
  /// Visit the cells of each wave in decreasing m. Output is unaffected.
  bool reverse_within_wave = false;
};

/// Solves for W and U through the two-parameter grid
///
///   W(0, k)       = A_k
///   W(k+1, k+1)   = W(k, k+1) + W(k, k) B_k^T A_{k+1}
///   W(m+1, k+1)   = W(m, k+1) + W(m+1, k) - W(m, k) + W(m, m) B_m^T (A_{k+1} - A_k),   m < k
///
/// whose diagonal W(k, k) is the coefficient W_k. U follows the same
/// recursion with boundary row Ã and is carried on a stacked second channel.
/// The grid is swept one antidiagonal at a time through three rolling
/// buffers; only the diagonal is kept.
SolvedCoefficients wavefront_solve(const Tensor3& a, const Tensor3& a_tilde, const Tensor3& b,
                                   const WavefrontOptions& options = {});

inline Matrix assemble_state_sig(const Matrix& s0, const SolvedCoefficients& coeffs, const Tensor3& b) {
  return assemble_state(s0, coeffs, b);
}

AffineFlow sigdelta_chunk_flow(const ChunkInputs& inputs, const WavefrontOptions& options = {});

}  // namespace parflow
