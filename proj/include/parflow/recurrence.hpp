// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <span>
#include <vector>

#include "parflow/tensor.hpp"

namespace parflow {

/// One step of S <- S + S A_k B_k^T + Ã_k B_k^T.
///
/// The slices are in Tensor3 step layout (R x d storage of the d x R
/// matrices), as returned by Tensor3::step().
Matrix step(const Matrix& state, std::span<const Scalar> a_k, std::span<const Scalar> a_tilde_k,
            std::span<const Scalar> b_k, std::size_t rank);

struct RunResult {
  Matrix state;
  /// All L+1 states, S_0 first. Empty unless requested.
  std::vector<Matrix> trajectory;
};

/// Sequential reference: folds step() over k = 0..L-1.
RunResult run(const Matrix& s0, const ChunkInputs& inputs, bool capture_trajectory = false);

/// Rank-1 delta rule drivers: keys, values and queries are L x d, one row per
/// step.
struct DeltaNetParams {
  Matrix keys;
  Matrix values;
  std::vector<Scalar> betas;
  std::optional<Matrix> queries;

  void validate() const;
};

/// A_t = beta_t k_t, Ã_t = -beta_t v_t, B_t = -k_t (R = 1).
ChunkInputs deltanet_params_to_inputs(const DeltaNetParams& params);

/// Memory readout o = S q.
std::vector<Scalar> readout(const Matrix& state, std::span<const Scalar> query);

}  // namespace parflow
