// SPDX-License-Identifier: Apache-2.0
#include "parflow/recurrence.hpp"

#include <string>

namespace parflow {

Matrix step(const Matrix& state, std::span<const Scalar> a_k, std::span<const Scalar> a_tilde_k,
            std::span<const Scalar> b_k, std::size_t rank) {
  const std::size_t d = state.rows();
  if (!state.square() || rank == 0 || a_k.size() != rank * d || a_tilde_k.size() != rank * d ||
      b_k.size() != rank * d) {
    throw DimensionError("step: state is " + std::to_string(state.rows()) + "x" +
                         std::to_string(state.cols()) + " but slices do not hold rank*d = " +
                         std::to_string(rank * d) + " values");
  }
  // T = S A_k + Ã_k  (d x R)
  std::vector<Scalar> t(d * rank);
  for (std::size_t r = 0; r < d; ++r) {
    auto srow = state.row(r);
    for (std::size_t i = 0; i < rank; ++i) {
      Scalar acc = a_tilde_k[i * d + r];
      for (std::size_t m = 0; m < d; ++m) acc += srow[m] * a_k[i * d + m];
      t[r * rank + i] = acc;
    }
  }
  Matrix next = state;
  for (std::size_t r = 0; r < d; ++r) {
    auto dst = next.row(r);
    for (std::size_t i = 0; i < rank; ++i) {
      const Scalar x = t[r * rank + i];
      for (std::size_t c = 0; c < d; ++c) dst[c] += x * b_k[i * d + c];
    }
  }
  instrument::add_madds(2ull * d * d * rank);
  return next;
}

RunResult run(const Matrix& s0, const ChunkInputs& inputs, bool capture_trajectory) {
  inputs.validate();
  if (!s0.square() || (inputs.steps() > 0 && s0.rows() != inputs.dim())) {
    throw DimensionError("run: S0 must be d x d with d matching the inputs");
  }
  RunResult out{s0, {}};
  if (capture_trajectory) {
    out.trajectory.reserve(inputs.steps() + 1);
    out.trajectory.push_back(s0);
  }
  for (std::size_t k = 0; k < inputs.steps(); ++k) {
    out.state = step(out.state, inputs.a.step(k), inputs.a_tilde.step(k), inputs.b.step(k), inputs.rank());
    if (capture_trajectory) out.trajectory.push_back(out.state);
  }
  return out;
}

void DeltaNetParams::validate() const {
  const std::size_t steps = keys.rows();
  if (values.rows() != steps || betas.size() != steps || values.cols() != keys.cols()) {
    throw DimensionError("DeltaNetParams: keys, values and betas must cover the same steps and dim");
  }
  if (queries && (queries->rows() != steps || queries->cols() != keys.cols())) {
    throw DimensionError("DeltaNetParams: queries must be L x d");
  }
  if (keys.cols() == 0) throw DimensionError("DeltaNetParams: dim must be >= 1");
  if (!all_finite(betas)) throw std::invalid_argument("DeltaNetParams: non-finite beta");
}

ChunkInputs deltanet_params_to_inputs(const DeltaNetParams& params) {
  params.validate();
  const std::size_t steps = params.keys.rows();
  const std::size_t d = params.keys.cols();
  ChunkInputs in{Tensor3(steps, 1, d), Tensor3(steps, 1, d), Tensor3(steps, 1, d)};
  for (std::size_t t = 0; t < steps; ++t) {
    const Scalar beta = params.betas[t];
    for (std::size_t m = 0; m < d; ++m) {
      in.a(t, 0, m) = beta * params.keys(t, m);
      in.a_tilde(t, 0, m) = -beta * params.values(t, m);
      in.b(t, 0, m) = -params.keys(t, m);
    }
  }
  return in;
}

std::vector<Scalar> readout(const Matrix& state, std::span<const Scalar> query) {
  if (!state.square()) throw DimensionError("readout: state must be square");
  return matvec(state, query);
}

}  // namespace parflow
