// SPDX-License-Identifier: Apache-2.0
#include "parflow/affine_flow.hpp"

namespace parflow {
namespace {

void check_shapes(const SolvedCoefficients& coeffs, const Tensor3& b) {
  if (!coeffs.w.same_shape(b) || !coeffs.u.same_shape(b)) {
    throw DimensionError("coefficients W, U and driver B must share one (L, R, d) shape");
  }
}

// acc += sum_k X_k B_k^T, X in Tensor3 layout.
void accumulate_outer(Matrix& acc, const Tensor3& x, const Tensor3& b) {
  const std::size_t d = b.dim();
  const std::size_t rank = b.rank();
  for (std::size_t k = 0; k < b.steps(); ++k)
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t r = 0; r < d; ++r) {
        const Scalar xr = x(k, i, r);
        auto dst = acc.row(r);
        for (std::size_t c = 0; c < d; ++c) dst[c] += xr * b(k, i, c);
      }
  instrument::add_madds(static_cast<std::uint64_t>(b.steps()) * rank * d * d);
}

}  // namespace

Matrix assemble_state(const Matrix& s0, const SolvedCoefficients& coeffs, const Tensor3& b) {
  check_shapes(coeffs, b);
  const std::size_t d = b.dim();
  const std::size_t rank = b.rank();
  if (!s0.square() || (b.steps() > 0 && s0.rows() != d)) {
    throw DimensionError("assemble_state: S0 must be d x d");
  }
  Matrix out = s0;
  std::vector<Scalar> t(d * rank);
  for (std::size_t k = 0; k < b.steps(); ++k) {
    // T = S0 W_k + U_k
    for (std::size_t r = 0; r < d; ++r) {
      auto srow = s0.row(r);
      for (std::size_t i = 0; i < rank; ++i) {
        Scalar acc = coeffs.u(k, i, r);
        for (std::size_t m = 0; m < d; ++m) acc += srow[m] * coeffs.w(k, i, m);
        t[r * rank + i] = acc;
      }
    }
    for (std::size_t r = 0; r < d; ++r) {
      auto dst = out.row(r);
      for (std::size_t i = 0; i < rank; ++i) {
        const Scalar x = t[r * rank + i];
        for (std::size_t c = 0; c < d; ++c) dst[c] += x * b(k, i, c);
      }
    }
  }
  instrument::add_madds(2ull * b.steps() * rank * d * d);
  return out;
}

AffineFlow flow_from_coefficients(const SolvedCoefficients& coeffs, const Tensor3& b) {
  check_shapes(coeffs, b);
  AffineFlow flow = AffineFlow::identity(b.dim());
  accumulate_outer(flow.p, coeffs.w, b);
  accumulate_outer(flow.q, coeffs.u, b);
  return flow;
}

}  // namespace parflow
