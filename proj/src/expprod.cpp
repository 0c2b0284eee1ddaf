// SPDX-License-Identifier: Apache-2.0
#include "parflow/expprod.hpp"

#include <array>
#include <cmath>

namespace parflow {
namespace {

constexpr int kTaylorTerms = 20;

Scalar one_norm(const Matrix& m) {
  Scalar best = 0.0;
  for (std::size_t c = 0; c < m.cols(); ++c) {
    Scalar sum = 0.0;
    for (std::size_t r = 0; r < m.rows(); ++r) sum += std::abs(m(r, c));
    best = std::max(best, sum);
  }
  return best;
}

Matrix add_identity(Matrix m) {
  for (std::size_t i = 0; i < m.rows(); ++i) m(i, i) += 1.0;
  return m;
}

}  // namespace

Scalar phi1(Scalar x) noexcept {
  if (std::abs(x) < 1e-4) {
    return 1.0 + x / 2.0 * (1.0 + x / 3.0 * (1.0 + x / 4.0 * (1.0 + x / 5.0)));
  }
  return std::expm1(x) / x;
}

Matrix phi1(const Matrix& z) {
  if (!z.square()) throw DimensionError("phi1: matrix must be square");
  const std::size_t n = z.rows();
  if (n == 1) return Matrix(1, 1, std::array<Scalar, 1>{phi1(z(0, 0))});

  int squarings = 0;
  const Scalar norm = one_norm(z);
  if (norm > 0.5) squarings = static_cast<int>(std::ceil(std::log2(norm / 0.5)));
  const Matrix zs = scale(z, std::ldexp(1.0, -squarings));

  // Horner on sum_j zs^j / (j+1)!
  std::array<Scalar, kTaylorTerms + 1> coeff{};
  coeff[0] = 1.0;
  for (int j = 1; j <= kTaylorTerms; ++j) coeff[j] = coeff[j - 1] / static_cast<Scalar>(j + 1);
  Matrix phi = scale(Matrix::identity(n), coeff[kTaylorTerms]);
  for (int j = kTaylorTerms - 1; j >= 0; --j) {
    phi = matmul(zs, phi);
    for (std::size_t i = 0; i < n; ++i) phi(i, i) += coeff[j];
  }
  Matrix e = add_identity(matmul(zs, phi));
  for (int s = 0; s < squarings; ++s) {
    phi = scale(matmul(add_identity(e), phi), 0.5);
    e = matmul(e, e);
  }
  return phi;
}

Matrix exp_rank1(std::span<const Scalar> a, std::span<const Scalar> b) {
  if (a.size() != b.size() || a.empty()) throw DimensionError("exp_rank1: vectors must share length d >= 1");
  const std::size_t d = a.size();
  Scalar ba = 0.0;
  for (std::size_t i = 0; i < d; ++i) ba += b[i] * a[i];
  const Scalar f = phi1(ba);
  Matrix out = Matrix::identity(d);
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) out(r, c) += f * a[r] * b[c];
  instrument::add_madds(static_cast<std::uint64_t>(d) + 2ull * d * d);
  return out;
}

Matrix exp_lowrank(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() == 0 || a.cols() == 0) {
    throw DimensionError("exp_lowrank: A and B must both be d x R");
  }
  const Matrix bt = b.transposed();
  const Matrix phi = phi1(matmul(bt, a));   // R x R
  return add_identity(matmul(matmul(a, phi), bt));
}

std::vector<Increment> increments_from(const Tensor3& a, const Tensor3& b) {
  if (!a.same_shape(b)) throw DimensionError("increments_from: A and B shapes differ");
  std::vector<Increment> out;
  out.reserve(a.steps());
  for (std::size_t k = 0; k < a.steps(); ++k) out.push_back({a.slice(k), b.slice(k)});
  return out;
}

Matrix flow_product(std::size_t dim, std::span<const Increment> increments, FlowMode mode,
                    ProductOrder order) {
  if (increments.empty()) return Matrix::identity(dim);
  const std::size_t d = dim;
  std::vector<Matrix> factors;
  factors.reserve(increments.size());
  for (const auto& inc : increments) {
    if (inc.a.rows() != d || inc.b.rows() != d || inc.a.cols() != inc.b.cols()) {
      throw DimensionError("flow_product: increments disagree on d x R shape");
    }
    factors.push_back(mode == FlowMode::exact ? exp_lowrank(inc.a, inc.b)
                                              : add_identity(matmul_nt(inc.a, inc.b)));
  }
  if (order == ProductOrder::sequential) {
    Matrix acc = std::move(factors.front());
    for (std::size_t i = 1; i < factors.size(); ++i) acc = matmul(acc, factors[i]);
    return acc;
  }
  while (factors.size() > 1) {
    std::vector<Matrix> next;
    next.reserve((factors.size() + 1) / 2);
    for (std::size_t i = 0; i + 1 < factors.size(); i += 2) next.push_back(matmul(factors[i], factors[i + 1]));
    if (factors.size() % 2 == 1) next.push_back(std::move(factors.back()));
    factors = std::move(next);
  }
  return std::move(factors.front());
}

Matrix euler_forcing(const Tensor3& a, const Tensor3& a_tilde, const Tensor3& b) {
  if (!a.same_shape(a_tilde) || !a.same_shape(b)) {
    throw DimensionError("euler_forcing: A, Atilde and B must share one shape");
  }
  const std::size_t d = a.dim();
  const std::size_t rank = a.rank();
  Matrix suffix = Matrix::identity(d);
  Matrix q(d, d);
  std::vector<Scalar> bt(rank * d);
  for (std::size_t k = a.steps(); k-- > 0;) {
    // bt = B_k^T suffix  (R x d)
    std::fill(bt.begin(), bt.end(), 0.0);
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t m = 0; m < d; ++m) {
        const Scalar bv = b(k, i, m);
        auto src = suffix.row(m);
        for (std::size_t c = 0; c < d; ++c) bt[i * d + c] += bv * src[c];
      }
    for (std::size_t r = 0; r < d; ++r) {
      auto qrow = q.row(r);
      auto srow = suffix.row(r);
      for (std::size_t i = 0; i < rank; ++i) {
        const Scalar ut = a_tilde(k, i, r);
        const Scalar at = a(k, i, r);
        for (std::size_t c = 0; c < d; ++c) {
          qrow[c] += ut * bt[i * d + c];
          srow[c] += at * bt[i * d + c];
        }
      }
    }
  }
  instrument::add_madds(3ull * a.steps() * rank * d * d);
  return q;
}

AffineFlow euler_flow(const ChunkInputs& inputs) {
  inputs.validate();
  if (inputs.steps() == 0) return AffineFlow::identity(inputs.dim());
  const auto increments = increments_from(inputs.a, inputs.b);
  return {flow_product(inputs.dim(), increments, FlowMode::euler), euler_forcing(inputs.a, inputs.a_tilde, inputs.b)};
}

}  // namespace parflow
