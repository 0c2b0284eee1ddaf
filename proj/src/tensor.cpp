// SPDX-License-Identifier: Apache-2.0
#include "parflow/tensor.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <string>

namespace parflow {
namespace {

void require_finite(std::span<const Scalar> values, const char* what) {
  if (!all_finite(values)) throw std::invalid_argument(std::string(what) + ": non-finite entry");
}

std::string shape_str(std::size_t a, std::size_t b) {
  return "(" + std::to_string(a) + "x" + std::to_string(b) + ")";
}

}  // namespace

// -- Matrix ------------------------------------------------------------------

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::span<const Scalar> values)
    : rows_(rows), cols_(cols) {
  if (values.size() != rows * cols) {
    throw DimensionError("Matrix: expected " + std::to_string(rows * cols) + " values, got " +
                         std::to_string(values.size()));
  }
  require_finite(values, "Matrix");
  data_.assign(values.begin(), values.end());
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::transposed() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

// -- Tensor3 -----------------------------------------------------------------

Tensor3::Tensor3(std::size_t steps, std::size_t rank, std::size_t dim)
    : steps_(steps), rank_(rank), dim_(dim) {
  if (rank == 0 || dim == 0) throw DimensionError("Tensor3: rank and dim must be >= 1");
  data_.assign(steps * rank * dim, 0.0);
}

Tensor3::Tensor3(std::size_t steps, std::size_t rank, std::size_t dim, std::span<const Scalar> values)
    : Tensor3(steps, rank, dim) {
  if (values.size() != data_.size()) {
    throw DimensionError("Tensor3: expected " + std::to_string(data_.size()) + " values, got " +
                         std::to_string(values.size()));
  }
  require_finite(values, "Tensor3");
  std::copy(values.begin(), values.end(), data_.begin());
}

Matrix Tensor3::slice(std::size_t k) const {
  Matrix m(dim_, rank_);
  for (std::size_t i = 0; i < rank_; ++i)
    for (std::size_t r = 0; r < dim_; ++r) m(r, i) = (*this)(k, i, r);
  return m;
}

Tensor3 Tensor3::steps_range(std::size_t begin, std::size_t end) const {
  if (begin > end || end > steps_) throw DimensionError("Tensor3::steps_range: out of range");
  Tensor3 out(end - begin, rank_, dim_);
  std::copy(data_.begin() + static_cast<std::ptrdiff_t>(begin * rank_ * dim_),
            data_.begin() + static_cast<std::ptrdiff_t>(end * rank_ * dim_), out.data_.begin());
  return out;
}

Tensor3 Tensor3::scaled(Scalar factor) const {
  Tensor3 out = *this;
  for (auto& v : out.data_) v *= factor;
  return out;
}

// -- Gram4 -------------------------------------------------------------------

Gram4::Gram4(std::size_t steps, std::size_t rank) : steps_(steps), rank_(rank) {
  if (rank == 0) throw DimensionError("Gram4: rank must be >= 1");
  data_.assign(side() * side(), 0.0);
}

Gram4 Gram4::identity(std::size_t steps, std::size_t rank) {
  Gram4 g(steps, rank);
  const std::size_t n = g.side();
  for (std::size_t f = 0; f < n; ++f) g.data_[f * n + f] = 1.0;
  return g;
}

// -- ChunkInputs -------------------------------------------------------------

void ChunkInputs::validate() const {
  if (!a.same_shape(a_tilde) || !a.same_shape(b)) {
    throw DimensionError("ChunkInputs: A, Atilde and B must share one (L, R, d) shape");
  }
}

ChunkInputs ChunkInputs::steps_range(std::size_t begin, std::size_t end) const {
  return {a.steps_range(begin, end), a_tilde.steps_range(begin, end), b.steps_range(begin, end)};
}

// -- contraction primitives --------------------------------------------------

Gram4 contract_ab(const Tensor3& a, const Tensor3& b) {
  if (!a.same_shape(b)) throw DimensionError("contract_ab: A and B shapes differ");
  const std::size_t n = a.steps() * a.rank();
  const std::size_t d = a.dim();
  Gram4 g(a.steps(), a.rank());
  auto out = g.values();
  const Scalar* pa = a.values().data();
  const Scalar* pb = b.values().data();
  for (std::size_t row = 0; row < n; ++row) {
    for (std::size_t col = 0; col < n; ++col) {
      Scalar acc = 0.0;
      for (std::size_t m = 0; m < d; ++m) acc += pa[row * d + m] * pb[col * d + m];
      out[row * n + col] = acc;
    }
  }
  instrument::add_madds(static_cast<std::uint64_t>(n) * n * d);
  return g;
}

Gram4 apply_strict_lower_mask(const Gram4& g) {
  Gram4 out(g.steps(), g.rank());
  const std::size_t L = g.steps();
  const std::size_t R = g.rank();
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t i = 0; i < R; ++i)
      for (std::size_t kp = 0; kp < k; ++kp)
        for (std::size_t ip = 0; ip < R; ++ip) out(k, i, kp, ip) = g(k, i, kp, ip);
  return out;
}

Matrix flatten_block(const Gram4& g) {
  const std::size_t n = g.side();
  return Matrix(n, n, g.values());
}

Gram4 unflatten_block(const Matrix& m, std::size_t steps, std::size_t rank) {
  Gram4 g(steps, rank);
  if (m.rows() != g.side() || m.cols() != g.side()) {
    throw DimensionError("unflatten_block: matrix " + shape_str(m.rows(), m.cols()) +
                         " does not match L*R = " + std::to_string(g.side()));
  }
  std::copy(m.values().begin(), m.values().end(), g.values().begin());
  return g;
}

Gram4 compose(const Gram4& lhs, const Gram4& rhs) {
  if (!lhs.same_shape(rhs)) throw DimensionError("compose: Gram4 shapes differ");
  const std::size_t n = lhs.side();
  Gram4 out(lhs.steps(), lhs.rank());
  auto o = out.values();
  auto l = lhs.values();
  auto r = rhs.values();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k) {
      const Scalar x = l[i * n + k];
      for (std::size_t j = 0; j < n; ++j) o[i * n + j] += x * r[k * n + j];
    }
  instrument::add_madds(static_cast<std::uint64_t>(n) * n * n);
  return out;
}

// -- dense helpers -----------------------------------------------------------

Matrix matmul(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.cols() != rhs.rows()) {
    throw DimensionError("matmul: " + shape_str(lhs.rows(), lhs.cols()) + " * " +
                         shape_str(rhs.rows(), rhs.cols()));
  }
  Matrix out(lhs.rows(), rhs.cols());
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t k = 0; k < lhs.cols(); ++k) {
      const Scalar x = lhs(i, k);
      auto dst = out.row(i);
      auto src = rhs.row(k);
      for (std::size_t j = 0; j < rhs.cols(); ++j) dst[j] += x * src[j];
    }
  instrument::add_madds(static_cast<std::uint64_t>(lhs.rows()) * lhs.cols() * rhs.cols());
  return out;
}

Matrix matmul_nt(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.cols() != rhs.cols()) {
    throw DimensionError("matmul_nt: " + shape_str(lhs.rows(), lhs.cols()) + " * " +
                         shape_str(rhs.rows(), rhs.cols()) + "^T");
  }
  Matrix out(lhs.rows(), rhs.rows());
  for (std::size_t i = 0; i < lhs.rows(); ++i)
    for (std::size_t j = 0; j < rhs.rows(); ++j) {
      Scalar acc = 0.0;
      auto a = lhs.row(i);
      auto b = rhs.row(j);
      for (std::size_t k = 0; k < lhs.cols(); ++k) acc += a[k] * b[k];
      out(i, j) = acc;
    }
  instrument::add_madds(static_cast<std::uint64_t>(lhs.rows()) * rhs.rows() * lhs.cols());
  return out;
}

Matrix add(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) throw DimensionError("add: shapes differ");
  Matrix out = lhs;
  auto o = out.values();
  auto r = rhs.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] += r[i];
  return out;
}

Matrix subtract(const Matrix& lhs, const Matrix& rhs) {
  if (lhs.rows() != rhs.rows() || lhs.cols() != rhs.cols()) {
    throw DimensionError("subtract: shapes differ");
  }
  Matrix out = lhs;
  auto o = out.values();
  auto r = rhs.values();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] -= r[i];
  return out;
}

Matrix scale(const Matrix& m, Scalar factor) {
  Matrix out = m;
  for (auto& v : out.values()) v *= factor;
  return out;
}

std::vector<Scalar> matvec(const Matrix& m, std::span<const Scalar> x) {
  if (m.cols() != x.size()) throw DimensionError("matvec: vector length does not match columns");
  std::vector<Scalar> out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    Scalar acc = 0.0;
    auto row = m.row(i);
    for (std::size_t j = 0; j < m.cols(); ++j) acc += row[j] * x[j];
    out[i] = acc;
  }
  instrument::add_madds(static_cast<std::uint64_t>(m.rows()) * m.cols());
  return out;
}

Scalar frobenius_norm(const Matrix& m) noexcept {
  Scalar acc = 0.0;
  for (Scalar v : m.values()) acc += v * v;
  return std::sqrt(acc);
}

Scalar max_abs(std::span<const Scalar> values) noexcept {
  Scalar out = 0.0;
  for (Scalar v : values) out = std::max(out, std::abs(v));
  return out;
}

Scalar relative_frobenius_error(const Matrix& x, const Matrix& reference) {
  const Scalar denom = std::max(frobenius_norm(reference), DBL_MIN);
  return frobenius_norm(subtract(x, reference)) / denom;
}

bool all_finite(std::span<const Scalar> values) noexcept {
  return std::all_of(values.begin(), values.end(), [](Scalar v) { return std::isfinite(v); });
}

}  // namespace parflow
