// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "parflow/errors.hpp"
#include "parflow/instrument.hpp"

namespace parflow {

using Scalar = double;
using Buffer = std::vector<Scalar, instrument::TrackedAllocator<Scalar>>;

/// Dense row-major rows x cols matrix. Used for the d x d state, for the
/// d x R driver slices in their mathematical orientation, and for flattened
/// block systems.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  /// Takes row-major values; throws DimensionError on length mismatch and
  /// std::invalid_argument on non-finite entries.
  Matrix(std::size_t rows, std::size_t cols, std::span<const Scalar> values);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool square() const noexcept { return rows_ == cols_; }

  Scalar& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  Scalar operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

  std::span<Scalar> values() noexcept { return data_; }
  std::span<const Scalar> values() const noexcept { return data_; }
  std::span<Scalar> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const Scalar> row(std::size_t r) const noexcept {
    return {data_.data() + r * cols_, cols_};
  }

  Matrix transposed() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Buffer data_;
};

/// Step-indexed driver tensor of shape (steps, rank, dim).
///
/// Slice k stores the transpose of the d x R matrix X_k, so entry (k, i, m)
/// is row m, column i of X_k. This is the `[L, R, d]` layout used throughout.
class Tensor3 {
 public:
  Tensor3() = default;
  /// Zero tensor. Requires rank >= 1 and dim >= 1; steps may be 0.
  Tensor3(std::size_t steps, std::size_t rank, std::size_t dim);
  Tensor3(std::size_t steps, std::size_t rank, std::size_t dim, std::span<const Scalar> values);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  Scalar& operator()(std::size_t k, std::size_t i, std::size_t m) noexcept {
    return data_[(k * rank_ + i) * dim_ + m];
  }
  Scalar operator()(std::size_t k, std::size_t i, std::size_t m) const noexcept {
    return data_[(k * rank_ + i) * dim_ + m];
  }

  std::span<Scalar> values() noexcept { return data_; }
  std::span<const Scalar> values() const noexcept { return data_; }

  /// R x d storage of step k (the transposed d x R slice).
  std::span<Scalar> step(std::size_t k) noexcept { return {data_.data() + k * rank_ * dim_, rank_ * dim_}; }
  std::span<const Scalar> step(std::size_t k) const noexcept {
    return {data_.data() + k * rank_ * dim_, rank_ * dim_};
  }

  /// Slice k as a d x R matrix.
  Matrix slice(std::size_t k) const;
  /// Steps [begin, end) as a new tensor.
  Tensor3 steps_range(std::size_t begin, std::size_t end) const;
  Tensor3 scaled(Scalar factor) const;

  bool same_shape(const Tensor3& other) const noexcept {
    return steps_ == other.steps_ && rank_ == other.rank_ && dim_ == other.dim_;
  }

  friend bool operator==(const Tensor3&, const Tensor3&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t rank_ = 1;
  std::size_t dim_ = 1;
  Buffer data_;
};

/// Position of a (step, rank) pair in the flattened L*R axis.
struct BlockIndex {
  std::size_t step = 0;
  std::size_t rank = 0;

  std::size_t flat(std::size_t rank_count) const noexcept { return rank + step * rank_count; }
  static BlockIndex from_flat(std::size_t flat, std::size_t rank_count) noexcept {
    return {flat / rank_count, flat % rank_count};
  }
};

/// Four-index block tensor of dims (L, R, L, R); entry (k, i, k', i').
class Gram4 {
 public:
  Gram4() = default;
  Gram4(std::size_t steps, std::size_t rank);

  static Gram4 identity(std::size_t steps, std::size_t rank);

  std::size_t steps() const noexcept { return steps_; }
  std::size_t rank() const noexcept { return rank_; }
  std::size_t side() const noexcept { return steps_ * rank_; }

  Scalar& operator()(std::size_t k, std::size_t i, std::size_t kp, std::size_t ip) noexcept {
    return data_[(k * rank_ + i) * side() + kp * rank_ + ip];
  }
  Scalar operator()(std::size_t k, std::size_t i, std::size_t kp, std::size_t ip) const noexcept {
    return data_[(k * rank_ + i) * side() + kp * rank_ + ip];
  }

  std::span<Scalar> values() noexcept { return data_; }
  std::span<const Scalar> values() const noexcept { return data_; }

  bool same_shape(const Gram4& other) const noexcept {
    return steps_ == other.steps_ && rank_ == other.rank_;
  }

  friend bool operator==(const Gram4&, const Gram4&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t rank_ = 1;
  Buffer data_;
};

/// The three drivers of one chunk: increments A_k B_k^T and Ã_k B_k^T.
struct ChunkInputs {
  Tensor3 a;
  Tensor3 a_tilde;
  Tensor3 b;

  /// Throws DimensionError unless all three share one shape.
  void validate() const;
  std::size_t steps() const noexcept { return a.steps(); }
  std::size_t rank() const noexcept { return a.rank(); }
  std::size_t dim() const noexcept { return a.dim(); }
  ChunkInputs steps_range(std::size_t begin, std::size_t end) const;
};

// -- contraction primitives --------------------------------------------------

/// G[k,i,k',i'] = sum_m A[k,i,m] B[k',i',m].
Gram4 contract_ab(const Tensor3& a, const Tensor3& b);

/// Zeroes every block with k' >= k; rank indices are untouched.
Gram4 apply_strict_lower_mask(const Gram4& g);

/// M[flat(k,i), flat(k',i')] = G[k,i,k',i'].
Matrix flatten_block(const Gram4& g);
Gram4 unflatten_block(const Matrix& m, std::size_t steps, std::size_t rank);

/// Tensor composition: contraction over the inner (step, rank) pair.
Gram4 compose(const Gram4& lhs, const Gram4& rhs);

// -- dense helpers (all counted) ---------------------------------------------

Matrix matmul(const Matrix& lhs, const Matrix& rhs);
/// lhs * rhs^T
Matrix matmul_nt(const Matrix& lhs, const Matrix& rhs);
Matrix add(const Matrix& lhs, const Matrix& rhs);
Matrix subtract(const Matrix& lhs, const Matrix& rhs);
Matrix scale(const Matrix& m, Scalar factor);
std::vector<Scalar> matvec(const Matrix& m, std::span<const Scalar> x);

Scalar frobenius_norm(const Matrix& m) noexcept;
Scalar max_abs(std::span<const Scalar> values) noexcept;
/// ||x - reference||_F / max(||reference||_F, tiny).
Scalar relative_frobenius_error(const Matrix& x, const Matrix& reference);
bool all_finite(std::span<const Scalar> values) noexcept;

}  // namespace parflow
