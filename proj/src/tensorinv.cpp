// SPDX-License-Identifier: Apache-2.0
#include "parflow/tensorinv.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

namespace parflow {
namespace {

constexpr Scalar kPivotTolerance = 1e-13;

Matrix block(const Gram4& g, std::size_t row, std::size_t col) {
  const std::size_t rank = g.rank();
  Matrix m(rank, rank);
  for (std::size_t i = 0; i < rank; ++i)
    for (std::size_t j = 0; j < rank; ++j) m(i, j) = g(row, i, col, j);
  return m;
}

Scalar inf_norm(const Matrix& m) {
  Scalar best = 0.0;
  for (std::size_t r = 0; r < m.rows(); ++r) {
    Scalar sum = 0.0;
    for (Scalar v : m.row(r)) sum += std::abs(v);
    best = std::max(best, sum);
  }
  return best;
}

}  // namespace

BlockTriangularSystem::BlockTriangularSystem(Gram4 c) : c_(std::move(c)) {
  const std::size_t steps = c_.steps();
  const std::size_t rank = c_.rank();
  unit_diagonal_ = true;
  for (std::size_t t = 0; t < steps; ++t) {
    for (std::size_t s = t + 1; s < steps; ++s)
      for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < rank; ++j)
          if (c_(t, i, s, j) != 0.0) {
            throw std::invalid_argument("BlockTriangularSystem: nonzero block above the diagonal at (" +
                                        std::to_string(t) + ", " + std::to_string(s) + ")");
          }
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < rank; ++j)
        if (c_(t, i, t, j) != (i == j ? 1.0 : 0.0)) unit_diagonal_ = false;
  }
}

BlockTriangularSystem build_system(const Tensor3& a, const Tensor3& b) {
  Gram4 c = apply_strict_lower_mask(contract_ab(a, b));
  for (auto& v : c.values()) v = -v;
  const std::size_t n = c.side();
  auto values = c.values();
  for (std::size_t f = 0; f < n; ++f) values[f * n + f] += 1.0;
  return BlockTriangularSystem(std::move(c));
}

Matrix invert_small(const Matrix& blk) {
  if (!blk.square()) throw DimensionError("invert_small: block must be square");
  const std::size_t n = blk.rows();
  const Scalar threshold = kPivotTolerance * inf_norm(blk);
  Matrix work = blk;
  Matrix inv = Matrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r)
      if (std::abs(work(r, col)) > std::abs(work(pivot, col))) pivot = r;
    const Scalar p = work(pivot, col);
    if (!(std::abs(p) >= threshold) || p == 0.0) {
      throw SingularBlockError("singular diagonal block: pivot " + std::to_string(p) + " in column " +
                               std::to_string(col));
    }
    if (pivot != col) {
      std::swap_ranges(work.row(col).begin(), work.row(col).end(), work.row(pivot).begin());
      std::swap_ranges(inv.row(col).begin(), inv.row(col).end(), inv.row(pivot).begin());
    }
    const Scalar scale_by = 1.0 / p;
    for (std::size_t c = 0; c < n; ++c) {
      work(col, c) *= scale_by;
      inv(col, c) *= scale_by;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const Scalar f = work(r, col);
      for (std::size_t c = 0; c < n; ++c) {
        work(r, c) -= f * work(col, c);
        inv(r, c) -= f * inv(col, c);
      }
    }
  }
  instrument::add_madds(2ull * n * n * n);
  return inv;
}

Gram4 invert_block_triangular(const BlockTriangularSystem& system, const ExecPolicy& policy) {
  const Gram4& c = system.c();
  const std::size_t steps = c.steps();
  const std::size_t rank = c.rank();
  const bool unit = system.unit_diagonal();
  Gram4 d(steps, rank);

  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix diag_inv = unit ? Matrix::identity(rank) : invert_small(block(c, t, t));
    for (std::size_t i = 0; i < rank; ++i)
      for (std::size_t j = 0; j < rank; ++j) d(t, i, t, j) = diag_inv(i, j);

    parallel_for(0, t, policy, [&](std::size_t s) {
      // X = sum_{r=s}^{t-1} C[t,r] D[r,s]
      std::vector<Scalar> x(rank * rank, 0.0);
      for (std::size_t r = s; r < t; ++r)
        for (std::size_t i = 0; i < rank; ++i)
          for (std::size_t q = 0; q < rank; ++q) {
            const Scalar ctr = c(t, i, r, q);
            for (std::size_t j = 0; j < rank; ++j) x[i * rank + j] += ctr * d(r, q, s, j);
          }
      for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < rank; ++j) {
          Scalar v = x[i * rank + j];
          if (!unit) {
            v = 0.0;
            for (std::size_t q = 0; q < rank; ++q) v += diag_inv(i, q) * x[q * rank + j];
          }
          d(t, i, s, j) = -v;
        }
    });
    const std::uint64_t r3 = static_cast<std::uint64_t>(rank) * rank * rank;
    // sum_{s<t} (t - s) blocks of R^3, plus one R^3 product per block off the unit path
    instrument::add_madds(r3 * t * (t + 1) / 2 + (unit ? 0 : r3 * t));
  }
  return d;
}

SolvedCoefficients solve_wu(const Gram4& d, const Tensor3& a, const Tensor3& a_tilde, const ExecPolicy& policy) {
  if (!a.same_shape(a_tilde) || d.steps() != a.steps() || d.rank() != a.rank()) {
    throw DimensionError("solve_wu: D must be (L,R,L,R) for A and Atilde of shape (L,R,d)");
  }
  const std::size_t steps = a.steps();
  const std::size_t rank = a.rank();
  const std::size_t dim = a.dim();
  for (std::size_t t = 0; t < steps; ++t)
    for (std::size_t s = t + 1; s < steps; ++s)
      for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < rank; ++j)
          if (d(t, i, s, j) != 0.0) throw std::invalid_argument("solve_wu: D is not block lower-triangular");

  SolvedCoefficients out{Tensor3(steps, rank, dim), Tensor3(steps, rank, dim)};
  parallel_for(0, steps, policy, [&](std::size_t t) {
    for (std::size_t s = 0; s <= t; ++s)
      for (std::size_t i = 0; i < rank; ++i)
        for (std::size_t j = 0; j < rank; ++j) {
          const Scalar dij = d(t, i, s, j);
          auto aw = a.step(s).subspan(j * dim, dim);
          auto au = a_tilde.step(s).subspan(j * dim, dim);
          auto w = out.w.step(t).subspan(i * dim, dim);
          auto u = out.u.step(t).subspan(i * dim, dim);
          for (std::size_t m = 0; m < dim; ++m) {
            w[m] += dij * aw[m];
            u[m] += dij * au[m];
          }
        }
  });
  instrument::add_madds(static_cast<std::uint64_t>(steps) * (steps + 1) * rank * rank * dim);
  return out;
}

SolvedCoefficients tensorinv_coefficients(const ChunkInputs& inputs, const ExecPolicy& policy) {
  inputs.validate();
  const Gram4 d = invert_block_triangular(build_system(inputs.a, inputs.b), policy);
  return solve_wu(d, inputs.a, inputs.a_tilde, policy);
}

AffineFlow tensorinv_chunk_flow(const ChunkInputs& inputs, const ExecPolicy& policy) {
  return flow_from_coefficients(tensorinv_coefficients(inputs, policy), inputs.b);
}

}  // namespace parflow
