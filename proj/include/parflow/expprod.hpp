// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

#include "parflow/affine_flow.hpp"
#include "parflow/tensor.hpp"

namespace parflow {

/// phi1(x) = (e^x - 1) / x with phi1(0) = 1.
Scalar phi1(Scalar x) noexcept;

/// Matrix phi1(Z) = sum_{j>=0} Z^j / (j+1)!, by scaling, a Taylor core and
/// the doubling identity phi1(2Z) = (e^Z + Id) phi1(Z) / 2.
Matrix phi1(const Matrix& z);

/// exp(a b^T) = Id + phi1(<b, a>) a b^T.
Matrix exp_rank1(std::span<const Scalar> a, std::span<const Scalar> b);

/// exp(A B^T) = Id + A phi1(B^T A) B^T for d x R factors. Only an R x R
/// matrix function is evaluated, and singular B^T A needs no special case.
Matrix exp_lowrank(const Matrix& a, const Matrix& b);

/// Increment A_k B_k^T with both factors d x R.
struct Increment {
  Matrix a;
  Matrix b;
};

/// Increments A_k B_k^T of every step, in mathematical d x R orientation.
std::vector<Increment> increments_from(const Tensor3& a, const Tensor3& b);

enum class FlowMode { exact, euler };
enum class ProductOrder { sequential, tree };

/// Ordered product exp(dw_0) exp(dw_1) ... exp(dw_{n-1}) of d x d factors; the
/// empty product is Id_d. Euler mode replaces each factor by Id + dw. Tree order multiplies
/// neighbours pairwise, which may differ from sequential order by rounding.
Matrix flow_product(std::size_t dim, std::span<const Increment> increments, FlowMode mode,
                    ProductOrder order = ProductOrder::sequential);

/// Q = sum_k Ã_k B_k^T (Id + A_{k+1} B_{k+1}^T) ... (Id + A_{L-1} B_{L-1}^T),
/// the inhomogeneous term matching the Euler propagator.
Matrix euler_forcing(const Tensor3& a, const Tensor3& a_tilde, const Tensor3& b);

/// (P, Q) of a chunk with every factor taken in Euler form. P is the Euler
/// flow_product of the chunk's increments; the pair reproduces the recurrence.
AffineFlow euler_flow(const ChunkInputs& inputs);

}  // namespace parflow
