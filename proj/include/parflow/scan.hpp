// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "parflow/affine_flow.hpp"
#include "parflow/parallel.hpp"
#include "parflow/tensor.hpp"

namespace parflow {

/// Half-open step ranges [start, end) covering [0, L) in order.
struct ChunkSpec {
  std::vector<std::pair<std::size_t, std::size_t>> ranges;
};

/// ceil(L / chunk_len) chunks, all of length chunk_len except maybe the last.
/// Throws std::invalid_argument when chunk_len < 1.
ChunkSpec partition(std::size_t steps, std::size_t chunk_len);

/// first then second: (P1 P2, Q1 P2 + Q2).
AffineFlow compose(const AffineFlow& first, const AffineFlow& second);

enum class ScanOrder {
  sequential,
  /// Blelloch up-sweep / down-sweep over a fixed tree. The combination tree
  /// depends only on the input length, so results are reproducible bit for
  /// bit for any thread count.
  tree,
};

/// Inclusive prefixes: out[i] = flows[0] then ... then flows[i].
/// Throws std::invalid_argument on empty input, DimensionError on mixed d.
std::vector<AffineFlow> scan(std::span<const AffineFlow> flows, ScanOrder order = ScanOrder::sequential,
                             const ExecPolicy& policy = {});

enum class Backend { seq, tensorinv, sigdelta, expprod_euler };

/// "seq", "tensorinv", "sigdelta", "expprod-euler". Throws std::invalid_argument.
Backend parse_backend(std::string_view name);
std::string_view backend_name(Backend backend) noexcept;

/// Affine flow of one chunk through the chosen backend.
AffineFlow chunk_flow(const ChunkInputs& inputs, Backend backend, const ExecPolicy& policy = {});

struct SolveOptions {
  ExecPolicy exec;
  ScanOrder scan_order = ScanOrder::tree;
  bool boundary_states = false;
};

struct ChunkedResult {
  Matrix state;
  /// State at the end of every chunk, when requested.
  std::vector<Matrix> boundary_states;
};

/// Chunk, compute every chunk's flow independently, scan, apply to S0.
/// Throws std::invalid_argument when chunk_len < 1.
ChunkedResult solve_chunked(const Matrix& s0, const ChunkInputs& inputs, std::size_t chunk_len,
                            Backend backend, const SolveOptions& options = {});

}  // namespace parflow
