// SPDX-License-Identifier: Apache-2.0
#include "parflow/scan.hpp"

#include <stdexcept>

#include "parflow/expprod.hpp"
#include "parflow/recurrence.hpp"
#include "parflow/sigdelta.hpp"
#include "parflow/tensorinv.hpp"

namespace parflow {

ChunkSpec partition(std::size_t steps, std::size_t chunk_len) {
  if (chunk_len < 1) throw std::invalid_argument("partition: chunk_len must be >= 1");
  ChunkSpec spec;
  for (std::size_t start = 0; start < steps; start += chunk_len) {
    spec.ranges.emplace_back(start, std::min(steps, start + chunk_len));
  }
  return spec;
}

AffineFlow compose(const AffineFlow& first, const AffineFlow& second) {
  if (first.dim() != second.dim()) throw DimensionError("compose: flows act on different d");
  return {matmul(first.p, second.p), add(matmul(first.q, second.p), second.q)};
}

std::vector<AffineFlow> scan(std::span<const AffineFlow> flows, ScanOrder order, const ExecPolicy& policy) {
  if (flows.empty()) throw std::invalid_argument("scan: empty flow list");
  const std::size_t d = flows.front().dim();
  for (const auto& f : flows)
    if (f.dim() != d || f.q.rows() != d) throw DimensionError("scan: flows act on different d");

  std::vector<AffineFlow> out;
  out.reserve(flows.size());
  if (order == ScanOrder::sequential) {
    out.push_back(flows.front());
    for (std::size_t i = 1; i < flows.size(); ++i) out.push_back(compose(out.back(), flows[i]));
    return out;
  }

  std::size_t n = 1;
  while (n < flows.size()) n *= 2;
  std::vector<AffineFlow> tree(flows.begin(), flows.end());
  tree.resize(n, AffineFlow::identity(d));

  for (std::size_t stride = 1; stride < n; stride *= 2) {
    parallel_for(0, n / (2 * stride), policy, [&](std::size_t j) {
      const std::size_t left = j * 2 * stride + stride - 1;
      const std::size_t right = left + stride;
      tree[right] = compose(tree[left], tree[right]);
    });
  }
  tree[n - 1] = AffineFlow::identity(d);
  for (std::size_t stride = n / 2; stride >= 1; stride /= 2) {
    parallel_for(0, n / (2 * stride), policy, [&](std::size_t j) {
      const std::size_t left = j * 2 * stride + stride - 1;
      const std::size_t right = left + stride;
      AffineFlow left_sum = std::move(tree[left]);
      tree[left] = tree[right];
      tree[right] = compose(tree[right], left_sum);
    });
  }
  // tree now holds exclusive prefixes
  for (std::size_t i = 0; i < flows.size(); ++i) out.push_back(compose(tree[i], flows[i]));
  return out;
}

Backend parse_backend(std::string_view name) {
  if (name == "seq") return Backend::seq;
  if (name == "tensorinv") return Backend::tensorinv;
  if (name == "sigdelta") return Backend::sigdelta;
  if (name == "expprod-euler") return Backend::expprod_euler;
  throw std::invalid_argument("unknown backend '" + std::string(name) + "'");
}

std::string_view backend_name(Backend backend) noexcept {
  switch (backend) {
    case Backend::seq: return "seq";
    case Backend::tensorinv: return "tensorinv";
    case Backend::sigdelta: return "sigdelta";
    case Backend::expprod_euler: return "expprod-euler";
  }
  return "?";
}

AffineFlow chunk_flow(const ChunkInputs& inputs, Backend backend, const ExecPolicy& policy) {
  inputs.validate();
  switch (backend) {
    case Backend::seq: {
      AffineFlow flow = AffineFlow::identity(inputs.dim());
      const Tensor3 zero(1, inputs.rank(), inputs.dim());
      for (std::size_t k = 0; k < inputs.steps(); ++k) {
        flow.p = step(flow.p, inputs.a.step(k), zero.step(0), inputs.b.step(k), inputs.rank());
        flow.q = step(flow.q, inputs.a.step(k), inputs.a_tilde.step(k), inputs.b.step(k), inputs.rank());
      }
      return flow;
    }
    case Backend::tensorinv: return tensorinv_chunk_flow(inputs, policy);
    case Backend::sigdelta: return sigdelta_chunk_flow(inputs, {policy, false});
    case Backend::expprod_euler: return euler_flow(inputs);
  }
  throw std::invalid_argument("chunk_flow: unknown backend");
}

ChunkedResult solve_chunked(const Matrix& s0, const ChunkInputs& inputs, std::size_t chunk_len, Backend backend,
                            const SolveOptions& options) {
  inputs.validate();
  if (!s0.square() || s0.rows() != inputs.dim()) throw DimensionError("solve_chunked: S0 must be d x d");
  const ChunkSpec spec = partition(inputs.steps(), chunk_len);
  ChunkedResult result{s0, {}};
  if (spec.ranges.empty()) return result;

  // Chunks never read each other's steps; each worker owns one slot.
  std::vector<AffineFlow> flows(spec.ranges.size());
  const ExecPolicy inner{options.exec.threads > 1 && spec.ranges.size() == 1 ? options.exec.threads : 1};
  parallel_for(0, spec.ranges.size(), options.exec, [&](std::size_t c) {
    const auto [begin, end] = spec.ranges[c];
    flows[c] = chunk_flow(inputs.steps_range(begin, end), backend, inner);
  });

  const auto prefixes = scan(flows, options.scan_order, options.exec);
  result.state = prefixes.back().apply(s0);
  if (options.boundary_states) {
    result.boundary_states.reserve(prefixes.size());
    for (const auto& prefix : prefixes) result.boundary_states.push_back(prefix.apply(s0));
  }
  return result;
}

}  // namespace parflow
