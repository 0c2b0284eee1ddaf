// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace parflow {

/// Intra-call parallelism knob. threads <= 1 runs inline on the caller.
struct ExecPolicy {
  std::size_t threads = 1;
};

/// Runs body(i) for i in [begin, end) over a static partition.
/// Each index is visited by exactly one thread, so any body that writes
/// disjoint storage per index gives bitwise-identical results for every
/// thread count.
template <class Body>
void parallel_for(std::size_t begin, std::size_t end, const ExecPolicy& policy, Body&& body) {
  if (end <= begin) return;
  const std::size_t n = end - begin;
  const std::size_t workers = std::min(policy.threads, n);
  if (workers <= 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  std::vector<std::jthread> pool;
  pool.reserve(workers - 1);
  const std::size_t per = (n + workers - 1) / workers;
  for (std::size_t w = 1; w < workers; ++w) {
    const std::size_t lo = begin + w * per;
    const std::size_t hi = std::min(end, lo + per);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (std::size_t i = begin; i < std::min(end, begin + per); ++i) body(i);
}

}  // namespace parflow
