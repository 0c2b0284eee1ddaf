// SPDX-License-Identifier: Apache-2.0
#include "parflow/instrument.hpp"

#include <atomic>

namespace parflow::instrument {
namespace {

std::atomic<std::uint64_t> g_madds{0};
std::atomic<std::int64_t> g_live{0};
std::atomic<std::int64_t> g_peak{0};

void raise_peak(std::int64_t candidate) noexcept {
  std::int64_t seen = g_peak.load(std::memory_order_relaxed);
  while (candidate > seen &&
         !g_peak.compare_exchange_weak(seen, candidate, std::memory_order_relaxed)) {
  }
}

}  // namespace

void add_madds(std::uint64_t count) noexcept { g_madds.fetch_add(count, std::memory_order_relaxed); }
std::uint64_t madds() noexcept { return g_madds.load(std::memory_order_relaxed); }

std::int64_t live_scalars() noexcept { return g_live.load(std::memory_order_relaxed); }
std::int64_t peak_scalars() noexcept { return g_peak.load(std::memory_order_relaxed); }

void on_allocate(std::size_t count) noexcept {
  const auto now = g_live.fetch_add(static_cast<std::int64_t>(count), std::memory_order_relaxed) +
                   static_cast<std::int64_t>(count);
  raise_peak(now);
}

void on_deallocate(std::size_t count) noexcept {
  g_live.fetch_sub(static_cast<std::int64_t>(count), std::memory_order_relaxed);
}

Scope::Scope() noexcept : madds_at_open_(madds()), live_at_open_(live_scalars()) {
  g_peak.store(live_at_open_, std::memory_order_relaxed);
}

Measurement Scope::read() const noexcept {
  return {madds() - madds_at_open_, peak_scalars() - live_at_open_};
}

}  // namespace parflow::instrument
