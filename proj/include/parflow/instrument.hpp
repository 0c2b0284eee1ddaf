// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>

namespace parflow::instrument {

/// Process-wide operation and memory counters.
///
/// Every kernel in the library reports the exact number of scalar
/// multiply-adds it performs through add_madds(). Tensor and matrix storage
/// goes through TrackedAllocator, so the number of live scalars (and its
/// high-water mark) is known at any time. Counters are relaxed atomics and
/// may be read from any thread.
void add_madds(std::uint64_t count) noexcept;
std::uint64_t madds() noexcept;

std::int64_t live_scalars() noexcept;
std::int64_t peak_scalars() noexcept;

void on_allocate(std::size_t count) noexcept;
void on_deallocate(std::size_t count) noexcept;

/// Counter values accumulated since a Scope was opened.
struct Measurement {
  std::uint64_t madds = 0;
  /// Peak live scalars above the level that was live when the scope opened.
  std::int64_t peak_scalars = 0;
};

/// Opens a measurement window. Resets the peak tracker to the current live
/// count; nested scopes are not supported.
class Scope {
 public:
  Scope() noexcept;
  Scope(const Scope&) = delete;
  Scope& operator=(const Scope&) = delete;

  Measurement read() const noexcept;

 private:
  std::uint64_t madds_at_open_;
  std::int64_t live_at_open_;
};

template <class T>
struct TrackedAllocator {
  using value_type = T;

  TrackedAllocator() noexcept = default;
  template <class U>
  TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    T* p = std::allocator<T>{}.allocate(n);
    on_allocate(n);
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    on_deallocate(n);
    std::allocator<T>{}.deallocate(p, n);
  }

  template <class U>
  bool operator==(const TrackedAllocator<U>&) const noexcept {
    return true;
  }
};

}  // namespace parflow::instrument
