// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "parflow/scan.hpp"
#include "parflow/tensor.hpp"

namespace parflow::bench {

/// Counter-based generator: draw i is splitmix64(key + i * golden) with
/// key = splitmix64(seed). Reproducible on every platform.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) noexcept;
  std::uint64_t next_u64() noexcept;
  /// Uniform in (0, 1), 53 bits.
  double uniform() noexcept;
  /// Box-Muller, cosine branch; consumes two draws.
  double normal() noexcept;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

struct Problem {
  ChunkInputs inputs;
  Matrix s0;
};

/// Draws A, then Ã, then B (row-major), then the S0 perturbation. Driver
/// entries are N(0,1) * scale / sqrt(R d); S0 = Id + N(0,1) * scale / sqrt(d).
Problem generate_inputs(std::uint64_t seed, std::size_t steps, std::size_t rank, std::size_t dim, double scale);

enum class ReportFormat { csv, json };

struct BenchConfig {
  std::uint64_t seed = 1;
  std::vector<std::size_t> steps{64};
  std::size_t rank = 2;
  std::size_t dim = 16;
  /// 0 selects a single chunk spanning all steps.
  std::size_t chunk_len = 0;
  std::vector<Backend> backends{Backend::seq, Backend::tensorinv, Backend::sigdelta, Backend::expprod_euler};
  std::size_t repeats = 1;
  double scale = 1.0;
  double tolerance = 1e-9;
  std::string output;
  ReportFormat format = ReportFormat::csv;
  std::size_t threads = 1;

  /// Throws std::invalid_argument on out-of-range values.
  void validate(bool allow_empty_steps) const;
};

/// Reads keys matching the CLI flags: seed, L (number or list), R, d,
/// chunk_len, backends, repeats, scale, tolerance, out, format, threads.
/// Unknown keys are rejected.
BenchConfig config_from_json(const nlohmann::json& doc, BenchConfig base = {});

struct BenchRow {
  std::string backend;
  std::size_t steps = 0;
  std::size_t rank = 0;
  std::size_t dim = 0;
  std::size_t chunk_len = 0;
  std::size_t repeats = 0;
  std::uint64_t time_min_ns = 0;
  std::uint64_t time_median_ns = 0;
  std::uint64_t madds = 0;
  std::int64_t peak_scalars = 0;
  std::optional<double> max_rel_err;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  /// Every row with an error column is within tolerance.
  bool passed = true;
};

inline constexpr const char* kCsvHeader =
    "backend,L,R,d,chunk_len,repeats,time_min_ns,time_median_ns,madds,peak_scalars,max_rel_err";

void write_csv(const BenchReport& report, std::ostream& out);
nlohmann::json to_json(const BenchReport& report, const BenchConfig& config);
/// JSON Schema (draft 2020-12) for to_json output.
nlohmann::json report_schema();

/// Runs every backend (seq always included) against the sequential oracle.
BenchReport verify(const BenchConfig& config);
/// Counters from the first run; wall time over `repeats` runs in total.
BenchReport bench(const BenchConfig& config);

}  // namespace parflow::bench
