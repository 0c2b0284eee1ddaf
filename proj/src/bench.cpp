// SPDX-License-Identifier: Apache-2.0
#include "parflow/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "parflow/recurrence.hpp"

namespace parflow::bench {

std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

CounterRng::CounterRng(std::uint64_t seed) noexcept : key_(splitmix64(seed)) {}

std::uint64_t CounterRng::next_u64() noexcept { return splitmix64(key_ + (counter_++) * 0x9E3779B97F4A7C15ull); }

double CounterRng::uniform() noexcept {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

double CounterRng::normal() noexcept {
  const double u1 = uniform();
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Problem generate_inputs(std::uint64_t seed, std::size_t steps, std::size_t rank, std::size_t dim, double scale) {
  if (rank == 0 || dim == 0) throw std::invalid_argument("generate_inputs: R and d must be >= 1");
  CounterRng rng(seed);
  const double driver_sd = scale / std::sqrt(static_cast<double>(rank * dim));
  Problem p{{Tensor3(steps, rank, dim), Tensor3(steps, rank, dim), Tensor3(steps, rank, dim)}, Matrix::identity(dim)};
  for (Tensor3* t : {&p.inputs.a, &p.inputs.a_tilde, &p.inputs.b})
    for (auto& v : t->values()) v = driver_sd * rng.normal();
  const double state_sd = scale / std::sqrt(static_cast<double>(dim));
  for (auto& v : p.s0.values()) v += state_sd * rng.normal();
  return p;
}

void BenchConfig::validate(bool allow_empty_steps) const {
  if (steps.empty()) throw std::invalid_argument("config: at least one L is required");
  for (auto l : steps)
    if (l == 0 && !allow_empty_steps) throw std::invalid_argument("config: L must be >= 1 for bench");
  if (rank < 1 || dim < 1) throw std::invalid_argument("config: R and d must be >= 1");
  if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
  if (!(tolerance > 0.0)) throw std::invalid_argument("config: tolerance must be > 0");
  if (!std::isfinite(scale)) throw std::invalid_argument("config: scale must be finite");
  if (backends.empty()) throw std::invalid_argument("config: no backends selected");
  if (threads < 1) throw std::invalid_argument("config: threads must be >= 1");
}

BenchConfig config_from_json(const nlohmann::json& doc, BenchConfig base) {
  if (!doc.is_object()) throw std::invalid_argument("config: top level must be an object");
  for (const auto& [key, value] : doc.items()) {
    try {
      if (key == "seed") {
        base.seed = value.get<std::uint64_t>();
      } else if (key == "L") {
        base.steps = value.is_array() ? value.get<std::vector<std::size_t>>()
                                      : std::vector<std::size_t>{value.get<std::size_t>()};
      } else if (key == "R") {
        base.rank = value.get<std::size_t>();
      } else if (key == "d") {
        base.dim = value.get<std::size_t>();
      } else if (key == "chunk_len") {
        base.chunk_len = value.get<std::size_t>();
      } else if (key == "backends") {
        base.backends.clear();
        for (const auto& name : value) base.backends.push_back(parse_backend(name.get<std::string>()));
      } else if (key == "repeats") {
        base.repeats = value.get<std::size_t>();
      } else if (key == "scale") {
        base.scale = value.get<double>();
      } else if (key == "tolerance") {
        base.tolerance = value.get<double>();
      } else if (key == "out") {
        base.output = value.get<std::string>();
      } else if (key == "format") {
        const auto f = value.get<std::string>();
        if (f != "csv" && f != "json") throw std::invalid_argument("format must be csv or json");
        base.format = f == "csv" ? ReportFormat::csv : ReportFormat::json;
      } else if (key == "threads") {
        base.threads = value.get<std::size_t>();
      } else {
        throw std::invalid_argument("unknown key");
      }
    } catch (const nlohmann::json::exception& e) {
      throw std::invalid_argument("config: bad value for '" + key + "': " + e.what());
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config: '" + key + "': " + e.what());
    }
  }
  return base;
}

void write_csv(const BenchReport& report, std::ostream& out) {
  out << kCsvHeader << '\n';
  for (const auto& r : report.rows) {
    out << r.backend << ',' << r.steps << ',' << r.rank << ',' << r.dim << ',' << r.chunk_len << ','
        << r.repeats << ',' << r.time_min_ns << ',' << r.time_median_ns << ',' << r.madds << ','
        << r.peak_scalars << ',';
    if (r.max_rel_err) {
      std::ostringstream e;
      e.precision(6);
      e << std::scientific << *r.max_rel_err;
      out << e.str();
    }
    out << '\n';
  }
}

nlohmann::json to_json(const BenchReport& report, const BenchConfig& config) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"backend", r.backend},
                    {"L", r.steps},
                    {"R", r.rank},
                    {"d", r.dim},
                    {"chunk_len", r.chunk_len},
                    {"repeats", r.repeats},
                    {"time_min_ns", r.time_min_ns},
                    {"time_median_ns", r.time_median_ns},
                    {"madds", r.madds},
                    {"peak_scalars", r.peak_scalars},
                    {"max_rel_err", r.max_rel_err ? nlohmann::json(*r.max_rel_err) : nlohmann::json(nullptr)}});
  }
  return {{"seed", config.seed}, {"tolerance", config.tolerance}, {"scale", config.scale},
          {"passed", report.passed}, {"rows", rows}};
}

nlohmann::json report_schema() {
  const nlohmann::json count = {{"type", "integer"}, {"minimum", 0}};
  nlohmann::json row = {
      {"type", "object"},
      {"additionalProperties", false},
      {"required", {"backend", "L", "R", "d", "chunk_len", "repeats", "time_min_ns", "time_median_ns", "madds",
                    "peak_scalars", "max_rel_err"}},
      {"properties",
       {{"backend", {{"enum", {"seq", "tensorinv", "sigdelta", "expprod-euler"}}}},
        {"L", count},
        {"R", count},
        {"d", count},
        {"chunk_len", count},
        {"repeats", count},
        {"time_min_ns", count},
        {"time_median_ns", count},
        {"madds", count},
        {"peak_scalars", {{"type", "integer"}}},
        {"max_rel_err", {{"type", {"number", "null"}}}}}}};
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"type", "object"},
          {"additionalProperties", false},
          {"required", {"seed", "tolerance", "scale", "passed", "rows"}},
          {"properties",
           {{"seed", count},
            {"tolerance", {{"type", "number"}}},
            {"scale", {{"type", "number"}}},
            {"passed", {{"type", "boolean"}}},
            {"rows", {{"type", "array"}, {"items", row}}}}}};
}

namespace {

using Clock = std::chrono::steady_clock;

struct Timed {
  Matrix state;
  instrument::Measurement counters;
  std::uint64_t ns = 0;
};

Timed run_backend(const Problem& p, std::size_t chunk_len, Backend backend, std::size_t threads) {
  const std::size_t len = chunk_len == 0 ? std::max<std::size_t>(1, p.inputs.steps()) : chunk_len;
  instrument::Scope scope;
  const auto start = Clock::now();
  Matrix state = backend == Backend::seq ? run(p.s0, p.inputs).state
                                         : solve_chunked(p.s0, p.inputs, len, backend, {{threads}}).state;
  const auto stop = Clock::now();
  return {std::move(state), scope.read(),
          static_cast<std::uint64_t>(std::chrono::duration_cast<std::chrono::nanoseconds>(stop - start).count())};
}

BenchReport measure(const BenchConfig& config, bool force_seq, std::size_t timed_repeats) {
  BenchReport report;
  std::vector<Backend> backends = config.backends;
  const bool has_seq = std::find(backends.begin(), backends.end(), Backend::seq) != backends.end();
  if (force_seq && !has_seq) backends.insert(backends.begin(), Backend::seq);
  const bool with_errors = force_seq || has_seq;

  for (const std::size_t steps : config.steps) {
    const Problem p = generate_inputs(config.seed, steps, config.rank, config.dim, config.scale);
    const Matrix oracle = with_errors ? run(p.s0, p.inputs).state : Matrix{};
    for (const Backend backend : backends) {
      Timed first = run_backend(p, config.chunk_len, backend, config.threads);
      std::vector<std::uint64_t> times{first.ns};
      for (std::size_t r = 1; r < timed_repeats; ++r) {
        times.push_back(run_backend(p, config.chunk_len, backend, config.threads).ns);
      }
      std::sort(times.begin(), times.end());
      BenchRow row;
      row.backend = std::string(backend_name(backend));
      row.steps = steps;
      row.rank = config.rank;
      row.dim = config.dim;
      row.chunk_len = config.chunk_len == 0 ? steps : config.chunk_len;
      row.repeats = timed_repeats;
      row.time_min_ns = times.front();
      row.time_median_ns = times[times.size() / 2];
      row.madds = first.counters.madds;
      row.peak_scalars = first.counters.peak_scalars;
      if (with_errors) {
        const double err = relative_frobenius_error(first.state, oracle);
        row.max_rel_err = err;
        if (!(err <= config.tolerance)) report.passed = false;
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

}  // namespace

BenchReport verify(const BenchConfig& config) {
  config.validate(true);
  return measure(config, true, 1);
}

BenchReport bench(const BenchConfig& config) {
  config.validate(false);
  return measure(config, false, config.repeats);
}

}  // namespace parflow::bench
