// SPDX-License-Identifier: Apache-2.0
//
// parflow: verify, benchmark and run the chunked linear-recurrence solvers.
//
// Exit codes: 0 success, 1 tolerance breach, 2 configuration error,
// 3 input/output error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "parflow/bench.hpp"
#include "parflow/pft1.hpp"
#include "parflow/recurrence.hpp"
#include "parflow/scan.hpp"

namespace {

using parflow::bench::BenchConfig;

constexpr int kExitBreach = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> steps;
  std::optional<std::size_t> rank;
  std::optional<std::size_t> dim;
  std::optional<std::size_t> chunk_len;
  std::vector<std::string> backends;
  std::optional<std::size_t> repeats;
  std::optional<double> scale;
  std::optional<double> tolerance;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> threads;

  // run only
  std::string input_a;
  std::string input_a_tilde;
  std::string input_b;
  std::string input_s0;
  std::string trajectory;
};

void add_common(CLI::App* cmd, Flags& f) {
  cmd->add_option("--config", f.config_file, "JSON config file; flags override its keys");
  cmd->add_option("--seed", f.seed, "PRNG seed");
  cmd->add_option("--L", f.steps, "Sequence length (repeat for a sweep)")->delimiter(',');
  cmd->add_option("--R", f.rank, "Rank of the drivers");
  cmd->add_option("--d", f.dim, "State dimension");
  cmd->add_option("--chunk-len", f.chunk_len, "Steps per chunk (0 = one chunk)");
  cmd->add_option("--backend", f.backends, "seq | tensorinv | sigdelta | expprod-euler (repeatable)");
  cmd->add_option("--repeats", f.repeats, "Timed repetitions per row");
  cmd->add_option("--scale", f.scale, "Input magnitude factor");
  cmd->add_option("--tolerance", f.tolerance, "Relative Frobenius bound");
  cmd->add_option("--out", f.out, "Output path (report or state)");
  cmd->add_option("--format", f.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  cmd->add_option("--threads", f.threads, "Worker threads inside a backend");
}

BenchConfig resolve(const Flags& f) {
  BenchConfig cfg;
  try {
    if (!f.config_file.empty()) {
      std::ifstream in(f.config_file);
      if (!in) throw ConfigError("cannot open config " + f.config_file);
      nlohmann::json doc;
      try {
        doc = nlohmann::json::parse(in);
      } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(f.config_file + ": " + e.what());
      }
      cfg = parflow::bench::config_from_json(doc);
    }
    if (f.seed) cfg.seed = *f.seed;
    if (!f.steps.empty()) cfg.steps = f.steps;
    if (f.rank) cfg.rank = *f.rank;
    if (f.dim) cfg.dim = *f.dim;
    if (f.chunk_len) cfg.chunk_len = *f.chunk_len;
    if (!f.backends.empty()) {
      cfg.backends.clear();
      for (const auto& name : f.backends) cfg.backends.push_back(parflow::parse_backend(name));
    }
    if (f.repeats) cfg.repeats = *f.repeats;
    if (f.scale) cfg.scale = *f.scale;
    if (f.tolerance) cfg.tolerance = *f.tolerance;
    if (f.out) cfg.output = *f.out;
    if (f.format) cfg.format = *f.format == "json" ? parflow::bench::ReportFormat::json
                                                   : parflow::bench::ReportFormat::csv;
    if (f.threads) cfg.threads = *f.threads;
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

void emit(const parflow::bench::BenchReport& report, const BenchConfig& cfg) {
  std::ostringstream text;
  if (cfg.format == parflow::bench::ReportFormat::json) {
    text << parflow::bench::to_json(report, cfg).dump(2) << '\n';
  } else {
    parflow::bench::write_csv(report, text);
  }
  if (cfg.output.empty()) {
    std::cout << text.str();
    return;
  }
  std::ofstream out(cfg.output, std::ios::trunc);
  if (!(out << text.str())) throw IoError("cannot write report to " + cfg.output);
}

int cmd_verify(const Flags& f) {
  BenchConfig cfg = resolve(f);
  try {
    cfg.validate(true);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto report = parflow::bench::verify(cfg);
  emit(report, cfg);
  if (!report.passed) {
    std::cerr << "verify: tolerance " << cfg.tolerance << " exceeded\n";
    return kExitBreach;
  }
  return 0;
}

int cmd_bench(const Flags& f) {
  BenchConfig cfg = resolve(f);
  try {
    cfg.validate(false);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const auto report = parflow::bench::bench(cfg);
  emit(report, cfg);
  return report.passed ? 0 : kExitBreach;
}

parflow::pft1::Blob load(const std::string& path) {
  try {
    return parflow::pft1::read_file(path);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
}

int cmd_run(const Flags& f) {
  BenchConfig cfg = resolve(f);
  if (cfg.output.empty()) throw ConfigError("run: --out is required");
  if (cfg.backends.size() != 1 && !f.backends.empty()) throw ConfigError("run: exactly one --backend expected");
  const parflow::Backend backend = f.backends.empty() ? parflow::Backend::seq : cfg.backends.front();

  parflow::bench::Problem problem;
  const bool from_files = !f.input_a.empty() || !f.input_a_tilde.empty() || !f.input_b.empty();
  if (from_files) {
    if (f.input_a.empty() || f.input_a_tilde.empty() || f.input_b.empty()) {
      throw ConfigError("run: --input-a, --input-atilde and --input-b go together");
    }
    try {
      auto a = parflow::pft1::to_tensor3(load(f.input_a));
      auto a_tilde = parflow::pft1::to_tensor3(load(f.input_a_tilde));
      auto b = parflow::pft1::to_tensor3(load(f.input_b));
      problem.inputs = {std::move(a), std::move(a_tilde), std::move(b)};
      problem.inputs.validate();
      problem.s0 = f.input_s0.empty() ? parflow::Matrix::identity(problem.inputs.dim())
                                      : parflow::pft1::to_matrix(load(f.input_s0));
    } catch (const IoError&) {
      throw;
    } catch (const std::exception& e) {
      throw IoError(std::string("run: ") + e.what());
    }
  } else {
    try {
      cfg.validate(true);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
    problem = parflow::bench::generate_inputs(cfg.seed, cfg.steps.front(), cfg.rank, cfg.dim, cfg.scale);
  }
  if (!problem.s0.square() || problem.s0.rows() != problem.inputs.dim()) {
    throw IoError("run: S0 must be d x d with d = " + std::to_string(problem.inputs.dim()));
  }

  const std::size_t steps = problem.inputs.steps();
  const std::size_t len = cfg.chunk_len == 0 ? std::max<std::size_t>(1, steps) : cfg.chunk_len;
  parflow::SolveOptions options;
  options.exec.threads = cfg.threads;
  options.boundary_states = !f.trajectory.empty();
  const auto result = parflow::solve_chunked(problem.s0, problem.inputs, len, backend, options);

  try {
    if (!f.trajectory.empty()) {
      const std::size_t d = problem.s0.rows();
      std::vector<double> values(problem.s0.values().begin(), problem.s0.values().end());
      for (const auto& s : result.boundary_states) values.insert(values.end(), s.values().begin(), s.values().end());
      const std::uint64_t dims[] = {result.boundary_states.size() + 1, d, d};
      parflow::pft1::write_file(f.trajectory, parflow::pft1::encode(dims, values));
    }
    parflow::pft1::write_file(cfg.output, parflow::pft1::encode(result.state));
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Chunked solvers for low-rank delta-rule recurrences"};
  app.require_subcommand(1);
  Flags flags;
  auto* verify = app.add_subcommand("verify", "Check every backend against the sequential recurrence");
  auto* bench = app.add_subcommand("bench", "Count multiply-adds, peak scalars and wall time per backend");
  auto* run = app.add_subcommand("run", "Compute the final state and write it as PFT1");
  auto* schema = app.add_subcommand("schema", "Print the JSON Schema of the json report");
  for (auto* cmd : {verify, bench, run}) add_common(cmd, flags);
  run->add_option("--input-a", flags.input_a, "PFT1 tensor A (L, R, d)");
  run->add_option("--input-atilde", flags.input_a_tilde, "PFT1 tensor Atilde (L, R, d)");
  run->add_option("--input-b", flags.input_b, "PFT1 tensor B (L, R, d)");
  run->add_option("--input-s0", flags.input_s0, "PFT1 initial state (d, d); identity when omitted");
  run->add_option("--trajectory", flags.trajectory, "Also write S0 and every chunk-end state (PFT1, 3-d)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*verify) return cmd_verify(flags);
    if (*bench) return cmd_bench(flags);
    if (*schema) {
      std::cout << parflow::bench::report_schema().dump(2) << '\n';
      return 0;
    }
    return cmd_run(flags);
  } catch (const ConfigError& e) {
    std::cerr << "parflow: " << e.what() << '\n';
    return kExitConfig;
  } catch (const IoError& e) {
    std::cerr << "parflow: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "parflow: " << e.what() << '\n';
    return kExitIo;
  }
}
