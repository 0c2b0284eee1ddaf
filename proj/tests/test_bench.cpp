// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "parflow/bench.hpp"
#include "parflow/pft1.hpp"

using namespace parflow;
using namespace parflow::bench;

#ifndef PARFLOW_GOLDEN_DIR
#error "PARFLOW_GOLDEN_DIR must point at tests/golden"
#endif

TEST_CASE("splitmix64 reference outputs") {
  // first three outputs of the reference generator started at state 0
  CHECK(splitmix64(0) == 0xE220A8397B1DCDAFull);
  CHECK(splitmix64(0x9E3779B97F4A7C15ull) == 0x6E789E6AA1B965F4ull);
  CHECK(splitmix64(2 * 0x9E3779B97F4A7C15ull) == 0x06C45D188009454Full);
}

TEST_CASE("CounterRng") {
  CounterRng x(7), y(7), z(8);
  for (int i = 0; i < 10; ++i) {
    const auto v = x.next_u64();
    CHECK(v == y.next_u64());
    CHECK(v != z.next_u64());
  }
  CounterRng u(3);
  double sum = 0.0, sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double g = u.normal();
    sum += g;
    sq += g * g;
  }
  CHECK(std::abs(sum / n) < 0.05);
  CHECK(std::abs(sq / n - 1.0) < 0.05);
  for (int i = 0; i < 1000; ++i) {
    const double r = u.uniform();
    CHECK(r > 0.0);
    CHECK(r < 1.0);
  }
}

TEST_CASE("generate_inputs") {
  SUBCASE("deterministic in the seed") {
    const auto p1 = generate_inputs(11, 5, 2, 3, 1.0);
    const auto p2 = generate_inputs(11, 5, 2, 3, 1.0);
    const auto p3 = generate_inputs(12, 5, 2, 3, 1.0);
    CHECK(p1.inputs.a == p2.inputs.a);
    CHECK(p1.inputs.b == p2.inputs.b);
    CHECK(p1.s0 == p2.s0);
    CHECK_FALSE(p1.inputs.a == p3.inputs.a);
  }
  SUBCASE("scale 0 gives zero drivers and S0 = Id") {
    const auto p = generate_inputs(5, 4, 2, 3, 0.0);
    for (const auto* t : {&p.inputs.a, &p.inputs.a_tilde, &p.inputs.b})
      for (double v : t->values()) CHECK(v == 0.0);
    CHECK(p.s0 == Matrix::identity(3));
  }
  SUBCASE("draw order A, Ã, B, S0") {
    const auto p = generate_inputs(9, 2, 1, 2, 1.0);
    CounterRng rng(9);
    const double sd = 1.0 / std::sqrt(2.0);
    for (const auto* t : {&p.inputs.a, &p.inputs.a_tilde, &p.inputs.b})
      for (double v : t->values()) CHECK(v == sd * rng.normal());
    CHECK(p.s0(0, 0) == 1.0 + sd * rng.normal());
  }
  SUBCASE("frozen golden file") {
    const auto p = generate_inputs(1, 2, 1, 2, 1.0);
    std::vector<double> values;
    for (const auto* t : {&p.inputs.a, &p.inputs.a_tilde, &p.inputs.b}) values.insert(values.end(), t->values().begin(), t->values().end());
    values.insert(values.end(), p.s0.values().begin(), p.s0.values().end());
    const std::uint64_t dims[] = {values.size()};
    const auto bytes = pft1::encode(dims, values);
    std::ifstream in(std::string(PARFLOW_GOLDEN_DIR) + "/generate_seed1_L2_R1_d2.pft1", std::ios::binary);
    REQUIRE(in);
    const std::vector<char> golden((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    REQUIRE(golden.size() == bytes.size());
    CHECK(std::equal(golden.begin(), golden.end(), reinterpret_cast<const char*>(bytes.data())));
  }
  CHECK_THROWS_AS(generate_inputs(1, 2, 0, 2, 1.0), std::invalid_argument);
}

TEST_CASE("config_from_json") {
  const auto cfg = config_from_json(nlohmann::json::parse(R"({
    "seed": 42, "L": [16, 32], "R": 3, "d": 8, "chunk_len": 4,
    "backends": ["tensorinv", "sigdelta"], "repeats": 2, "scale": 0.5,
    "tolerance": 1e-8, "out": "r.json", "format": "json", "threads": 2})"));
  CHECK(cfg.seed == 42);
  CHECK(cfg.steps == std::vector<std::size_t>{16, 32});
  CHECK(cfg.rank == 3);
  CHECK(cfg.dim == 8);
  CHECK(cfg.chunk_len == 4);
  CHECK(cfg.backends == std::vector<Backend>{Backend::tensorinv, Backend::sigdelta});
  CHECK(cfg.repeats == 2);
  CHECK(cfg.scale == 0.5);
  CHECK(cfg.tolerance == 1e-8);
  CHECK(cfg.output == "r.json");
  CHECK(cfg.format == ReportFormat::json);
  CHECK(cfg.threads == 2);

  CHECK(config_from_json(nlohmann::json::parse(R"({"L": 7})")).steps == std::vector<std::size_t>{7});
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"Lx": 7})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"R": "two"})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"format": "xml"})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse(R"({"backends": ["gpu"]})")), std::invalid_argument);
  CHECK_THROWS_AS(config_from_json(nlohmann::json::parse("[1]")), std::invalid_argument);
}

TEST_CASE("config validation") {
  BenchConfig cfg;
  CHECK_NOTHROW(cfg.validate(false));
  cfg.steps = {0};
  CHECK_NOTHROW(cfg.validate(true));
  CHECK_THROWS_AS(cfg.validate(false), std::invalid_argument);
  cfg = {};
  cfg.rank = 0;
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);
  cfg = {};
  cfg.tolerance = 0.0;
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);
  cfg = {};
  cfg.backends.clear();
  CHECK_THROWS_AS(cfg.validate(true), std::invalid_argument);
}

TEST_CASE("verify report") {
  BenchConfig cfg;
  cfg.steps = {0, 12};
  cfg.rank = 2;
  cfg.dim = 4;
  cfg.chunk_len = 5;
  cfg.backends = {Backend::tensorinv, Backend::sigdelta};
  const auto report = verify(cfg);
  CHECK(report.passed);
  REQUIRE(report.rows.size() == 6);
  CHECK(report.rows[0].backend == "seq");
  for (const auto& row : report.rows) {
    REQUIRE(row.max_rel_err.has_value());
    CHECK(*row.max_rel_err <= 1e-9);
  }

  std::ostringstream csv;
  write_csv(report, csv);
  std::istringstream lines(csv.str());
  std::string header;
  std::getline(lines, header);
  CHECK(header == kCsvHeader);
  std::size_t count = 0;
  for (std::string line; std::getline(lines, line); ++count) CHECK(std::count(line.begin(), line.end(), ',') == 10);
  CHECK(count == 6);

  cfg.tolerance = 1e-300;
  cfg.steps = {40};
  CHECK_FALSE(verify(cfg).passed);
}

TEST_CASE("identical configs give identical error and counter columns") {
  BenchConfig cfg;
  cfg.steps = {24};
  cfg.rank = 2;
  cfg.dim = 5;
  cfg.chunk_len = 7;
  const auto r1 = verify(cfg);
  const auto r2 = verify(cfg);
  REQUIRE(r1.rows.size() == r2.rows.size());
  for (std::size_t i = 0; i < r1.rows.size(); ++i) {
    CHECK(r1.rows[i].max_rel_err == r2.rows[i].max_rel_err);
    CHECK(r1.rows[i].madds == r2.rows[i].madds);
    CHECK(r1.rows[i].peak_scalars == r2.rows[i].peak_scalars);
  }
}

TEST_CASE("bench report and json") {
  BenchConfig cfg;
  cfg.steps = {8, 16};
  cfg.dim = 4;
  cfg.repeats = 3;
  cfg.backends = {Backend::tensorinv};
  const auto report = parflow::bench::bench(cfg);
  REQUIRE(report.rows.size() == 2);
  for (const auto& row : report.rows) {
    CHECK_FALSE(row.max_rel_err.has_value());
    CHECK(row.repeats == 3);
    CHECK(row.time_min_ns <= row.time_median_ns);
    CHECK(row.madds > 0);
    // the dense Gram tensor alone holds L^2 R^2 scalars
    CHECK(row.peak_scalars >= static_cast<std::int64_t>(row.steps * row.steps * row.rank * row.rank));
  }
  CHECK(report.rows[1].madds > report.rows[0].madds);

  const auto doc = to_json(report, cfg);
  const auto schema = report_schema();
  for (const auto& key : schema["required"]) CHECK(doc.contains(key.get<std::string>()));
  REQUIRE(doc["rows"].size() == 2);
  for (const auto& row : doc["rows"]) {
    CHECK(row.size() == schema["properties"]["rows"]["items"]["required"].size());
    CHECK(row["max_rel_err"].is_null());
    CHECK(row["backend"] == "tensorinv");
  }
  cfg.steps = {0};
  CHECK_THROWS_AS(parflow::bench::bench(cfg), std::invalid_argument);
}
