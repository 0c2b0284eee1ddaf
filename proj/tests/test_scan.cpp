// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include "parflow/recurrence.hpp"
#include "parflow/scan.hpp"
#include "parflow/sigdelta.hpp"
#include "parflow/tensorinv.hpp"
#include "support/oracles.hpp"

using namespace parflow;

namespace {

AffineFlow random_flow(oracle::Gen& gen, std::size_t d) {
  // near-identity propagators keep long products well scaled
  return {add(Matrix::identity(d), gen.matrix(d, d, 0.3 / std::sqrt(static_cast<double>(d)))), gen.matrix(d, d)};
}

double flow_gap(const AffineFlow& x, const AffineFlow& y) {
  return std::max(relative_frobenius_error(x.p, y.p), relative_frobenius_error(x.q, y.q));
}

}  // namespace

TEST_CASE("partition") {
  using R = std::vector<std::pair<std::size_t, std::size_t>>;
  CHECK(partition(10, 4).ranges == R{{0, 4}, {4, 8}, {8, 10}});
  CHECK(partition(10, 10).ranges == R{{0, 10}});
  CHECK(partition(3, 1).ranges == R{{0, 1}, {1, 2}, {2, 3}});
  CHECK(partition(0, 5).ranges.empty());
  CHECK(partition(4, 100).ranges == R{{0, 4}});
  CHECK_THROWS_AS(partition(10, 0), std::invalid_argument);
}

TEST_CASE("compose is a monoid operation") {
  oracle::Gen gen(71);
  const auto f = random_flow(gen, 4);
  const auto id = AffineFlow::identity(4);
  CHECK(compose(f, id).p == f.p);
  CHECK(compose(f, id).q == f.q);
  CHECK(compose(id, f).p == f.p);
  CHECK(compose(id, f).q == f.q);

  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t d = gen.pick(1, 8);
    const auto f1 = random_flow(gen, d);
    const auto f2 = random_flow(gen, d);
    const auto f3 = random_flow(gen, d);
    CHECK(flow_gap(compose(compose(f1, f2), f3), compose(f1, compose(f2, f3))) <= 1e-12);
  }

  // composition applies first then second
  const auto f2 = random_flow(gen, 4);
  const auto s = gen.matrix(4, 4);
  CHECK(relative_frobenius_error(compose(f, f2).apply(s), f2.apply(f.apply(s))) < 1e-14);
  CHECK_THROWS_AS(compose(f, AffineFlow::identity(3)), DimensionError);
}

TEST_CASE("scan") {
  oracle::Gen gen(72);
  SUBCASE("single flow") {
    const std::vector<AffineFlow> one{random_flow(gen, 3)};
    for (auto order : {ScanOrder::sequential, ScanOrder::tree}) {
      const auto out = scan(one, order);
      REQUIRE(out.size() == 1);
      CHECK(flow_gap(out[0], one[0]) == 0.0);
    }
  }
  SUBCASE("identities stay identities") {
    const std::vector<AffineFlow> ids(5, AffineFlow::identity(3));
    for (const auto& f : scan(ids, ScanOrder::tree)) {
      CHECK(f.p == Matrix::identity(3));
      CHECK(f.q == Matrix(3, 3));
    }
  }
  SUBCASE("tree order matches the left fold") {
    for (int trial = 0; trial < 20; ++trial) {
      std::vector<AffineFlow> flows;
      const std::size_t n = gen.pick(1, 64);
      for (std::size_t i = 0; i < n; ++i) flows.push_back(random_flow(gen, 3));
      const auto seq = scan(flows, ScanOrder::sequential);
      const auto tree = scan(flows, ScanOrder::tree);
      // independent left fold in dense arithmetic
      oracle::DenseFlow acc{oracle::to_dense(flows[0].p), oracle::to_dense(flows[0].q)};
      for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) acc = oracle::dense_compose(acc, {oracle::to_dense(flows[i].p), oracle::to_dense(flows[i].q)});
        CHECK(flow_gap(tree[i], seq[i]) <= 1e-12);
        CHECK(oracle::rel_err(oracle::to_dense(seq[i].p), acc.p) <= 1e-12);
        CHECK(oracle::rel_err(oracle::to_dense(seq[i].q), acc.q) <= 1e-12);
      }
    }
  }
  SUBCASE("tree order is reproducible across thread counts") {
    std::vector<AffineFlow> flows;
    for (int i = 0; i < 11; ++i) flows.push_back(random_flow(gen, 4));
    const auto one = scan(flows, ScanOrder::tree, {1});
    const auto four = scan(flows, ScanOrder::tree, {4});
    for (std::size_t i = 0; i < flows.size(); ++i) {
      CHECK(one[i].p == four[i].p);
      CHECK(one[i].q == four[i].q);
    }
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(scan(std::vector<AffineFlow>{}), std::invalid_argument);
    const std::vector<AffineFlow> mixed{AffineFlow::identity(2), AffineFlow::identity(3)};
    CHECK_THROWS_AS(scan(mixed), DimensionError);
  }
}

TEST_CASE("backend names") {
  for (auto b : {Backend::seq, Backend::tensorinv, Backend::sigdelta, Backend::expprod_euler})
    CHECK(parse_backend(backend_name(b)) == b);
  CHECK_THROWS_AS(parse_backend("cuda"), std::invalid_argument);
}

TEST_CASE("solve_chunked") {
  oracle::Gen gen(73);
  SUBCASE("L = 0 returns S0") {
    const auto s0 = gen.matrix(3, 3);
    for (auto b : {Backend::seq, Backend::tensorinv, Backend::sigdelta})
      CHECK(solve_chunked(s0, gen.inputs(0, 2, 3), 4, b).state == s0);
  }
  SUBCASE("chunk_len = L is one chunk") {
    const auto in = gen.inputs(20, 2, 4);
    const auto s0 = gen.matrix(4, 4);
    const auto single = tensorinv_chunk_flow(in).apply(s0);
    CHECK(relative_frobenius_error(solve_chunked(s0, in, 20, Backend::tensorinv).state, single) < 1e-14);
  }
  SUBCASE("chunk sizes and backends agree with the recurrence") {
    const auto in = gen.inputs(96, 2, 6);
    const auto s0 = gen.matrix(6, 6);
    const auto oracle_state = run(s0, in).state;
    std::vector<Matrix> results;
    for (auto backend : {Backend::tensorinv, Backend::sigdelta, Backend::seq, Backend::expprod_euler})
      for (std::size_t len : {1, 2, 7, 32, 96}) {
        results.push_back(solve_chunked(s0, in, len, backend).state);
        CHECK(relative_frobenius_error(results.back(), oracle_state) <= 1e-9);
      }
    for (const auto& x : results)
      for (const auto& y : results) CHECK(relative_frobenius_error(x, y) <= 1e-9);
  }
  SUBCASE("boundary states follow the trajectory") {
    const auto in = gen.inputs(17, 2, 3);
    const auto s0 = gen.matrix(3, 3);
    const auto traj = run(s0, in, true).trajectory;
    SolveOptions opts;
    opts.boundary_states = true;
    const auto result = solve_chunked(s0, in, 5, Backend::sigdelta, opts);
    const std::size_t ends[] = {5, 10, 15, 17};
    REQUIRE(result.boundary_states.size() == 4);
    for (std::size_t c = 0; c < 4; ++c)
      CHECK(relative_frobenius_error(result.boundary_states[c], traj[ends[c]]) <= 1e-9);
  }
  SUBCASE("per-chunk flows from both backends agree") {
    const auto in = gen.inputs(30, 3, 5);
    for (const auto& [begin, end] : partition(30, 8).ranges) {
      const auto chunk = in.steps_range(begin, end);
      const auto f1 = tensorinv_chunk_flow(chunk);
      const auto f2 = sigdelta_chunk_flow(chunk);
      CHECK(max_abs(subtract(f1.p, f2.p).values()) <= 1e-9 * std::max(1.0, max_abs(f1.p.values())));
      CHECK(max_abs(subtract(f1.q, f2.q).values()) <= 1e-9 * std::max(1.0, max_abs(f1.q.values())));
    }
  }
  SUBCASE("deterministic across threads") {
    const auto in = gen.inputs(40, 2, 4);
    const auto s0 = gen.matrix(4, 4);
    SolveOptions threaded;
    threaded.exec.threads = 3;
    CHECK(solve_chunked(s0, in, 6, Backend::tensorinv, threaded).state ==
          solve_chunked(s0, in, 6, Backend::tensorinv).state);
  }
  SUBCASE("errors") {
    const auto in = gen.inputs(4, 1, 2);
    CHECK_THROWS_AS(solve_chunked(Matrix::identity(2), in, 0, Backend::seq), std::invalid_argument);
    CHECK_THROWS_AS(solve_chunked(Matrix::identity(3), in, 2, Backend::seq), DimensionError);
  }
}
