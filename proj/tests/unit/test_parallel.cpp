#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "vofc/error.hpp"
#include "vofc/parallel.hpp"

using namespace vofc::fracops;
using namespace vofc::parallel;

namespace {

const Interval unit(0.0, 1.0);

}  // namespace

TEST_CASE("tabulate matches the serial reference bit for bit") {
  QuadratureConfig q;
  q.nodes = 128;
  const auto vo = testing::bilinear_order(unit);
  const auto x = testing::monomial(unit, 3);
  std::vector<double> pts;
  for (int i = 1; i < 200; ++i) pts.push_back(i / 200.0);
  for (auto op : {left_caputo, right_caputo, left_rl_derivative}) {
    auto f = [&](double t) { return op(x, vo, t, q); };
    const auto s = tabulate(pts, f, Execution::serial);
    const auto p = tabulate(pts, f, Execution::parallel);
    REQUIRE(s.size() == p.size());
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s[i] == p[i]);
  }
}

TEST_CASE("tabulate rethrows worker errors") {
  std::vector<double> pts{0.1, 0.2, 0.3, 1.0};
  auto f = [](double t) {
    if (t > 0.5) vofc::fail(vofc::ErrorKind::EndpointUndefined, "boom");
    return t;
  };
  CHECK_THROWS_AS(tabulate(pts, f, Execution::parallel), vofc::Error);
  CHECK_THROWS_AS(tabulate(pts, f, Execution::serial), vofc::Error);
}

TEST_CASE("Caputo matrix reproduces the scalar operator on grid nodes") {
  QuadratureConfig q;
  q.nodes = 40;
  const auto vo = testing::bilinear_order(unit);
  const auto half = OrderField::constant(unit, 0.5);
  const CombinedSpec spec(vo, half, 0.3, 0.7);
  const auto nodes = grid_nodes(unit, q.nodes);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> noise;
  std::vector<double> vals;
  for (double t : nodes) vals.push_back(std::sin(4 * t) + 0.1 * noise(rng));
  const auto x = Trajectory::sampled(nodes, vals);

  const auto w_par = combined_caputo_matrix(spec, q, Execution::parallel);
  const auto w_ser = combined_caputo_matrix(spec, q, Execution::serial);
  for (std::size_t r = 0; r < w_par.size(); ++r)
    for (std::size_t c = 0; c < w_par.size(); ++c) CHECK(w_par(r, c) == w_ser(r, c));

  const auto v = w_par.apply(vals);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double want = combined_caputo(x, spec, nodes[i], q);
    CHECK(std::abs(v[i] - want) <= 1e-12 * (1.0 + std::abs(want)));
  }
  CHECK_THROWS_AS(w_par.apply(std::vector<double>(3, 0.0)), vofc::Error);
}

TEST_CASE("thread count is positive") { CHECK(max_threads() >= 1); }
