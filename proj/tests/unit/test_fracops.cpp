#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "helpers.hpp"
#include "vofc/error.hpp"
#include "vofc/fracops.hpp"

using namespace vofc::fracops;
using testing::affine;
using testing::bilinear_order;
using testing::constant;
using testing::monomial;
using vofc::Error;
using vofc::ErrorKind;

namespace {

const Interval unit(0.0, 1.0);

QuadratureConfig with_nodes(int n) {
  QuadratureConfig q;
  q.nodes = n;
  return q;
}

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::NoConvergence;
}

}  // namespace

TEST_CASE("interval and grid") {
  CHECK(kind_of([] { Interval(1.0, 1.0); }) == ErrorKind::InvalidInterval);
  CHECK(kind_of([] { Interval(0.0, INFINITY); }) == ErrorKind::InvalidInterval);
  const auto nodes = grid_nodes(Interval(0.0, 0.3), 7);
  REQUIRE(nodes.size() == 8);
  CHECK(nodes.front() == 0.0);
  CHECK(nodes.back() == 0.3);
}

TEST_CASE("order fields") {
  SUBCASE("complement") {
    CHECK(order_complement(OrderField::constant(unit, 0.5))(0.2, 0.7) == 0.5);
    CHECK(order_complement(OrderField::constant(unit, 0.3))(0.9, 0.1) == doctest::Approx(0.7));
    CHECK(order_complement(bilinear_order(unit))(1.0, 1.0) == doctest::Approx(0.3));
  }
  SUBCASE("range is enforced on the construction lattice") {
    CHECK(kind_of([] { OrderField(unit, [](double t, double) { return 1.2 * t; }, "1.2 t"); }) ==
          ErrorKind::InvalidOrder);
    CHECK(kind_of([] { OrderField::constant(unit, 1.0); }) == ErrorKind::InvalidOrder);
  }
  SUBCASE("range is enforced at evaluation") {
    // passes the lattice but dips to 0 between lattice points
    const OrderField sneaky(
        unit, [](double t, double) { return std::abs(t - 0.5 / 63.0) < 1e-6 ? 0.0 : 0.5; }, "spike");
    CHECK(kind_of([&] { (void)sneaky(0.5 / 63.0, 0.0); }) == ErrorKind::InvalidOrder);
  }
}

TEST_CASE("sampled trajectories") {
  const auto x = Trajectory::sampled({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0});
  CHECK(x.representation() == Trajectory::Representation::sampled);
  CHECK(x.value(0.25) == doctest::Approx(0.5));
  CHECK(x.slope(0.0) == 2.0);
  CHECK(x.slope(0.5) == 2.0);  // left-continuous
  CHECK(x.slope(0.75) == -2.0);
  CHECK(kind_of([] { Trajectory::sampled({0.0, 0.0}, {1.0, 1.0}); }) == ErrorKind::InvalidProblem);
  CHECK(kind_of([&] { (void)x.value(1.5); }) == ErrorKind::EndpointUndefined);
}

TEST_CASE("quadrature config") {
  QuadratureConfig q;
  q.nodes = 7;
  CHECK(kind_of([&] { q.validate(); }) == ErrorKind::InvalidConfig);
  q.nodes = 64;
  CHECK_FALSE(q.diff_step_warning(unit));
  q.diff_step = 0.1;
  CHECK(q.diff_step_warning(unit));
  CHECK(q.step_for(unit) == 0.1);
}

TEST_CASE("RL integrals") {
  const auto q = with_nodes(256);
  const auto half = OrderField::constant(unit, 0.5);
  const auto one = constant(unit, 1.0);
  CHECK(left_rl_integral(one, half, 1.0, q) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  CHECK(right_rl_integral(one, half, 0.0, q) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  CHECK(left_rl_integral(monomial(unit, 3), half, 0.0, q) == 0.0);
  CHECK(right_rl_integral(monomial(unit, 3), half, 1.0, q) == 0.0);
  // tanh-sinh on the definition
  CHECK(left_rl_integral(monomial(unit, 1), bilinear_order(unit), 1.0, q) ==
        doctest::Approx(0.63504565542961655).epsilon(5e-5));
  // closed form for affine x and constant order 0.25
  CHECK(right_rl_integral(monomial(unit, 1), OrderField::constant(unit, 0.25), 0.5, q) ==
        doctest::Approx(0.55663776514740049).epsilon(1e-12));
}

TEST_CASE("Caputo derivatives") {
  const auto q = with_nodes(256);
  const auto half = OrderField::constant(unit, 0.5);
  CHECK(left_caputo(monomial(unit, 1), half, 1.0, q) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-12));
  CHECK(left_caputo(monomial(unit, 2), half, 1.0, q) ==
        doctest::Approx(std::tgamma(3.0) / std::tgamma(2.5)).epsilon(1e-4));
  CHECK(right_caputo(monomial(unit, 1), half, 0.0, q) == doctest::Approx(-1.0 / std::tgamma(1.5)).epsilon(1e-12));
  const auto one_minus_sq = Trajectory::closed_form(
      unit, [](double t) { return (1 - t) * (1 - t); }, [](double t) { return -2 * (1 - t); });
  CHECK(right_caputo(one_minus_sq, half, 0.0, q) == doctest::Approx(1.5045055561273502).epsilon(1e-10));
  // variable order, tanh-sinh on the definition
  const auto vo = bilinear_order(unit);
  CHECK(left_caputo(monomial(unit, 2), vo, 0.8, q) == doctest::Approx(1.2381971219344121).epsilon(5e-4));
  CHECK(right_caputo(monomial(unit, 2), vo, 0.3, q) == doctest::Approx(-0.98034151959299443).epsilon(5e-5));
}

TEST_CASE("constant-order monomial suite") {
  const auto q = with_nodes(2048);
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto f = OrderField::constant(unit, alpha);
    for (int k = 1; k <= 3; ++k) {
      const auto x = monomial(unit, k);
      for (double t : {0.25, 0.5, 0.75, 1.0})
        CHECK(testing::rel_err(left_caputo(x, f, t, q), testing::left_caputo_monomial(k, alpha, t)) < 1e-3);
      for (double t : {0.0, 0.25, 0.5, 0.75})
        CHECK(testing::rel_err(right_caputo(x, f, t, q), testing::right_caputo_monomial(k, alpha, t, 1.0 - t)) <
              1e-3);
    }
  }
}

TEST_CASE("RL derivatives") {
  const auto q = with_nodes(256);
  const auto half = OrderField::constant(unit, 0.5);
  const auto one = constant(unit, 1.0);
  const double c = 1.0 / std::sqrt(M_PI);
  CHECK(left_rl_derivative(one, half, 0.5, q) == doctest::Approx(std::sqrt(2.0) * c).epsilon(1e-6));
  CHECK(left_rl_derivative(monomial(unit, 1), half, 0.25, q) ==
        doctest::Approx(0.5 / std::tgamma(1.5)).epsilon(1e-6));
  CHECK(left_rl_derivative(constant(unit, 0.0), half, 0.3, q) == 0.0);
  CHECK(right_rl_derivative(constant(unit, 0.0), half, 0.3, q) == 0.0);
  CHECK(right_rl_derivative(one, half, 0.5, q) == doctest::Approx(0.79788456080286552).epsilon(1e-6));
  CHECK(right_rl_derivative(affine(unit, 1.0, -1.0), half, 0.5, q) ==
        doctest::Approx(0.79788456080286541).epsilon(1e-6));

  SUBCASE("endpoints are undefined") {
    CHECK(kind_of([&] { left_rl_derivative(one, half, 0.0, q); }) == ErrorKind::EndpointUndefined);
    CHECK(kind_of([&] { left_rl_derivative(one, half, 1.0, q); }) == ErrorKind::EndpointUndefined);
    CHECK(kind_of([&] { right_rl_derivative(one, half, 1.0, q); }) == ErrorKind::EndpointUndefined);
    CHECK(kind_of([&] { right_rl_derivative(one, half, 0.0, q); }) == ErrorKind::EndpointUndefined);
  }
  SUBCASE("stencils near the ends") {
    // close to the singular limit and close to the far end of the domain
    for (double t : {1e-3, 0.999}) {
      const double want = std::pow(t, -0.5) * c;
      CHECK(left_rl_derivative(one, half, t, q) == doctest::Approx(want).epsilon(1e-4));
      const double want_r = std::pow(1.0 - t, -0.5) * c;
      CHECK(right_rl_derivative(one, half, t, q) == doctest::Approx(want_r).epsilon(1e-4));
    }
  }
}

TEST_CASE("combined and dual operators") {
  const auto q = with_nodes(256);
  const auto half = OrderField::constant(unit, 0.5);
  const auto vo = bilinear_order(unit);
  const auto x = monomial(unit, 2);
  const CombinedSpec even(half, half, 0.5, 0.5);

  CHECK(combined_rl(monomial(unit, 1), even, 0.5, q) == doctest::Approx(0.3989422804014327).epsilon(1e-6));
  CHECK(combined_rl(constant(unit, 0.0), even, 0.5, q) == 0.0);
  CHECK(dual_derivative(constant(unit, 1.0), even, 1.0, 0.5, q) ==
        doctest::Approx(0.79788456080286552).epsilon(1e-6));

  SUBCASE("reductions are bit-exact") {
    const CombinedSpec left_only(vo, half, 1.0, 0.0);
    const CombinedSpec right_only(half, vo, 0.0, 1.0);
    for (double t : {0.1, 0.37, 0.5, 0.93}) {
      CHECK(combined_caputo(x, left_only, t, q) == left_caputo(x, vo, t, q));
      CHECK(combined_caputo(x, right_only, t, q) == right_caputo(x, vo, t, q));
      CHECK(combined_rl(x, left_only, t, q) == left_rl_derivative(x, vo, t, q));
      CHECK(dual_derivative(x, right_only, 1.0, t, q) == left_rl_derivative(x, vo, t, q));
      CHECK(dual_derivative(x, left_only, 1.0, t, q) == right_rl_derivative(x, vo, t, q));
    }
  }
  SUBCASE("worked-example operator value for xbar(t) = t") {
    // With alpha(t,tau) = alpha(t) and beta(t,tau) = beta(tau) the right term
    // is -(b - t)^(1 - beta(t)) / (2 Gamma(2 - beta(t))).
    const Interval d(0.0, 2.0);
    const OrderField a(d, [](double t, double) { return 0.4 + 0.1 * t; }, "alpha(t)");
    const OrderField b(d, [](double, double tau) { return 0.4 + 0.1 * tau; }, "beta(tau)");
    const CombinedSpec spec(a, b, 0.5, 0.5);
    const auto xbar = monomial(d, 1);
    for (double t : {0.3, 1.0, 1.7}) {
      const double at = 0.4 + 0.1 * t;
      const double want = std::pow(t, 1 - at) / (2 * std::tgamma(2 - at)) -
                          std::pow(2.0 - t, 1 - at) / (2 * std::tgamma(2 - at));
      CHECK(combined_caputo(xbar, spec, t, with_nodes(1024)) == doctest::Approx(want).epsilon(1e-10));
    }
  }
  SUBCASE("c must lie in (a, b]") {
    CHECK(kind_of([&] { dual_derivative(x, even, 0.0, 0.5, q); }) == ErrorKind::EndpointUndefined);
  }
}

TEST_CASE("linearity on random combinations") {
  std::mt19937_64 rng(20240601);
  std::uniform_real_distribution<double> coef(-3.0, 3.0), point(0.05, 0.95);
  const auto q = with_nodes(64);
  const auto vo = bilinear_order(unit);
  const auto x = Trajectory::closed_form(unit, [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); });
  const auto y = Trajectory::closed_form(unit, [](double t) { return std::cos(3 * t); },
                                         [](double t) { return -3 * std::sin(3 * t); });
  using Op = double (*)(const Trajectory&, const OrderField&, double, const QuadratureConfig&);
  const Op ops[] = {left_rl_integral, right_rl_integral, left_caputo, right_caputo, left_rl_derivative,
                    right_rl_derivative};
  for (int trial = 0; trial < 25; ++trial) {
    const double c1 = coef(rng), c2 = coef(rng), t = point(rng);
    const auto z = Trajectory::closed_form(
        unit, [&](double s) { return c1 * x.value(s) + c2 * y.value(s); },
        [&](double s) { return c1 * x.slope(s) + c2 * y.slope(s); });
    for (Op op : ops) {
      const double dx = c1 * op(x, vo, t, q), dy = c2 * op(y, vo, t, q);
      CHECK(std::abs(op(z, vo, t, q) - dx - dy) <= 1e-10 + 1e-8 * (std::abs(dx) + std::abs(dy)));
    }
  }
}

TEST_CASE("Caputo annihilates constants") {
  const auto q = with_nodes(128);
  const auto vo = bilinear_order(unit);
  for (double c : {-2.5, 0.0, 7.0})
    for (double t : {0.0, 0.2, 0.5, 1.0}) {
      CHECK(std::abs(left_caputo(constant(unit, c), vo, t, q)) <= 1e-10);
      CHECK(std::abs(right_caputo(constant(unit, c), vo, t, q)) <= 1e-10);
    }
}

TEST_CASE("grid convergence on monomials") {
  for (double alpha : {0.25, 0.5, 0.75}) {
    const auto f = OrderField::constant(unit, alpha);
    for (int k = 1; k <= 3; ++k) {
      const auto x = monomial(unit, k);
      const double want_l = testing::left_caputo_monomial(k, alpha, 0.7);
      const double want_r = testing::right_caputo_monomial(k, alpha, 0.7, 0.3);
      double prev_l = std::abs(left_caputo(x, f, 0.7, with_nodes(256)) - want_l);
      double prev_r = std::abs(right_caputo(x, f, 0.7, with_nodes(256)) - want_r);
      for (int n : {512, 1024}) {
        // affine slopes (k <= 2) are integrated exactly; only roundoff remains
        const double err_l = std::abs(left_caputo(x, f, 0.7, with_nodes(n)) - want_l);
        const double err_r = std::abs(right_caputo(x, f, 0.7, with_nodes(n)) - want_r);
        CHECK((err_l <= 1e-12 || prev_l / err_l >= 1.8));
        CHECK((err_r <= 1e-12 || prev_r / err_r >= 1.8));
        prev_l = err_l;
        prev_r = err_r;
      }
    }
  }
}

TEST_CASE("node tie-breaking") {
  // At a grid node the history sum uses whole cells only, so a trajectory
  // that is affine on each cell is integrated exactly.
  const auto q = with_nodes(16);
  const auto nodes = grid_nodes(unit, 16);
  std::vector<double> vals;
  for (double t : nodes) vals.push_back(t * t);
  const auto x = Trajectory::sampled(nodes, vals);
  const auto half = OrderField::constant(unit, 0.5);
  const double t = nodes[8];
  double want = 0.0;
  for (int i = 0; i < 8; ++i) {
    const double slope = (vals[i + 1] - vals[i]) / (nodes[i + 1] - nodes[i]);
    want += slope * (std::sqrt(t - nodes[i]) - std::sqrt(t - nodes[i + 1])) * 2.0 / std::sqrt(M_PI);
  }
  CHECK(left_caputo(x, half, t, q) == doctest::Approx(want).epsilon(1e-13));
}

TEST_CASE("integration by parts") {
  const auto vo = bilinear_order(unit);
  const auto half = OrderField::constant(unit, 0.5);
  SUBCASE("zero x") {
    const auto r = check_integration_by_parts(constant(unit, 0.0), monomial(unit, 1), half, Side::left, with_nodes(64));
    CHECK(r.residual == 0.0);
  }
  SUBCASE("tolerance at 512 nodes") {
    CHECK(std::abs(check_integration_by_parts(monomial(unit, 1), monomial(unit, 1), half, Side::left, with_nodes(512))
                       .residual) <= 5e-3);
    CHECK(std::abs(check_integration_by_parts(monomial(unit, 2), affine(unit, 1.0, -1.0),
                                              OrderField::constant(unit, 0.3), Side::right, with_nodes(512))
                       .residual) <= 5e-3);
  }
  SUBCASE("residual decreases under refinement") {
    const auto ex = Trajectory::closed_form(unit, [](double t) { return std::exp(t); }, [](double t) { return std::exp(t); });
    const auto co = Trajectory::closed_form(unit, [](double t) { return std::cos(t); }, [](double t) { return -std::sin(t); });
    for (Side side : {Side::left, Side::right}) {
      double prev = std::abs(check_integration_by_parts(ex, co, vo, side, with_nodes(64)).residual);
      for (int n : {128, 256, 512}) {
        const double r = std::abs(check_integration_by_parts(ex, co, vo, side, with_nodes(n)).residual);
        CHECK(r <= 1.1 * prev);
        prev = r;
      }
    }
  }
}

TEST_CASE("history derivative over a sub-interval") {
  const auto cfg = with_nodes(512);
  for (const OrderField& f : {OrderField::constant(unit, 0.4), bilinear_order(unit)}) {
    const auto x = monomial(unit, 2);
    for (double t : {0.6, 0.8, 0.95}) {
      const double want = left_rl_derivative(x, f, 0.0, t, cfg) - left_rl_derivative(x, f, 0.5, t, cfg);
      CHECK(left_rl_derivative_between(x, f, 0.0, 0.5, t, cfg) == doctest::Approx(want).epsilon(1e-4));
    }
    CHECK(left_rl_derivative_between(constant(unit, 0.0), f, 0.0, 0.5, 0.7, cfg) == 0.0);
    CHECK(left_rl_derivative_between(x, f, 0.5, 0.5, 0.7, cfg) == 0.0);
  }
  CHECK(kind_of([&] { (void)left_rl_derivative_between(monomial(unit, 1), OrderField::constant(unit, 0.4), 0.0, 0.5,
                                                       0.5, cfg); }) == ErrorKind::EndpointUndefined);
}
