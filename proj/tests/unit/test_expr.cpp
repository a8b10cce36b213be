#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "vofc/expr.hpp"

using namespace vofc::expr;
using vofc::Error;
using vofc::ErrorKind;

namespace {

ErrorKind parse_error_kind(std::string_view src, std::vector<std::string> vars, std::size_t* pos = nullptr) {
  try {
    parse(src, std::move(vars));
  } catch (const ParseError& e) {
    if (pos) *pos = e.position();
    return e.kind();
  }
  FAIL("parsed: " << src);
  return ErrorKind::NoConvergence;
}

// Random well-formed source text over {a, b, c}.
std::string random_source(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 0 ? 1 : 9);
  static const char* vars[] = {"a", "b", "c"};
  static const char* fns[] = {"sin", "cos", "exp", "abs", "sqrt", "ln", "gamma"};
  std::uniform_real_distribution<double> num(0.0, 5.0);
  switch (pick(rng)) {
    case 0: {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", num(rng));
      return buf;
    }
    case 1: return vars[rng() % 3];
    case 2: return random_source(rng, depth - 1) + " + " + random_source(rng, depth - 1);
    case 3: return random_source(rng, depth - 1) + " - " + random_source(rng, depth - 1);
    case 4: return random_source(rng, depth - 1) + "*" + random_source(rng, depth - 1);
    case 5: return random_source(rng, depth - 1) + "/" + random_source(rng, depth - 1);
    case 6: return random_source(rng, depth - 1) + "^" + random_source(rng, depth - 1);
    case 7: return "-" + random_source(rng, depth - 1);
    case 8: return "(" + random_source(rng, depth - 1) + ")";
    default: return std::string(fns[rng() % 7]) + "(" + random_source(rng, depth - 1) + ")";
  }
}

// Evaluates, mapping evaluation failures to NaN so two trees can be compared.
double eval_or_nan(const Expr& e, std::span<const double> vals) {
  try {
    return e.evaluate(vals);
  } catch (const Error& err) {
    REQUIRE(err.kind() == ErrorKind::EvaluationError);
    return std::nan("");
  }
}

bool same(double x, double y) { return (std::isnan(x) && std::isnan(y)) || x == y; }

}  // namespace

TEST_CASE("parse and evaluate") {
  const auto e = parse("t^(1-0.5)/gamma(2-0.5)", {"t"});
  CHECK(evaluate(e, {{"t", 1.0}}) == doctest::Approx(1.0 / std::tgamma(1.5)).epsilon(1e-15));
  CHECK(evaluate(parse("gamma(3)", {}), {}) == doctest::Approx(2.0));
  CHECK(evaluate(parse("0.5 + 0*t", {"t"}), {{"t", 7.0}}) == 0.5);
  CHECK(evaluate(parse("2^3^2", {}), {}) == 512.0);
  CHECK(evaluate(parse("2^-1", {}), {}) == 0.5);
  CHECK(evaluate(parse("-2^2", {}), {}) == -4.0);
  CHECK(evaluate(parse("(-2)^2", {}), {}) == 4.0);
  CHECK(evaluate(parse("1.5e2 + 2E-1", {}), {}) == 150.2);
  CHECK(parse("x*t + 1", {"t", "x", "v"}).free_variables() == std::set<std::string>{"t", "x"});
  CHECK(parse("3*sin(0)", {"t"}).is_constant());
  CHECK_FALSE(parse("t", {"t"}).is_constant());
}

TEST_CASE("syntax errors carry positions") {
  std::size_t pos = 0;
  CHECK(parse_error_kind("x +", {"x"}, &pos) == ErrorKind::SyntaxError);
  CHECK(pos == 3);
  CHECK(parse_error_kind("", {"x"}) == ErrorKind::SyntaxError);
  CHECK(parse_error_kind("(x", {"x"}, &pos) == ErrorKind::SyntaxError);
  CHECK(pos == 2);
  CHECK(parse_error_kind("x y", {"x", "y"}, &pos) == ErrorKind::SyntaxError);
  CHECK(pos == 2);
  CHECK(parse_error_kind("sin", {"x"}) == ErrorKind::SyntaxError);
  CHECK(parse_error_kind("z + 1", {"x"}, &pos) == ErrorKind::UnknownIdentifier);
  CHECK(pos == 0);
  CHECK(parse_error_kind("foo(1)", {"x"}) == ErrorKind::UnknownIdentifier);
  CHECK(parse_error_kind("sin(1, 2)", {"x"}) == ErrorKind::ArityError);
  try {
    parse("1 + * 2", {});
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("position 5") != std::string::npos);
  }
}

TEST_CASE("evaluation errors") {
  auto kind = [](const char* src, double t) {
    try {
      evaluate(parse(src, {"t"}), {{"t", t}});
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::NoConvergence;
  };
  CHECK(kind("1/(t-1)", 1.0) == ErrorKind::EvaluationError);
  CHECK(kind("ln(t)", 0.0) == ErrorKind::EvaluationError);
  CHECK(kind("sqrt(t)", -1.0) == ErrorKind::EvaluationError);
  CHECK(kind("gamma(t)", -2.0) == ErrorKind::EvaluationError);
  CHECK(kind("exp(t)", 1000.0) == ErrorKind::EvaluationError);
  CHECK_THROWS_AS(evaluate(parse("t + x", {"t", "x"}), {{"t", 1.0}}), Error);
  try {
    evaluate(parse("t + x", {"t", "x"}), {{"t", 1.0}});
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnboundVariable);
  }
  // unused slots need no binding
  CHECK(evaluate(parse("t", {"t", "x"}), {{"t", 2.0}}) == 2.0);
}

TEST_CASE("numeric differentiation") {
  const EvalContext at3{{"t", 3.0}};
  CHECK(differentiate_numeric(parse("t^2", {"t"}), "t", at3, 1e-6) == doctest::Approx(6.0).epsilon(1e-6));
  const double g = std::tgamma(2.5) * boost::math::digamma(2.5);
  CHECK(differentiate_numeric(parse("gamma(t)", {"t"}), "t", {{"t", 2.5}}, 1e-6) ==
        doctest::Approx(g).epsilon(1e-8));
  CHECK(std::abs(differentiate_numeric(parse("4.2", {"t"}), "t", at3, 1e-6)) <= 1e-9);
}

TEST_CASE("printing round-trips exactly") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> val(-3.0, 3.0);
  const std::vector<std::string> vars{"a", "b", "c"};
  for (int n = 0; n < 100; ++n) {
    const std::string src = random_source(rng, 4);
    const Expr e = parse(src, vars);
    const Expr back = parse(e.to_string(), vars);
    CHECK(back.to_string() == e.to_string());
    for (int k = 0; k < 100; ++k) {
      const double v[3] = {val(rng), val(rng), val(rng)};
      CHECK(same(eval_or_nan(e, v), eval_or_nan(back, v)));
    }
  }
}

TEST_CASE("precedence conformance") {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> val(0.1, 3.0);
  const std::vector<std::string> vars{"a", "b", "c"};
  const auto p1 = parse("a+b*c", vars), q1 = parse("a+(b*c)", vars);
  const auto p2 = parse("-a^b", vars), q2 = parse("-(a^b)", vars);
  const auto p3 = parse("a/b/c", vars), q3 = parse("(a/b)/c", vars);
  for (int k = 0; k < 100; ++k) {
    const double v[3] = {val(rng), val(rng), val(rng)};
    CHECK(p1.evaluate(v) == q1.evaluate(v));
    CHECK(p2.evaluate(v) == q2.evaluate(v));
    CHECK(p3.evaluate(v) == q3.evaluate(v));
  }
}

TEST_CASE("malformed input always yields a positioned parse error") {
  std::mt19937_64 rng(13);
  const std::string alphabet = "ab1.2e+-*/^(),  sinxq_9";
  int rejected = 0;
  for (int n = 0; n < 2000; ++n) {
    std::string src;
    const std::size_t len = rng() % 12;
    for (std::size_t i = 0; i < len; ++i) src += alphabet[rng() % alphabet.size()];
    try {
      parse(src, {"a", "b"});
    } catch (const ParseError& e) {
      ++rejected;
      CHECK(e.position() <= src.size());
    }
  }
  CHECK(rejected > 1000);
}
