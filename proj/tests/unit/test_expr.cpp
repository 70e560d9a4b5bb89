#include <cmath>
#include <random>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/expr.hpp"

using namespace lorentzlab;

namespace {

double at(const std::string& text, EvalContext ctx = {}) { return eval(parse_expr(text), ctx); }

// Random polynomial tree over x, y of depth <= `depth`.
FieldExpr random_polynomial(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, 5);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  int k = depth == 0 ? pick(rng) % 2 : pick(rng);
  switch (k) {
    case 0: return FieldExpr::constant(coef(rng));
    case 1: return FieldExpr::variable(rng() % 2 ? "x" : "y");
    case 2: return random_polynomial(rng, depth - 1) + random_polynomial(rng, depth - 1);
    case 3: return random_polynomial(rng, depth - 1) - random_polynomial(rng, depth - 1);
    case 4: return random_polynomial(rng, depth - 1) * random_polynomial(rng, depth - 1);
    default: return FieldExpr::power(random_polynomial(rng, depth - 1), 2);
  }
}

}  // namespace

TEST_CASE("parse collects free variables") {
  auto e = parse_expr("2*x1 + sin(t)");
  CHECK(e.free_variables() == std::set<std::string>{"t", "x1"});
}

TEST_CASE("evaluation examples") {
  CHECK(at("x1^2", {{"x1", 3.0}}) == 9.0);
  CHECK(at("exp(0)") == 1.0);
  CHECK(at("sqrt(1 - x1)", {{"x1", 0.75}}) == 0.5);
  CHECK(at("2*pi") == doctest::Approx(2.0 * M_PI).epsilon(1e-15));
  CHECK(at(" ( 1+2 ) * 3 ") == 9.0);
  CHECK(at("-x^2", {{"x", 2.0}}) == -4.0);
}

TEST_CASE("parse errors carry the byte offset") {
  try {
    parse_expr("1+");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 2);
  }
  CHECK_THROWS_AS(parse_expr("foo(x)"), ParseError);
  CHECK_THROWS_AS(parse_expr("x^0.5"), ParseError);
  CHECK_THROWS_AS(parse_expr(""), ParseError);
}

TEST_CASE("evaluation errors") {
  CHECK_THROWS_AS(at("log(x1)", {{"x1", -1.0}}), DomainError);
  CHECK_THROWS_AS(at("sqrt(x1)", {{"x1", -1.0}}), DomainError);
  CHECK_THROWS_AS(at("1/x1", {{"x1", 0.0}}), DomainError);
  CHECK_THROWS_AS(at("x1 + x2", {{"x1", 1.0}}), UnboundVariableError);
  try {
    at("log(x1)", {{"x1", -1.0}});
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("x1") != std::string::npos);
  }
}

TEST_CASE("derivative examples") {
  auto d = differentiate(parse_expr("x1*x1"), "x1");
  for (double x : {-2.0, -0.5, 0.0, 1.0, 3.0}) CHECK(eval(d, {{"x1", x}}) == doctest::Approx(2.0 * x));
  CHECK(eval(differentiate(parse_expr("sin(t)"), "t"), {{"t", 0.0}}) == 1.0);
  CHECK(differentiate(parse_expr("exp(x2)"), "x1").is_constant(0.0));
  auto chain = differentiate(parse_expr("log(1 + x^2) + sqrt(x) + tan(x)/x"), "x");
  double x = 0.7;
  double expected = 2 * x / (1 + x * x) + 0.5 / std::sqrt(x) + (1.0 / (std::cos(x) * std::cos(x)) * x - std::tan(x)) / (x * x);
  CHECK(eval(chain, {{"x", x}}) == doctest::Approx(expected).epsilon(1e-13));
}

TEST_CASE("symbolic derivative matches central differences on random polynomials") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> point(-1.0, 1.0);
  const double step = 1e-5;
  for (int trial = 0; trial < 200; ++trial) {
    auto e = random_polynomial(rng, 5);
    auto d = differentiate(e, "x");
    double x = point(rng), y = point(rng);
    double fd = (eval(e, {{"x", x + step}, {"y", y}}) - eval(e, {{"x", x - step}, {"y", y}})) / (2 * step);
    double exact = eval(d, {{"x", x}, {"y", y}});
    CHECK(std::abs(exact - fd) <= 1e-6 * (1.0 + std::abs(exact)));
  }
}

TEST_CASE("print then parse round trip") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> point(-2.0, 2.0);
  for (const char* text : {"2*x1 + sin(t)", "exp(-x1^2)*cos(3*t) - 1/(2 + x1)", "sqrt(1 + x1^2)/log(3 + t^2)",
                           "-(x1 - t)^3 + tan(0.1*x1)"}) {
    auto e = parse_expr(text);
    auto back = parse_expr(e.to_string());
    for (int k = 0; k < 100; ++k) {
      EvalContext ctx{{"x1", point(rng)}, {"t", point(rng)}};
      CHECK(eval(back, ctx) == eval(e, ctx));
    }
  }
  for (int trial = 0; trial < 50; ++trial) {
    auto e = random_polynomial(rng, 5);
    auto back = parse_expr(e.to_string());
    EvalContext ctx{{"x", point(rng)}, {"y", point(rng)}};
    CHECK(eval(back, ctx) == eval(e, ctx));
  }
}

TEST_CASE("compiled evaluation agrees with the tree") {
  auto e = parse_expr("x*exp(y) - sin(x*y)^2 + 4/(1 + y^2)");
  std::vector<std::string> vars{"x", "y"};
  CompiledExpr c(e, vars);
  for (double x : {-1.0, 0.3, 2.0})
    for (double y : {-0.5, 0.0, 1.5}) {
      std::vector<double> v{x, y};
      CHECK(c(v) == eval(e, {{"x", x}, {"y", y}}));
    }
  std::vector<std::string> only_x{"x"};
  CHECK_THROWS_AS(CompiledExpr(e, only_x), UnboundVariableError);
}
