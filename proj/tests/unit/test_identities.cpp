#include <cmath>
#include <random>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/identities.hpp"

using namespace lorentzlab;

namespace {

std::vector<FieldExpr> exprs(std::vector<const char*> texts) {
  std::vector<FieldExpr> out;
  for (auto t : texts) out.push_back(parse_expr(t));
  return out;
}

const std::vector<std::string> kCoords{"t", "x", "y", "z"};

MetricModel mink() { return MetricModel::minkowski(4, kCoords); }

ImmersedSubmanifold tilted_torus(std::size_t n) {
  ParamMesh mesh({{n, 2 * M_PI, true, 0.0}, {n, 2 * M_PI, true, 0.0}});
  return ImmersedSubmanifold::from_expressions(
      mesh, mink(),
      exprs({"0.1*cos(u+v)", "(2+0.7*cos(u))*cos(v)", "(2+0.7*cos(u))*sin(v)", "0.7*sin(u)+0.2*cos(v)"}),
      {"u", "v"});
}

ImmersedSubmanifold flat_torus(std::size_t n) {
  ParamMesh mesh({{n, 2 * M_PI, true, 0.0}, {n, 2 * M_PI, true, 0.0}});
  return ImmersedSubmanifold::from_expressions(mesh, mink(), exprs({"0", "x1", "x2", "0"}), {"x1", "x2"});
}

double max_abs(const NodeField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("div_S of Killing and homothetic fields") {
  auto s = tilted_torus(32);
  CHECK(max_abs(div_S(s, exprs({"1", "0", "0", "0"}))) < 1e-12);
  auto euler = div_S(s, exprs({"t", "x", "y", "z"}));
  for (double v : euler) CHECK(v == doctest::Approx(2.0).epsilon(1e-12));
  auto rotation = div_S(s, exprs({"0", "-y", "x", "0"}));
  CHECK(max_abs(rotation) < 1e-12);
}

TEST_CASE("div_S does not depend on the tangent frame") {
  auto s = tilted_torus(24);
  std::mt19937_64 rng(4);
  auto x = random_polynomial_field(kCoords, 2, 1.0, rng);
  auto a = div_S(s, x), b = div_S(s, x, 0.7), c = div_S(s, x, 2.1);
  for (std::size_t p = 0; p < a.size(); ++p) {
    CHECK(std::abs(a[p] - b[p]) < 1e-9);
    CHECK(std::abs(a[p] - c[p]) < 1e-9);
  }
}

TEST_CASE("tangential divergence examples") {
  auto flat = flat_torus(32);
  CHECK(max_abs(tangential_divergence(flat, exprs({"1", "0", "0", "1"}))) < 1e-12);
  CHECK(max_abs(tangential_divergence(flat, exprs({"0", "sin(y)", "cos(x)", "0"}))) < 1e-10);
}

TEST_CASE("pointwise identity is second order for random fields") {
  std::mt19937_64 rng(21);
  for (int k = 0; k < 3; ++k) {
    auto x = random_polynomial_field(kCoords, 2, 1.0, rng);
    double r32 = divergence_identity(tilted_torus(32), x).max_residual;
    double r64 = divergence_identity(tilted_torus(64), x).max_residual;
    CHECK(r32 / r64 == doctest::Approx(4.0).epsilon(0.15));
  }
}

TEST_CASE("integral formula: Killing field on an extremal torus") {
  auto flat = flat_torus(32);
  auto r = verify_integral_formula(flat, exprs({"1", "0", "0", "0"}));
  CHECK(r.max_residual < 1e-12);
  CHECK(std::abs(r.integral) < 1e-12);
  CHECK_FALSE(r.theorem_witness);
}

TEST_CASE("integral formula: homothety on an extremal torus is a witness") {
  auto flat = flat_torus(32);
  auto r = verify_integral_formula(flat, exprs({"t", "x", "y", "z"}));
  CHECK(r.volume == doctest::Approx(4 * M_PI * M_PI).epsilon(1e-12));
  CHECK(r.integral == doctest::Approx(2 * r.volume).epsilon(1e-12));
  CHECK(std::abs(r.integral_pairing) < 1e-12);
  CHECK(r.theorem_witness);
}

TEST_CASE("integral formula: error shrinks four times per halving") {
  std::mt19937_64 rng(33);
  auto x = random_polynomial_field(kCoords, 2, 1.0, rng);
  double i32 = verify_integral_formula(tilted_torus(32), x).integral;
  double i64 = verify_integral_formula(tilted_torus(64), x).integral;
  CHECK(std::abs(i32 / i64) == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("integral formula needs a closed mesh") {
  ParamMesh box({{16, 1.0, false, 0.0}, {16, 1.0, true, 0.0}});
  auto s = ImmersedSubmanifold::from_expressions(box, mink(), exprs({"0", "x1", "x2", "0"}), {"x1", "x2"});
  CHECK_THROWS_AS(verify_integral_formula(s, exprs({"1", "0", "0", "0"})), HypothesisError);
  CHECK_THROWS_AS(div_S(s, exprs({"1", "0"})), ConfigError);
}
