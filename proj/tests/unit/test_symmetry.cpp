#include <algorithm>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/symmetry.hpp"

using namespace lorentzlab;

namespace {

VectorFieldSpec field(std::vector<const char*> comps) {
  VectorFieldSpec out;
  for (auto c : comps) out.push_back(parse_expr(c));
  return out;
}

std::vector<std::vector<FieldExpr>> diag2(const char* a, const char* b) {
  return {{parse_expr(a), FieldExpr()}, {FieldExpr(), parse_expr(b)}};
}

const TheoremVerdict& verdict(const std::vector<TheoremVerdict>& all, const std::string& id) {
  auto it = std::find_if(all.begin(), all.end(), [&](const TheoremVerdict& v) { return v.id == id; });
  REQUIRE(it != all.end());
  return *it;
}

std::size_t applying(const std::vector<TheoremVerdict>& all) {
  return static_cast<std::size_t>(std::count_if(all.begin(), all.end(), [](const TheoremVerdict& v) { return v.applies; }));
}

const std::vector<std::string> kIds{"causal_lie_definite",          "strictly_causal_lie_semidefinite",
                                    "strictly_causal_killing",      "conformal_signed",
                                    "conformal_nonzero_signed",     "orthogonal_splitted_monotone"};

}  // namespace

TEST_CASE("time field of a static model is Killing") {
  auto st = MetricModel::standard_static(parse_expr("1+0.3*sin(x1)"), diag2("1", "1+0.2*cos(x2)"), {"t", "x1", "x2"});
  auto r = analyze_vector_field(st, field({"1", "0", "0"}), box_sample({0, -1, -1}, {1, 1, 1}, 120, 7), 1);
  CHECK(r.classification == SymmetryClass::killing);
  CHECK(r.symbolic_killing);
  CHECK(r.certification == "symbolic");
  CHECK(r.strictly_causal);
  CHECK(r.future_causal);
  CHECK(r.timelike == 120);
  auto v = theorem_applicability(r);
  REQUIRE(v.size() == kIds.size());
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(v[k].id == kIds[k]);
  CHECK(verdict(v, "strictly_causal_killing").applies);
  CHECK_FALSE(verdict(v, "strictly_causal_killing").excluded.empty());
  CHECK_FALSE(verdict(v, "orthogonal_splitted_monotone").applies);
}

TEST_CASE("Euler field in the future cone is homothetic with rho 1") {
  auto mink = MetricModel::minkowski(4, {"t", "x", "y", "z"});
  auto r = analyze_vector_field(mink, field({"t", "x", "y", "z"}), box_sample({3, -1, -1, -1}, {4, 1, 1, 1}, 150, 3), 2);
  CHECK(r.classification == SymmetryClass::homothetic);
  REQUIRE(r.symbolic_rho);
  CHECK(*r.symbolic_rho == 1.0);
  CHECK(r.rho_min == doctest::Approx(1.0));
  CHECK(r.rho_max == doctest::Approx(1.0));
  CHECK(r.max_conformal_residual <= 1e-8 * r.scale);
  CHECK(r.strictly_causal);
  CHECK(r.sign == SignClass::psd);
  auto v = theorem_applicability(r);
  CHECK(verdict(v, "conformal_nonzero_signed").applies);
  CHECK(verdict(v, "conformal_signed").applies);
  CHECK(verdict(v, "causal_lie_definite").applies);
  CHECK(verdict(v, "causal_lie_definite").witness.has_value());

  // the past-directed field is handled through its negative
  auto neg = analyze_vector_field(mink, field({"-t", "-x", "-y", "-z"}), box_sample({3, -1, -1, -1}, {4, 1, 1, 1}, 150, 3), 2);
  CHECK(neg.past_causal);
  CHECK(verdict(theorem_applicability(neg), "conformal_nonzero_signed").applies);
}

TEST_CASE("spacelike translation: Killing but no theorem") {
  auto mink = MetricModel::minkowski(3, {"t", "x", "y"});
  auto r = analyze_vector_field(mink, field({"0", "1", "0"}), box_sample({0, -1, -1}, {1, 1, 1}, 100, 5), 1);
  CHECK(r.classification == SymmetryClass::killing);
  CHECK(r.spacelike == 100);
  CHECK_FALSE(r.future_causal);
  CHECK(applying(theorem_applicability(r)) == 0);
}

TEST_CASE("orthogonal splitted models") {
  auto expanding = MetricModel::orthogonal_splitted(parse_expr("exp(-0.2*t)"), diag2("exp(t)*(1+0.2*cos(x2))", "exp(t)"),
                                                    {"t", "x1", "x2"});
  auto r = analyze_vector_field(expanding, field({"1", "0", "0"}), box_sample({0, -1, -1}, {1, 1, 1}, 120, 9), 4);
  REQUIRE(r.non_contracting);
  CHECK(*r.non_contracting);
  CHECK_FALSE(*r.non_expanding);
  CHECK(r.sign == SignClass::psd);
  CHECK(r.classification == SymmetryClass::none);
  CHECK(verdict(theorem_applicability(r), "orthogonal_splitted_monotone").applies);

  auto contracting = MetricModel::orthogonal_splitted(parse_expr("1"), diag2("exp(-2*t)", "exp(-2*t)"), {"t", "x1", "x2"});
  auto c = analyze_vector_field(contracting, field({"1", "0", "0"}), box_sample({0, -1, -1}, {1, 1, 1}, 120, 9), 4);
  CHECK(*c.non_expanding);
  CHECK_FALSE(*c.non_contracting);
  CHECK(c.sign == SignClass::nsd);
  CHECK(c.classification == SymmetryClass::none);
}

TEST_CASE("sign analysis never upgrades an indefinite field") {
  auto mink = MetricModel::minkowski(3, {"t", "x", "y"});
  // L_X g = diag(0, 2, -2): indefinite on spacelike vectors
  auto r = analyze_vector_field(mink, field({"1", "x", "-y"}), box_sample({0, -0.1, -0.1}, {1, 0.1, 0.1}, 100, 2), 3);
  CHECK(r.sign == SignClass::indefinite);
  CHECK(r.classification == SymmetryClass::none);
  auto v = theorem_applicability(r);
  CHECK_FALSE(verdict(v, "causal_lie_definite").applies);
  CHECK_FALSE(verdict(v, "strictly_causal_lie_semidefinite").applies);
}

TEST_CASE("pp-wave: the parallel lightlike field takes the Killing branch") {
  // 2 du dv + y^2 du^2 + dy^2, observer d_u - (y^2 + 1)/2 d_v
  std::vector<std::vector<FieldExpr>> g(3, std::vector<FieldExpr>(3));
  g[0][0] = parse_expr("y^2");
  g[0][1] = g[1][0] = parse_expr("1");
  g[2][2] = parse_expr("1");
  auto pp = MetricModel::custom(g, {"u", "v", "y"}, field({"1", "-(y^2 + 1)/2", "0"})).with_parallel_lightlike(true);
  auto r = analyze_vector_field(pp, field({"0", "-1", "0"}), box_sample({0, 0, -1}, {1, 1, 1}, 100, 8), 1);
  CHECK(r.parallel_lightlike);
  CHECK(r.classification == SymmetryClass::killing);
  CHECK(r.lightlike == 100);
  CHECK(r.strictly_causal);
  CHECK(verdict(theorem_applicability(r), "strictly_causal_killing").applies);
}

TEST_CASE("sampling requirements") {
  auto mink = MetricModel::minkowski(3, {"t", "x", "y"});
  CHECK_THROWS_AS(analyze_vector_field(mink, field({"1", "0", "0"}), box_sample({0, 0, 0}, {1, 1, 1}, 50, 1), 1),
                  ConfigError);
  auto a = box_sample({0, 0, 0}, {1, 1, 1}, 100, 42), b = box_sample({0, 0, 0}, {1, 1, 1}, 100, 42);
  CHECK(a == b);
  for (const auto& p : a)
    for (double v : p) CHECK((v >= 0.0 && v <= 1.0));
}
