#include <cmath>
#include <random>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/spacetime.hpp"

using namespace lorentzlab;

namespace {

FieldExpr E(const char* text) { return parse_expr(text); }

std::vector<std::vector<FieldExpr>> diag(std::vector<const char*> entries) {
  std::vector<std::vector<FieldExpr>> out(entries.size(), std::vector<FieldExpr>(entries.size()));
  for (std::size_t i = 0; i < entries.size(); ++i) out[i][i] = E(entries[i]);
  return out;
}

VectorFieldSpec field(std::vector<const char*> comps) {
  VectorFieldSpec out;
  for (auto c : comps) out.push_back(E(c));
  return out;
}

// -dt^2 + e^{2t}(dx^2 + ...)
MetricModel de_sitter_like(std::size_t spatial) {
  std::vector<const char*> d{"-1"};
  std::vector<std::string> coords{"t"};
  for (std::size_t k = 0; k < spatial; ++k) d.push_back("exp(2*t)"), coords.push_back("x" + std::to_string(k + 1));
  return MetricModel::custom(diag(d), coords);
}

// -dt^2 + dchi^2 + sin^2 chi (dth^2 + sin^2 th dph^2)
MetricModel einstein_static() {
  return MetricModel::custom(diag({"-1", "1", "sin(chi)^2", "sin(chi)^2*sin(th)^2"}), {"t", "chi", "th", "ph"});
}

std::vector<double> e(std::size_t m, std::size_t k) {
  std::vector<double> v(m, 0.0);
  v[k] = 1.0;
  return v;
}

}  // namespace

TEST_CASE("metric_at examples") {
  auto mink = MetricModel::minkowski(4);
  std::vector<double> p{0.3, -1.0, 2.0, 5.0};
  CHECK(metric_at(mink, p) == std::vector<double>{-1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1});

  auto stat = MetricModel::standard_static(E("1+0.5*sin(x1)"), diag({"1", "1", "1"}), {"t", "x1", "x2", "x3"});
  std::vector<double> q{2.0, 0.0, 0.4, 0.1};
  auto g = metric_at(stat, q);
  CHECK(g[0] == -1.0);
  CHECK(g[5] == 1.0);

  auto split = MetricModel::orthogonal_splitted(E("exp(t)"), diag({"1", "1"}), {"t", "x", "y"});
  std::vector<double> r{1.0, 0.0, 0.0};
  CHECK(metric_at(split, r)[0] == doctest::Approx(-std::exp(1.0)).epsilon(1e-15));

  auto riem = MetricModel::custom(diag({"1", "1"}), {"t", "x"});
  std::vector<double> o{0.0, 0.0};
  CHECK_THROWS_AS(metric_at(riem, o), SignatureError);
  auto two_negative = MetricModel::custom(diag({"-1", "-1", "1"}), {"t", "x", "y"});
  std::vector<double> o3{0.0, 0.0, 0.0};
  CHECK_THROWS_AS(metric_at(two_negative, o3), SignatureError);
}

TEST_CASE("christoffel examples") {
  auto mink = MetricModel::minkowski(3);
  std::vector<double> p{0.1, 0.2, 0.3};
  for (double v : christoffel_at(mink, p).gamma) CHECK(v == 0.0);

  auto ds = de_sitter_like(1);
  std::vector<double> q{0.4, 1.0};
  auto c = christoffel_at(ds, q);
  CHECK(c(0, 1, 1) == doctest::Approx(std::exp(0.8)).epsilon(1e-14));
  CHECK(c(1, 0, 1) == doctest::Approx(1.0).epsilon(1e-14));

  auto stat = MetricModel::standard_static(E("exp(x1)"), diag({"1", "1"}), {"t", "x1", "x2"});
  std::vector<double> r{0.0, 0.7, -0.2};
  CHECK(christoffel_at(stat, r)(0, 0, 1) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("connection is symmetric and metric compatible") {
  std::vector<MetricModel> models{
      MetricModel::standard_static(E("1+0.3*sin(x)*cos(y)"), {{E("1+0.2*cos(y)"), E("0.1*sin(x)")},
                                                               {E("0.1*sin(x)"), E("2")}},
                                   {"t", "x", "y"}),
      MetricModel::orthogonal_splitted(E("exp(-0.2*t)"), diag({"exp(t)*(1+0.2*cos(y))", "exp(t)"}), {"t", "x", "y"}),
      einstein_static()};
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> uni(0.4, 1.2);
  for (const auto& model : models) {
    const std::size_t m = model.dim();
    for (int k = 0; k < 50; ++k) {
      std::vector<double> pt(m);
      for (auto& v : pt) v = uni(rng);
      auto jet = model.jet(pt, 1);
      auto c = christoffel_at(model, pt);
      for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
          for (std::size_t cc = 0; cc < m; ++cc) {
            CHECK(c(a, b, cc) == c(a, cc, b));
            double v = jet.d(cc, a, b);
            for (std::size_t d = 0; d < m; ++d) v -= c(d, cc, a) * jet.metric(d, b) + c(d, cc, b) * jet.metric(a, d);
            CHECK(std::abs(v) < 1e-10);
          }
    }
  }
}

TEST_CASE("riemann: flat models vanish and Bianchi holds") {
  auto mink = MetricModel::minkowski(4);
  std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  for (double v : riemann_at(mink, p)) CHECK(std::abs(v) < 1e-9);
  // Rindler-type chart of flat space: -x^2 dt^2 + dx^2
  auto rindler = MetricModel::custom(diag({"-x^2", "1"}), {"t", "x"});
  std::vector<double> q{0.3, 1.7};
  for (double v : riemann_at(rindler, q)) CHECK(std::abs(v) < 1e-9);

  auto es = einstein_static();
  std::vector<double> r{0.0, 1.1, 0.8, 0.3};
  auto R = riemann_at(es, r);
  const std::size_t m = 4;
  auto at = [&](std::size_t a, std::size_t b, std::size_t c, std::size_t d) { return R[((a * m + b) * m + c) * m + d]; };
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b)
      for (std::size_t c = 0; c < m; ++c)
        for (std::size_t d = 0; d < m; ++d) {
          CHECK(std::abs(at(a, b, c, d) + at(a, b, d, c)) < 1e-10);
          CHECK(std::abs(at(a, b, c, d) + at(a, c, d, b) + at(a, d, b, c)) < 1e-10);
        }
}

TEST_CASE("sectional curvature oracles") {
  auto es = einstein_static();
  std::vector<double> p{0.0, 1.1, 0.8, 0.3};
  for (auto [i, j] : {std::pair{1, 2}, {1, 3}, {2, 3}})
    CHECK(sectional_curvature(es, p, e(4, i), e(4, j)) == doctest::Approx(1.0).epsilon(1e-10));
  for (int j : {1, 2, 3}) CHECK(std::abs(sectional_curvature(es, p, e(4, 0), e(4, j))) < 1e-12);
  CHECK_THROWS_AS(sectional_curvature(es, p, e(4, 1), e(4, 1)), HypothesisError);

  auto mink = MetricModel::minkowski(4);
  std::mt19937_64 rng(9);
  std::vector<std::vector<double>> pts{{0, 0, 0, 0}, {1, 2, 3, 4}};
  auto planes = random_timelike_planes(mink, pts[0], 10, rng);
  auto flat = timelike_sectional_range(mink, pts, planes);
  CHECK(flat.min == 0.0);
  CHECK(flat.max == 0.0);
  CHECK(flat.certification == "sampled, not certified");

  // constant curvature +1 with this sign convention
  auto ds = de_sitter_like(2);
  std::vector<std::vector<double>> dpts{{0.0, 0.1, 0.2}, {0.5, -1.0, 2.0}, {-0.3, 0.0, 0.0}};
  auto dplanes = random_timelike_planes(ds, dpts[0], 20, rng);
  auto range = timelike_sectional_range(ds, {dpts[0]}, dplanes);
  CHECK(range.max - range.min < 1e-8);
  CHECK(range.min == doctest::Approx(1.0).epsilon(1e-8));
  for (const auto& pt : dpts) {
    auto pl = random_timelike_planes(ds, pt, 10, rng);
    auto rr = timelike_sectional_range(ds, {pt}, pl);
    CHECK(std::abs(rr.max - 1.0) < 1e-8);
    CHECK(std::abs(rr.min - 1.0) < 1e-8);
  }
  CHECK(range.convention.find("signature (-,+") != std::string::npos);
}

TEST_CASE("lie derivative examples") {
  auto stat = MetricModel::standard_static(E("1+0.3*sin(x)"), diag({"1+0.2*cos(y)", "1"}), {"t", "x", "y"});
  std::vector<double> p{0.2, 0.5, 1.0};
  for (double v : lie_derivative_metric(stat, field({"1", "0", "0"}), p)) CHECK(std::abs(v) < 1e-10);

  auto split = MetricModel::orthogonal_splitted(E("exp(-t)"), diag({"exp(2*t)", "1+t^2"}), {"t", "x", "y"});
  std::vector<double> q{0.5, 0.0, 0.0};
  auto L = lie_derivative_metric(split, field({"1", "0", "0"}), q);
  CHECK(L[0] == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));  // -d_t beta
  CHECK(L[4] == doctest::Approx(2 * std::exp(1.0)).epsilon(1e-14));
  CHECK(L[8] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(L[1] == 0.0);

  auto mink = MetricModel::minkowski(3, {"t", "x", "y"});
  std::vector<double> r{0.3, -0.7, 2.0};
  auto K = lie_derivative_metric(mink, field({"t", "x", "y"}), r);
  auto g = metric_at(mink, r);
  for (std::size_t k = 0; k < 9; ++k) CHECK(K[k] == 2 * g[k]);
  auto sym = lie_derivative_metric_expr(mink, field({"1", "0", "0"}));
  for (const auto& s : sym) CHECK(s.is_constant(0.0));
}

TEST_CASE("causal character examples") {
  auto mink = MetricModel::minkowski(4);
  std::vector<double> p{0, 0, 0, 0};
  auto cls = [&](std::vector<double> v) { return causal_character(mink, p, v); };
  CHECK(cls({1, 0, 0, 0}) == CausalClass::future_timelike);
  CHECK(cls({-1, 0, 0, 0}) == CausalClass::past_timelike);
  CHECK(cls({1, 1, 0, 0}) == CausalClass::future_lightlike);
  CHECK(cls({-1, 0, 1, 0}) == CausalClass::past_lightlike);
  CHECK(cls({0, 1, 0, 0}) == CausalClass::spacelike);
  CHECK(cls({0, 1e-9, 0, 0}) == CausalClass::zero);
  CHECK(is_future_causal(CausalClass::zero));
  CHECK(is_past_causal(CausalClass::zero));
  CHECK_FALSE(is_timelike(CausalClass::zero));
}
