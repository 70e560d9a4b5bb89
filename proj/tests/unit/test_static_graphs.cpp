#include <cmath>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/static_graphs.hpp"

using namespace lorentzlab;

namespace {

std::vector<std::vector<FieldExpr>> identity(std::size_t n) {
  std::vector<std::vector<FieldExpr>> g(n, std::vector<FieldExpr>(n));
  for (std::size_t i = 0; i < n; ++i) g[i][i] = FieldExpr::constant(1.0);
  return g;
}

ParamMesh square(std::size_t n, bool periodic) {
  return ParamMesh({{n, 1.0, periodic, 0.0}, {n, 1.0, periodic, 0.0}});
}

StaticModel model(const char* h, std::size_t n, bool periodic = true) {
  return StaticModel(parse_expr(h), identity(2), {"x", "y"}, square(n, periodic));
}

NodeField graph(const StaticModel& m, double (*f)(double, double)) {
  NodeField u(m.mesh().node_count());
  for (std::size_t p = 0; p < u.size(); ++p) u[p] = f(m.mesh().coordinate(p, 0), m.mesh().coordinate(p, 1));
  return u;
}

double wave(double x, double) { return 0.01 * std::sin(2 * M_PI * x); }

double max_abs(const NodeField& f) {
  double m = 0.0;
  for (double v : f) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

TEST_CASE("spacelike condition examples") {
  auto flat = model("1", 16, false);
  NodeField c(flat.mesh().node_count(), 0.3);
  auto ok = spacelike_check(flat, c);
  CHECK(ok.spacelike);
  CHECK(ok.min_margin == 1.0);
  auto null = spacelike_check(flat, graph(flat, [](double x, double) { return x; }));
  CHECK_FALSE(null.spacelike);
  CHECK(std::abs(null.min_margin) < 1e-12);
  auto half = spacelike_check(flat, graph(flat, [](double x, double) { return 0.5 * x; }));
  CHECK(half.spacelike);
  CHECK(half.min_margin == doctest::Approx(0.75).epsilon(1e-12));
  CHECK_THROWS_AS(hyperbolic_angle(flat, graph(flat, [](double x, double) { return x; })), NonSpacelikeError);
}

TEST_CASE("hyperbolic angle and unit normal") {
  auto flat = model("1", 16, false);
  for (double v : hyperbolic_angle(flat, NodeField(flat.mesh().node_count(), 1.0))) CHECK(v == 1.0);
  auto tilted = graph(flat, [](double x, double) { return x / std::sqrt(2.0); });
  for (double v : hyperbolic_angle(flat, tilted)) CHECK(v == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));

  auto warped = model("1+0.3*sin(2*pi*x)", 32);
  auto u = graph(warped, [](double x, double y) { return 0.05 * std::cos(2 * M_PI * (x + y)); });
  auto n = unit_normal(warped, u);
  CHECK(n.max_norm_error < 1e-9);
  CHECK(n.max_tangent_pairing < 1e-9);
  CHECK(n.alt_max_tangent_pairing > 1e-3);
}

TEST_CASE("graph mean curvature examples") {
  auto flat = model("1", 64);
  CHECK(max_abs(graph_mean_curvature(flat, NodeField(flat.mesh().node_count(), 2.0))) < 1e-14);
  auto expo = model("exp(x)", 16);
  CHECK(max_abs(graph_mean_curvature(expo, NodeField(expo.mesh().node_count(), -1.0))) < 1e-14);

  // linearized operator is the Laplacian
  auto h = graph_mean_curvature(flat, graph(flat, wave));
  double err = 0.0;
  for (std::size_t p = 0; p < h.size(); ++p) {
    double x = flat.mesh().coordinate(p, 0);
    err = std::max(err, std::abs(h[p] + 0.01 * 4 * M_PI * M_PI * std::sin(2 * M_PI * x)));
  }
  CHECK(err < 2e-3);
}

TEST_CASE("graph mean curvature agrees with the immersion") {
  auto err = [](std::size_t n) {
    auto m = model("1+0.3*sin(2*pi*x)", n);
    auto u = graph(m, [](double x, double y) { return 0.05 * std::sin(2 * M_PI * x) * std::cos(2 * M_PI * y); });
    auto h = graph_mean_curvature(m, u);
    auto normal = unit_normal(m, u);
    auto imm = graph_immersion(m, u);
    auto hv = mean_curvature_vector(imm);
    double worst = 0.0;
    for (std::size_t p = 0; p < h.size(); ++p) {
      std::span<const double> np(normal.normal.data() + p * 3, 3);
      worst = std::max(worst, std::abs(h[p] - inner(imm.ambient_metric(p), hv.at(p), np)));
    }
    return worst;
  };
  double e32 = err(32), e64 = err(64);
  CHECK(e64 < 1e-2);
  CHECK(e32 / e64 > 3.0);
}

TEST_CASE("laplacian of the time function") {
  auto flat = model("1", 32);
  NodeField c(flat.mesh().node_count(), 0.5);
  auto slice = laplacian_tau(graph_immersion(flat, c));
  CHECK(max_abs(slice.lhs) < 1e-12);
  CHECK(max_abs(slice.rhs) < 1e-12);
  auto r = [](std::size_t n) {
    auto m = model("1+0.3*sin(2*pi*x)", n);
    auto u = graph(m, [](double x, double y) { return 0.05 * std::cos(2 * M_PI * (x - y)); });
    return laplacian_tau(graph_immersion(m, u));
  };
  auto a = r(32), b = r(64);
  CHECK(b.max_residual < 5e-2);
  CHECK(a.max_residual / b.max_residual == doctest::Approx(4.0).epsilon(0.2));
  CHECK(b.max_residual_literal > 10 * b.max_residual);
}

TEST_CASE("conformal laplacian of the time function") {
  auto flat2 = model("1", 16);
  NodeField c(flat2.mesh().node_count(), 0.0);
  CHECK_THROWS_AS(conformal_laplacian_tau(graph_immersion(flat2, c)), HypothesisError);

  auto graph3 = [](const char* h, std::size_t n) {
    ParamMesh mesh({{n, 1.0, true, 0.0}, {n, 1.0, true, 0.0}, {n, 1.0, true, 0.0}});
    StaticModel m(parse_expr(h), identity(3), {"x", "y", "z"}, mesh);
    NodeField u(mesh.node_count());
    for (std::size_t p = 0; p < u.size(); ++p)
      u[p] = 0.03 * std::sin(2 * M_PI * mesh.coordinate(p, 0)) * std::cos(2 * M_PI * mesh.coordinate(p, 2));
    return graph_immersion(m, u);
  };
  auto a = conformal_laplacian_tau(graph3("1+0.2*sin(2*pi*x)", 12));
  auto b = conformal_laplacian_tau(graph3("1+0.2*sin(2*pi*x)", 24));
  CHECK(a.max_residual / b.max_residual > 3.0);

  // h = 1: the conformal factor is 1 and both forms coincide
  auto unit = graph3("1", 16);
  auto conf = conformal_laplacian_tau(unit), plain = laplacian_tau(unit);
  for (std::size_t p = 0; p < conf.lhs.size(); ++p) {
    CHECK(std::abs(conf.lhs[p] - plain.lhs[p]) < 1e-12);
    CHECK(std::abs(conf.rhs[p] - plain.rhs[p]) < 1e-12);
  }
}
