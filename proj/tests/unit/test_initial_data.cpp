#include <cmath>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/initial_data.hpp"

using namespace lorentzlab;

namespace {

ComponentSource E(const std::string& text) { return ComponentSource::from_expr(parse_expr(text)); }

std::vector<ComponentSource> diag(std::vector<std::string> d) {
  const std::size_t n = d.size();
  std::vector<ComponentSource> out;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out.push_back(E(i == j ? d[i] : "0"));
  return out;
}

std::vector<ComponentSource> zeros(std::size_t n) { return std::vector<ComponentSource>(n, E("0")); }

ParamMesh torus(std::size_t dim, std::size_t n) {
  return ParamMesh(std::vector<MeshAxis>(dim, MeshAxis{n, 2 * M_PI, true, 0.0}));
}

InitialDataSet flat2(std::vector<std::string> a) {
  return InitialDataSet(torus(2, 8), {"x", "y"}, diag({"1", "1"}), diag(a), E("0"), zeros(2));
}

}  // namespace

TEST_CASE("constraints: flat torus with umbilic A") {
  for (double c : {0.5, -1.0, 2.0}) {
    std::string cs = std::to_string(c);
    InitialDataSet d(torus(3, 8), {"x", "y", "z"}, diag({"1", "1", "1"}), diag({cs, cs, cs}),
                     E(std::to_string(6 * c * c)), zeros(3));
    auto r = constraint_residuals(d);
    CHECK(r.max_res1 < 1e-9);
    CHECK(r.max_res2 < 1e-9);
    CHECK(d.symbolic());
  }
}

TEST_CASE("constraints: conformally flat metric with phi = R") {
  // g = e^{2f} delta, f = 0.1 sin x: R = -e^{-2f} (4 lap f + 2 |grad f|^2)
  InitialDataSet d(torus(3, 8), {"x", "y", "z"},
                   diag({"exp(0.2*sin(x))", "exp(0.2*sin(x))", "exp(0.2*sin(x))"}), zeros(9),
                   E("-exp(-0.2*sin(x))*(-0.4*sin(x) + 0.02*cos(x)^2)"), zeros(3));
  auto r = constraint_residuals(d);
  CHECK(r.max_res1 < 1e-9);
  CHECK(r.max_res2 < 1e-9);
}

TEST_CASE("constraints: mismatched momentum is localized") {
  InitialDataSet d(torus(3, 16), {"x", "y", "z"}, diag({"1", "1", "1"}), diag({"0", "sin(x)", "0"}), E("0"),
                   zeros(3));
  auto r = constraint_residuals(d);
  CHECK(r.max_res1 < 1e-12);
  CHECK(r.max_res2 == doctest::Approx(1.0).epsilon(1e-12));
  double x = d.mesh().coordinate(r.worst_node_res2, 0);
  CHECK(std::abs(std::sin(x)) < 1e-12);
}

TEST_CASE("constraints from gridded data are second order") {
  auto err = [](std::size_t n) {
    ParamMesh mesh = torus(3, n);
    NodeField conf(mesh.node_count());
    for (std::size_t p = 0; p < conf.size(); ++p) conf[p] = std::exp(0.2 * std::sin(mesh.coordinate(p, 0)));
    std::vector<ComponentSource> g;
    for (std::size_t i = 0; i < 3; ++i)
      for (std::size_t j = 0; j < 3; ++j)
        g.push_back(i == j ? ComponentSource::from_grid(conf) : E("0"));
    InitialDataSet d(mesh, {"x", "y", "z"}, g, zeros(9), E("-exp(-0.2*sin(x))*(-0.4*sin(x) + 0.02*cos(x)^2)"),
                     zeros(3));
    CHECK_FALSE(d.symbolic());
    return constraint_residuals(d).max_res1;
  };
  double e16 = err(16), e32 = err(32);
  CHECK(e16 / e32 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("definiteness examples") {
  CHECK(definiteness_report(flat2({"-2", "-2"})).global == Definiteness::negative_definite);
  CHECK(definiteness_report(flat2({"-1", "0"})).global == Definiteness::negative_semidefinite);
  CHECK(definiteness_report(flat2({"-1", "1"})).global == Definiteness::indefinite);
  CHECK(definiteness_report(flat2({"1", "3"})).global == Definiteness::positive_definite);
  CHECK(definiteness_report(flat2({"0", "0"})).global == Definiteness::zero);
  CHECK(classify_eigenvalues({-1.0, 1e-12}, 1e-9) == Definiteness::negative_semidefinite);
  CHECK_THROWS_AS(InitialDataSet(torus(2, 8), {"x", "y"}, diag({"1", "-1"}), zeros(4), E("0"), zeros(2)),
                  HypothesisError);
}

TEST_CASE("stationarity obstruction examples") {
  auto umbilic = flat2({"3", "3"});
  ParamMesh circle_mesh({{64, 2 * M_PI, true, 0.0}});
  auto geodesic = ImmersedSubmanifold::from_expressions(circle_mesh, umbilic.riemannian_model(),
                                                        {parse_expr("s"), parse_expr("1")}, {"s"});
  auto g = stationarity_obstruction(umbilic, geodesic);
  CHECK_FALSE(g.non_minimal);
  CHECK(g.conclusion == ObstructionConclusion::no_conclusion);

  auto round = ImmersedSubmanifold::from_expressions(
      circle_mesh, umbilic.riemannian_model(), {parse_expr("3+0.5*cos(s)"), parse_expr("3+0.5*sin(s)")}, {"s"});
  auto r = stationarity_obstruction(umbilic, round);
  CHECK(r.non_minimal);
  CHECK(r.inequality_everywhere);
  CHECK(r.conclusion == ObstructionConclusion::excludes_stationary_development);
  for (double v : r.h_norm) CHECK(v == doctest::Approx(2.0).epsilon(1e-2));
  for (double v : r.trace) CHECK(v == doctest::Approx(3.0).epsilon(1e-12));

  auto vacuum = flat2({"0", "0"});
  auto v = stationarity_obstruction(vacuum, round);
  CHECK_FALSE(v.inequality_everywhere);
  CHECK(v.conclusion == ObstructionConclusion::no_conclusion);
}

TEST_CASE("obstruction with a static development: H equals h") {
  auto data = flat2({"0", "0"});
  auto dev = MetricModel::standard_static(parse_expr("1"), {{parse_expr("1"), FieldExpr()}, {FieldExpr(), parse_expr("1")}},
                                          {"t", "x", "y"});
  ParamMesh mesh({{64, 2 * M_PI, true, 0.0}});
  auto round = ImmersedSubmanifold::from_expressions(mesh, data.riemannian_model(),
                                                     {parse_expr("3+0.5*cos(s)"), parse_expr("3+0.5*sin(s)")}, {"s"});
  auto o = stationarity_obstruction(data, round, SliceEmbedding{dev, {parse_expr("0"), parse_expr("x"), parse_expr("y")}});
  CHECK(o.has_development);
  CHECK(o.decomposition_discrepancy < 1e-10);
  CHECK(o.classification.tag == TrappedTag::mixed);
}

TEST_CASE("normal flow margins") {
  ParamMesh mesh = torus(2, 8);
  std::vector<std::string> coords{"x", "y"};
  auto slice_map = std::vector<FieldExpr>{parse_expr("0"), parse_expr("x"), parse_expr("y")};
  auto flow = [&](const InitialDataSet& d, const MetricModel& dev, NormalFlowOptions opt) {
    auto slice = ImmersedSubmanifold::from_expressions(mesh, dev, slice_map, coords);
    return normal_flow_margin(d, dev, slice, opt);
  };
  auto dev_metric = [](const char* a, const char* b) {
    return MetricModel::orthogonal_splitted(parse_expr("1"), {{parse_expr(a), FieldExpr()}, {FieldExpr(), parse_expr(b)}},
                                            {"t", "x", "y"});
  };

  // -dt^2 + e^{-2t}(dx^2 + dy^2): definite for every t
  auto contracting = dev_metric("exp(-2*t)", "exp(-2*t)");
  auto r = flow(InitialDataSet(mesh, coords, diag({"1", "1"}), diag({"1", "1"}), E("0"), zeros(2)), contracting,
                {1.0, 200, 1});
  CHECK(r.shape_mismatch < 1e-9);
  CHECK(r.capped1);
  CHECK(r.capped2);
  CHECK(r.sigma1 == 1.0);
  CHECK(r.sigma2 == 1.0);

  // one eigenvalue of the extended shape operator is -(1 - t/0.5)
  auto crossing = dev_metric("exp(2*(t - t^2))", "exp(2*t)");
  auto c = flow(InitialDataSet(mesh, coords, diag({"1", "1"}), diag({"-1", "-1"}), E("0"), zeros(2)), crossing,
                {1.0, 200, 1});
  CHECK(c.shape_mismatch < 1e-9);
  CHECK(c.initial_sign == Definiteness::negative_definite);
  CHECK(c.sigma2 == doctest::Approx(0.5).epsilon(0.02));
  CHECK(c.capped1);

  auto flat = dev_metric("1", "1");
  auto z = flow(InitialDataSet(mesh, coords, diag({"1", "1"}), diag({"0", "0"}), E("0"), zeros(2)), flat, {1.0, 50, 1});
  CHECK(z.degenerate);
  CHECK(z.sigma1 == 0.0);
  CHECK(z.sigma2 == 0.0);
}
