#include <cmath>
#include <random>

#include "doctest.h"
#include "lorentzlab/elliptic_solver.hpp"
#include "lorentzlab/error.hpp"

using namespace lorentzlab;

namespace {

std::vector<std::vector<FieldExpr>> identity2() {
  return {{FieldExpr::constant(1.0), FieldExpr()}, {FieldExpr(), FieldExpr::constant(1.0)}};
}

StaticModel model(const char* h, std::size_t n, bool periodic) {
  return StaticModel(parse_expr(h), identity2(), {"x", "y"}, ParamMesh({{n, 1.0, periodic, 0.0}, {n, 1.0, periodic, 0.0}}));
}

ProblemSpec problem(const StaticModel& m, DomainKind domain, double h) {
  NodeField target(m.mesh().node_count(), h);
  return ProblemSpec{m, domain, target, {}, {}, {}};
}

NodeField smooth_noise(const ParamMesh& mesh, std::uint64_t seed, double amp) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  double a = uni(rng), b = uni(rng), c = uni(rng), ph = uni(rng);
  NodeField u(mesh.node_count());
  for (std::size_t p = 0; p < u.size(); ++p) {
    double x = 2 * M_PI * mesh.coordinate(p, 0), y = 2 * M_PI * mesh.coordinate(p, 1);
    u[p] = amp * (a * std::sin(x + ph) + b * std::cos(y) + c * std::sin(x + 2 * y));
  }
  return u;
}

double spread(const NodeField& u) {
  auto [lo, hi] = std::minmax_element(u.begin(), u.end());
  return *hi - *lo;
}

}  // namespace

TEST_CASE("residual examples") {
  auto m = model("1+0.3*sin(2*pi*x)", 16, true);
  NodeField c(m.mesh().node_count(), 0.4);
  for (double v : residual(problem(m, DomainKind::closed, 0.0), c)) CHECK(v == 0.0);
  for (double v : residual(problem(m, DomainKind::closed, 1.0), c)) CHECK(v == -1.0);
}

TEST_CASE("necessary condition examples") {
  auto m = model("1", 16, true);
  CHECK(necessary_condition(problem(m, DomainKind::closed, 0.0)) == 0.0);
  CHECK(necessary_condition(problem(m, DomainKind::closed, 0.7)) == doctest::Approx(0.7).epsilon(1e-14));
  auto spec = problem(m, DomainKind::closed, 0.0);
  for (std::size_t p = 0; p < spec.target_h.size(); ++p) spec.target_h[p] = std::sin(2 * M_PI * m.mesh().coordinate(p, 0));
  CHECK(std::abs(necessary_condition(spec)) < 1e-12);
  auto box = model("1", 16, false);
  CHECK_THROWS_AS(necessary_condition(problem(box, DomainKind::dirichlet, 0.0)), ConfigError);
}

TEST_CASE("closed maximal graphs are constant and gauge invariant") {
  auto m = model("1+0.3*sin(2*pi*x)", 24, true);
  NodeField previous;
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    auto spec = problem(m, DomainKind::closed, 0.0);
    spec.initial = smooth_noise(m.mesh(), seed, 0.02);
    auto r = solve(spec);
    REQUIRE(r.converged);
    CHECK(r.verdict == Verdict::converged);
    CHECK(spread(r.u) <= 1e-8);
    for (std::size_t k = 1; k < r.residual_history.size(); ++k)
      CHECK(r.residual_history[k] <= r.residual_history[k - 1]);
    CHECK(r.min_margin >= kMarginGuard);
    if (!previous.empty()) {
      double shift = r.u[0] - previous[0];
      for (std::size_t p = 0; p < r.u.size(); ++p) CHECK(std::abs(r.u[p] - previous[p] - shift) < 1e-7);
    }
    previous = r.u;
  }
}

TEST_CASE("constant mean curvature on a closed base is infeasible") {
  auto m = model("1", 16, true);
  auto r = solve(problem(m, DomainKind::closed, 0.5));
  CHECK(r.verdict == Verdict::infeasible_by_necessary_condition);
  REQUIRE(r.necessary_condition);
  CHECK(*r.necessary_condition == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(r.iterations == 0);
}

TEST_CASE("prescribed zero-mean curvature converges") {
  auto m = model("1", 24, true);
  auto spec = problem(m, DomainKind::closed, 0.0);
  for (std::size_t p = 0; p < spec.target_h.size(); ++p)
    spec.target_h[p] = 0.1 * std::sin(2 * M_PI * m.mesh().coordinate(p, 0));
  auto r = solve(spec);
  REQUIRE(r.converged);
  double worst = 0.0;
  for (double v : residual(spec, r.u)) worst = std::max(worst, std::abs(v));
  CHECK(worst <= spec.tolerance());
}

TEST_CASE("dirichlet maximal graph with constant data is the slice") {
  auto m = model("1+0.2*x*y", 16, false);
  auto spec = problem(m, DomainKind::dirichlet, 0.0);
  spec.u0 = NodeField(m.mesh().node_count(), 2.0);
  auto r = solve(spec);
  REQUIRE(r.converged);
  for (double v : r.u) CHECK(std::abs(v - 2.0) <= 1e-8);
}

TEST_CASE("harmonic extension reproduces linear data") {
  ParamMesh box({{16, 1.0, false, 0.0}, {16, 2.0, false, 0.0}});
  NodeField b(box.node_count());
  for (std::size_t p = 0; p < b.size(); ++p) b[p] = 1.0 + 2.0 * box.coordinate(p, 0) - box.coordinate(p, 1);
  auto e = harmonic_extension(box, b);
  for (std::size_t p = 0; p < b.size(); ++p) CHECK(std::abs(e[p] - b[p]) < 1e-12);
}

TEST_CASE("inequality problem checks") {
  auto m = model("1", 24, false);
  auto spec = problem(m, DomainKind::dirichlet, 0.0);
  spec.u0 = NodeField(m.mesh().node_count(), 1.0);
  auto flat = inequality_solution_check(spec, spec.u0);
  CHECK(flat.operator_nonpositive);
  CHECK(flat.boundary_matches);
  CHECK(flat.above_boundary_level);
  CHECK(flat.constant);
  CHECK_FALSE(flat.counterexample_to_claim);

  NodeField bump(spec.u0.size());
  for (std::size_t p = 0; p < bump.size(); ++p) {
    double x = m.mesh().coordinate(p, 0), y = m.mesh().coordinate(p, 1);
    bump[p] = 0.05 * std::pow(std::sin(M_PI * x) * std::sin(M_PI * y), 4);
  }
  NodeField up(bump.size()), down(bump.size());
  for (std::size_t p = 0; p < bump.size(); ++p) up[p] = 1.0 + bump[p], down[p] = 1.0 - bump[p];
  auto a = inequality_solution_check(spec, up);
  CHECK_FALSE(a.operator_nonpositive);
  CHECK_FALSE(a.operator_positive_nodes.empty());
  CHECK(a.boundary_matches);
  CHECK(a.above_boundary_level);
  auto b = inequality_solution_check(spec, down);
  CHECK_FALSE(b.above_boundary_level);
  CHECK_FALSE(b.below_level_nodes.empty());
}

TEST_CASE("solver rejects inconsistent problems") {
  auto m = model("1", 16, true);
  auto spec = problem(m, DomainKind::dirichlet, 0.0);
  spec.u0 = NodeField(m.mesh().node_count(), 0.0);
  CHECK_THROWS_AS(solve(spec), ConfigError);
  auto short_h = problem(m, DomainKind::closed, 0.0);
  short_h.target_h.pop_back();
  CHECK_THROWS_AS(solve(short_h), ConfigError);
}
