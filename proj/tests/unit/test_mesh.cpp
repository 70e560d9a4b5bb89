#include <cmath>
#include <cstring>
#include <random>
#include <sstream>

#include "doctest.h"
#include "lorentzlab/error.hpp"
#include "lorentzlab/kernels.hpp"
#include "lorentzlab/mesh.hpp"

using namespace lorentzlab;

namespace {

ParamMesh line(std::size_t n, bool periodic, double length = 1.0) { return ParamMesh({{n, length, periodic, 0.0}}); }

NodeField sample(const ParamMesh& mesh, double (*f)(double)) {
  NodeField v(mesh.node_count());
  for (std::size_t p = 0; p < v.size(); ++p) v[p] = f(mesh.coordinate(p, 0));
  return v;
}

double sin2pi(double x) { return std::sin(2 * M_PI * x); }

double max_error_sin(std::size_t n) {
  auto mesh = line(n, true);
  auto d = fd_partial(sample(mesh, sin2pi), mesh, 0);
  double err = 0.0;
  for (std::size_t p = 0; p < d.size(); ++p)
    err = std::max(err, std::abs(d[p] - 2 * M_PI * std::cos(2 * M_PI * mesh.coordinate(p, 0))));
  return err;
}

}  // namespace

TEST_CASE("mesh construction rules") {
  CHECK_THROWS_AS(line(7, true), ConfigError);
  CHECK_THROWS_AS(line(6, true), ConfigError);
  CHECK_THROWS_AS(line(8, true, 0.0), ConfigError);
  ParamMesh torus({{8, 1.0, true, 0.0}, {10, 2.0, true, 0.0}});
  CHECK(torus.node_count() == 80);
  CHECK(torus.all_periodic());
  CHECK(torus.spacing(1) == 0.2);
  CHECK(torus.shifted(9, 1, 1) == 0);
  CHECK(torus.shifted(0, 0, -1) == 70);
  ParamMesh box({{8, 1.0, false, 0.0}, {8, 1.0, true, 0.0}});
  CHECK(box.has_boundary());
  CHECK(box.spacing(0) == doctest::Approx(1.0 / 7.0));
  CHECK(box.is_boundary(3));
  CHECK_FALSE(box.is_boundary(8));
}

TEST_CASE("fd_partial: second order on a periodic sine") {
  double e64 = max_error_sin(64);
  double c = e64 * 64 * 64;
  CHECK(c < 50.0);
  double ratio = max_error_sin(32) / e64;
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
  ratio = e64 / max_error_sin(128);
  CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("fd_partial: constants and linear functions") {
  auto mesh = line(16, true);
  NodeField c(16, 3.5);
  for (double v : fd_partial(c, mesh, 0)) CHECK(v == 0.0);
  auto box = line(16, false, 2.0);
  auto d = fd_partial(sample(box, [](double x) { return x; }), box, 0);
  for (double v : d) CHECK(std::abs(v - 1.0) < 1e-10);
  auto dd = fd_second(sample(box, [](double x) { return x * x; }), box, 0);
  for (double v : dd) CHECK(std::abs(v - 2.0) < 1e-9);
}

TEST_CASE("integrate examples") {
  ParamMesh torus({{16, 1.0, true, 0.0}, {16, 1.0, true, 0.0}});
  NodeField one(torus.node_count(), 1.0);
  CHECK(integrate(one, torus, one) == 1.0);
  NodeField s(torus.node_count());
  for (std::size_t p = 0; p < s.size(); ++p) s[p] = sin2pi(torus.coordinate(p, 0));
  CHECK(std::abs(integrate(s, torus, one)) < 1e-12);
  NodeField bad(torus.node_count(), 1.0);
  bad[5] = 0.0;
  CHECK_THROWS_AS(integrate(one, torus, bad), DomainError);
}

TEST_CASE("integrate: area of a round sphere patch converges at second order") {
  // theta in [a, pi - a], phi periodic; density sin(theta)
  const double a = 0.3;
  const double exact = 2 * M_PI * 2 * std::cos(a);
  auto error = [&](std::size_t n) {
    ParamMesh mesh({{n, M_PI - 2 * a, false, a}, {n, 2 * M_PI, true, 0.0}});
    NodeField one(mesh.node_count(), 1.0), dens(mesh.node_count());
    for (std::size_t p = 0; p < dens.size(); ++p) dens[p] = std::sin(mesh.coordinate(p, 0));
    return std::abs(integrate(one, mesh, dens) - exact);
  };
  double e32 = error(32), e64 = error(64);
  CHECK(e64 < 1e-2);
  CHECK(e32 / e64 == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("discrete divergence theorem on a periodic mesh") {
  ParamMesh torus({{32, 1.0, true, 0.0}, {24, 2.0, true, 0.0}});
  NodeField v1(torus.node_count()), v2(torus.node_count()), one(torus.node_count(), 1.0);
  for (std::size_t p = 0; p < v1.size(); ++p) {
    double x = torus.coordinate(p, 0), y = torus.coordinate(p, 1);
    v1[p] = std::exp(std::sin(2 * M_PI * x)) * std::cos(M_PI * y);
    v2[p] = std::sin(2 * M_PI * x + M_PI * y);
  }
  auto d1 = fd_partial(v1, torus, 0), d2 = fd_partial(v2, torus, 1);
  NodeField div(v1.size());
  for (std::size_t p = 0; p < div.size(); ++p) div[p] = d1[p] + d2[p];
  CHECK(std::abs(integrate(div, torus, one)) < 1e-10);
}

TEST_CASE("csv layout") {
  ParamMesh mesh({{8, 1.0, true, 0.0}});
  NodeField f(8, 2.0);
  std::ostringstream os;
  write_csv(os, mesh, {"s"}, {"f"}, {&f});
  auto text = os.str();
  CHECK(text.rfind("node,s,f\n", 0) == 0);
  CHECK(text.find("\n1,0.125,2\n") != std::string::npos);
}

TEST_CASE("scalar and AVX2 kernels are bit-identical") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> uni(-10.0, 10.0);
  for (std::size_t n : {0u, 1u, 3u, 4u, 7u, 64u, 1001u}) {
    std::vector<double> a(n), b(n), c(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = uni(rng), b[i] = uni(rng), c[i] = uni(rng);
    std::vector<double> s1(n), s2(n), s3(n);
    kernels::scalar::difference_scaled(a.data(), b.data(), s1.data(), n, 0.37);
    kernels::scalar::second_difference(a.data(), b.data(), c.data(), s2.data(), n, 1.0 / 3.0);
    kernels::scalar::multiply(a.data(), b.data(), s3.data(), n);
#if defined(__x86_64__) || defined(_M_X64)
    if (kernels::avx2_available()) {
      std::vector<double> v1(n), v2(n), v3(n);
      kernels::avx2::difference_scaled(a.data(), b.data(), v1.data(), n, 0.37);
      kernels::avx2::second_difference(a.data(), b.data(), c.data(), v2.data(), n, 1.0 / 3.0);
      kernels::avx2::multiply(a.data(), b.data(), v3.data(), n);
      CHECK(std::memcmp(s1.data(), v1.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(s2.data(), v2.data(), n * sizeof(double)) == 0);
      CHECK(std::memcmp(s3.data(), v3.data(), n * sizeof(double)) == 0);
    }
#endif
  }
}

TEST_CASE("stencils agree across dispatch paths") {
  ParamMesh mesh({{16, 1.0, false, 0.0}, {24, 1.0, true, 0.0}});
  NodeField f(mesh.node_count());
  for (std::size_t p = 0; p < f.size(); ++p)
    f[p] = std::sin(3 * mesh.coordinate(p, 0)) * std::cos(7 * mesh.coordinate(p, 1));
  kernels::force_isa(kernels::Isa::scalar);
  auto a0 = fd_partial(f, mesh, 0), a1 = fd_partial(f, mesh, 1), a2 = fd_second(f, mesh, 1);
  kernels::force_isa(kernels::Isa::avx2);
  auto b0 = fd_partial(f, mesh, 0), b1 = fd_partial(f, mesh, 1), b2 = fd_second(f, mesh, 1);
  kernels::force_isa(kernels::avx2_available() ? kernels::Isa::avx2 : kernels::Isa::scalar);
  CHECK(a0 == b0);
  CHECK(a1 == b1);
  CHECK(a2 == b2);
}
