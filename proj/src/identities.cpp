#include "lorentzlab/identities.hpp"

#include <algorithm>
#include <cmath>

#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab {

namespace {

// Orthonormal frame from the coordinate tangents, [i][a].
std::vector<double> orthonormal_frame(const ImmersedSubmanifold& imm, std::size_t p, double rotation) {
  const std::size_t n = imm.n(), m = imm.m();
  auto g = imm.ambient_metric(p);
  std::vector<double> e(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> ei(e.data() + i * m, m);
    auto t = imm.tangent(p, i);
    std::copy(t.begin(), t.end(), ei.begin());
    for (std::size_t j = 0; j < i; ++j) {
      std::span<const double> ej(e.data() + j * m, m);
      double c = inner(g, ei, ej);
      for (std::size_t a = 0; a < m; ++a) ei[a] -= c * ej[a];
    }
    double norm = std::sqrt(inner(g, ei, ei));
    for (auto& v : ei) v /= norm;
  }
  if (rotation != 0.0 && n >= 2) {
    double c = std::cos(rotation), s = std::sin(rotation);
    for (std::size_t a = 0; a < m; ++a) {
      double e1 = e[a], e2 = e[m + a];
      e[a] = c * e1 - s * e2;
      e[m + a] = s * e1 + c * e2;
    }
  }
  return e;
}

}  // namespace

NodeField div_S(const ImmersedSubmanifold& imm, const VectorFieldSpec& x, double rotation) {
  const std::size_t n = imm.n(), m = imm.m();
  if (x.size() != m) throw ConfigError("vector field needs " + std::to_string(m) + " components");
  VectorField field(x, imm.ambient().coords());
  NodeField out(imm.node_count());
  parallel_for(imm.node_count(), [&](std::size_t p) {
    auto pt = imm.point(p);
    auto conn = christoffel_at(imm.ambient(), pt);
    auto g = imm.ambient_metric(p);
    auto xv = field.value(pt);
    auto dx = field.jacobian(pt);
    auto e = orthonormal_frame(imm, p, rotation);
    std::vector<double> cov(m);
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::span<const double> ei(e.data() + i * m, m);
      for (std::size_t a = 0; a < m; ++a) {
        double v = 0.0;
        for (std::size_t b = 0; b < m; ++b) {
          v += dx[a * m + b] * ei[b];
          for (std::size_t c = 0; c < m; ++c) v += conn(a, b, c) * ei[b] * xv[c];
        }
        cov[a] = v;
      }
      sum += inner(g, cov, ei);
    }
    out[p] = sum;
  });
  return out;
}

NodeField tangential_divergence(const ImmersedSubmanifold& imm, const VectorFieldSpec& x) {
  const std::size_t n = imm.n(), m = imm.m(), count = imm.node_count();
  if (x.size() != m) throw ConfigError("vector field needs " + std::to_string(m) + " components");
  VectorField field(x, imm.ambient().coords());
  // flux[i][node] = sqrt(g) (X^T)^i
  std::vector<NodeField> flux(n, NodeField(count));
  parallel_for(count, [&](std::size_t p) {
    auto xv = field.value(imm.point(p));
    auto g = imm.ambient_metric(p);
    auto gi = imm.induced_inverse(p);
    std::vector<double> proj(n);
    for (std::size_t j = 0; j < n; ++j) proj[j] = inner(g, xv, imm.tangent(p, j));
    for (std::size_t i = 0; i < n; ++i) {
      double v = 0.0;
      for (std::size_t j = 0; j < n; ++j) v += gi[i * n + j] * proj[j];
      flux[i][p] = imm.density()[p] * v;
    }
  });
  NodeField out(count, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    NodeField d = fd_partial(flux[i], imm.mesh(), i);
    for (std::size_t p = 0; p < count; ++p) out[p] += d[p];
  }
  for (std::size_t p = 0; p < count; ++p) out[p] /= imm.density()[p];
  return out;
}

NodeField normal_pairing(const ImmersedSubmanifold& imm, const MeanCurvatureReport& h, const VectorFieldSpec& x) {
  const std::size_t m = imm.m();
  VectorField field(x, imm.ambient().coords());
  NodeField out(imm.node_count());
  parallel_for(imm.node_count(), [&](std::size_t p) {
    auto xv = field.value(imm.point(p));
    out[p] = inner(imm.ambient_metric(p), xv, h.at(p));
  });
  (void)m;
  return out;
}

namespace {

IdentityReport build_report(const ImmersedSubmanifold& imm, const VectorFieldSpec& x, bool with_integral) {
  IdentityReport r;
  auto h = mean_curvature_vector(imm);
  auto ds = div_S(imm, x);
  auto pair = normal_pairing(imm, h, x);
  auto td = tangential_divergence(imm, x);
  const std::size_t count = imm.node_count();
  r.residual.resize(count);
  for (std::size_t p = 0; p < count; ++p) {
    r.residual[p] = td[p] - ds[p] + pair[p];
    r.max_residual = std::max(r.max_residual, std::abs(r.residual[p]));
  }
  r.div_s = ds;
  r.pairing = pair;
  for (std::size_t k = 0; k < imm.n(); ++k) r.spacing = std::max(r.spacing, imm.mesh().spacing(k));
  r.closed = imm.mesh().all_periodic();
  if (!with_integral) return r;

  const auto& dens = imm.density();
  NodeField integrand(count), magnitude(count), ones(count, 1.0);
  for (std::size_t p = 0; p < count; ++p) {
    integrand[p] = ds[p] - pair[p];
    magnitude[p] = std::abs(ds[p]) + std::abs(pair[p]);
  }
  r.integral = integrate(integrand, imm.mesh(), dens);
  r.integral_div_s = integrate(ds, imm.mesh(), dens);
  r.integral_pairing = integrate(pair, imm.mesh(), dens);
  r.volume = integrate(ones, imm.mesh(), dens);
  double scale = integrate(magnitude, imm.mesh(), dens);
  r.relative_gap = scale > 0.0 ? std::abs(r.integral) / scale : 0.0;
  r.theorem_witness = r.relative_gap > kWitnessThreshold;
  return r;
}

}  // namespace

IdentityReport divergence_identity(const ImmersedSubmanifold& imm, const VectorFieldSpec& x) {
  return build_report(imm, x, false);
}

IdentityReport verify_integral_formula(const ImmersedSubmanifold& imm, const VectorFieldSpec& x) {
  if (imm.mesh().has_boundary())
    throw HypothesisError("integral formula needs a closed submanifold (all mesh axes periodic)");
  return build_report(imm, x, true);
}

VectorFieldSpec random_polynomial_field(const std::vector<std::string>& coords, int degree, double scale,
                                        std::mt19937_64& rng) {
  std::uniform_real_distribution<double> uni(-scale, scale);
  const std::size_t m = coords.size();
  // monomials as exponent vectors, total degree <= degree, in lexicographic order
  std::vector<std::vector<int>> monomials;
  std::vector<int> e(m, 0);
  auto rec = [&](auto&& self, std::size_t k, int left) -> void {
    if (k == m) {
      monomials.push_back(e);
      return;
    }
    for (int d = 0; d <= left; ++d) {
      e[k] = d;
      self(self, k + 1, left - d);
    }
    e[k] = 0;
  };
  rec(rec, 0, degree);
  VectorFieldSpec out;
  for (std::size_t a = 0; a < m; ++a) {
    FieldExpr comp = FieldExpr::constant(0.0);
    for (const auto& mono : monomials) {
      FieldExpr term = FieldExpr::constant(uni(rng));
      for (std::size_t k = 0; k < m; ++k)
        if (mono[k] > 0) term = term * FieldExpr::power(FieldExpr::variable(coords[k]), mono[k]);
      comp = comp + term;
    }
    out.push_back(comp);
  }
  return out;
}

}  // namespace lorentzlab
