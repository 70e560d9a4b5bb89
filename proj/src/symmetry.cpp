#include "lorentzlab/symmetry.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lorentzlab/curvature.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab {

std::string_view to_string(SymmetryClass c) {
  switch (c) {
    case SymmetryClass::killing: return "killing";
    case SymmetryClass::homothetic: return "homothetic";
    case SymmetryClass::conformal: return "conformal";
    case SymmetryClass::none: return "none";
  }
  return "none";
}

std::string_view to_string(SignClass c) {
  switch (c) {
    case SignClass::psd: return "psd";
    case SignClass::nsd: return "nsd";
    case SignClass::indefinite: return "indefinite";
    case SignClass::zero: return "zero";
  }
  return "indefinite";
}

std::vector<std::vector<double>> box_sample(const std::vector<double>& lo, const std::vector<double>& hi,
                                            std::size_t count, std::uint64_t seed) {
  if (lo.size() != hi.size()) throw ConfigError("region bounds must have equal length");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<std::vector<double>> pts(count, std::vector<double>(lo.size()));
  for (auto& p : pts)
    for (std::size_t a = 0; a < lo.size(); ++a) p[a] = lo[a] + (hi[a] - lo[a]) * uni(rng);
  return pts;
}

namespace {

struct SampleResult {
  double rho = 0.0, residual = 0.0, scale = 0.0;
  CausalClass cls = CausalClass::zero;
  bool neg = false, pos = false, pd = false, nd = false;
  std::size_t tests = 0;
  std::optional<bool> non_contracting, non_expanding;
};

// Unit timelike vector from the negative eigendirection of g, oriented along
// the future field.
std::vector<double> unit_observer(std::span<const double> g, std::span<const double> future) {
  const std::size_t m = future.size();
  Eigen::MatrixXd gm(m, m);
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) gm(a, b) = 0.5 * (g[a * m + b] + g[b * m + a]);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gm);
  std::vector<double> u(m);
  for (std::size_t a = 0; a < m; ++a) u[a] = es.eigenvectors()(static_cast<Eigen::Index>(a), 0);
  double q = inner(g, u, u);
  for (auto& v : u) v /= std::sqrt(-q);
  if (inner(g, u, future) > 0.0)
    for (auto& v : u) v = -v;
  return u;
}

SampleResult analyze_point(const MetricModel& model, const VectorField& field, std::span<const double> pt,
                           std::uint64_t seed, const SymmetryOptions& opt) {
  const std::size_t m = model.dim();
  SampleResult r;
  auto g = metric_at(model, pt);
  for (double v : g) r.scale = std::max(r.scale, std::abs(v));
  auto l = lie_derivative_metric(model, field, pt);
  auto gi = invert_matrix(g, m);
  double tr = 0.0;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) tr += gi[a * m + b] * l[b * m + a];
  r.rho = tr / (2.0 * static_cast<double>(m));
  for (std::size_t i = 0; i < m * m; ++i) r.residual = std::max(r.residual, std::abs(l[i] - 2.0 * r.rho * g[i]));
  auto f = model.future(pt);
  r.cls = classify_vector(g, f, field.value(pt));

  // L on the g-orthogonal complement of a unit observer, then random spacelike
  // vectors w + alpha U with |alpha| < 1
  auto u = unit_observer(g, f);
  std::vector<std::vector<double>> basis;
  for (std::size_t c = 0; c < m && basis.size() + 1 < m; ++c) {
    std::vector<double> v(m, 0.0);
    v[c] = 1.0;
    double k = inner(g, v, u);
    for (std::size_t a = 0; a < m; ++a) v[a] += k * u[a];
    for (const auto& e : basis) {
      double c2 = inner(g, v, e);
      for (std::size_t a = 0; a < m; ++a) v[a] -= c2 * e[a];
    }
    double q = inner(g, v, v);
    if (q < 1e-10) continue;
    for (auto& x : v) x /= std::sqrt(q);
    basis.push_back(v);
  }
  const std::size_t n = basis.size();
  std::vector<double> s(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s[i * n + j] = inner(l, basis[i], basis[j]);
  auto ev = symmetric_eigenvalues(s, n);
  const double tol = opt.sign_tolerance * r.scale;
  bool all_pos = ev.front() > tol, all_neg = ev.back() < -tol;
  r.neg = ev.front() < -tol;
  r.pos = ev.back() > tol;
  r.tests = n;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> alpha(-0.99, 0.99);
  for (std::size_t t = 0; t < opt.random_tests; ++t) {
    std::vector<double> w(m, 0.0);
    double norm2 = 0.0;
    std::vector<double> c(n);
    for (auto& x : c) {
      x = normal(rng);
      norm2 += x * x;
    }
    double al = alpha(rng);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t a = 0; a < m; ++a) w[a] += c[i] / std::sqrt(norm2) * basis[i][a];
    for (std::size_t a = 0; a < m; ++a) w[a] += al * u[a];
    double val = inner(l, w, w);
    if (val < -tol) {
      r.neg = true;
      all_pos = false;
    } else if (val > tol) {
      r.pos = true;
      all_neg = false;
    } else {
      all_pos = all_neg = false;
    }
  }
  r.tests += opt.random_tests;
  r.pd = all_pos;
  r.nd = all_neg;

  if (model.kind() == ModelKind::orthogonal_splitted) {
    auto jet = model.jet(pt, 1);
    double beta_t = -jet.d(0, 0, 0);
    std::vector<double> gt(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) gt[i * n + j] = jet.d(0, i + 1, j + 1);
    auto evt = symmetric_eigenvalues(gt, n);
    r.non_contracting = beta_t <= tol && evt.front() >= -tol;
    r.non_expanding = beta_t >= -tol && evt.back() <= tol;
  }
  return r;
}

}  // namespace

SymmetryReport analyze_vector_field(const MetricModel& model, const VectorFieldSpec& x,
                                    const std::vector<std::vector<double>>& region, std::uint64_t seed,
                                    const SymmetryOptions& options) {
  const std::size_t m = model.dim();
  if (!model.lorentzian()) throw ConfigError("symmetry analysis needs a Lorentzian model");
  if (x.size() != m) throw ConfigError("vector field needs " + std::to_string(m) + " components");
  if (region.size() < kMinSymmetrySamples)
    throw ConfigError("symmetry analysis needs at least " + std::to_string(kMinSymmetrySamples) + " sample points");
  for (const auto& p : region)
    if (p.size() != m) throw ConfigError("sample point dimension does not match the model");

  SymmetryReport rep;
  rep.points = region;
  rep.parallel_lightlike = model.parallel_lightlike();
  rep.kind = model.kind();

  auto lexpr = lie_derivative_metric_expr(model, x);
  rep.symbolic_killing = std::all_of(lexpr.begin(), lexpr.end(), [](const FieldExpr& e) { return e.is_constant(0.0); });
  bool constant_l = std::all_of(lexpr.begin(), lexpr.end(), [](const FieldExpr& e) { return e.is_constant(); });
  bool constant_g = true;
  for (std::size_t a = 0; a < m; ++a)
    for (std::size_t b = 0; b < m; ++b) constant_g = constant_g && model.component(a, b).is_constant();
  if (constant_l && constant_g && !rep.symbolic_killing) {
    std::vector<double> g(m * m), l(m * m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) {
        g[a * m + b] = model.component(a, b).constant_value();
        l[a * m + b] = lexpr[a * m + b].constant_value();
      }
    auto gi = invert_matrix(g, m);
    double tr = 0.0;
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b) tr += gi[a * m + b] * l[b * m + a];
    double rho = tr / (2.0 * static_cast<double>(m));
    bool exact = true;
    for (std::size_t i = 0; i < m * m; ++i) exact = exact && l[i] == 2.0 * rho * g[i];
    if (exact) rep.symbolic_rho = rho;
  }

  std::vector<SampleResult> res(region.size());
  VectorField field(x, model.coords());
  parallel_for(region.size(), [&](std::size_t i) {
    res[i] = analyze_point(model, field, region[i], seed + 0x9E3779B97F4A7C15ULL * (i + 1), options);
  });

  bool neg = false, pos = false;
  rep.future_causal = rep.past_causal = rep.strictly_causal = true;
  for (std::size_t i = 0; i < res.size(); ++i) {
    const auto& r = res[i];
    rep.rho.push_back(r.rho);
    rep.rho_min = i == 0 ? r.rho : std::min(rep.rho_min, r.rho);
    rep.rho_max = i == 0 ? r.rho : std::max(rep.rho_max, r.rho);
    rep.max_conformal_residual = std::max(rep.max_conformal_residual, r.residual);
    rep.scale = std::max(rep.scale, r.scale);
    switch (r.cls) {
      case CausalClass::future_timelike:
      case CausalClass::past_timelike: ++rep.timelike; break;
      case CausalClass::future_lightlike:
      case CausalClass::past_lightlike: ++rep.lightlike; break;
      case CausalClass::zero: ++rep.zero; break;
      case CausalClass::spacelike: ++rep.spacelike; break;
    }
    rep.future_causal = rep.future_causal && is_future_causal(r.cls);
    rep.past_causal = rep.past_causal && is_past_causal(r.cls);
    rep.strictly_causal = rep.strictly_causal && r.cls != CausalClass::zero && r.cls != CausalClass::spacelike;
    neg = neg || r.neg;
    pos = pos || r.pos;
    if (r.pd && !rep.positive_definite_at) rep.positive_definite_at = i;
    if (r.nd && !rep.negative_definite_at) rep.negative_definite_at = i;
    rep.sign_tests += r.tests;
    if (r.non_contracting) {
      rep.non_contracting = (i == 0 || rep.non_contracting.value_or(true)) && *r.non_contracting;
      rep.non_expanding = (i == 0 || rep.non_expanding.value_or(true)) && *r.non_expanding;
    }
  }
  rep.sign = neg && pos ? SignClass::indefinite : neg ? SignClass::nsd : pos ? SignClass::psd : SignClass::zero;

  rep.conformal_tolerance = options.conformal_tolerance;
  const double tol = options.conformal_tolerance * rep.scale;
  if (rep.symbolic_killing) {
    rep.classification = SymmetryClass::killing;
  } else if (rep.symbolic_rho) {
    rep.classification = SymmetryClass::homothetic;
  } else if (rep.max_conformal_residual < tol) {
    double rmax = std::max(std::abs(rep.rho_min), std::abs(rep.rho_max));
    if (rmax <= tol)
      rep.classification = SymmetryClass::killing;
    else if (rep.rho_max - rep.rho_min <= options.conformal_tolerance * std::max(1.0, rmax))
      rep.classification = SymmetryClass::homothetic;
    else
      rep.classification = SymmetryClass::conformal;
  } else {
    rep.classification = SymmetryClass::none;
  }
  rep.certification = rep.symbolic_killing || rep.symbolic_rho ? "symbolic" : "sampled-" + std::to_string(rep.sign_tests);
  return rep;
}

std::vector<TheoremVerdict> theorem_applicability(const SymmetryReport& r) {
  std::vector<TheoremVerdict> out;
  const bool oriented = r.future_causal || r.past_causal;
  const bool psd = r.sign == SignClass::psd || r.sign == SignClass::zero;
  const bool nsd = r.sign == SignClass::nsd || r.sign == SignClass::zero;
  // orientation of the excluded mean curvature: future when (X future, L >= 0)
  // or (X past, L <= 0)
  auto excluded_side = [&](bool lie_nonneg, bool lie_nonpos) -> std::string {
    bool fut = (r.future_causal && lie_nonneg) || (r.past_causal && lie_nonpos);
    bool past = (r.future_causal && lie_nonpos) || (r.past_causal && lie_nonneg);
    if (fut && past) return "future or past";
    if (fut) return "future";
    if (past) return "past";
    return "";
  };

  {
    TheoremVerdict v;
    v.id = "causal_lie_definite";
    bool pd = psd && r.positive_definite_at.has_value();
    bool nd = nsd && r.negative_definite_at.has_value();
    v.hypotheses = {{"time_oriented_causal", oriented},
                    {"lie_semidefinite_on_spacelike", psd || nsd},
                    {"definite_at_some_sample", pd || nd}};
    std::string side = oriented ? excluded_side(pd, nd) : "";
    v.applies = !side.empty();
    if (v.applies) {
      v.excluded = "compact spacelike submanifolds with " + side + " causal mean curvature, extremal included";
      std::size_t at = pd ? *r.positive_definite_at : *r.negative_definite_at;
      v.witness = r.points[at];
    }
    v.certification = r.certification;
    out.push_back(v);
  }
  {
    TheoremVerdict v;
    v.id = "strictly_causal_lie_semidefinite";
    v.hypotheses = {{"time_oriented_strictly_causal", oriented && r.strictly_causal},
                    {"lie_semidefinite_on_spacelike", psd || nsd}};
    std::string side = oriented && r.strictly_causal ? excluded_side(psd, nsd) : "";
    v.applies = !side.empty();
    if (v.applies)
      v.excluded = "compact spacelike submanifolds with " + side + " causal mean curvature nonzero somewhere";
    v.certification = r.certification;
    out.push_back(v);
  }
  {
    TheoremVerdict v;
    v.id = "strictly_causal_killing";
    bool killing = r.classification == SymmetryClass::killing;
    v.hypotheses = {{"killing", killing}, {"strictly_causal", r.strictly_causal},
                    {"declared_parallel_lightlike", r.parallel_lightlike}};
    v.applies = killing && r.strictly_causal;
    if (v.applies) v.excluded = "compact spacelike submanifolds with future or past causal mean curvature, except H = 0";
    v.certification = r.certification;
    out.push_back(v);
  }
  const bool conformal = r.classification != SymmetryClass::none;
  const double tol = r.conformal_tolerance * std::max(r.scale, 1.0);
  const bool rho_nonneg = r.rho_min >= -tol, rho_nonpos = r.rho_max <= tol;
  const bool rho_nonzero = std::max(std::abs(r.rho_min), std::abs(r.rho_max)) > tol;
  {
    TheoremVerdict v;
    v.id = "conformal_signed";
    v.hypotheses = {{"conformal", conformal},
                    {"time_oriented_strictly_causal", oriented && r.strictly_causal},
                    {"rho_signed", rho_nonneg || rho_nonpos}};
    std::string side = conformal && oriented && r.strictly_causal ? excluded_side(rho_nonneg, rho_nonpos) : "";
    v.applies = !side.empty();
    if (v.applies)
      v.excluded = "compact spacelike submanifolds with " + side + " time-oriented causal mean curvature, except H = 0";
    v.certification = r.certification;
    out.push_back(v);
  }
  {
    TheoremVerdict v;
    v.id = "conformal_nonzero_signed";
    v.hypotheses = {{"conformal", conformal},
                    {"time_oriented_strictly_causal", oriented && r.strictly_causal},
                    {"rho_signed", rho_nonneg || rho_nonpos},
                    {"rho_not_identically_zero", rho_nonzero}};
    std::string side = conformal && oriented && r.strictly_causal && rho_nonzero
                           ? excluded_side(rho_nonneg, rho_nonpos)
                           : "";
    v.applies = !side.empty();
    if (v.applies)
      v.excluded = "compact spacelike submanifolds with " + side + " causal mean curvature, extremal included";
    v.certification = r.certification;
    out.push_back(v);
  }
  {
    TheoremVerdict v;
    v.id = "orthogonal_splitted_monotone";
    bool split = r.kind == ModelKind::orthogonal_splitted;
    bool nc = r.non_contracting.value_or(false), ne = r.non_expanding.value_or(false);
    v.hypotheses = {{"orthogonal_splitted", split}, {"non_contracting", nc}, {"non_expanding", ne}};
    v.applies = split && (nc || ne);
    if (v.applies) {
      std::string side = nc && ne ? "future or past" : nc ? "future" : "past";
      v.excluded = "compact spacelike submanifolds with " + side + " causal mean curvature nonzero somewhere";
    }
    v.certification = "sampled-" + std::to_string(r.points.size());
    out.push_back(v);
  }
  return out;
}

}  // namespace lorentzlab
