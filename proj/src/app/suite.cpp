#include "lorentzlab/app/suite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <random>

#include "lorentzlab/error.hpp"
#include "lorentzlab/identities.hpp"
#include "lorentzlab/parallel.hpp"

namespace lorentzlab::app {

namespace {

// Pinned acceptance tolerances.
constexpr double kConstantStability = 0.25;      // C = residual / h^2 within +-25% across refinements
constexpr double kExactResidual = 1e-11;         // residuals at rounding level need no rate
constexpr double kIntegralRatioLo = 3.0;
constexpr double kIntegralRatioHi = 5.0;
constexpr double kIntegralBound = 1e-6;          // |integral| at 128^2
constexpr double kIntegralRatioFloor = 1e-12;    // integrals at rounding level carry no rate
constexpr double kKillingFloor = 1e-8;
constexpr double kKillingConstant = 1.0;         // div_S(d_t) <= floor + C h^2
constexpr double kEulerFloor = 1e-12;
constexpr double kEulerConstant = 1.0;           // |div_S K - n| <= floor + C h^2
constexpr double kMeanCurvatureNormTolerance = 0.01;
constexpr double kOrderLo = 1.6;
constexpr double kOrderHi = 2.4;
constexpr double kRigiditySpread = 1e-8;
constexpr double kNecessaryIdentityTolerance = 1e-12;
constexpr double kDirichletTolerance = 1e-8;
constexpr double kConstraintTolerance = 1e-9;
constexpr double kDecompositionFloor = 1e-12;
constexpr double kDecompositionConstant = 1.0;   // discrepancy <= floor + C h^2

constexpr double kTwoPi = 6.283185307179586;

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

class Runner {
public:
  Json run(const std::string& command, const Json& config) {
    auto key = command + "\n" + config.dump();
    if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    auto report = run_command(command, config, RunContext{}).report;
    cache_.emplace(key, report);
    return report;
  }

private:
  std::map<std::string, Json> cache_;
};

bool ok(const Json& report) { return report.at("exit_code").get<int>() == kExitOk; }

std::string error_text(const Json& report) {
  if (report.contains("error")) return report["error"]["message"].get<std::string>();
  return "exit code " + std::to_string(report.at("exit_code").get<int>());
}

Json mesh_cfg(const std::vector<std::string>& params, const std::vector<int>& nodes, const std::vector<double>& length,
              const std::vector<bool>& periodic, const std::vector<double>& origin) {
  return Json{{"params", params}, {"nodes", nodes}, {"length", length}, {"periodic", periodic}, {"origin", origin}};
}

Json torus_mesh(const std::vector<std::string>& params, int n) {
  std::size_t d = params.size();
  return mesh_cfg(params, std::vector<int>(d, n), std::vector<double>(d, kTwoPi), std::vector<bool>(d, true),
                  std::vector<double>(d, 0.0));
}

Json minkowski4() { return Json{{"kind", "minkowski"}, {"dim", 4}, {"coords", {"t", "x", "y", "z"}}}; }

Json no_csv() { return Json{{"csv", false}}; }

// Explicit rows: a braced 2x2 list of strings would read as an object.
Json matrix(const std::vector<std::vector<std::string>>& rows) {
  Json out = Json::array();
  for (const auto& r : rows) out.push_back(r);
  return out;
}

struct Immersion {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::string> map;
  std::vector<int> levels;  // nodes per axis, each a refinement of the last
};

// Closed spacelike model immersions in 4D Minkowski.
std::vector<Immersion> model_immersions() {
  return {
      {"bumped_torus_of_revolution", {"u", "v"},
       {"0.1*sin(u)*cos(2*v)", "(2+cos(u))*cos(v)", "(2+cos(u))*sin(v)", "sin(u)"},
       {32, 64, 128}},
      {"tilted_torus", {"u", "v"},
       {"0.1*cos(u+v)", "(2+0.7*cos(u))*cos(v)", "(2+0.7*cos(u))*sin(v)", "0.7*sin(u)+0.2*cos(v)"},
       {32, 64, 128}},
      // 1D meshes are cheap; the coarsest level resolves the curve
      {"space_curve", {"s"}, {"0.1*sin(2*s)", "cos(s)", "2*sin(s)", "0.3*sin(3*s)"}, {128, 256, 512}},
  };
}

Json identities_cfg(const Json& model, const Immersion& imm, int n, const VectorFieldSpec& field) {
  std::vector<std::string> comps;
  for (const auto& c : field) comps.push_back(c.to_string());
  return Json{{"model", model},
              {"mesh", torus_mesh(imm.params, n)},
              {"immersion", Json{{"map", imm.map}}},
              {"field", Json{{"components", comps}}},
              {"output", no_csv()}};
}

std::vector<VectorFieldSpec> random_fields(std::uint64_t seed, std::size_t count) {
  std::mt19937_64 rng(seed);
  std::vector<VectorFieldSpec> out;
  for (std::size_t i = 0; i < count; ++i) out.push_back(random_polynomial_field({"t", "x", "y", "z"}, 2, 1.0, rng));
  return out;
}

constexpr int kLevels[] = {32, 64, 128};
constexpr std::size_t kFieldCount = 20;

double spacing_of(const Json& report) { return report["identity"]["spacing"].get<double>(); }

// ------------------------------------------------------------------------ 1

CriterionOutcome criterion1(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{1, "divergence_identity_second_order", true, "", Json::object(), {}};
  auto fields = random_fields(seed + 101, kFieldCount);
  Json cases = Json::array();
  double worst_drift = 0.0;
  for (const auto& imm : model_immersions()) {
    for (std::size_t f = 0; f < fields.size(); ++f) {
      std::vector<double> c;
      bool exact = true;
      bool failed = false;
      Json levels = Json::array();
      std::vector<Json> cfgs;
      for (int n : imm.levels) {
        auto cfg = identities_cfg(minkowski4(), imm, n, fields[f]);
        cfgs.push_back(cfg);
        auto rep = run.run("identities", cfg);
        if (!ok(rep)) {
          failed = true;
          levels.push_back(Json{{"nodes", n}, {"error", error_text(rep)}});
          continue;
        }
        double res = rep["identity"]["max_residual"].get<double>();
        double h = spacing_of(rep);
        exact = exact && res <= kExactResidual;
        c.push_back(res / (h * h));
        levels.push_back(Json{{"nodes", n}, {"max_residual", res}, {"constant", res / (h * h)}});
      }
      double drift = 0.0;
      if (!failed && !exact)
        for (std::size_t k = 1; k < c.size(); ++k) drift = std::max(drift, std::abs(c[k] / c[k - 1] - 1.0));
      bool pass = !failed && drift <= kConstantStability;
      worst_drift = std::max(worst_drift, drift);
      cases.push_back(Json{{"immersion", imm.name}, {"field", f}, {"levels", levels}, {"drift", drift},
                           {"exact", exact}, {"passed", pass}});
      if (!pass) {
        o.passed = false;
        o.replay.push_back({"identities", cfgs.back()});
      }
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_constant_drift", worst_drift}, {"allowed_drift", kConstantStability}};
  o.summary = "60 cases, worst drift of residual/h^2 " + fmt("%.3f", worst_drift) + " (allowed " +
              fmt("%.2f", kConstantStability) + ")";
  return o;
}

// ------------------------------------------------------------------------ 2

CriterionOutcome criterion2(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{2, "integral_formula_rate_and_bound", true, "", Json::object(), {}};
  auto fields = random_fields(seed + 101, kFieldCount);
  Json cases = Json::array();
  double worst_final = 0.0, ratio_min = 1e300, ratio_max = 0.0;
  std::size_t rate_failures = 0, bound_failures = 0;
  for (const auto& imm : model_immersions()) {
    if (imm.params.size() != 2) continue;  // tori only
    for (std::size_t f = 0; f < fields.size(); ++f) {
      std::vector<double> integral;
      bool failed = false;
      Json cfg_last;
      for (int n : imm.levels) {
        cfg_last = identities_cfg(minkowski4(), imm, n, fields[f]);
        auto rep = run.run("identities", cfg_last);
        if (!ok(rep)) {
          failed = true;
          cases.push_back(Json{{"immersion", imm.name}, {"field", f}, {"nodes", n}, {"error", error_text(rep)}});
          break;
        }
        integral.push_back(rep["identity"]["integral"].get<double>());
      }
      Json ratios = Json::array();
      bool rate_ok = !failed;
      for (std::size_t k = 1; !failed && k < integral.size(); ++k) {
        if (std::abs(integral[k - 1]) <= kIntegralRatioFloor) {
          ratios.push_back(nullptr);
          continue;
        }
        double r = std::abs(integral[k - 1]) / std::abs(integral[k]);
        ratios.push_back(r);
        ratio_min = std::min(ratio_min, r);
        ratio_max = std::max(ratio_max, r);
        rate_ok = rate_ok && r >= kIntegralRatioLo && r <= kIntegralRatioHi;
      }
      double final_abs = failed ? INFINITY : std::abs(integral.back());
      bool bound_ok = final_abs <= kIntegralBound;
      worst_final = std::max(worst_final, final_abs);
      if (!rate_ok) ++rate_failures;
      if (!bound_ok) ++bound_failures;
      cases.push_back(Json{{"immersion", imm.name}, {"field", f}, {"integrals", integral}, {"ratios", ratios},
                           {"rate_ok", rate_ok}, {"bound_ok", bound_ok}});
      if (!rate_ok || !bound_ok) {
        o.passed = false;
        o.replay.push_back({"identities", cfg_last});
      }
    }
  }
  o.detail = Json{{"cases", cases},
                  {"ratio_min", ratio_min},
                  {"ratio_max", ratio_max},
                  {"worst_integral_at_128", worst_final},
                  {"rate_failures", rate_failures},
                  {"bound_failures", bound_failures},
                  {"bound", kIntegralBound}};
  o.summary = "halving ratios in [" + fmt("%.3f", ratio_min) + ", " + fmt("%.3f", ratio_max) +
              "], worst |integral| at 128^2 " + fmt("%.3e", worst_final) + " (bound " + fmt("%.0e", kIntegralBound) +
              "), " + std::to_string(bound_failures) + " over bound";
  return o;
}

// ------------------------------------------------------------------------ 3

Json static_model2() {
  return Json{{"kind", "standard_static"},
              {"coords", {"t", "x", "y"}},
              {"h", "1+0.3*sin(x)"},
              {"g0", matrix({{"1", "0"}, {"0", "1+0.2*cos(y)"}})}};
}

std::string random_graph(std::mt19937_64& rng, const std::vector<std::string>& v, double amp) {
  std::uniform_real_distribution<double> a(-amp, amp), ph(0.0, kTwoPi);
  std::string s = num(a(rng)) + "*sin(" + v[0] + "+" + num(ph(rng)) + ")";
  s += "+" + num(a(rng)) + "*cos(" + v[1] + "+" + num(ph(rng)) + ")";
  s += "+" + num(a(rng)) + "*sin(" + v[0] + "+" + v[1] + "+" + num(ph(rng)) + ")";
  s += "+" + num(a(rng)) + "*cos(2*" + v[0] + "-" + v[1] + "+" + num(ph(rng)) + ")";
  if (v.size() > 2) s += "+" + num(a(rng)) + "*sin(" + v[2] + "+" + v[0] + "+" + num(ph(rng)) + ")";
  return s;
}

CriterionOutcome criterion3(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{3, "killing_time_field_divergence", true, "", Json::object(), {}};
  std::mt19937_64 rng(seed + 303);
  Json cases = Json::array();
  double worst_div = 0.0, worst_pair = 0.0;
  for (int g = 0; g < 10; ++g) {
    auto u = random_graph(rng, {"x", "y"}, 0.1);
    for (int n : {64, 128}) {
      Json cfg{{"model", static_model2()},
               {"mesh", torus_mesh({"x", "y"}, n)},
               {"immersion", Json{{"map", {u, "x", "y"}}}},
               {"field", Json{{"components", {"1", "0", "0"}}}},
               {"output", no_csv()}};
      auto rep = run.run("identities", cfg);
      if (!ok(rep)) {
        o.passed = false;
        cases.push_back(Json{{"graph", g}, {"nodes", n}, {"error", error_text(rep)}});
        o.replay.push_back({"identities", cfg});
        continue;
      }
      double h = spacing_of(rep);
      double bound = kKillingFloor + kKillingConstant * h * h;
      double div = rep["identity"]["div_s"]["max_abs"].get<double>();
      double pair = std::abs(rep["identity"]["integral_pairing"].get<double>());
      double vol = rep["identity"]["volume"].get<double>();
      bool pass = div <= bound && pair <= bound * vol;
      worst_div = std::max(worst_div, div);
      worst_pair = std::max(worst_pair, pair / vol);
      cases.push_back(Json{{"graph", g}, {"u", u}, {"nodes", n}, {"max_div_s", div},
                           {"integral_pairing", pair}, {"volume", vol}, {"bound", bound}, {"passed", pass}});
      if (!pass) {
        o.passed = false;
        o.replay.push_back({"identities", cfg});
      }
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_div_s", worst_div}, {"worst_pairing_per_volume", worst_pair}};
  o.summary = "10 graphs, max |div_S d_t| " + fmt("%.2e", worst_div) + ", max |int g(d_t,H)|/vol " +
              fmt("%.2e", worst_pair) + " (bound 1e-8 + " + fmt("%g", kKillingConstant) + " h^2)";
  return o;
}

// ------------------------------------------------------------------------ 4

CriterionOutcome criterion4(Runner& run, std::uint64_t) {
  CriterionOutcome o{4, "euler_homothety_divergence", true, "", Json::object(), {}};
  VectorFieldSpec euler{parse_expr("t"), parse_expr("x"), parse_expr("y"), parse_expr("z")};
  Json cases = Json::array();
  double worst = 0.0;
  for (const auto& imm : model_immersions()) {
    if (imm.params.size() != 2) continue;
    for (int n : imm.levels) {
      auto cfg = identities_cfg(minkowski4(), imm, n, euler);
      auto rep = run.run("identities", cfg);
      if (!ok(rep)) {
        o.passed = false;
        o.replay.push_back({"identities", cfg});
        cases.push_back(Json{{"immersion", imm.name}, {"nodes", n}, {"error", error_text(rep)}});
        continue;
      }
      const double dim = 2.0;
      double h = spacing_of(rep);
      double dev = std::max(std::abs(rep["identity"]["div_s"]["max"].get<double>() - dim),
                            std::abs(rep["identity"]["div_s"]["min"].get<double>() - dim));
      double bound = kEulerFloor + kEulerConstant * h * h;
      bool pass = dev <= bound;
      worst = std::max(worst, dev);
      cases.push_back(Json{{"immersion", imm.name}, {"nodes", n}, {"max_deviation", dev}, {"bound", bound},
                           {"passed", pass}});
      if (!pass) {
        o.passed = false;
        o.replay.push_back({"identities", cfg});
      }
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_deviation", worst}};
  o.summary = "max |div_S K - n| " + fmt("%.2e", worst);
  return o;
}

// ------------------------------------------------------------------------ 5

Json sphere_cfg(const Json& model, double r, int n) {
  auto R = num(r);
  return Json{{"model", model},
              {"mesh", mesh_cfg({"th", "ph"}, {n, n}, {3.141592653589793 - 0.6, kTwoPi}, {false, true}, {0.3, 0.0})},
              {"immersion",
               Json{{"map", {"0", R + "*sin(th)*cos(ph)", R + "*sin(th)*sin(ph)", R + "*cos(th)"}}}},
              {"output", no_csv()}};
}

Json expanding_model() {
  return Json{{"kind", "orthogonal_splitted"},
              {"coords", {"t", "x", "y", "z"}},
              {"beta", "1"},
              {"gt", {{"exp(2*t)", "0", "0"}, {"0", "exp(2*t)", "0"}, {"0", "0", "exp(2*t)"}}}};
}

CriterionOutcome criterion5(Runner& run, std::uint64_t) {
  CriterionOutcome o{5, "trapped_classification", true, "", Json::object(), {}};
  Json cases = Json::array();
  auto check = [&](const std::string& name, const Json& cfg, const std::string& want, double norm_target) {
    auto rep = run.run("classify", cfg);
    bool pass = ok(rep);
    Json c{{"case", name}, {"expected", want}};
    if (pass) {
      auto tag = rep["classification"]["tag"].get<std::string>();
      c["tag"] = tag;
      pass = tag == want;
      if (norm_target > 0.0) {
        auto nn = rep["mean_curvature"]["norm_squared"];
        double lo = std::sqrt(std::max(0.0, nn["min"].get<double>()));
        double hi = std::sqrt(std::max(0.0, nn["max"].get<double>()));
        double rel = std::max(std::abs(lo - norm_target), std::abs(hi - norm_target)) / norm_target;
        auto counts = rep["class_counts"];
        bool non_causal = counts["spacelike"].get<std::size_t>() > 0 &&
                          counts["future_timelike"].get<std::size_t>() + counts["past_timelike"].get<std::size_t>() +
                                  counts["future_lightlike"].get<std::size_t>() +
                                  counts["past_lightlike"].get<std::size_t>() + counts["zero"].get<std::size_t>() ==
                              0;
        c["norm_relative_error"] = rel;
        c["non_causal"] = non_causal;
        pass = pass && rel <= kMeanCurvatureNormTolerance && non_causal;
      }
    } else {
      c["error"] = error_text(rep);
    }
    c["passed"] = pass;
    cases.push_back(c);
    if (!pass) {
      o.passed = false;
      o.replay.push_back({"classify", cfg});
    }
  };
  Json flat{{"model", minkowski4()},
            {"mesh", torus_mesh({"u", "v"}, 32)},
            {"immersion", Json{{"map", {"0", "u", "v", "0"}}}},
            {"output", no_csv()}};
  check("flat_slice", flat, "extremal", 0.0);
  check("round_sphere_r2_96", sphere_cfg(minkowski4(), 2.0, 96), "mixed", 1.0);
  // -dt^2 + e^{2t} dx^2: at t = 0 the sphere of coordinate radius r has
  // g(H,H) = 4/r^2 - 4, causal (past pointing) for r > 1
  for (double r : {2.0, 1.25}) check("expanding_sphere_r" + num(r), sphere_cfg(expanding_model(), r, 64), "past_trapped", 0.0);
  for (double r : {0.8, 0.5}) check("expanding_sphere_r" + num(r), sphere_cfg(expanding_model(), r, 64), "mixed", 0.0);
  o.detail = Json{{"cases", cases}, {"expanding_threshold_radius", 1.0}};
  std::size_t passed = 0;
  for (const auto& c : cases) passed += c["passed"].get<bool>();
  o.summary = std::to_string(passed) + "/" + std::to_string(cases.size()) + " classification cases";
  return o;
}

// ------------------------------------------------------------------------ 6

Json static_model3() {
  return Json{{"kind", "standard_static"},
              {"coords", {"t", "x", "y", "z"}},
              {"h", "1+0.3*sin(x)*cos(z)"},
              {"g0", {{"1", "0", "0"}, {"0", "1+0.2*cos(y)", "0"}, {"0", "0", "1"}}}};
}

CriterionOutcome criterion6(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{6, "time_function_laplacian", true, "", Json::object(), {}};
  std::mt19937_64 rng(seed + 606);
  Json cases = Json::array();
  double order_min = 1e300, order_max = -1e300;
  auto one = [&](const std::string& form, const Json& model, const std::vector<std::string>& params,
                 const std::vector<int>& levels, int g) {
    auto u = random_graph(rng, params, 0.1);
    std::vector<double> res, hs;
    Json cfg_last;
    bool failed = false;
    for (int n : levels) {
      cfg_last = Json{{"model", model},
                      {"mesh", torus_mesh(params, n)},
                      {"graph", Json{{"u", u}, {"laplacian", form}}},
                      {"output", no_csv()}};
      auto rep = run.run("graph", cfg_last);
      if (!ok(rep)) {
        failed = true;
        cases.push_back(Json{{"form", form}, {"graph", g}, {"nodes", n}, {"error", error_text(rep)}});
        break;
      }
      res.push_back(rep["laplacian"]["max_residual"].get<double>());
      hs.push_back(kTwoPi / n);
    }
    if (!failed) {
      double order = std::log(res[0] / res[1]) / std::log(hs[0] / hs[1]);
      bool pass = order >= kOrderLo && order <= kOrderHi;
      order_min = std::min(order_min, order);
      order_max = std::max(order_max, order);
      cases.push_back(Json{{"form", form}, {"graph", g}, {"u", u}, {"levels", levels}, {"max_residual", res},
                           {"constant", res.back() / (hs.back() * hs.back())}, {"order", order},
                           {"passed", pass}});
      if (pass) return;
    }
    o.passed = false;
    o.replay.push_back({"graph", cfg_last});
  };
  for (int g = 0; g < 5; ++g) one("lap1", static_model2(), {"x", "y"}, {32, 64}, g);
  for (int g = 0; g < 5; ++g) one("conforme", static_model3(), {"x", "y", "z"}, {16, 24}, g);
  o.detail = Json{{"cases", cases}, {"order_min", order_min}, {"order_max", order_max},
                  {"order_window", {kOrderLo, kOrderHi}}};
  o.summary = "observed orders in [" + fmt("%.3f", order_min) + ", " + fmt("%.3f", order_max) + "]";
  return o;
}

// ------------------------------------------------------------------- solver

Json flat_static(const std::string& h) {
  return Json{{"kind", "standard_static"}, {"coords", {"t", "x", "y"}}, {"h", h}, {"g0", matrix({{"1", "0"}, {"0", "1"}})}};
}

std::string random_guess(std::mt19937_64& rng, double amp, double offset) {
  std::uniform_real_distribution<double> a(-amp, amp);
  std::string s = num(offset);
  s += "+" + num(a(rng)) + "*sin(2*pi*x)";
  s += "+" + num(a(rng)) + "*cos(2*pi*y)";
  s += "+" + num(a(rng)) + "*sin(2*pi*(x+y))";
  s += "+" + num(a(rng)) + "*cos(4*pi*x)";
  return s;
}

// Vanishes on the boundary of the unit box, so the guess matches constant
// Dirichlet data.
std::string random_box_guess(std::mt19937_64& rng, double amp, double offset) {
  std::uniform_real_distribution<double> a(-amp, amp);
  std::string s = num(offset);
  s += "+" + num(a(rng)) + "*sin(pi*x)*sin(pi*y)";
  s += "+" + num(a(rng)) + "*sin(2*pi*x)*sin(pi*y)";
  s += "+" + num(a(rng)) + "*sin(pi*x)*sin(3*pi*y)";
  return s;
}

constexpr int kSolverNodes = 32;

CriterionOutcome criterion7(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{7, "calabi_bernstein_rigidity", true, "", Json::object(), {}};
  std::mt19937_64 rng(seed + 707);
  Json cases = Json::array();
  double worst = 0.0;
  for (const char* h : {"1", "1+0.3*sin(2*pi*x)"}) {
    for (int k = 0; k < 10; ++k) {
      Json cfg{{"model", flat_static(h)},
               {"mesh", mesh_cfg({"x", "y"}, {kSolverNodes, kSolverNodes}, {1, 1}, {true, true}, {0, 0})},
               {"problem", Json{{"domain", "closed"}, {"H", "0"}, {"initial", random_guess(rng, 0.02, 0.0)}}},
               {"output", no_csv()}};
      auto rep = run.run("solve", cfg);
      bool pass = ok(rep) && rep["result"]["verdict"] == "converged";
      double spread = pass ? rep["result"]["u"]["spread"].get<double>() : INFINITY;
      pass = pass && spread <= kRigiditySpread;
      worst = std::max(worst, spread);
      Json c{{"h", h}, {"run", k}, {"spread", spread}, {"passed", pass}};
      if (ok(rep)) c["iterations"] = rep["result"]["iterations"];
      else c["error"] = error_text(rep);
      cases.push_back(c);
      if (!pass) {
        o.passed = false;
        o.replay.push_back({"solve", cfg});
      }
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_spread", worst}};
  o.summary = "20 runs, worst max(u)-min(u) " + fmt("%.2e", worst);
  return o;
}

CriterionOutcome criterion8(Runner& run, std::uint64_t) {
  CriterionOutcome o{8, "solvability_obstruction", true, "", Json::object(), {}};
  Json cases = Json::array();
  double worst = 0.0;
  for (const char* h : {"1", "1+0.3*sin(2*pi*x)"}) {
    for (double c : {0.5, -0.25}) {
      Json cfg{{"model", flat_static(h)},
               {"mesh", mesh_cfg({"x", "y"}, {kSolverNodes, kSolverNodes}, {1, 1}, {true, true}, {0, 0})},
               {"problem", Json{{"domain", "closed"}, {"H", num(c)}}},
               {"output", no_csv()}};
      auto rep = run.run("solve", cfg);
      bool pass = ok(rep) && rep["result"]["verdict"] == "infeasible_by_necessary_condition";
      double gap = INFINITY;
      if (pass) {
        gap = std::abs(rep["result"]["necessary_condition"].get<double>() -
                       c * rep["result"]["lapse_volume"].get<double>());
        pass = gap <= kNecessaryIdentityTolerance;
      }
      worst = std::max(worst, gap);
      cases.push_back(Json{{"h", h}, {"c", c}, {"identity_gap", gap}, {"passed", pass}});
    if (!ok(rep)) cases.back()["error"] = error_text(rep);
      if (!pass) {
        o.passed = false;
        o.replay.push_back({"solve", cfg});
      }
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_gap", worst}};
  o.summary = "4 runs infeasible, worst |int sqrt(h) H - c int sqrt(h)| " + fmt("%.2e", worst);
  return o;
}

CriterionOutcome criterion9(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{9, "dirichlet_rigidity", true, "", Json::object(), {}};
  std::mt19937_64 rng(seed + 909);
  std::uniform_real_distribution<double> level(-1.0, 1.0);
  Json cases = Json::array();
  double worst = 0.0;
  for (int k = 0; k < 5; ++k) {
    double c = level(rng);
    Json cfg{{"model", flat_static("1+0.2*x*y")},
             {"mesh", mesh_cfg({"x", "y"}, {kSolverNodes, kSolverNodes}, {1, 1}, {false, false}, {0, 0})},
             {"problem", Json{{"domain", "dirichlet"}, {"H", "0"}, {"u0", num(c)},
                              {"initial", random_box_guess(rng, 0.05, c)}}},
             {"output", no_csv()}};
    auto rep = run.run("solve", cfg);
    bool pass = ok(rep) && rep["result"]["verdict"] == "converged";
    double dev = INFINITY;
    if (pass) {
      dev = std::max(std::abs(rep["result"]["u"]["max"].get<double>() - c),
                     std::abs(rep["result"]["u"]["min"].get<double>() - c));
      pass = dev <= kDirichletTolerance;
    }
    worst = std::max(worst, dev);
    cases.push_back(Json{{"u0", c}, {"deviation", dev}, {"passed", pass}});
    if (!ok(rep)) cases.back()["error"] = error_text(rep);
    if (!pass) {
      o.passed = false;
      o.replay.push_back({"solve", cfg});
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_deviation", worst}};
  o.summary = "5 guesses, worst |u-u0| " + fmt("%.2e", worst);
  return o;
}

// ------------------------------------------------------------ initial data

CriterionOutcome criterion10(Runner& run, std::uint64_t) {
  CriterionOutcome o{10, "constraint_equations_flat_torus", true, "", Json::object(), {}};
  Json cases = Json::array();
  double worst = 0.0;
  for (double c : {-1.0, -0.1, 0.1, 1.0}) {
    auto a = num(c);
    Json cfg{{"mesh", mesh_cfg({"x", "y", "z"}, {8, 8, 8}, {1, 1, 1}, {true, true, true}, {0, 0, 0})},
             {"data", Json{{"coords", {"x", "y", "z"}},
                           {"g", {{"1", "0", "0"}, {"0", "1", "0"}, {"0", "0", "1"}}},
                           {"A", {{a, "0", "0"}, {"0", a, "0"}, {"0", "0", a}}},
                           {"phi", num(6.0 * c * c)},
                           {"X", {"0", "0", "0"}}}},
             {"output", no_csv()}};
    auto rep = run.run("initial-data", cfg);
    bool pass = ok(rep);
    double r1 = INFINITY, r2 = INFINITY;
    if (pass) {
      r1 = rep["constraints"]["max_res1"].get<double>();
      r2 = rep["constraints"]["max_res2"].get<double>();
      pass = r1 <= kConstraintTolerance && r2 <= kConstraintTolerance;
    }
    worst = std::max({worst, r1, r2});
    cases.push_back(Json{{"c", c}, {"max_res1", r1}, {"max_res2", r2}, {"passed", pass}});
    if (!ok(rep)) cases.back()["error"] = error_text(rep);
    if (!pass) {
      o.passed = false;
      o.replay.push_back({"initial-data", cfg});
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_residual", worst}};
  o.summary = "4 shape constants, worst residual " + fmt("%.2e", worst);
  return o;
}

CriterionOutcome criterion11(Runner& run, std::uint64_t) {
  CriterionOutcome o{11, "mean_curvature_decomposition", true, "", Json::object(), {}};
  Json cases = Json::array();
  double worst = 0.0;
  for (int n : kLevels) {
    Json cfg{{"mesh", mesh_cfg({"x", "y"}, {16, 16}, {4, 4}, {true, true}, {-2, -2})},
             {"data", Json{{"coords", {"x", "y"}},
                           {"g", matrix({{"1+0.1*x*x", "0"}, {"0", "1"}})},
                           {"A", matrix({{"0", "0"}, {"0", "0"}})},
                           {"phi", "0"},
                           {"X", {"0", "0"}}}},
             {"submanifold", Json{{"mesh", torus_mesh({"s"}, n)}, {"map", {"0.5*cos(s)+0.1", "0.7*sin(s)"}}}},
             {"development", Json{{"model", Json{{"kind", "standard_static"},
                                                 {"coords", {"t", "x", "y"}},
                                                 {"h", "1+0.2*x"},
                                                 {"g0", matrix({{"1+0.1*x*x", "0"}, {"0", "1"}})}}},
                                  {"slice", {"0.3", "x", "y"}}}},
             {"output", no_csv()}};
    auto rep = run.run("initial-data", cfg);
    double h = kTwoPi / n;
    double bound = kDecompositionFloor + kDecompositionConstant * h * h;
    bool pass = ok(rep);
    double d = INFINITY;
    if (pass) {
      d = rep["obstruction"]["decomposition_discrepancy"].get<double>();
      pass = d <= bound;
    }
    worst = std::max(worst, d);
    cases.push_back(Json{{"nodes", n}, {"discrepancy", d}, {"bound", bound}, {"passed", pass}});
    if (!ok(rep)) cases.back()["error"] = error_text(rep);
    if (!pass) {
      o.passed = false;
      o.replay.push_back({"initial-data", cfg});
    }
  }
  o.detail = Json{{"cases", cases}, {"worst_discrepancy", worst}};
  o.summary = "3 refinements, worst discrepancy " + fmt("%.2e", worst);
  return o;
}

// ----------------------------------------------------------------------- 12

Json splitted_model() {
  // d_t beta = -0.2 beta <= 0 and d_t g_t = g_t >= 0
  return Json{{"kind", "orthogonal_splitted"},
              {"coords", {"t", "x", "y", "z"}},
              {"beta", "exp(-0.2*t)"},
              {"gt", {{"exp(t)*(1+0.2*cos(y))", "0", "0"}, {"0", "exp(t)", "0"}, {"0", "0", "exp(t)"}}}};
}

CriterionOutcome criterion12(Runner& run, std::uint64_t seed) {
  CriterionOutcome o{12, "falsification_sweep", true, "", Json::object(), {}};
  std::mt19937_64 rng(seed + 1212);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  auto in = [&](double lo, double hi) { return lo + (hi - lo) * uni(rng); };
  Json cases = Json::array();
  Json tags = Json::object();
  std::size_t hits = 0, errors = 0;

  Json sym{{"model", splitted_model()},
           {"field", Json{{"components", {"1", "0", "0", "0"}}}},
           {"region", Json{{"lo", {-0.6, -3, -3, -3}}, {"hi", {0.6, 3, 3, 3}}, {"samples", 100}}},
           {"seed", static_cast<std::int64_t>(seed % 1000003)},
           {"output", no_csv()}};
  auto srep = run.run("symmetry", sym);
  bool non_contracting = ok(srep) && srep["field"].value("non_contracting", false);
  if (!non_contracting) {
    o.passed = false;
    o.replay.push_back({"symmetry", sym});
  }

  for (int k = 0; k < 50; ++k) {
    std::vector<std::string> map;
    std::string kind;
    double t0 = in(-0.5, 0.5), a = in(-0.1, 0.1), p1 = in(0, kTwoPi), p2 = in(0, kTwoPi);
    std::string tt = num(t0) + "+" + num(a) + "*sin(u+" + num(p1) + ")*cos(v+" + num(p2) + ")";
    if (k % 2 == 0) {
      kind = "torus_of_revolution";
      double big = in(1.5, 3.0), small = in(0.3, 0.9);
      double cx = in(-1, 1), cy = in(-1, 1), cz = in(-1, 1);
      map = {tt, num(cx) + "+(" + num(big) + "+" + num(small) + "*cos(u))*cos(v)",
             num(cy) + "+(" + num(big) + "+" + num(small) + "*cos(u))*sin(v)",
             num(cz) + "+" + num(small) + "*sin(u)"};
    } else {
      kind = "graph_torus";
      double z0 = in(-1, 1), b = in(-0.3, 0.3);
      map = {tt, "u", "v", num(z0) + "+" + num(b) + "*cos(u)*sin(v)"};
    }
    Json cfg{{"model", splitted_model()},
             {"mesh", torus_mesh({"u", "v"}, 32)},
             {"immersion", Json{{"map", map}}},
             {"output", no_csv()}};
    auto rep = run.run("classify", cfg);
    if (!ok(rep)) {
      ++errors;
      o.passed = false;
      o.replay.push_back({"classify", cfg});
      cases.push_back(Json{{"case", k}, {"kind", kind}, {"error", error_text(rep)}});
      continue;
    }
    auto tag = rep["classification"]["tag"].get<std::string>();
    tags[tag] = tags.value(tag, 0) + 1;
    bool hit = tag == "future_trapped" || tag == "nearly_future_trapped";
    cases.push_back(Json{{"case", k}, {"kind", kind}, {"tag", tag}, {"hit", hit}});
    if (hit) {
      ++hits;
      o.passed = false;
      o.replay.push_back({"classify", cfg});
    }
  }
  o.detail = Json{{"model_non_contracting", non_contracting}, {"cases", cases}, {"tag_counts", tags},
                  {"hits", hits}, {"errors", errors}};
  o.summary = "50 immersions, " + std::to_string(hits) + " future or nearly future trapped, " +
              std::to_string(errors) + " errors, model non-contracting " + (non_contracting ? "yes" : "no");
  return o;
}

using CriterionFn = CriterionOutcome (*)(Runner&, std::uint64_t);
constexpr CriterionFn kCriteria[] = {criterion1, criterion2, criterion3, criterion4,  criterion5,  criterion6,
                                     criterion7, criterion8, criterion9, criterion10, criterion11, criterion12};

std::string criteria_fingerprint(const std::vector<CriterionOutcome>& outcomes) {
  Json all = Json::array();
  for (const auto& o : outcomes) all.push_back(outcome_json(o));
  return all.dump();
}

}  // namespace

Json outcome_json(const CriterionOutcome& o) {
  Json replay = Json::array();
  for (const auto& r : o.replay) replay.push_back(Json{{"command", r.command}, {"config", r.config}});
  return Json{{"id", o.id},      {"name", o.name},     {"passed", o.passed},
              {"summary", o.summary}, {"detail", o.detail}, {"replay", replay}};
}

std::vector<CriterionOutcome> run_criteria(const SuiteOptions& options) {
  for (int id : options.criteria)
    if (id < 1 || id > kCriterionCount) throw ConfigError("suite.criteria: ids run from 1 to 13");
  std::vector<CriterionOutcome> out;
  Runner runner;
  for (int id : options.criteria)
    if (id != kCriterionCount) out.push_back(kCriteria[id - 1](runner, options.seed));

  if (std::find(options.criteria.begin(), options.criteria.end(), kCriterionCount) != options.criteria.end()) {
    const std::size_t saved = thread_count();
    CriterionOutcome o{13, "thread_count_determinism", true, "", Json::object(), {}};
    std::vector<std::string> prints;
    Json runs = Json::array();
    for (std::size_t t : options.determinism_threads) {
      set_thread_count(t);
      Runner fresh;
      std::vector<CriterionOutcome> rerun;
      for (int id = 1; id < kCriterionCount; ++id) rerun.push_back(kCriteria[id - 1](fresh, options.seed));
      prints.push_back(criteria_fingerprint(rerun));
      runs.push_back(Json{{"threads", t}, {"bytes", prints.back().size()},
                          {"identical_to_first", prints.back() == prints.front()}});
      o.passed = o.passed && prints.back() == prints.front();
    }
    set_thread_count(saved);
    o.detail = Json{{"runs", runs}};
    std::string counts;
    for (std::size_t t : options.determinism_threads) counts += (counts.empty() ? "" : ",") + std::to_string(t);
    o.summary = std::string(o.passed ? "identical" : "different") + " JSON for criteria 1-12 at threads " + counts;
    out.push_back(o);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.id < b.id; });
  return out;
}

CommandResult run_suite_command(Section top, const RunContext& context) {
  SuiteOptions opt;
  if (auto s = top.optional_section("suite")) {
    if (s->has("criteria")) {
      opt.criteria.clear();
      for (double v : s->numbers("criteria")) opt.criteria.push_back(static_cast<int>(v));
    }
    if (s->has("determinism_threads")) {
      opt.determinism_threads.clear();
      for (double v : s->numbers("determinism_threads")) {
        if (v < 1 || v != std::floor(v)) throw ConfigError("suite.determinism_threads: positive integers expected");
        opt.determinism_threads.push_back(static_cast<std::size_t>(v));
      }
    }
    s->finish();
  }
  std::uint64_t seed = kDefaultSeed;
  if (top.has("seed")) {
    auto v = top.integer("seed");
    if (v < 0) throw ConfigError("seed: must be nonnegative");
    seed = static_cast<std::uint64_t>(v);
  }
  opt.seed = context.seed.value_or(seed);
  if (auto out = top.optional_section("output")) {
    out->boolean_or("csv", true);
    out->finish();
  }
  top.finish();

  auto outcomes = run_criteria(opt);
  CommandResult res;
  Json list = Json::array();
  bool all = true;
  for (const auto& o : outcomes) {
    list.push_back(outcome_json(o));
    all = all && o.passed;
    for (std::size_t k = 0; k < o.replay.size(); ++k)
      res.artifacts.push_back({"replay_c" + std::to_string(o.id) + "_" + std::to_string(k) + "." +
                                   o.replay[k].command + ".json",
                               dump_report(o.replay[k].config)});
  }
  res.report = Json{{"seed", opt.seed}, {"all_passed", all}, {"criteria", list}};
  res.exit_code = all ? kExitOk : kExitCriterionFailed;
  return res;
}

}  // namespace lorentzlab::app
