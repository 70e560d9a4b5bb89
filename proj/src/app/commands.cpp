#include "lorentzlab/app/commands.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "lorentzlab/app/suite.hpp"
#include "lorentzlab/elliptic_solver.hpp"
#include "lorentzlab/error.hpp"
#include "lorentzlab/identities.hpp"
#include "lorentzlab/immersion.hpp"
#include "lorentzlab/initial_data.hpp"
#include "lorentzlab/static_graphs.hpp"
#include "lorentzlab/symmetry.hpp"

namespace lorentzlab::app {

namespace {

std::string csv_text(const ParamMesh& mesh, const std::vector<std::string>& params,
                     const std::vector<std::string>& names, const std::vector<const NodeField*>& cols) {
  std::ostringstream os;
  write_csv(os, mesh, params, names, cols);
  return os.str();
}

struct Stats {
  double min = 0.0, max = 0.0, max_abs = 0.0;
};

Stats stats(const NodeField& f) {
  Stats s;
  if (f.empty()) return s;
  s.min = *std::min_element(f.begin(), f.end());
  s.max = *std::max_element(f.begin(), f.end());
  s.max_abs = std::max(std::abs(s.min), std::abs(s.max));
  return s;
}

Json stats_json(const NodeField& f) {
  auto s = stats(f);
  return Json{{"min", s.min}, {"max", s.max}, {"max_abs", s.max_abs}};
}

Json model_json(const MetricModel& m) {
  return Json{{"kind", to_string(m.kind())}, {"dim", m.dim()}, {"coords", m.coords()}};
}

Json mesh_json(const MeshSpec& m) {
  Json axes = Json::array();
  for (std::size_t k = 0; k < m.mesh.dim(); ++k) {
    const auto& a = m.mesh.axis(k);
    axes.push_back(Json{{"param", m.params[k]},
                        {"nodes", a.nodes},
                        {"length", a.length},
                        {"periodic", a.periodic},
                        {"origin", a.origin},
                        {"spacing", a.spacing()}});
  }
  return axes;
}

Json classification_json(const Classification& c) {
  Json also = Json::array();
  for (auto t : c.also_satisfies) also.push_back(to_string(t));
  return Json{{"tag", to_string(c.tag)}, {"also_satisfies", also}};
}

Json class_counts(const std::vector<CausalClass>& classes) {
  Json out = Json::object();
  for (auto c : {CausalClass::future_timelike, CausalClass::past_timelike, CausalClass::future_lightlike,
                 CausalClass::past_lightlike, CausalClass::zero, CausalClass::spacelike})
    out[std::string(to_string(c))] = std::count(classes.begin(), classes.end(), c);
  return out;
}

std::uint64_t run_seed(Section& top, const RunContext& ctx) {
  std::uint64_t seed = kDefaultSeed;
  if (top.has("seed")) {
    auto s = top.integer("seed");
    if (s < 0) throw ConfigError("seed: must be nonnegative");
    seed = static_cast<std::uint64_t>(s);
  }
  return ctx.seed.value_or(seed);
}

bool read_output(Section& top) {
  bool csv = true;
  if (auto out = top.optional_section("output")) {
    csv = out->boolean_or("csv", true);
    out->finish();
  }
  return csv;
}

ImmersedSubmanifold read_immersion(Section s, const MeshSpec& mesh, const MetricModel& model) {
  auto map = s.exprs("map");
  s.finish();
  if (map.size() != model.dim())
    throw ConfigError(s.path() + ".map: needs " + std::to_string(model.dim()) + " components");
  return ImmersedSubmanifold::from_expressions(mesh.mesh, model, std::move(map), mesh.params);
}

VectorFieldSpec read_field(Section s, const MetricModel& model) {
  auto x = s.exprs("components");
  s.finish();
  if (x.size() != model.dim())
    throw ConfigError(s.path() + ".components: needs " + std::to_string(model.dim()) + " components");
  for (const auto& c : x)
    for (const auto& v : c.free_variables())
      if (std::find(model.coords().begin(), model.coords().end(), v) == model.coords().end())
        throw ConfigError(s.path() + ".components: unknown coordinate '" + v + "'");
  return x;
}

StaticModel read_static_model(Section s, const MeshSpec& mesh) {
  auto kind = s.string("kind");
  if (kind != "standard_static") throw ConfigError(s.path() + ".kind: this command needs a standard_static model");
  std::vector<std::string> coords;
  if (s.has("coords")) coords = s.strings("coords");
  auto h = s.expr("h");
  auto g0 = s.expr_matrix("g0");
  s.finish();
  const std::size_t n = mesh.params.size();
  std::string time = "t";
  if (!coords.empty()) {
    if (coords.size() != n + 1) throw ConfigError(s.path() + ".coords: time plus one name per mesh parameter");
    for (std::size_t k = 0; k < n; ++k)
      if (coords[k + 1] != mesh.params[k])
        throw ConfigError(s.path() + ".coords: spatial coordinates must equal the mesh parameters");
    time = coords[0];
  }
  if (g0.size() != n) throw ConfigError(s.path() + ".g0: needs " + std::to_string(n) + " rows");
  return StaticModel(h, g0, mesh.params, mesh.mesh, time);
}

Json identity_json(const IdentityReport& r, double witness_threshold) {
  Json j{{"max_residual", r.max_residual},
         {"spacing", r.spacing},
         {"expected_order", r.expected_order},
         {"residual_over_spacing_squared", r.max_residual / (r.spacing * r.spacing)},
         {"frame", r.frame},
         {"closed", r.closed},
         {"div_s", stats_json(r.div_s)},
         {"pairing", stats_json(r.pairing)}};
  if (r.closed) {
    j["integral"] = r.integral;
    j["volume"] = r.volume;
    j["integral_div_s"] = r.integral_div_s;
    j["integral_pairing"] = r.integral_pairing;
    j["relative_gap"] = r.relative_gap;
    j["witness_threshold"] = witness_threshold;
    j["theorem_witness"] = r.relative_gap > witness_threshold;
  }
  return j;
}

// ---------------------------------------------------------------- classify

CommandResult cmd_classify(Section top, const RunContext& ctx) {
  auto model = read_model(top.section("model"));
  auto mesh = read_mesh(top.section("mesh"));
  auto imm_s = top.section("immersion");
  double tol = kCausalTolerance;
  if (auto t = top.optional_section("tolerances")) {
    tol = t->number_or("causal", tol);
    t->finish();
  }
  bool csv = read_output(top);
  run_seed(top, ctx);
  top.finish();

  auto imm = read_immersion(imm_s, mesh, model);
  auto rep = mean_curvature_vector(imm, tol);
  const std::size_t m = rep.m;
  NodeField norm2(imm.node_count()), max_comp(imm.node_count());
  std::vector<NodeField> comps(m, NodeField(imm.node_count()));
  NodeField cls(imm.node_count());
  for (std::size_t p = 0; p < imm.node_count(); ++p) {
    norm2[p] = rep.norm_squared(p);
    for (std::size_t a = 0; a < m; ++a) {
      comps[a][p] = rep.at(p)[a];
      max_comp[p] = std::max(max_comp[p], std::abs(rep.at(p)[a]));
    }
    cls[p] = static_cast<double>(rep.classes[p]);
  }
  CommandResult out;
  out.report = Json{{"model", model_json(model)},
                    {"mesh", mesh_json(mesh)},
                    {"classification", classification_json(rep.classification)},
                    {"tolerance", rep.tolerance},
                    {"class_counts", class_counts(rep.classes)},
                    {"mean_curvature", Json{{"norm_squared", stats_json(norm2)},
                                            {"max_abs_component", stats(max_comp).max}}}};
  if (csv) {
    std::vector<std::string> names;
    std::vector<const NodeField*> cols;
    for (std::size_t a = 0; a < m; ++a) {
      names.push_back("H_" + model.coords()[a]);
      cols.push_back(&comps[a]);
    }
    names.insert(names.end(), {"norm_squared", "class"});
    cols.insert(cols.end(), {&norm2, &cls});
    out.report["class_codes"] = Json::array({"future_timelike", "past_timelike", "future_lightlike", "past_lightlike",
                                             "zero", "spacelike"});
    out.artifacts.push_back({"mean_curvature.csv", csv_text(mesh.mesh, mesh.params, names, cols)});
  }
  return out;
}

// -------------------------------------------------------------- identities

CommandResult cmd_identities(Section top, const RunContext& ctx) {
  auto model = read_model(top.section("model"));
  auto mesh = read_mesh(top.section("mesh"));
  auto imm_s = top.section("immersion");
  auto x = read_field(top.section("field"), model);
  double witness = kWitnessThreshold;
  if (auto t = top.optional_section("tolerances")) {
    witness = t->number_or("witness", witness);
    t->finish();
  }
  bool csv = read_output(top);
  run_seed(top, ctx);
  top.finish();

  auto imm = read_immersion(imm_s, mesh, model);
  auto rep = mesh.mesh.all_periodic() ? verify_integral_formula(imm, x) : divergence_identity(imm, x);
  CommandResult out;
  out.report = Json{{"model", model_json(model)}, {"mesh", mesh_json(mesh)}, {"identity", identity_json(rep, witness)}};
  if (csv) {
    out.artifacts.push_back({"identity.csv", csv_text(mesh.mesh, mesh.params, {"residual", "div_s", "pairing"},
                                                      {&rep.residual, &rep.div_s, &rep.pairing})});
  }
  return out;
}

// ------------------------------------------------------------------- graph

CommandResult cmd_graph(Section top, const RunContext& ctx) {
  auto mesh = read_mesh(top.section("mesh"));
  auto model_s = top.section("model");
  auto g = top.section("graph");
  auto u_text = g.string("u");
  GridTable grid;
  if (g.has("grid")) grid = GridTable(ctx.config_dir / g.string("grid"), mesh);
  auto lap_kind = g.string_or("laplacian", "auto");
  if (lap_kind != "auto" && lap_kind != "lap1" && lap_kind != "conforme" && lap_kind != "none")
    throw ConfigError("graph.laplacian: expected auto, lap1, conforme or none");
  g.finish();
  bool csv = read_output(top);
  run_seed(top, ctx);
  top.finish();

  auto model = read_static_model(model_s, mesh);
  auto u = sample_on_mesh(u_text, mesh, grid, "graph.u");
  auto check = spacelike_check(model, u);
  auto margin = spacelike_margin(model, u);
  CommandResult out;
  out.report = Json{{"model", model_json(model.ambient())},
                    {"mesh", mesh_json(mesh)},
                    {"spacelike", check.spacelike},
                    {"min_margin", check.min_margin},
                    {"worst_node", check.worst_node},
                    {"margin_guard", kMarginGuard}};
  if (!check.spacelike) {
    out.exit_code = kExitHypothesis;
    out.report["error"] = Json{{"kind", "hypothesis"},
                               {"message", "graph is not spacelike at node " + std::to_string(check.worst_node)}};
    if (csv) out.artifacts.push_back({"graph.csv", csv_text(mesh.mesh, mesh.params, {"u", "margin"}, {&u, &margin})});
    return out;
  }
  auto cosh = hyperbolic_angle(model, u);
  auto hmean = graph_mean_curvature(model, u);
  auto normal = unit_normal(model, u);
  auto cs = stats(cosh);
  out.report["hyperbolic_angle"] = Json{{"cosh_min", cs.min}, {"cosh_max", cs.max},
                                        {"theta_min", std::acosh(std::max(1.0, cs.min))},
                                        {"theta_max", std::acosh(std::max(1.0, cs.max))}};
  out.report["mean_curvature"] = stats_json(hmean);
  out.report["normal"] = Json{{"max_norm_error", normal.max_norm_error},
                              {"max_tangent_pairing", normal.max_tangent_pairing},
                              {"alt_max_norm_error", normal.alt_max_norm_error},
                              {"alt_max_tangent_pairing", normal.alt_max_tangent_pairing}};
  std::optional<TauLaplacian> lap;
  if (lap_kind == "auto") lap_kind = model.n() >= 3 ? "conforme" : "lap1";
  if (lap_kind != "none") {
    auto imm = graph_immersion(model, u);
    lap = lap_kind == "lap1" ? laplacian_tau(imm) : conformal_laplacian_tau(imm);
    out.report["laplacian"] = Json{{"form", lap_kind},
                                   {"max_residual", lap->max_residual},
                                   {"max_residual_literal", lap->max_residual_literal}};
  }
  if (csv) {
    std::vector<std::string> names{"u", "margin", "cosh_theta", "H"};
    std::vector<const NodeField*> cols{&u, &margin, &cosh, &hmean};
    if (lap) {
      names.insert(names.end(), {"lap_lhs", "lap_rhs", "lap_rhs_literal"});
      cols.insert(cols.end(), {&lap->lhs, &lap->rhs, &lap->rhs_literal});
    }
    out.artifacts.push_back({"graph.csv", csv_text(mesh.mesh, mesh.params, names, cols)});
  }
  return out;
}

// ------------------------------------------------------------------- solve

Json solver_json(const SolverResult& r, const ProblemSpec& spec) {
  Json j{{"verdict", to_string(r.verdict)},
         {"converged", r.converged},
         {"iterations", r.iterations},
         {"residual_history", r.residual_history},
         {"final_residual", r.final_residual},
         {"tolerance", spec.tolerance()},
         {"min_margin", r.min_margin},
         {"message", r.message}};
  if (r.necessary_condition) {
    j["necessary_condition"] = *r.necessary_condition;
    j["necessary_tolerance"] = r.necessary_tolerance;
    j["lapse_volume"] = lapse_volume(spec);
  }
  if (!r.u.empty()) {
    auto s = stats(r.u);
    j["u"] = Json{{"min", s.min}, {"max", s.max}, {"spread", s.max - s.min}};
  }
  return j;
}

CommandResult cmd_solve(Section top, const RunContext& ctx) {
  auto mesh = read_mesh(top.section("mesh"));
  auto model_s = top.section("model");
  auto p = top.section("problem");
  auto domain_text = p.string("domain");
  if (domain_text != "closed" && domain_text != "dirichlet")
    throw ConfigError("problem.domain: expected closed or dirichlet");
  auto h_text = p.string("H");
  std::optional<std::string> u0_text, init_text;
  if (p.has("u0")) u0_text = p.string("u0");
  if (p.has("initial")) init_text = p.string("initial");
  GridTable grid;
  if (p.has("grid")) grid = GridTable(ctx.config_dir / p.string("grid"), mesh);
  SolverConfig sc;
  sc.tol_residual = p.number_or("tol_residual", sc.tol_residual);
  auto max_newton = p.integer_or("max_newton", static_cast<std::int64_t>(sc.max_newton));
  if (max_newton < 1) throw ConfigError("problem.max_newton: must be positive");
  sc.max_newton = static_cast<std::size_t>(max_newton);
  sc.min_damping = p.number_or("min_damping", sc.min_damping);
  sc.max_damping = p.number_or("max_damping", sc.max_damping);
  sc.margin_guard = p.number_or("margin_guard", sc.margin_guard);
  p.finish();
  std::optional<std::string> ineq_u;
  double ineq_tol = kInequalityTolerance;
  if (auto iq = top.optional_section("inequality")) {
    ineq_u = iq->string("u");
    ineq_tol = iq->number_or("tolerance", ineq_tol);
    iq->finish();
  }
  bool csv = read_output(top);
  run_seed(top, ctx);
  top.finish();

  auto model = read_static_model(model_s, mesh);
  auto domain = domain_text == "closed" ? DomainKind::closed : DomainKind::dirichlet;
  if (domain == DomainKind::dirichlet && !u0_text) throw ConfigError("problem.u0: required for a dirichlet domain");
  if (domain == DomainKind::closed && u0_text) throw ConfigError("problem.u0: only valid for a dirichlet domain");
  ProblemSpec spec{model, domain, sample_on_mesh(h_text, mesh, grid, "problem.H"),
                   u0_text ? sample_on_mesh(*u0_text, mesh, grid, "problem.u0") : NodeField{},
                   init_text ? sample_on_mesh(*init_text, mesh, grid, "problem.initial") : NodeField{}, sc};
  CommandResult out;
  out.report = Json{{"model", model_json(model.ambient())}, {"mesh", mesh_json(mesh)}, {"domain", domain_text}};
  if (ineq_u) {
    if (domain != DomainKind::dirichlet) throw ConfigError("inequality: needs a dirichlet domain");
    auto u = sample_on_mesh(*ineq_u, mesh, grid, "inequality.u");
    auto c = inequality_solution_check(spec, u, ineq_tol);
    out.report["inequality"] = Json{{"operator_nonpositive", c.operator_nonpositive},
                                    {"operator_nonnegative", c.operator_nonnegative},
                                    {"boundary_matches", c.boundary_matches},
                                    {"above_boundary_level", c.above_boundary_level},
                                    {"constant", c.constant},
                                    {"counterexample_to_claim", c.counterexample_to_claim},
                                    {"reversed_conditions_hold", c.reversed_conditions_hold},
                                    {"max_operator", c.max_operator},
                                    {"min_operator", c.min_operator},
                                    {"operator_positive_nodes", c.operator_positive_nodes},
                                    {"below_level_nodes", c.below_level_nodes},
                                    {"tolerance", c.tolerance}};
  }
  auto r = solve(spec);
  out.report["result"] = solver_json(r, spec);
  if (r.verdict == Verdict::nonconvergent) out.exit_code = kExitNonconvergent;
  if (csv && !r.u.empty()) out.artifacts.push_back({"solution.csv", csv_text(mesh.mesh, mesh.params, {"u"}, {&r.u})});
  return out;
}

// ------------------------------------------------------------ initial-data

std::vector<std::string> string_cells(Section& s, std::string_view key, std::size_t expect, bool matrix) {
  const auto& v = s.raw(key);
  auto where = s.path() + "." + std::string(key);
  std::vector<std::string> out;
  auto cell = [&](const Json& c, const std::string& w) {
    if (c.is_number()) return FieldExpr::constant(c.get<double>()).to_string();
    if (!c.is_string()) throw ConfigError(w + ": expected an expression or @column");
    return c.get<std::string>();
  };
  if (!matrix) {
    if (expect == 1) return {cell(v, where)};
    if (!v.is_array() || v.size() != expect) throw ConfigError(where + ": needs " + std::to_string(expect) + " entries");
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(cell(v[i], where + "[" + std::to_string(i) + "]"));
    return out;
  }
  if (!v.is_array() || v.size() != expect) throw ConfigError(where + ": needs " + std::to_string(expect) + " rows");
  for (std::size_t i = 0; i < expect; ++i) {
    if (!v[i].is_array() || v[i].size() != expect)
      throw ConfigError(where + ": needs " + std::to_string(expect) + " columns");
    for (std::size_t j = 0; j < expect; ++j)
      out.push_back(cell(v[i][j], where + "[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
  }
  return out;
}

ComponentSource component(const std::string& text, const MeshSpec& mesh, const GridTable& grid,
                          const std::string& where) {
  if (!text.empty() && text[0] == '@') return ComponentSource::from_grid(sample_on_mesh(text, mesh, grid, where));
  auto e = expr_value(Json(text), where);
  for (const auto& v : e.free_variables())
    if (std::find(mesh.params.begin(), mesh.params.end(), v) == mesh.params.end())
      throw ConfigError(where + ": unknown coordinate '" + v + "'");
  return ComponentSource::from_expr(e);
}

Json definiteness_json(const DefinitenessReport& d) {
  Json counts = Json::object();
  for (auto c : {Definiteness::negative_definite, Definiteness::negative_semidefinite, Definiteness::positive_definite,
                 Definiteness::positive_semidefinite, Definiteness::indefinite, Definiteness::zero})
    counts[std::string(to_string(c))] = std::count(d.per_node.begin(), d.per_node.end(), c);
  return Json{{"global", to_string(d.global)},
              {"counts", counts},
              {"min_eigenvalue", stats(d.min_eigenvalue).min},
              {"max_eigenvalue", stats(d.max_eigenvalue).max}};
}

CommandResult cmd_initial_data(Section top, const RunContext& ctx) {
  auto mesh = read_mesh(top.section("mesh"));
  auto d = top.section("data");
  auto coords = d.strings("coords");
  if (coords != mesh.params) throw ConfigError("data.coords: must equal mesh.params");
  const std::size_t n = coords.size();
  GridTable grid;
  if (d.has("grid")) grid = GridTable(ctx.config_dir / d.string("grid"), mesh);
  auto g_text = string_cells(d, "g", n, true);
  auto a_text = string_cells(d, "A", n, true);
  auto phi_text = string_cells(d, "phi", 1, false);
  auto x_text = string_cells(d, "X", n, false);
  d.finish();
  auto sub_s = top.optional_section("submanifold");
  auto dev_s = top.optional_section("development");
  std::optional<NormalFlowOptions> flow;
  if (auto f = top.optional_section("normal_flow")) {
    NormalFlowOptions o;
    o.t_range = f->number_or("t_range", o.t_range);
    auto steps = f->integer_or("steps", static_cast<std::int64_t>(o.steps));
    auto stride = f->integer_or("stride", static_cast<std::int64_t>(o.stride));
    if (steps < 1 || stride < 1 || !(o.t_range > 0)) throw ConfigError("normal_flow: steps, stride and t_range must be positive");
    o.steps = static_cast<std::size_t>(steps);
    o.stride = static_cast<std::size_t>(stride);
    f->finish();
    flow = o;
  }
  bool csv = read_output(top);
  run_seed(top, ctx);
  top.finish();

  std::optional<MeshSpec> sub_mesh;
  std::vector<FieldExpr> sub_map;
  if (sub_s) {
    sub_mesh = read_mesh(sub_s->section("mesh"));
    sub_map = sub_s->exprs("map");
    sub_s->finish();
    if (sub_map.size() != n) throw ConfigError("submanifold.map: needs " + std::to_string(n) + " components");
  }
  std::optional<SliceEmbedding> slice;
  if (dev_s) {
    auto dev = read_model(dev_s->section("model"));
    auto map = dev_s->exprs("slice");
    dev_s->finish();
    if (map.size() != dev.dim()) throw ConfigError("development.slice: needs " + std::to_string(dev.dim()) + " components");
    if (dev.dim() != n + 1) throw ConfigError("development.model: dimension must be one more than the data");
    slice = SliceEmbedding{dev, map};
  }
  if (flow && !slice) throw ConfigError("normal_flow: needs a development section");

  auto comps = [&](const std::vector<std::string>& texts, const std::string& name) {
    std::vector<ComponentSource> out;
    for (std::size_t i = 0; i < texts.size(); ++i)
      out.push_back(component(texts[i], mesh, grid, "data." + name + "[" + std::to_string(i) + "]"));
    return out;
  };
  InitialDataSet data(mesh.mesh, coords, comps(g_text, "g"), comps(a_text, "A"),
                      component(phi_text[0], mesh, grid, "data.phi"), comps(x_text, "X"));
  auto cr = constraint_residuals(data);
  auto def = definiteness_report(data);
  CommandResult out;
  out.report = Json{{"mesh", mesh_json(mesh)},
                    {"symbolic", data.symbolic()},
                    {"constraints", Json{{"max_res1", cr.max_res1},
                                         {"max_res2", cr.max_res2},
                                         {"worst_node_res1", cr.worst_node_res1},
                                         {"worst_node_res2", cr.worst_node_res2}}},
                    {"definiteness", definiteness_json(def)}};
  if (sub_mesh) {
    auto p = ImmersedSubmanifold::from_expressions(sub_mesh->mesh, data.riemannian_model(), sub_map, sub_mesh->params);
    auto o = stationarity_obstruction(data, p, slice);
    Json oj{{"mesh", mesh_json(*sub_mesh)},
            {"h_norm", stats_json(o.h_norm)},
            {"trace", stats_json(o.trace)},
            {"inequality_everywhere", o.inequality_everywhere},
            {"inequality_nodes", std::count(o.inequality.begin(), o.inequality.end(), true)},
            {"non_minimal", o.non_minimal},
            {"minimal_tolerance", kMinimalTolerance},
            {"conclusion", to_string(o.conclusion)}};
    if (o.has_development) {
      oj["classification"] = classification_json(o.classification);
      oj["class_counts"] = class_counts(o.classes);
      oj["decomposition_discrepancy"] = o.decomposition_discrepancy;
    }
    out.report["obstruction"] = oj;
    if (csv) {
      std::vector<std::string> names{"h_norm", "trace"};
      std::vector<const NodeField*> cols{&o.h_norm, &o.trace};
      out.artifacts.push_back({"submanifold.csv", csv_text(sub_mesh->mesh, sub_mesh->params, names, cols)});
    }
  }
  if (flow) {
    auto sl = ImmersedSubmanifold::from_expressions(mesh.mesh, slice->development, slice->map, coords);
    auto r = normal_flow_margin(data, slice->development, sl, *flow);
    out.report["normal_flow"] = Json{{"sigma1", r.sigma1},
                                     {"sigma2", r.sigma2},
                                     {"degenerate", r.degenerate},
                                     {"capped1", r.capped1},
                                     {"capped2", r.capped2},
                                     {"left_domain", r.left_domain},
                                     {"samples", r.samples},
                                     {"initial_sign", to_string(r.initial_sign)},
                                     {"shape_mismatch", r.shape_mismatch},
                                     {"t_range", flow->t_range},
                                     {"steps", flow->steps}};
  }
  if (csv) {
    std::vector<std::string> names{"res1"};
    std::vector<const NodeField*> cols{&cr.res1};
    for (std::size_t j = 0; j < n; ++j) {
      names.push_back("res2_" + coords[j]);
      cols.push_back(&cr.res2[j]);
    }
    names.insert(names.end(), {"min_eigenvalue", "max_eigenvalue"});
    cols.insert(cols.end(), {&def.min_eigenvalue, &def.max_eigenvalue});
    out.artifacts.push_back({"initial_data.csv", csv_text(mesh.mesh, mesh.params, names, cols)});
  }
  return out;
}

// ---------------------------------------------------------------- symmetry

CommandResult cmd_symmetry(Section top, const RunContext& ctx) {
  auto model = read_model(top.section("model"));
  auto x = read_field(top.section("field"), model);
  auto rs = top.section("region");
  auto lo = rs.numbers("lo");
  auto hi = rs.numbers("hi");
  auto samples = rs.integer_or("samples", static_cast<std::int64_t>(kMinSymmetrySamples));
  rs.finish();
  if (lo.size() != model.dim() || hi.size() != model.dim())
    throw ConfigError("region: lo and hi need one entry per coordinate");
  for (std::size_t a = 0; a < lo.size(); ++a)
    if (!(lo[a] <= hi[a])) throw ConfigError("region: lo must not exceed hi");
  if (samples < 0) throw ConfigError("region.samples: must be nonnegative");
  SymmetryOptions opt;
  if (auto t = top.optional_section("tolerances")) {
    opt.conformal_tolerance = t->number_or("conformal", opt.conformal_tolerance);
    opt.sign_tolerance = t->number_or("sign", opt.sign_tolerance);
    auto tests = t->integer_or("random_tests", static_cast<std::int64_t>(opt.random_tests));
    if (tests < 0) throw ConfigError("tolerances.random_tests: must be nonnegative");
    opt.random_tests = static_cast<std::size_t>(tests);
    t->finish();
  }
  bool csv = read_output(top);
  auto seed = run_seed(top, ctx);
  top.finish();

  auto pts = box_sample(lo, hi, static_cast<std::size_t>(samples), seed);
  auto r = analyze_vector_field(model, x, pts, seed, opt);
  Json theorems = Json::array();
  for (const auto& v : theorem_applicability(r)) {
    Json hyp = Json::object();
    for (const auto& [k, b] : v.hypotheses) hyp[k] = b;
    Json t{{"id", v.id}, {"applies", v.applies}, {"hypotheses", hyp}, {"certification", v.certification}};
    if (!v.excluded.empty()) t["excluded"] = v.excluded;
    if (v.witness) t["witness"] = *v.witness;
    theorems.push_back(t);
  }
  Json rep{{"classification", to_string(r.classification)},
           {"samples", r.points.size()},
           {"rho_min", r.rho_min},
           {"rho_max", r.rho_max},
           {"max_conformal_residual", r.max_conformal_residual},
           {"scale", r.scale},
           {"conformal_tolerance", r.conformal_tolerance},
           {"sign_tolerance", opt.sign_tolerance},
           {"symbolic_killing", r.symbolic_killing},
           {"causal_counts", Json{{"timelike", r.timelike}, {"lightlike", r.lightlike}, {"zero", r.zero},
                                  {"spacelike", r.spacelike}}},
           {"future_causal", r.future_causal},
           {"past_causal", r.past_causal},
           {"strictly_causal", r.strictly_causal},
           {"sign", to_string(r.sign)},
           {"sign_tests", r.sign_tests},
           {"certification", r.certification},
           {"parallel_lightlike", r.parallel_lightlike}};
  if (r.symbolic_rho) rep["symbolic_rho"] = *r.symbolic_rho;
  if (r.positive_definite_at) rep["positive_definite_at"] = r.points[*r.positive_definite_at];
  if (r.negative_definite_at) rep["negative_definite_at"] = r.points[*r.negative_definite_at];
  if (r.non_contracting) rep["non_contracting"] = *r.non_contracting;
  if (r.non_expanding) rep["non_expanding"] = *r.non_expanding;
  CommandResult out;
  out.report = Json{{"model", model_json(model)}, {"seed", seed}, {"field", rep}, {"theorems", theorems}};
  if (csv) {
    std::ostringstream os;
    os << "node";
    for (const auto& c : model.coords()) os << ',' << c;
    os << ",rho\n";
    char buf[40];
    for (std::size_t i = 0; i < pts.size(); ++i) {
      os << i;
      for (double v : pts[i]) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        os << ',' << buf;
      }
      std::snprintf(buf, sizeof buf, "%.17g", r.rho[i]);
      os << ',' << buf << '\n';
    }
    out.artifacts.push_back({"samples.csv", os.str()});
  }
  return out;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"classify", "identities", "graph", "solve",
                                              "initial-data", "symmetry", "suite"};
  return names;
}

std::string error_kind(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const ParseError*>(&e) ||
      dynamic_cast<const UnboundVariableError*>(&e))
    return "config";
  if (dynamic_cast<const HypothesisError*>(&e) || dynamic_cast<const SingularMatrixError*>(&e)) return "hypothesis";
  if (dynamic_cast<const DomainError*>(&e)) return "domain";
  return "internal";
}

int exit_code_for(const std::exception& e) {
  auto kind = error_kind(e);
  if (kind == "hypothesis") return kExitHypothesis;
  if (kind == "config" || kind == "domain") return kExitConfig;
  return kExitCriterionFailed;
}

std::string dump_report(const Json& report) { return report.dump(2) + "\n"; }

CommandResult run_command(std::string_view command, const Json& config, const RunContext& context) {
  CommandResult out;
  try {
    Section top(config, "");
    if (command == "classify")
      out = cmd_classify(std::move(top), context);
    else if (command == "identities")
      out = cmd_identities(std::move(top), context);
    else if (command == "graph")
      out = cmd_graph(std::move(top), context);
    else if (command == "solve")
      out = cmd_solve(std::move(top), context);
    else if (command == "initial-data")
      out = cmd_initial_data(std::move(top), context);
    else if (command == "symmetry")
      out = cmd_symmetry(std::move(top), context);
    else if (command == "suite")
      out = run_suite_command(std::move(top), context);
    else
      throw ConfigError("unknown subcommand '" + std::string(command) + "'");
  } catch (const std::exception& e) {
    out = CommandResult{};
    out.exit_code = exit_code_for(e);
    out.report = Json{{"error", Json{{"kind", error_kind(e)}, {"message", e.what()}}}};
  }
  Json report{{"schema", "v1"}, {"command", command}};
  for (auto& [k, v] : out.report.items()) report[k] = v;
  report["exit_code"] = out.exit_code;
  out.report = std::move(report);
  return out;
}

}  // namespace lorentzlab::app
