#include "lorentzlab/app/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "lorentzlab/error.hpp"
#include "tomlplusplus/toml.hpp"

namespace lorentzlab::app {

namespace {

Json to_json(const toml::node& node, const std::string& where) {
  if (auto* t = node.as_table()) {
    Json out = Json::object();
    for (const auto& [k, v] : *t) out[std::string(k.str())] = to_json(v, where);
    return out;
  }
  if (auto* a = node.as_array()) {
    Json out = Json::array();
    for (const auto& v : *a) out.push_back(to_json(v, where));
    return out;
  }
  if (auto* s = node.as_string()) return Json(s->get());
  if (auto* i = node.as_integer()) return Json(i->get());
  if (auto* f = node.as_floating_point()) return Json(f->get());
  if (auto* b = node.as_boolean()) return Json(b->get());
  auto line = node.source().begin.line;
  throw ConfigError(where + ":" + std::to_string(line) + ": dates and times are not supported");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string type_name(const Json& v) {
  if (v.is_object()) return "table";
  if (v.is_array()) return "array";
  if (v.is_string()) return "string";
  if (v.is_boolean()) return "boolean";
  if (v.is_number()) return "number";
  return "null";
}

}  // namespace

Json parse_toml(std::string_view text, std::string_view source) {
  try {
    auto table = toml::parse(text, source);
    return to_json(table, std::string(source));
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string(source) + ":" + std::to_string(e.source().begin.line) + ":" +
                      std::to_string(e.source().begin.column) + ": " + std::string(e.description()));
  }
}

Json parse_json(std::string_view text, std::string_view source) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // byte offset to line number
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    throw ConfigError(std::string(source) + ":" + std::to_string(line) + ": " + e.what());
  }
}

Json load_config(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  auto text = read_file(path);
  Json j;
  if (ext == ".toml")
    j = parse_toml(text, path.string());
  else if (ext == ".json")
    j = parse_json(text, path.string());
  else
    throw ConfigError("config must end in .toml or .json: " + path.string());
  if (!j.is_object()) throw ConfigError(path.string() + ": top level must be a table");
  return j;
}

Section::Section(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {
  if (!node.is_object()) throw ConfigError(path_ + ": expected a table, got " + type_name(node));
}

bool Section::has(std::string_view key) const { return node_->contains(key); }

void Section::fail(std::string_view key, const std::string& what) const {
  throw ConfigError(path_ + (path_.empty() ? "" : ".") + std::string(key) + ": " + what);
}

const Json& Section::at(std::string_view key) {
  auto it = node_->find(key);
  if (it == node_->end()) fail(key, "missing required key");
  used_.insert(std::string(key));
  return *it;
}

const Json& Section::raw(std::string_view key) { return at(key); }

Section Section::section(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_object()) fail(key, "expected a table");
  return Section(v, path_.empty() ? std::string(key) : path_ + "." + std::string(key));
}

std::optional<Section> Section::optional_section(std::string_view key) {
  if (!has(key)) return std::nullopt;
  return section(key);
}

std::string Section::string(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_string()) fail(key, "expected a string, got " + type_name(v));
  return v.get<std::string>();
}

std::string Section::string_or(std::string_view key, std::string fallback) {
  return has(key) ? string(key) : std::move(fallback);
}

double number_value(const Json& v, const std::string& where) {
  if (v.is_number()) return v.get<double>();
  if (v.is_string()) {
    FieldExpr e;
    try {
      e = parse_expr(v.get<std::string>());
    } catch (const ParseError& err) {
      throw ConfigError(where + ": " + err.what());
    }
    if (!e.free_variables().empty()) throw ConfigError(where + ": constant expression expected");
    return eval(e, {});
  }
  throw ConfigError(where + ": expected a number, got " + type_name(v));
}

FieldExpr expr_value(const Json& v, const std::string& where) {
  if (v.is_number()) return FieldExpr::constant(v.get<double>());
  if (!v.is_string()) throw ConfigError(where + ": expected an expression string, got " + type_name(v));
  try {
    return parse_expr(v.get<std::string>());
  } catch (const ParseError& err) {
    throw ConfigError(where + ": " + err.what());
  }
}

double Section::number(std::string_view key) { return number_value(at(key), path_ + "." + std::string(key)); }

double Section::number_or(std::string_view key, double fallback) { return has(key) ? number(key) : fallback; }

std::int64_t Section::integer(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_number_integer()) fail(key, "expected an integer, got " + type_name(v));
  return v.get<std::int64_t>();
}

std::int64_t Section::integer_or(std::string_view key, std::int64_t fallback) {
  return has(key) ? integer(key) : fallback;
}

bool Section::boolean_or(std::string_view key, bool fallback) {
  if (!has(key)) return fallback;
  const auto& v = at(key);
  if (!v.is_boolean()) fail(key, "expected a boolean, got " + type_name(v));
  return v.get<bool>();
}

std::vector<std::string> Section::strings(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of strings");
  std::vector<std::string> out;
  for (const auto& x : v) {
    if (!x.is_string()) fail(key, "expected an array of strings");
    out.push_back(x.get<std::string>());
  }
  return out;
}

std::vector<double> Section::numbers(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(number_value(v[i], path_ + "." + std::string(key) + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<bool> Section::booleans(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of booleans");
  std::vector<bool> out;
  for (const auto& x : v) {
    if (!x.is_boolean()) fail(key, "expected an array of booleans");
    out.push_back(x.get<bool>());
  }
  return out;
}

FieldExpr Section::expr(std::string_view key) { return expr_value(at(key), path_ + "." + std::string(key)); }

std::vector<FieldExpr> Section::exprs(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_array()) fail(key, "expected an array of expressions");
  std::vector<FieldExpr> out;
  for (std::size_t i = 0; i < v.size(); ++i)
    out.push_back(expr_value(v[i], path_ + "." + std::string(key) + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::vector<FieldExpr>> Section::expr_matrix(std::string_view key) {
  const auto& v = at(key);
  if (!v.is_array() || v.empty()) fail(key, "expected a square array of expression rows");
  std::vector<std::vector<FieldExpr>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_array() || v[i].size() != v.size()) fail(key, "expected a square array of expression rows");
    out.emplace_back();
    for (std::size_t j = 0; j < v[i].size(); ++j)
      out.back().push_back(expr_value(
          v[i][j], path_ + "." + std::string(key) + "[" + std::to_string(i) + "][" + std::to_string(j) + "]"));
  }
  return out;
}

void Section::finish() const {
  for (const auto& [k, v] : node_->items())
    if (!used_.contains(k)) fail(k, "unknown key");
}

MetricModel read_model(Section s) {
  auto kind = model_kind_from_string(s.string("kind"));
  std::vector<std::string> coords;
  if (s.has("coords")) coords = s.strings("coords");
  MetricModel model = MetricModel::minkowski(2);
  switch (kind) {
    case ModelKind::minkowski: {
      auto dim = s.integer("dim");
      if (dim < 2) throw ConfigError(s.path() + ".dim: must be at least 2");
      model = MetricModel::minkowski(static_cast<std::size_t>(dim), coords);
      break;
    }
    case ModelKind::standard_static:
      model = MetricModel::standard_static(s.expr("h"), s.expr_matrix("g0"), coords);
      break;
    case ModelKind::orthogonal_splitted:
      model = MetricModel::orthogonal_splitted(s.expr("beta"), s.expr_matrix("gt"), coords);
      break;
    case ModelKind::custom: {
      std::optional<VectorFieldSpec> future;
      if (s.has("future")) future = s.exprs("future");
      model = MetricModel::custom(s.expr_matrix("components"), coords, future);
      break;
    }
    case ModelKind::riemannian:
      model = MetricModel::riemannian(s.expr_matrix("components"), coords);
      break;
  }
  if (s.boolean_or("parallel_lightlike", false)) model = model.with_parallel_lightlike(true);
  s.finish();
  return model;
}

MeshSpec read_mesh(Section s) {
  auto params = s.strings("params");
  auto nodes = s.raw("nodes");
  const std::size_t n = params.size();
  if (n == 0) throw ConfigError(s.path() + ".params: at least one parameter is required");
  if (!nodes.is_array() || nodes.size() != n) throw ConfigError(s.path() + ".nodes: one entry per parameter");
  auto lengths = s.numbers("length");
  std::vector<bool> periodic = s.has("periodic") ? s.booleans("periodic") : std::vector<bool>(n, true);
  std::vector<double> origin = s.has("origin") ? s.numbers("origin") : std::vector<double>(n, 0.0);
  if (lengths.size() != n || periodic.size() != n || origin.size() != n)
    throw ConfigError(s.path() + ": length, periodic and origin need one entry per parameter");
  std::vector<MeshAxis> axes;
  for (std::size_t k = 0; k < n; ++k) {
    if (!nodes[k].is_number_integer() || nodes[k].get<std::int64_t>() <= 0)
      throw ConfigError(s.path() + ".nodes: positive integers expected");
    axes.push_back(MeshAxis{static_cast<std::size_t>(nodes[k].get<std::int64_t>()), lengths[k], periodic[k], origin[k]});
  }
  s.finish();
  return MeshSpec{ParamMesh(std::move(axes)), std::move(params)};
}

GridTable::GridTable(const std::filesystem::path& path, const MeshSpec& mesh) : path_(path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read grid file " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path.string() + ": empty grid file");
  auto split = [](const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      auto b = cell.find_first_not_of(" \t\r");
      auto e = cell.find_last_not_of(" \t\r");
      out.push_back(b == std::string::npos ? "" : cell.substr(b, e - b + 1));
    }
    return out;
  };
  auto header = split(line);
  const std::size_t n = mesh.params.size();
  if (header.size() < n + 2 || header[0] != "node")
    throw ConfigError(path.string() + ":1: header must be node, " + std::to_string(n) + " parameter columns, values");
  for (std::size_t k = 0; k < n; ++k)
    if (header[k + 1] != mesh.params[k])
      throw ConfigError(path.string() + ":1: column " + std::to_string(k + 2) + " must be " + mesh.params[k]);
  names_.assign(header.begin() + static_cast<long>(n) + 1, header.end());
  columns_.assign(names_.size(), NodeField(mesh.mesh.node_count(), 0.0));
  std::vector<bool> seen(mesh.mesh.node_count(), false);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto cells = split(line);
    auto where = path.string() + ":" + std::to_string(lineno);
    if (cells.size() != header.size()) throw ConfigError(where + ": expected " + std::to_string(header.size()) + " cells");
    std::vector<double> vals(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        std::size_t used = 0;
        vals[c] = std::stod(cells[c], &used);
        if (used != cells[c].size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw ConfigError(where + ": not a number: '" + cells[c] + "'");
      }
    }
    if (vals[0] < 0 || vals[0] != std::floor(vals[0]) || vals[0] >= static_cast<double>(seen.size()))
      throw ConfigError(where + ": node index out of range");
    auto p = static_cast<std::size_t>(vals[0]);
    if (seen[p]) throw ConfigError(where + ": duplicate node " + std::to_string(p));
    seen[p] = true;
    for (std::size_t k = 0; k < n; ++k)
      if (std::abs(vals[k + 1] - mesh.mesh.coordinate(p, k)) > 1e-9)
        throw ConfigError(where + ": coordinates do not match mesh node " + std::to_string(p));
    for (std::size_t c = 0; c < names_.size(); ++c) columns_[c][p] = vals[n + 1 + c];
  }
  for (std::size_t p = 0; p < seen.size(); ++p)
    if (!seen[p]) throw ConfigError(path.string() + ": missing node " + std::to_string(p));
}

const NodeField& GridTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < names_.size(); ++c)
    if (names_[c] == name) return columns_[c];
  throw ConfigError((path_.empty() ? std::string("grid") : path_.string()) + ": no column named '" + name + "'");
}

NodeField sample_on_mesh(const std::string& text, const MeshSpec& mesh, const GridTable& grid,
                         const std::string& where) {
  if (!text.empty() && text[0] == '@') {
    if (grid.empty()) throw ConfigError(where + ": '" + text + "' needs a grid file");
    return grid.column(text.substr(1));
  }
  FieldExpr e;
  try {
    e = parse_expr(text);
  } catch (const ParseError& err) {
    throw ConfigError(where + ": " + err.what());
  }
  CompiledExpr c;
  try {
    c = CompiledExpr(e, mesh.params);
  } catch (const UnboundVariableError& err) {
    throw ConfigError(where + ": " + err.what());
  }
  NodeField out(mesh.mesh.node_count());
  for (std::size_t p = 0; p < out.size(); ++p) out[p] = c(mesh.mesh.coordinates(p));
  return out;
}

}  // namespace lorentzlab::app
