#pragma once

// Run configuration: TOML or JSON files loaded into one JSON tree, read
// through sections that reject unknown keys, and builders for the library
// objects that configs describe.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "lorentzlab/expr.hpp"
#include "lorentzlab/mesh.hpp"
#include "lorentzlab/spacetime.hpp"

namespace lorentzlab::app {

using Json = nlohmann::ordered_json;

/// TOML (.toml) or JSON (.json) by extension. Parse errors become ConfigError
/// naming the file and line.
Json load_config(const std::filesystem::path& path);
Json parse_toml(std::string_view text, std::string_view source);
Json parse_json(std::string_view text, std::string_view source);

/// Read access to one config table. Every key must be consumed or explicitly
/// allowed before finish(), which rejects the rest.
class Section {
public:
  Section(const Json& node, std::string path);

  const std::string& path() const noexcept { return path_; }
  bool has(std::string_view key) const;

  const Json& raw(std::string_view key);
  std::optional<Section> optional_section(std::string_view key);
  Section section(std::string_view key);

  std::string string(std::string_view key);
  std::string string_or(std::string_view key, std::string fallback);
  /// A number or an expression without free variables ("2*pi").
  double number(std::string_view key);
  double number_or(std::string_view key, double fallback);
  std::int64_t integer(std::string_view key);
  std::int64_t integer_or(std::string_view key, std::int64_t fallback);
  bool boolean_or(std::string_view key, bool fallback);
  std::vector<std::string> strings(std::string_view key);
  std::vector<double> numbers(std::string_view key);
  std::vector<bool> booleans(std::string_view key);

  FieldExpr expr(std::string_view key);
  std::vector<FieldExpr> exprs(std::string_view key);
  std::vector<std::vector<FieldExpr>> expr_matrix(std::string_view key);

  /// Throws ConfigError listing the first unread key.
  void finish() const;

private:
  const Json& at(std::string_view key);
  [[noreturn]] void fail(std::string_view key, const std::string& what) const;

  const Json* node_;
  std::string path_;
  std::set<std::string, std::less<>> used_;
};

double number_value(const Json& v, const std::string& where);
FieldExpr expr_value(const Json& v, const std::string& where);

/// [model]: kind = minkowski | standard_static | orthogonal_splitted | custom
/// | riemannian with dim/coords, h/g0, beta/gt, components/future.
MetricModel read_model(Section s);

/// [mesh]: params, nodes, length, periodic, origin (per axis).
struct MeshSpec {
  ParamMesh mesh;
  std::vector<std::string> params;
};
MeshSpec read_mesh(Section s);

/// Gridded columns from a CSV file with header node, params..., columns.
/// Coordinates must match the mesh nodes within 1e-9.
class GridTable {
public:
  GridTable() = default;
  GridTable(const std::filesystem::path& path, const MeshSpec& mesh);
  bool empty() const noexcept { return columns_.empty(); }
  const NodeField& column(const std::string& name) const;

private:
  std::filesystem::path path_;
  std::vector<std::string> names_;
  std::vector<NodeField> columns_;
};

/// Values of an expression over the mesh parameters, or a CSV column when the
/// text is "@name".
NodeField sample_on_mesh(const std::string& text, const MeshSpec& mesh, const GridTable& grid,
                         const std::string& where);

}  // namespace lorentzlab::app
