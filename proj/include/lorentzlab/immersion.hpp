#pragma once

// Discretized spacelike immersions x: S -> M over a parameter mesh, their
// induced metric, second fundamental form and mean curvature vector
// H = -g^ij II_ij, and the trapped-submanifold classification of H.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "lorentzlab/mesh.hpp"
#include "lorentzlab/spacetime.hpp"

namespace lorentzlab {

class ImmersedSubmanifold {
public:
  /// Samples `map` (one expression per ambient coordinate in the parameters
  /// `params`) at the mesh nodes. On periodic axes the map may wind: it must
  /// equal a periodic function plus a linear drift, which is detected from
  /// map(s + L e_k) - map(s) and checked at several nodes (ConfigError).
  static ImmersedSubmanifold from_expressions(ParamMesh mesh, MetricModel ambient, std::vector<FieldExpr> map,
                                              std::vector<std::string> params);
  /// coords[a][node]; winding[k*m + a] is the jump of x^a across periodic
  /// axis k (empty means no winding).
  static ImmersedSubmanifold from_nodes(ParamMesh mesh, MetricModel ambient, std::vector<NodeField> coords,
                                        std::vector<double> winding = {});

  std::size_t n() const noexcept { return n_; }
  std::size_t m() const noexcept { return m_; }
  std::size_t node_count() const noexcept { return mesh_.node_count(); }
  const ParamMesh& mesh() const noexcept { return mesh_; }
  const MetricModel& ambient() const noexcept { return ambient_; }
  const std::vector<std::string>& param_names() const noexcept { return params_; }
  const std::optional<std::vector<FieldExpr>>& analytic_map() const noexcept { return map_; }

  std::span<const double> point(std::size_t p) const { return {pos_.data() + p * m_, m_}; }
  /// d_k x at node p.
  std::span<const double> tangent(std::size_t p, std::size_t k) const { return {tan_.data() + (p * n_ + k) * m_, m_}; }
  /// d_i d_j x at node p (coordinate second derivatives, no connection term).
  std::span<const double> second(std::size_t p, std::size_t i, std::size_t j) const {
    return {sec_.data() + ((p * n_ + i) * n_ + j) * m_, m_};
  }
  /// Ambient metric at the image of node p.
  std::span<const double> ambient_metric(std::size_t p) const { return {gbar_.data() + p * m_ * m_, m_ * m_}; }
  std::span<const double> induced(std::size_t p) const { return {g_.data() + p * n_ * n_, n_ * n_}; }
  std::span<const double> induced_inverse(std::size_t p) const { return {ginv_.data() + p * n_ * n_, n_ * n_}; }
  const NodeField& density() const noexcept { return density_; }
  /// Ambient coordinate a at every node.
  NodeField coordinate_field(std::size_t a) const;

private:
  ImmersedSubmanifold() = default;
  void build(std::vector<NodeField> coords, const std::vector<double>& winding);

  ParamMesh mesh_;
  MetricModel ambient_ = MetricModel::minkowski(2);
  std::optional<std::vector<FieldExpr>> map_;
  std::vector<std::string> params_;
  std::size_t n_ = 0, m_ = 0;
  std::vector<double> pos_, tan_, sec_, gbar_, g_, ginv_;
  NodeField density_;
};

struct InducedMetric {
  std::size_t n = 0;
  std::vector<double> g;  // [node][i][j]
  NodeField density;
};

InducedMetric induced_metric(const ImmersedSubmanifold& imm);

/// II^a_ij at every node, flat [node][i][j][a].
std::vector<double> second_fundamental_form(const ImmersedSubmanifold& imm);

enum class TrappedTag {
  extremal,
  future_trapped,
  past_trapped,
  nearly_future_trapped,
  nearly_past_trapped,
  marginally_future_trapped,
  marginally_past_trapped,
  weakly_future_trapped,
  weakly_past_trapped,
  mixed
};

std::string_view to_string(TrappedTag tag);

struct Classification {
  TrappedTag tag = TrappedTag::mixed;
  /// Every other definition the field satisfies (weaker notions implied by
  /// the primary tag).
  std::vector<TrappedTag> also_satisfies;
};

/// Tag from per-node causal classes, strongest notion first:
/// extremal, (future|past)_trapped, nearly, marginally, weakly, mixed.
Classification classify_classes(const std::vector<CausalClass>& classes);

struct MeanCurvatureReport {
  std::size_t m = 0;
  std::vector<double> h;  // [node][a]
  std::vector<CausalClass> classes;
  Classification classification;
  double tolerance = kCausalTolerance;
  // kept so the report can be reclassified under another tolerance
  std::vector<double> metric;  // [node][a][b]
  std::vector<double> future;  // [node][a]

  std::span<const double> at(std::size_t p) const { return {h.data() + p * m, m}; }
  /// g(H,H) at node p.
  double norm_squared(std::size_t p) const;
};

MeanCurvatureReport mean_curvature_vector(const ImmersedSubmanifold& imm, double tol = kCausalTolerance);

/// Reclassifies every node with `tol` (the report tolerance when omitted).
Classification classify_submanifold(const MeanCurvatureReport& report, std::optional<double> tol = std::nullopt);

}  // namespace lorentzlab
