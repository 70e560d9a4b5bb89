#pragma once

// Structured parameter meshes (flat tori and boxes), second-order finite
// differences and metric-weighted quadrature.

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace lorentzlab {

struct MeshAxis {
  std::size_t nodes = 0;
  double length = 1.0;
  bool periodic = true;
  double origin = 0.0;

  /// L/N on periodic axes (the endpoint is identified with the origin),
  /// L/(N-1) on bounded axes (both endpoints are nodes).
  double spacing() const;
  double coordinate(std::size_t i) const { return origin + static_cast<double>(i) * spacing(); }
};

/// Row-major node layout: the last axis varies fastest.
class ParamMesh {
public:
  ParamMesh() = default;
  /// Throws ConfigError unless every axis has an even node count >= 8 and
  /// a positive length.
  explicit ParamMesh(std::vector<MeshAxis> axes);

  std::size_t dim() const noexcept { return axes_.size(); }
  const MeshAxis& axis(std::size_t k) const { return axes_.at(k); }
  const std::vector<MeshAxis>& axes() const noexcept { return axes_; }
  std::size_t node_count() const noexcept { return count_; }
  std::size_t stride(std::size_t k) const { return strides_.at(k); }
  double spacing(std::size_t k) const { return axes_.at(k).spacing(); }

  std::size_t index_along(std::size_t node, std::size_t k) const { return (node / strides_[k]) % axes_[k].nodes; }
  /// Node reached by moving `offset` steps along axis k. Periodic axes wrap;
  /// on bounded axes the caller must stay inside.
  std::size_t shifted(std::size_t node, std::size_t k, long offset) const;

  std::vector<double> coordinates(std::size_t node) const;
  double coordinate(std::size_t node, std::size_t k) const { return axes_[k].coordinate(index_along(node, k)); }

  bool all_periodic() const noexcept;
  bool has_boundary() const noexcept { return !all_periodic(); }
  bool is_boundary(std::size_t node) const;
  std::vector<bool> boundary_mask() const;

  /// Product of spacings.
  double cell_volume() const;
  /// Rectangle rule on periodic axes, trapezoid on bounded axes.
  double quadrature_weight(std::size_t node) const;

private:
  std::vector<MeshAxis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t count_ = 0;
};

/// One value per mesh node.
using NodeField = std::vector<double>;

/// Second-order central differences; periodic wrap on periodic axes and
/// second-order one-sided stencils at the ends of bounded axes.
NodeField fd_partial(const NodeField& f, const ParamMesh& mesh, std::size_t axis);

/// Compact three-point second derivative with the same boundary treatment.
NodeField fd_second(const NodeField& f, const ParamMesh& mesh, std::size_t axis);

/// Sum of f * density * quadrature weight in node order with compensated
/// accumulation. Throws DomainError if any density value is not positive.
double integrate(const NodeField& f, const ParamMesh& mesh, const NodeField& density);

/// Kahan-compensated sum in index order.
class CompensatedSum {
public:
  void add(double x) {
    double y = x - carry_;
    double t = sum_ + y;
    carry_ = (t - sum_) - y;
    sum_ = t;
  }
  double value() const noexcept { return sum_; }

private:
  double sum_ = 0.0;
  double carry_ = 0.0;
};

/// Columns: node, parameter coordinates s1..sn (or `param_names`), then the
/// named value columns.
void write_csv(std::ostream& os, const ParamMesh& mesh, const std::vector<std::string>& param_names,
               const std::vector<std::string>& column_names, const std::vector<const NodeField*>& columns);

}  // namespace lorentzlab
