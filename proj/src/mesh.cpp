#include "lorentzlab/mesh.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

#include "lorentzlab/error.hpp"
#include "lorentzlab/kernels.hpp"

namespace lorentzlab {

double MeshAxis::spacing() const {
  return periodic ? length / static_cast<double>(nodes) : length / static_cast<double>(nodes - 1);
}

ParamMesh::ParamMesh(std::vector<MeshAxis> axes) : axes_(std::move(axes)) {
  if (axes_.empty()) throw ConfigError("mesh needs at least one axis");
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    const auto& a = axes_[k];
    if (a.nodes < 8) throw ConfigError("mesh axis " + std::to_string(k) + ": node count must be >= 8");
    if (a.nodes % 2 != 0) throw ConfigError("mesh axis " + std::to_string(k) + ": node count must be even");
    if (!(a.length > 0.0)) throw ConfigError("mesh axis " + std::to_string(k) + ": length must be positive");
  }
  strides_.assign(axes_.size(), 1);
  for (std::size_t k = axes_.size() - 1; k > 0; --k) strides_[k - 1] = strides_[k] * axes_[k].nodes;
  count_ = strides_[0] * axes_[0].nodes;
}

std::size_t ParamMesh::shifted(std::size_t node, std::size_t k, long offset) const {
  long n = static_cast<long>(axes_[k].nodes);
  long i = static_cast<long>(index_along(node, k));
  long j = i + offset;
  if (axes_[k].periodic) j = ((j % n) + n) % n;
  return static_cast<std::size_t>(static_cast<long>(node) + (j - i) * static_cast<long>(strides_[k]));
}

std::vector<double> ParamMesh::coordinates(std::size_t node) const {
  std::vector<double> s(axes_.size());
  for (std::size_t k = 0; k < axes_.size(); ++k) s[k] = coordinate(node, k);
  return s;
}

bool ParamMesh::all_periodic() const noexcept {
  for (const auto& a : axes_)
    if (!a.periodic) return false;
  return true;
}

bool ParamMesh::is_boundary(std::size_t node) const {
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (axes_[k].periodic) continue;
    std::size_t i = index_along(node, k);
    if (i == 0 || i + 1 == axes_[k].nodes) return true;
  }
  return false;
}

std::vector<bool> ParamMesh::boundary_mask() const {
  std::vector<bool> mask(count_);
  for (std::size_t p = 0; p < count_; ++p) mask[p] = is_boundary(p);
  return mask;
}

double ParamMesh::cell_volume() const {
  double v = 1.0;
  for (const auto& a : axes_) v *= a.spacing();
  return v;
}

double ParamMesh::quadrature_weight(std::size_t node) const {
  double w = cell_volume();
  for (std::size_t k = 0; k < axes_.size(); ++k) {
    if (axes_[k].periodic) continue;
    std::size_t i = index_along(node, k);
    if (i == 0 || i + 1 == axes_[k].nodes) w *= 0.5;
  }
  return w;
}

namespace {

// Views the field as [outer][n][inner] with respect to `axis`.
struct AxisLayout {
  std::size_t outer, n, inner;
};

AxisLayout layout(const ParamMesh& mesh, std::size_t axis) {
  AxisLayout l{};
  l.n = mesh.axis(axis).nodes;
  l.inner = mesh.stride(axis);
  l.outer = mesh.node_count() / (l.n * l.inner);
  return l;
}

}  // namespace

NodeField fd_partial(const NodeField& f, const ParamMesh& mesh, std::size_t axis) {
  const AxisLayout l = layout(mesh, axis);
  const double h = mesh.spacing(axis);
  const double half_inv = 0.5 / h;
  const bool periodic = mesh.axis(axis).periodic;
  NodeField out(f.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    const double* base = f.data() + o * l.n * l.inner;
    double* dst = out.data() + o * l.n * l.inner;
    auto row = [&](std::size_t i) { return base + i * l.inner; };
    // interior rows i = 1..n-2 as contiguous runs
    if (l.inner == 1) {
      kernels::difference_scaled(base + 2, base, dst + 1, l.n - 2, half_inv);
    } else {
      for (std::size_t i = 1; i + 1 < l.n; ++i)
        kernels::difference_scaled(row(i + 1), row(i - 1), dst + i * l.inner, l.inner, half_inv);
    }
    double* first = dst;
    double* last = dst + (l.n - 1) * l.inner;
    if (periodic) {
      kernels::difference_scaled(row(1), row(l.n - 1), first, l.inner, half_inv);
      kernels::difference_scaled(row(0), row(l.n - 2), last, l.inner, half_inv);
    } else {
      for (std::size_t j = 0; j < l.inner; ++j) {
        first[j] = (-3.0 * row(0)[j] + 4.0 * row(1)[j] - row(2)[j]) * half_inv;
        last[j] = (3.0 * row(l.n - 1)[j] - 4.0 * row(l.n - 2)[j] + row(l.n - 3)[j]) * half_inv;
      }
    }
  }
  return out;
}

NodeField fd_second(const NodeField& f, const ParamMesh& mesh, std::size_t axis) {
  const AxisLayout l = layout(mesh, axis);
  const double h = mesh.spacing(axis);
  const double inv_h2 = 1.0 / (h * h);
  const bool periodic = mesh.axis(axis).periodic;
  NodeField out(f.size());
  for (std::size_t o = 0; o < l.outer; ++o) {
    const double* base = f.data() + o * l.n * l.inner;
    double* dst = out.data() + o * l.n * l.inner;
    auto row = [&](std::size_t i) { return base + i * l.inner; };
    if (l.inner == 1) {
      kernels::second_difference(base + 2, base + 1, base, dst + 1, l.n - 2, inv_h2);
    } else {
      for (std::size_t i = 1; i + 1 < l.n; ++i)
        kernels::second_difference(row(i + 1), row(i), row(i - 1), dst + i * l.inner, l.inner, inv_h2);
    }
    double* first = dst;
    double* last = dst + (l.n - 1) * l.inner;
    if (periodic) {
      kernels::second_difference(row(1), row(0), row(l.n - 1), first, l.inner, inv_h2);
      kernels::second_difference(row(0), row(l.n - 1), row(l.n - 2), last, l.inner, inv_h2);
    } else {
      for (std::size_t j = 0; j < l.inner; ++j) {
        first[j] = (2.0 * row(0)[j] - 5.0 * row(1)[j] + 4.0 * row(2)[j] - row(3)[j]) * inv_h2;
        last[j] = (2.0 * row(l.n - 1)[j] - 5.0 * row(l.n - 2)[j] + 4.0 * row(l.n - 3)[j] - row(l.n - 4)[j]) *
                  inv_h2;
      }
    }
  }
  return out;
}

double integrate(const NodeField& f, const ParamMesh& mesh, const NodeField& density) {
  CompensatedSum sum;
  for (std::size_t p = 0; p < mesh.node_count(); ++p) {
    if (!(density[p] > 0.0)) throw DomainError("integration density is not positive at node " + std::to_string(p));
    sum.add(f[p] * density[p] * mesh.quadrature_weight(p));
  }
  return sum.value();
}

void write_csv(std::ostream& os, const ParamMesh& mesh, const std::vector<std::string>& param_names,
               const std::vector<std::string>& column_names, const std::vector<const NodeField*>& columns) {
  os << "node";
  for (std::size_t k = 0; k < mesh.dim(); ++k)
    os << ',' << (k < param_names.size() ? param_names[k] : "s" + std::to_string(k + 1));
  for (const auto& name : column_names) os << ',' << name;
  os << '\n';
  char buf[40];
  for (std::size_t p = 0; p < mesh.node_count(); ++p) {
    os << p;
    for (std::size_t k = 0; k < mesh.dim(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", mesh.coordinate(p, k));
      os << ',' << buf;
    }
    for (const auto* col : columns) {
      std::snprintf(buf, sizeof buf, "%.17g", (*col)[p]);
      os << ',' << buf;
    }
    os << '\n';
  }
}

}  // namespace lorentzlab
