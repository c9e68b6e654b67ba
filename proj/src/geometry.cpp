#include "biothom/geometry.hpp"

#include <cmath>
#include <deque>
#include <sstream>

#include "biothom/errors.hpp"

namespace biothom {

bool InclusionShape::contains(const Point& x, const Point& center, int dim) const {
  if (kind == Kind::cube) {
    for (int a = 0; a < dim; ++a)
      if (!(std::abs(x[a] - center[a]) < 0.5 * size)) return false;
    return true;
  }
  double r2 = 0.0;
  for (int a = 0; a < dim; ++a) r2 += (x[a] - center[a]) * (x[a] - center[a]);
  return r2 < size * size;
}

std::string InclusionShape::describe() const {
  std::ostringstream os;
  os << (kind == Kind::cube ? "cube(side=" : "sphere(radius=") << size << ")";
  return os.str();
}

int PeriodicDofMap::lattice_node_count() const {
  int n = 1;
  for (int a = 0; a < dim_; ++a) n *= res_ + 1;
  return n;
}

int PeriodicDofMap::periodic_node_count() const {
  int n = 1;
  for (int a = 0; a < dim_; ++a) n *= res_;
  return n;
}

int PeriodicDofMap::lattice_index(const std::array<int, 3>& c) const {
  int idx = 0;
  for (int a = dim_ - 1; a >= 0; --a) idx = idx * (res_ + 1) + c[a];
  return idx;
}

std::array<int, 3> PeriodicDofMap::lattice_coords(int node) const {
  std::array<int, 3> c{};
  for (int a = 0; a < dim_; ++a) {
    c[a] = node % (res_ + 1);
    node /= res_ + 1;
  }
  return c;
}

int PeriodicDofMap::representative(int lattice_node) const {
  auto c = lattice_coords(lattice_node);
  for (int a = 0; a < dim_; ++a) c[a] %= res_;
  return lattice_index(c);
}

int PeriodicDofMap::periodic_index(int lattice_node) const {
  const auto c = lattice_coords(lattice_node);
  int idx = 0;
  for (int a = dim_ - 1; a >= 0; --a) idx = idx * res_ + c[a] % res_;
  return idx;
}

CellMesh CellMesh::from_labels(int dim, int res, std::vector<Phase> labels) {
  if (dim != 2 && dim != 3) throw GeometryError("cell dimension must be 2 or 3");
  if (res < 1) throw GeometryError("cell resolution must be positive");
  CellMesh mesh;
  mesh.dim_ = dim;
  mesh.res_ = res;
  mesh.dofmap_ = PeriodicDofMap(dim, res);
  if (static_cast<int>(labels.size()) != mesh.dofmap_.periodic_node_count())
    throw GeometryError("label count does not match res^dim");
  mesh.phase_ = std::move(labels);
  for (Phase p : mesh.phase_) mesh.inclusion_voxels_ += p == Phase::inclusion;

  const double area = std::pow(mesh.spacing(), dim - 1);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const auto c = mesh.voxel_coords(v);
    for (int axis = 0; axis < dim; ++axis) {
      auto cn = c;
      cn[axis] += 1;
      const int w = mesh.voxel_index(cn);
      if (mesh.phase_[v] == mesh.phase_[w]) continue;
      InterfaceFace f;
      f.id = static_cast<int>(mesh.faces_.size());
      f.axis = axis;
      f.area = area;
      const bool matrix_first = mesh.phase_[v] == Phase::matrix;
      f.matrix_voxel = matrix_first ? v : w;
      f.inclusion_voxel = matrix_first ? w : v;
      f.normal[axis] = matrix_first ? 1.0 : -1.0;
      const auto corners = mesh.voxel_nodes(v);
      for (int local = 0; local < mesh.nodes_per_voxel(); ++local)
        if (local & (1 << axis)) f.nodes[f.node_count++] = corners[local];
      mesh.faces_.push_back(f);
    }
  }
  return mesh;
}

double CellMesh::matrix_volume() const {
  return static_cast<double>(voxel_count() - inclusion_voxels_) / voxel_count();
}

double CellMesh::inclusion_volume() const { return static_cast<double>(inclusion_voxels_) / voxel_count(); }

double CellMesh::interface_area() const {
  return static_cast<double>(faces_.size()) * std::pow(spacing(), dim_ - 1);
}

std::array<int, 3> CellMesh::voxel_coords(int voxel) const {
  std::array<int, 3> c{};
  for (int a = 0; a < dim_; ++a) {
    c[a] = voxel % res_;
    voxel /= res_;
  }
  return c;
}

int CellMesh::voxel_index(std::array<int, 3> c) const {
  int idx = 0;
  for (int a = dim_ - 1; a >= 0; --a) idx = idx * res_ + ((c[a] % res_) + res_) % res_;
  return idx;
}

Point CellMesh::voxel_centroid(int voxel) const {
  const auto c = voxel_coords(voxel);
  Point x{};
  for (int a = 0; a < dim_; ++a) x[a] = (c[a] + 0.5) * spacing();
  return x;
}

Point CellMesh::node_position(int node) const {
  Point x{};
  for (int a = 0; a < dim_; ++a) {
    x[a] = (node % res_) * spacing();
    node /= res_;
  }
  return x;
}

std::array<int, 8> CellMesh::voxel_nodes(int voxel) const {
  const auto c = voxel_coords(voxel);
  std::array<int, 8> nodes{};
  for (int local = 0; local < nodes_per_voxel(); ++local) {
    auto cn = c;
    for (int a = 0; a < dim_; ++a) cn[a] += (local >> a) & 1;
    nodes[local] = voxel_index(cn);  // node grid and voxel grid share periodic indexing
  }
  return nodes;
}

CellMesh build_unit_cell(int dim, int res, const InclusionShape& shape, const Point& center) {
  if (dim != 2 && dim != 3) throw GeometryError("cell dimension must be 2 or 3");
  if (res < 4) throw GeometryError("cell resolution must be at least 4");
  if (!(shape.size > 0.0)) throw GeometryError("inclusion size must be positive");
  int count = 1;
  for (int a = 0; a < dim; ++a) count *= res;
  std::vector<Phase> labels(count, Phase::matrix);
  const double h = 1.0 / res;
  for (int v = 0; v < count; ++v) {
    Point x{};
    int rem = v;
    for (int a = 0; a < dim; ++a) {
      x[a] = (rem % res + 0.5) * h;
      rem /= res;
    }
    if (shape.contains(x, center, dim)) labels[v] = Phase::inclusion;
  }
  CellMesh mesh = CellMesh::from_labels(dim, res, std::move(labels));
  require_valid_geometry(mesh);
  return mesh;
}

std::span<const InterfaceFace> interface_faces(const CellMesh& mesh) { return mesh.faces(); }

GeometryReport validate_geometry(const CellMesh& mesh) {
  GeometryReport report;
  const int dim = mesh.dim();
  const int res = mesh.res();

  report.inclusion_nonempty = mesh.inclusion_voxel_count() > 0;
  if (!report.inclusion_nonempty) report.violations.emplace_back("inclusion phase is empty");

  report.inclusion_interior = true;
  for (int v = 0; v < mesh.voxel_count() && report.inclusion_interior; ++v) {
    if (mesh.phase(v) != Phase::inclusion) continue;
    const auto c = mesh.voxel_coords(v);
    for (int a = 0; a < dim; ++a)
      if (c[a] == 0 || c[a] == res - 1) report.inclusion_interior = false;
  }
  if (!report.inclusion_interior)
    report.violations.emplace_back("inclusion touches the cell boundary (closure of Y2 must lie inside Y)");

  // Face-connected components of the matrix phase, with periodic wrap.
  std::vector<int> component(mesh.voxel_count(), -1);
  for (int seed = 0; seed < mesh.voxel_count(); ++seed) {
    if (mesh.phase(seed) != Phase::matrix || component[seed] >= 0) continue;
    const int id = report.matrix_components++;
    std::deque<int> queue{seed};
    component[seed] = id;
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      const auto c = mesh.voxel_coords(v);
      for (int a = 0; a < dim; ++a)
        for (int step : {-1, 1}) {
          auto cn = c;
          cn[a] += step;
          const int w = mesh.voxel_index(cn);
          if (mesh.phase(w) == Phase::matrix && component[w] < 0) {
            component[w] = id;
            queue.push_back(w);
          }
        }
    }
  }
  report.matrix_connected = report.matrix_components == 1;
  if (!report.matrix_connected)
    report.violations.emplace_back("matrix phase is not face-connected (" + std::to_string(report.matrix_components) +
                                   " components)");

  // Signed face counts per axis are integers, so closure is checked exactly.
  std::array<long, 3> signed_count{};
  for (const auto& f : mesh.faces()) signed_count[f.axis] += f.normal[f.axis] > 0 ? 1 : -1;
  const double area = std::pow(mesh.spacing(), dim - 1);
  report.interface_closed = true;
  for (int a = 0; a < dim; ++a) {
    report.closure_residual[a] = static_cast<double>(signed_count[a]) * area;
    if (signed_count[a] != 0) report.interface_closed = false;
  }
  if (!report.interface_closed) report.violations.emplace_back("interface is not a closed surface");
  return report;
}

void require_valid_geometry(const CellMesh& mesh) {
  const auto report = validate_geometry(mesh);
  if (report.ok()) return;
  std::string msg = "invalid cell geometry:";
  for (const auto& v : report.violations) msg += " " + v + ";";
  throw GeometryError(msg);
}

void MacroDomain::validate() const {
  if (dim != 2 && dim != 3) throw ConfigError("macro.dim", "must be 2 or 3");
  for (int a = 0; a < dim; ++a) {
    if (!(extent[a] > 0.0)) throw ConfigError("macro.extent", "extents must be positive");
    if (res[a] < 1) throw ConfigError("macro.res", "resolutions must be positive");
  }
}

}  // namespace biothom
