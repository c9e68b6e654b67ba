#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "biothom/tensor.hpp"

namespace biothom {

enum class Phase : std::uint8_t { matrix, inclusion };

struct InclusionShape {
  enum class Kind { cube, sphere };

  Kind kind = Kind::cube;
  double size = 0.5;  ///< cube side length or sphere radius

  static InclusionShape cube(double side) { return {Kind::cube, side}; }
  static InclusionShape sphere(double radius) { return {Kind::sphere, radius}; }

  bool contains(const Point& x, const Point& center, int dim) const;
  std::string describe() const;
};

/// Periodic identification on the (res+1)^dim lattice of cell nodes. Nodes on
/// opposite faces of the cell share the representative whose coordinates are
/// reduced modulo res; periodic_index() numbers representatives 0..res^dim-1.
class PeriodicDofMap {
 public:
  PeriodicDofMap() = default;
  PeriodicDofMap(int dim, int res) : dim_(dim), res_(res) {}

  int lattice_node_count() const;
  int periodic_node_count() const;
  int lattice_index(const std::array<int, 3>& coords) const;
  std::array<int, 3> lattice_coords(int lattice_node) const;
  int representative(int lattice_node) const;
  int periodic_index(int lattice_node) const;

 private:
  int dim_ = 0;
  int res_ = 0;
};

struct InterfaceFace {
  int id = 0;
  int axis = 0;
  Point normal{};  ///< unit, pointing from the matrix voxel into the inclusion voxel
  double area = 0.0;
  int matrix_voxel = 0;
  int inclusion_voxel = 0;
  std::array<int, 4> nodes{};  ///< periodic node ids of the face corners
  int node_count = 0;
};

/// Voxelized periodic unit cell (0,1)^dim split into a matrix and an
/// inclusion phase. Immutable after construction.
class CellMesh {
 public:
  /// Builds faces, volume fractions and the periodic map from explicit voxel
  /// labels (x fastest). Performs no validation; see validate_geometry().
  static CellMesh from_labels(int dim, int res, std::vector<Phase> labels);

  int dim() const { return dim_; }
  int res() const { return res_; }
  double spacing() const { return 1.0 / res_; }
  int voxel_count() const { return static_cast<int>(phase_.size()); }
  int node_count() const { return dofmap_.periodic_node_count(); }
  int nodes_per_voxel() const { return 1 << dim_; }

  Phase phase(int voxel) const { return phase_[voxel]; }
  std::span<const Phase> phases() const { return phase_; }
  int inclusion_voxel_count() const { return inclusion_voxels_; }

  double matrix_volume() const;
  double inclusion_volume() const;
  double interface_area() const;

  std::span<const InterfaceFace> faces() const { return faces_; }
  const PeriodicDofMap& dofmap() const { return dofmap_; }

  std::array<int, 3> voxel_coords(int voxel) const;
  /// Wraps coordinates periodically.
  int voxel_index(std::array<int, 3> coords) const;
  Point voxel_centroid(int voxel) const;
  Point node_position(int node) const;
  /// Periodic node ids of the voxel corners; bit a of the local index is the
  /// offset along axis a.
  std::array<int, 8> voxel_nodes(int voxel) const;

 private:
  int dim_ = 0;
  int res_ = 0;
  std::vector<Phase> phase_;
  int inclusion_voxels_ = 0;
  std::vector<InterfaceFace> faces_;
  PeriodicDofMap dofmap_;
};

/// Labels a voxel as inclusion iff its centroid lies strictly inside the
/// shape. Throws GeometryError if res < 4 or the resulting cell violates any
/// check of validate_geometry().
CellMesh build_unit_cell(int dim, int res, const InclusionShape& shape, const Point& center);

std::span<const InterfaceFace> interface_faces(const CellMesh& mesh);

struct GeometryReport {
  bool inclusion_nonempty = false;
  bool inclusion_interior = false;
  bool matrix_connected = false;
  int matrix_components = 0;
  bool interface_closed = false;
  Point closure_residual{};  ///< sum over faces of area * normal
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

GeometryReport validate_geometry(const CellMesh& mesh);

/// Throws GeometryError listing every violation reported by validate_geometry().
void require_valid_geometry(const CellMesh& mesh);

enum class PressureBoundary { dirichlet_zero, neumann_zero };

/// Box-shaped macroscopic domain; displacement is clamped on its boundary.
struct MacroDomain {
  int dim = 2;
  Point extent{1.0, 1.0, 1.0};
  std::array<int, 3> res{8, 8, 8};
  PressureBoundary pressure_bc = PressureBoundary::dirichlet_zero;

  void validate() const;
};

}  // namespace biothom
