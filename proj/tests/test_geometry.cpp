#include <gtest/gtest.h>

#include <cmath>

#include "biothom/errors.hpp"
#include "biothom/geometry.hpp"

using namespace biothom;

namespace {

const Point kCenter{0.5, 0.5, 0.5};

Point face_closure(const CellMesh& mesh) {
  Point s{};
  for (const auto& f : mesh.faces())
    for (int a = 0; a < 3; ++a) s[a] += f.area * f.normal[a];
  return s;
}

}  // namespace

TEST(Geometry, CubeVolumeFraction3D) {
  const CellMesh mesh = build_unit_cell(3, 4, InclusionShape::cube(0.5), kCenter);
  EXPECT_EQ(mesh.inclusion_voxel_count(), 8);
  EXPECT_DOUBLE_EQ(mesh.inclusion_volume(), 0.125);
  EXPECT_DOUBLE_EQ(mesh.matrix_volume() + mesh.inclusion_volume(), 1.0);
  EXPECT_DOUBLE_EQ(mesh.interface_area(), 1.5);
}

TEST(Geometry, SquareInPlane) {
  const CellMesh coarse = build_unit_cell(2, 4, InclusionShape::cube(0.5), kCenter);
  EXPECT_EQ(coarse.faces().size(), 8u);
  int per_side[2][2] = {};
  for (const auto& f : coarse.faces()) per_side[f.axis][f.normal[f.axis] > 0]++;
  for (auto& axis : per_side)
    for (int count : axis) EXPECT_EQ(count, 2);

  const CellMesh mesh = build_unit_cell(2, 8, InclusionShape::cube(0.5), kCenter);
  EXPECT_DOUBLE_EQ(mesh.inclusion_volume(), 0.25);
  EXPECT_EQ(mesh.faces().size(), 16u);
  EXPECT_DOUBLE_EQ(mesh.interface_area(), 2.0);
}

TEST(Geometry, SphereCountMatchesEnumeration) {
  const int res = 16;
  const CellMesh mesh = build_unit_cell(3, res, InclusionShape::sphere(0.25), kCenter);
  int count = 0;
  for (int k = 0; k < res; ++k)
    for (int j = 0; j < res; ++j)
      for (int i = 0; i < res; ++i) {
        const double x = (i + 0.5) / res - 0.5;
        const double y = (j + 0.5) / res - 0.5;
        const double z = (k + 0.5) / res - 0.5;
        if (std::sqrt(x * x + y * y + z * z) < 0.25) ++count;
      }
  EXPECT_EQ(mesh.inclusion_voxel_count(), count);
  EXPECT_DOUBLE_EQ(mesh.inclusion_volume(), static_cast<double>(count) / (res * res * res));
}

TEST(Geometry, InterfaceIsClosedAndNormalsAreUnitAxes) {
  for (const auto& mesh : {build_unit_cell(3, 16, InclusionShape::sphere(0.3), kCenter),
                           build_unit_cell(2, 16, InclusionShape::sphere(0.3), {0.45, 0.55, 0.5}),
                           build_unit_cell(3, 8, InclusionShape::cube(0.5), kCenter)}) {
    const Point s = face_closure(mesh);
    for (double v : s) EXPECT_EQ(v, 0.0);
    for (const auto& f : interface_faces(mesh)) {
      double norm = 0.0;
      int nonzero = 0;
      for (double c : f.normal) {
        norm += c * c;
        nonzero += c != 0.0;
      }
      EXPECT_EQ(norm, 1.0);
      EXPECT_EQ(nonzero, 1);
      EXPECT_EQ(mesh.phase(f.matrix_voxel), Phase::matrix);
      EXPECT_EQ(mesh.phase(f.inclusion_voxel), Phase::inclusion);
      // normal points from the matrix voxel to the inclusion voxel
      const auto cm = mesh.voxel_coords(f.matrix_voxel);
      const auto ci = mesh.voxel_coords(f.inclusion_voxel);
      EXPECT_EQ(ci[f.axis] - cm[f.axis], static_cast<int>(f.normal[f.axis]));
    }
    EXPECT_TRUE(validate_geometry(mesh).ok());
  }
}

TEST(Geometry, FacesAreExactlyThePhaseBoundaries) {
  const CellMesh mesh = build_unit_cell(2, 16, InclusionShape::sphere(0.3), kCenter);
  int expected = 0;
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const auto c = mesh.voxel_coords(v);
    for (int a = 0; a < 2; ++a) {
      auto n = c;
      n[a] += 1;
      if (mesh.phase(v) != mesh.phase(mesh.voxel_index(n))) ++expected;
    }
  }
  EXPECT_EQ(static_cast<int>(mesh.faces().size()), expected);
}

TEST(Geometry, InclusionTouchingBoundaryRejected) {
  EXPECT_THROW(build_unit_cell(3, 8, InclusionShape::cube(1.0), kCenter), GeometryError);
  std::vector<Phase> labels(64, Phase::inclusion);
  const CellMesh full = CellMesh::from_labels(2, 8, labels);
  const GeometryReport r = validate_geometry(full);
  EXPECT_FALSE(r.inclusion_interior);
  EXPECT_FALSE(r.ok());
}

TEST(Geometry, PinchedMatrixIsDisconnected) {
  // Four inclusion voxels around (4,4): the enclosed matrix voxel reaches
  // the rest of the matrix only through corner contacts.
  const int res = 8;
  std::vector<Phase> labels(res * res, Phase::matrix);
  for (auto [i, j] : {std::pair{3, 4}, {5, 4}, {4, 3}, {4, 5}}) labels[j * res + i] = Phase::inclusion;
  const CellMesh mesh = CellMesh::from_labels(2, res, labels);
  const GeometryReport r = validate_geometry(mesh);
  EXPECT_FALSE(r.matrix_connected);
  EXPECT_EQ(r.matrix_components, 2);
  EXPECT_TRUE(r.inclusion_interior);
  EXPECT_TRUE(r.interface_closed);
  EXPECT_THROW(require_valid_geometry(mesh), GeometryError);
}

TEST(Geometry, EmptyInclusionFlagged) {
  const CellMesh mesh = CellMesh::from_labels(2, 4, std::vector<Phase>(16, Phase::matrix));
  EXPECT_FALSE(validate_geometry(mesh).inclusion_nonempty);
}

TEST(Geometry, SmallResolutionRejected) {
  EXPECT_THROW(build_unit_cell(2, 3, InclusionShape::cube(0.3), kCenter), GeometryError);
}

TEST(Geometry, PeriodicMapIsIdempotent) {
  const PeriodicDofMap map(3, 4);
  EXPECT_EQ(map.lattice_node_count(), 125);
  EXPECT_EQ(map.periodic_node_count(), 64);
  std::vector<int> hits(64, 0);
  for (int n = 0; n < map.lattice_node_count(); ++n) {
    const int r = map.representative(n);
    EXPECT_EQ(map.representative(r), r);
    EXPECT_EQ(map.periodic_index(r), map.periodic_index(n));
    hits[map.periodic_index(n)]++;
  }
  for (int v : hits) EXPECT_GE(v, 1);
  // the corner class holds all 8 corners
  EXPECT_EQ(hits[0], 8);
}

TEST(Geometry, AlignedCubeFractionIndependentOfResolution) {
  for (int res : {8, 16, 32}) {
    const CellMesh mesh = build_unit_cell(2, res, InclusionShape::cube(0.5), kCenter);
    EXPECT_DOUBLE_EQ(mesh.inclusion_volume(), 0.25);
    EXPECT_DOUBLE_EQ(mesh.interface_area(), 2.0);
  }
}

TEST(Geometry, MacroDomainValidation) {
  MacroDomain d;
  d.dim = 2;
  EXPECT_NO_THROW(d.validate());
  d.extent[1] = 0.0;
  EXPECT_THROW(d.validate(), ConfigError);
  d.extent[1] = 1.0;
  d.res[0] = 0;
  EXPECT_THROW(d.validate(), ConfigError);
}
