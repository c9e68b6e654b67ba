#pragma once

#include <span>
#include <vector>

#include <Eigen/SparseCore>

#include "biothom/geometry.hpp"
#include "biothom/tensor.hpp"

namespace biothom {

using SparseMatrix = Eigen::SparseMatrix<double>;

/// Q1 (multilinear) reference data on an axis-aligned box with tensor Gauss
/// quadrature. Weights include the element volume.
class Q1Element {
 public:
  Q1Element(int dim, const Point& spacing, int points_per_axis = 2);

  int dim() const { return dim_; }
  int node_count() const { return 1 << dim_; }
  int point_count() const { return static_cast<int>(weight_.size()); }
  const Point& spacing() const { return spacing_; }

  double weight(int q) const { return weight_[q]; }
  double shape(int q, int a) const { return shape_[q * node_count() + a]; }
  double grad(int q, int a, int k) const { return grad_[(q * node_count() + a) * 3 + k]; }
  /// Offset of quadrature point q from the element's lower corner.
  const Point& offset(int q) const { return offset_[q]; }

 private:
  int dim_;
  Point spacing_;
  std::vector<double> weight_;
  std::vector<double> shape_;
  std::vector<double> grad_;
  std::vector<Point> offset_;
};

Matrix element_mass(const Q1Element& el);
Matrix element_diffusion(const Q1Element& el, const Matrix& conductivity);
/// Row/column (a, i) maps to a * dim + i.
Matrix element_elasticity(const Q1Element& el, const Tensor4& stiffness);

enum class Region { matrix, inclusion, whole };

/// Nodes of the periodic cell touched by the voxels of one region; each such
/// node carries one (scalar) degree of freedom.
class CellSpace {
 public:
  CellSpace() = default;
  CellSpace(const CellMesh& mesh, Region region);

  Region region() const { return region_; }
  int size() const { return static_cast<int>(node_of_dof_.size()); }
  int dof(int periodic_node) const { return dof_of_node_[periodic_node]; }
  int node(int dof) const { return node_of_dof_[dof]; }
  bool includes(Phase phase) const;

 private:
  Region region_ = Region::whole;
  std::vector<int> dof_of_node_;
  std::vector<int> node_of_dof_;
};

enum class NullSpace { none, constants, component_constants };

struct SparseOperator {
  SparseMatrix matrix;
  NullSpace null_space = NullSpace::none;
  int components = 1;  ///< interleaved layout: dof * components + component

  int size() const { return static_cast<int>(matrix.rows()); }
  /// Max |a_ij - a_ji| / max |a_ij|.
  double max_asymmetry() const;
};

/// Removes the null-space component (Euclidean projection).
void project_null_space(const SparseOperator& op, Vector& v);

/// Bilinear form of -div(K grad .) over the voxels of the space's region with
/// periodic identification; the coefficient is chosen by voxel phase. Faces
/// bounding the region carry the natural (zero-flux) condition.
SparseOperator assemble_scalar_diffusion(const CellMesh& mesh, const CellSpace& space, const Matrix& matrix_coefficient,
                                         const Matrix& inclusion_coefficient);

/// Load -int K e . grad q over the space's region for a constant vector e.
Vector constant_gradient_load(const CellMesh& mesh, const CellSpace& space, const Matrix& matrix_coefficient,
                              const Matrix& inclusion_coefficient, const Vector& gradient);

/// Row sums of the Q1 mass matrix over the space's region (nodal volumes).
Vector assemble_lumped_mass(const CellMesh& mesh, const CellSpace& space);

/// Form int_Y A e(u) : e(v) on the whole periodic cell; dim components per node.
SparseOperator assemble_elasticity(const CellMesh& mesh, const Tensor4& matrix_stiffness,
                                   const Tensor4& inclusion_stiffness);

/// Load -int_Y (A E) : e(v) for a constant strain E.
Vector constant_strain_load(const CellMesh& mesh, const Tensor4& matrix_stiffness, const Tensor4& inclusion_stiffness,
                            const Matrix& strain);

/// Face-lumped interface mass: each face adds exchange * area / (face nodes)
/// to the diagonal of each of its corner nodes. `face_exchange` holds one
/// strictly positive value per interface face.
SparseOperator assemble_interface_mass(const CellMesh& mesh, const CellSpace& space,
                                       std::span<const double> face_exchange);

/// Lumped cross form int_Gamma g q2 p1 ds: rows index the inclusion space,
/// columns the matrix space. Applied to a constant matrix trace it yields the
/// interface load of the inclusion problem.
SparseMatrix assemble_interface_coupling(const CellMesh& mesh, const CellSpace& inclusion_space,
                                         const CellSpace& matrix_space, std::span<const double> face_exchange);

struct CgResult {
  Vector solution;
  int iterations = 0;
  double residual = 0.0;  ///< ||P(rhs) - A x|| / ||P(rhs)||
};

/// Jacobi-preconditioned conjugate gradients restricted to the orthogonal
/// complement of the operator's null space. Throws SolverError when the
/// relative residual does not reach `tol` within `max_iter` iterations.
CgResult solve_projected_cg(const SparseOperator& op, const Vector& rhs, double tol = 1e-12, int max_iter = 20000);

}  // namespace biothom
