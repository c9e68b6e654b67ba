#include "biothom/fem.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "biothom/errors.hpp"

namespace biothom {

namespace {

struct Rule1D {
  std::vector<double> points;
  std::vector<double> weights;
};

Rule1D gauss_rule(int n) {
  if (n == 2) {
    const double d = 0.5 / std::sqrt(3.0);
    return {{0.5 - d, 0.5 + d}, {0.5, 0.5}};
  }
  if (n == 3) {
    const double d = 0.5 * std::sqrt(0.6);
    return {{0.5 - d, 0.5, 0.5 + d}, {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0}};
  }
  throw std::invalid_argument("supported Gauss rules: 2 or 3 points per axis");
}

bool voxel_in(const CellSpace& space, Phase p) { return space.includes(p); }

}  // namespace

Q1Element::Q1Element(int dim, const Point& spacing, int points_per_axis) : dim_(dim), spacing_(spacing) {
  const Rule1D rule = gauss_rule(points_per_axis);
  const int n1 = points_per_axis;
  int nq = 1;
  for (int a = 0; a < dim; ++a) nq *= n1;
  double volume = 1.0;
  for (int a = 0; a < dim; ++a) volume *= spacing[a];
  const int nn = node_count();
  weight_.resize(nq);
  shape_.resize(nq * nn);
  grad_.assign(nq * nn * 3, 0.0);
  offset_.resize(nq);
  for (int q = 0; q < nq; ++q) {
    std::array<double, 3> xi{};
    double w = volume;
    int rem = q;
    for (int a = 0; a < dim; ++a) {
      xi[a] = rule.points[rem % n1];
      w *= rule.weights[rem % n1];
      offset_[q][a] = xi[a] * spacing[a];
      rem /= n1;
    }
    weight_[q] = w;
    for (int node = 0; node < nn; ++node) {
      double value = 1.0;
      for (int a = 0; a < dim; ++a) value *= ((node >> a) & 1) ? xi[a] : 1.0 - xi[a];
      shape_[q * nn + node] = value;
      for (int k = 0; k < dim; ++k) {
        double g = (((node >> k) & 1) ? 1.0 : -1.0) / spacing[k];
        for (int a = 0; a < dim; ++a)
          if (a != k) g *= ((node >> a) & 1) ? xi[a] : 1.0 - xi[a];
        grad_[(q * nn + node) * 3 + k] = g;
      }
    }
  }
}

Matrix element_mass(const Q1Element& el) {
  const int n = el.node_count();
  Matrix m = Matrix::Zero(n, n);
  for (int q = 0; q < el.point_count(); ++q)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) m(a, b) += el.weight(q) * el.shape(q, a) * el.shape(q, b);
  return m;
}

Matrix element_diffusion(const Q1Element& el, const Matrix& conductivity) {
  const int n = el.node_count();
  const int d = el.dim();
  Matrix k = Matrix::Zero(n, n);
  for (int q = 0; q < el.point_count(); ++q)
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        double s = 0.0;
        for (int i = 0; i < d; ++i)
          for (int j = 0; j < d; ++j) s += el.grad(q, a, i) * conductivity(i, j) * el.grad(q, b, j);
        k(a, b) += el.weight(q) * s;
      }
  return k;
}

Matrix element_elasticity(const Q1Element& el, const Tensor4& stiffness) {
  const int n = el.node_count();
  const int d = el.dim();
  Matrix k = Matrix::Zero(n * d, n * d);
  for (int q = 0; q < el.point_count(); ++q)
    for (int a = 0; a < n; ++a)
      for (int i = 0; i < d; ++i)
        for (int b = 0; b < n; ++b)
          for (int j = 0; j < d; ++j) {
            double s = 0.0;
            for (int kk = 0; kk < d; ++kk)
              for (int l = 0; l < d; ++l) s += el.grad(q, a, kk) * stiffness(i, kk, j, l) * el.grad(q, b, l);
            k(a * d + i, b * d + j) += el.weight(q) * s;
          }
  return k;
}

CellSpace::CellSpace(const CellMesh& mesh, Region region) : region_(region) {
  dof_of_node_.assign(mesh.node_count(), -1);
  std::vector<char> used(mesh.node_count(), 0);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    if (!includes(mesh.phase(v))) continue;
    const auto nodes = mesh.voxel_nodes(v);
    for (int a = 0; a < mesh.nodes_per_voxel(); ++a) used[nodes[a]] = 1;
  }
  for (int n = 0; n < mesh.node_count(); ++n)
    if (used[n]) {
      dof_of_node_[n] = static_cast<int>(node_of_dof_.size());
      node_of_dof_.push_back(n);
    }
}

bool CellSpace::includes(Phase phase) const {
  switch (region_) {
    case Region::matrix:
      return phase == Phase::matrix;
    case Region::inclusion:
      return phase == Phase::inclusion;
    case Region::whole:
      return true;
  }
  return false;
}

double SparseOperator::max_asymmetry() const {
  const SparseMatrix diff = matrix - SparseMatrix(matrix.transpose());
  double dev = 0.0;
  double scale = 0.0;
  for (int k = 0; k < diff.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(diff, k); it; ++it) dev = std::max(dev, std::abs(it.value()));
  for (int k = 0; k < matrix.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(matrix, k); it; ++it) scale = std::max(scale, std::abs(it.value()));
  return scale > 0.0 ? dev / scale : dev;
}

void project_null_space(const SparseOperator& op, Vector& v) {
  if (op.null_space == NullSpace::none || v.size() == 0) return;
  const int nc = op.null_space == NullSpace::constants ? 1 : op.components;
  const Eigen::Index n = v.size() / nc;
  for (int c = 0; c < nc; ++c) {
    double mean = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) mean += v[i * nc + c];
    mean /= static_cast<double>(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i * nc + c] -= mean;
  }
}

SparseOperator assemble_scalar_diffusion(const CellMesh& mesh, const CellSpace& space, const Matrix& matrix_coefficient,
                                         const Matrix& inclusion_coefficient) {
  if (voxel_in(space, Phase::matrix) && !is_spd(matrix_coefficient))
    throw std::invalid_argument("matrix-phase diffusion coefficient must be symmetric positive definite");
  if (voxel_in(space, Phase::inclusion) && !is_spd(inclusion_coefficient))
    throw std::invalid_argument("inclusion-phase diffusion coefficient must be symmetric positive definite");
  const double h = mesh.spacing();
  const Q1Element el(mesh.dim(), {h, h, h});
  const Matrix ke_matrix = element_diffusion(el, matrix_coefficient);
  const Matrix ke_inclusion = element_diffusion(el, inclusion_coefficient);
  const int nn = el.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const Phase p = mesh.phase(v);
    if (!space.includes(p)) continue;
    const Matrix& ke = p == Phase::matrix ? ke_matrix : ke_inclusion;
    const auto nodes = mesh.voxel_nodes(v);
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b) triplets.emplace_back(space.dof(nodes[a]), space.dof(nodes[b]), ke(a, b));
  }
  SparseOperator op;
  op.matrix.resize(space.size(), space.size());
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.null_space = NullSpace::constants;
  return op;
}

Vector constant_gradient_load(const CellMesh& mesh, const CellSpace& space, const Matrix& matrix_coefficient,
                              const Matrix& inclusion_coefficient, const Vector& gradient) {
  const double h = mesh.spacing();
  const Q1Element el(mesh.dim(), {h, h, h});
  const int d = mesh.dim();
  Vector flux_matrix = matrix_coefficient * gradient;
  Vector flux_inclusion = inclusion_coefficient * gradient;
  Vector load = Vector::Zero(space.size());
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const Phase p = mesh.phase(v);
    if (!space.includes(p)) continue;
    const Vector& flux = p == Phase::matrix ? flux_matrix : flux_inclusion;
    const auto nodes = mesh.voxel_nodes(v);
    for (int q = 0; q < el.point_count(); ++q)
      for (int a = 0; a < el.node_count(); ++a) {
        double s = 0.0;
        for (int k = 0; k < d; ++k) s += el.grad(q, a, k) * flux[k];
        load[space.dof(nodes[a])] -= el.weight(q) * s;
      }
  }
  return load;
}

Vector assemble_lumped_mass(const CellMesh& mesh, const CellSpace& space) {
  const double share = std::pow(mesh.spacing(), mesh.dim()) / mesh.nodes_per_voxel();
  Vector mass = Vector::Zero(space.size());
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    if (!space.includes(mesh.phase(v))) continue;
    const auto nodes = mesh.voxel_nodes(v);
    for (int a = 0; a < mesh.nodes_per_voxel(); ++a) mass[space.dof(nodes[a])] += share;
  }
  return mass;
}

namespace {

void check_stiffness(const Tensor4& a, int dim) {
  if (a.dim() != dim) throw std::invalid_argument("stiffness tensor dimension mismatch");
  if (a.minor_asymmetry() > 1e-12 * std::max(1.0, a.max_abs()))
    throw std::invalid_argument("stiffness tensor lacks minor symmetries");
  if (!(a.coercivity() > 0.0)) throw std::invalid_argument("stiffness tensor is not coercive");
}

}  // namespace

SparseOperator assemble_elasticity(const CellMesh& mesh, const Tensor4& matrix_stiffness,
                                   const Tensor4& inclusion_stiffness) {
  const int d = mesh.dim();
  check_stiffness(matrix_stiffness, d);
  check_stiffness(inclusion_stiffness, d);
  const double h = mesh.spacing();
  const Q1Element el(d, {h, h, h});
  const Matrix ke_matrix = element_elasticity(el, matrix_stiffness);
  const Matrix ke_inclusion = element_elasticity(el, inclusion_stiffness);
  const int nn = el.node_count();
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(mesh.voxel_count()) * nn * nn * d * d);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const Matrix& ke = mesh.phase(v) == Phase::matrix ? ke_matrix : ke_inclusion;
    const auto nodes = mesh.voxel_nodes(v);
    for (int a = 0; a < nn; ++a)
      for (int i = 0; i < d; ++i)
        for (int b = 0; b < nn; ++b)
          for (int j = 0; j < d; ++j)
            triplets.emplace_back(nodes[a] * d + i, nodes[b] * d + j, ke(a * d + i, b * d + j));
  }
  SparseOperator op;
  op.matrix.resize(mesh.node_count() * d, mesh.node_count() * d);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  op.null_space = NullSpace::component_constants;
  op.components = d;
  return op;
}

Vector constant_strain_load(const CellMesh& mesh, const Tensor4& matrix_stiffness, const Tensor4& inclusion_stiffness,
                            const Matrix& strain) {
  const int d = mesh.dim();
  const double h = mesh.spacing();
  const Q1Element el(d, {h, h, h});
  const Matrix stress_matrix = matrix_stiffness.contract(strain);
  const Matrix stress_inclusion = inclusion_stiffness.contract(strain);
  Vector load = Vector::Zero(mesh.node_count() * d);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const Matrix& stress = mesh.phase(v) == Phase::matrix ? stress_matrix : stress_inclusion;
    const auto nodes = mesh.voxel_nodes(v);
    for (int q = 0; q < el.point_count(); ++q)
      for (int a = 0; a < el.node_count(); ++a)
        for (int i = 0; i < d; ++i) {
          double s = 0.0;
          for (int k = 0; k < d; ++k) s += el.grad(q, a, k) * stress(i, k);
          load[nodes[a] * d + i] -= el.weight(q) * s;
        }
  }
  return load;
}

SparseOperator assemble_interface_mass(const CellMesh& mesh, const CellSpace& space,
                                       std::span<const double> face_exchange) {
  const auto faces = mesh.faces();
  if (face_exchange.size() != faces.size()) throw std::invalid_argument("one exchange value per interface face");
  Vector diag = Vector::Zero(space.size());
  for (const auto& f : faces) {
    const double g = face_exchange[f.id];
    if (!(g > 0.0)) throw std::invalid_argument("interface exchange coefficient must be positive");
    for (int a = 0; a < f.node_count; ++a) {
      const int dof = space.dof(f.nodes[a]);
      if (dof < 0) throw std::invalid_argument("interface node outside the space");
      diag[dof] += g * f.area / f.node_count;
    }
  }
  SparseOperator op;
  op.matrix.resize(space.size(), space.size());
  std::vector<Eigen::Triplet<double>> triplets;
  for (int i = 0; i < space.size(); ++i)
    if (diag[i] != 0.0) triplets.emplace_back(i, i, diag[i]);
  op.matrix.setFromTriplets(triplets.begin(), triplets.end());
  return op;
}

SparseMatrix assemble_interface_coupling(const CellMesh& mesh, const CellSpace& inclusion_space,
                                         const CellSpace& matrix_space, std::span<const double> face_exchange) {
  const auto faces = mesh.faces();
  if (face_exchange.size() != faces.size()) throw std::invalid_argument("one exchange value per interface face");
  std::vector<Eigen::Triplet<double>> triplets;
  for (const auto& f : faces) {
    const double g = face_exchange[f.id];
    if (!(g > 0.0)) throw std::invalid_argument("interface exchange coefficient must be positive");
    for (int a = 0; a < f.node_count; ++a) {
      const int row = inclusion_space.dof(f.nodes[a]);
      const int col = matrix_space.dof(f.nodes[a]);
      if (row < 0 || col < 0) throw std::invalid_argument("interface node outside the space");
      triplets.emplace_back(row, col, g * f.area / f.node_count);
    }
  }
  SparseMatrix c(inclusion_space.size(), matrix_space.size());
  c.setFromTriplets(triplets.begin(), triplets.end());
  return c;
}

CgResult solve_projected_cg(const SparseOperator& op, const Vector& rhs, double tol, int max_iter) {
  const int n = op.size();
  if (rhs.size() != n) throw std::invalid_argument("right-hand side size mismatch");
  Vector b = rhs;
  project_null_space(op, b);
  CgResult result;
  result.solution = Vector::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) return result;

  Vector inv_diag(n);
  for (int i = 0; i < n; ++i) {
    const double d = op.matrix.coeff(i, i);
    inv_diag[i] = d > 0.0 ? 1.0 / d : 1.0;
  }
  Vector& x = result.solution;
  Vector r = b;
  Vector z = inv_diag.cwiseProduct(r);
  project_null_space(op, z);
  Vector p = z;
  double rz = r.dot(z);
  double rel = 1.0;
  int it = 0;
  while (it < max_iter) {
    const Vector ap = op.matrix * p;
    const double pap = p.dot(ap);
    if (!(pap > 0.0)) break;
    const double alpha = rz / pap;
    x += alpha * p;
    r -= alpha * ap;
    project_null_space(op, r);
    ++it;
    rel = r.norm() / bnorm;
    if (rel <= tol) break;
    z = inv_diag.cwiseProduct(r);
    project_null_space(op, z);
    const double rz_next = r.dot(z);
    p = z + (rz_next / rz) * p;
    rz = rz_next;
  }
  project_null_space(op, x);
  Vector true_residual = b - op.matrix * x;
  project_null_space(op, true_residual);
  result.iterations = it;
  result.residual = true_residual.norm() / bnorm;
  if (!(result.residual <= 10.0 * tol) && !(rel <= tol && result.residual <= 100.0 * tol))
    throw SolverError("projected CG did not converge", it, result.residual);
  return result;
}

}  // namespace biothom
