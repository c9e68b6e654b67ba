#include "biothom/effective.hpp"

#include <cmath>
#include <stdexcept>

namespace biothom {

namespace {

Q1Element cell_element(const CellMesh& mesh) {
  const double h = mesh.spacing();
  return Q1Element(mesh.dim(), {h, h, h});
}

const Tensor4& phase_stiffness(const PhaseMaterials& materials, Phase p) {
  return p == Phase::matrix ? materials.matrix.stiffness : materials.inclusion.stiffness;
}

// Symmetric gradient of the interleaved displacement field at quadrature point q.
Matrix field_strain(const Q1Element& el, const std::array<int, 8>& nodes, const Vector& u, int q) {
  const int d = el.dim();
  Matrix grad = Matrix::Zero(d, d);
  for (int a = 0; a < el.node_count(); ++a)
    for (int i = 0; i < d; ++i) {
      const double ui = u[nodes[a] * d + i];
      for (int k = 0; k < d; ++k) grad(i, k) += ui * el.grad(q, a, k);
    }
  return 0.5 * (grad + grad.transpose());
}

Vector field_gradient(const Q1Element& el, const std::array<int, 8>& nodes, const CellSpace& space, const Vector& p,
                      int q) {
  const int d = el.dim();
  Vector g = Vector::Zero(d);
  for (int a = 0; a < el.node_count(); ++a) {
    const double pa = p[space.dof(nodes[a])];
    for (int k = 0; k < d; ++k) g[k] += pa * el.grad(q, a, k);
  }
  return g;
}

void check_elastic(const CellMesh& mesh, const ElasticCorrectorSet& c) {
  if (c.dim != mesh.dim() || static_cast<int>(c.fields.size()) != mandel_size(mesh.dim()) ||
      c.fields.front().size() != mesh.node_count() * mesh.dim())
    throw std::invalid_argument("elastic correctors do not belong to this cell");
}

void check_pressure(const CellMesh& mesh, const PressureCorrectorSet& c) {
  if (c.dim != mesh.dim() || static_cast<int>(c.fields.size()) != mesh.dim() ||
      c.space.region() != Region::matrix || c.fields.front().size() != c.space.size())
    throw std::invalid_argument("pressure correctors do not belong to this cell");
}

void fill_pair_entry(Tensor4& t, int dim, int I, int J, double value) {
  const auto [a, b] = mandel_pair(dim, I);
  const auto [c, d] = mandel_pair(dim, J);
  t(a, b, c, d) = value;
  t(b, a, c, d) = value;
  t(a, b, d, c) = value;
  t(b, a, d, c) = value;
}

}  // namespace

Tensor4 effective_elasticity(const CellMesh& mesh, const PhaseMaterials& materials,
                             const ElasticCorrectorSet& correctors) {
  check_elastic(mesh, correctors);
  const int d = mesh.dim();
  const int np = mandel_size(d);
  const Q1Element el = cell_element(mesh);
  Matrix energy = Matrix::Zero(np, np);
  std::vector<Matrix> strains(np);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const Tensor4& a = phase_stiffness(materials, mesh.phase(v));
    const auto nodes = mesh.voxel_nodes(v);
    for (int q = 0; q < el.point_count(); ++q) {
      for (int I = 0; I < np; ++I) {
        const auto [j, k] = mandel_pair(d, I);
        strains[I] = unit_strain(d, j, k) + field_strain(el, nodes, correctors.fields[I], q);
      }
      for (int I = 0; I < np; ++I) {
        const Matrix stress = a.contract(strains[I]);
        for (int J = 0; J < np; ++J) energy(J, I) += el.weight(q) * (stress.array() * strains[J].array()).sum();
      }
    }
  }
  Tensor4 t(d);
  for (int I = 0; I < np; ++I)
    for (int J = 0; J < np; ++J) fill_pair_entry(t, d, I, J, energy(I, J));
  return t;
}

Tensor4 effective_elasticity_volume_form(const CellMesh& mesh, const PhaseMaterials& materials,
                                         const ElasticCorrectorSet& correctors) {
  check_elastic(mesh, correctors);
  const int d = mesh.dim();
  const int np = mandel_size(d);
  const Q1Element el = cell_element(mesh);
  Matrix table = Matrix::Zero(np, np);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    const Tensor4& a = phase_stiffness(materials, mesh.phase(v));
    const auto nodes = mesh.voxel_nodes(v);
    for (int q = 0; q < el.point_count(); ++q)
      for (int J = 0; J < np; ++J) {
        const auto [j, k] = mandel_pair(d, J);
        const Matrix stress = a.contract(unit_strain(d, j, k) + field_strain(el, nodes, correctors.fields[J], q));
        for (int I = 0; I < np; ++I) {
          const auto [r, s] = mandel_pair(d, I);
          table(I, J) += el.weight(q) * stress(r, s);
        }
      }
  }
  Tensor4 t(d);
  for (int I = 0; I < np; ++I)
    for (int J = 0; J < np; ++J) fill_pair_entry(t, d, I, J, table(I, J));
  return t;
}

Matrix effective_permeability(const CellMesh& mesh, const Matrix& permeability,
                              const PressureCorrectorSet& correctors) {
  check_pressure(mesh, correctors);
  const int d = mesh.dim();
  const Q1Element el = cell_element(mesh);
  Matrix k = Matrix::Zero(d, d);
  Matrix grads(d, d);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    if (mesh.phase(v) != Phase::matrix) continue;
    const auto nodes = mesh.voxel_nodes(v);
    for (int q = 0; q < el.point_count(); ++q) {
      for (int j = 0; j < d; ++j)
        grads.col(j) = field_gradient(el, nodes, correctors.space, correctors[j], q) + Vector::Unit(d, j);
      k += el.weight(q) * grads.transpose() * permeability * grads;
    }
  }
  return k;
}

Matrix biot_willis_pressure(const CellMesh& mesh, const PressureCorrectorSet& correctors, double alpha1) {
  check_pressure(mesh, correctors);
  const int d = mesh.dim();
  Matrix b = mesh.matrix_volume() * Matrix::Identity(d, d);
  for (const auto& f : mesh.faces())
    for (int k = 0; k < d; ++k) {
      double mean = 0.0;
      for (int a = 0; a < f.node_count; ++a) mean += correctors[k][correctors.space.dof(f.nodes[a])];
      mean /= f.node_count;
      for (int j = 0; j < d; ++j) b(j, k) += f.area * f.normal[j] * mean;
    }
  return alpha1 * b;
}

Matrix biot_willis_pressure_volume(const CellMesh& mesh, const PressureCorrectorSet& correctors, double alpha1) {
  check_pressure(mesh, correctors);
  const int d = mesh.dim();
  const Q1Element el = cell_element(mesh);
  Matrix b = mesh.matrix_volume() * Matrix::Identity(d, d);
  for (int v = 0; v < mesh.voxel_count(); ++v) {
    if (mesh.phase(v) != Phase::matrix) continue;
    const auto nodes = mesh.voxel_nodes(v);
    for (int q = 0; q < el.point_count(); ++q)
      for (int k = 0; k < d; ++k) b.col(k) += el.weight(q) * field_gradient(el, nodes, correctors.space, correctors[k], q);
  }
  return alpha1 * b;
}

Matrix biot_willis_strain(const CellMesh& mesh, const ElasticCorrectorSet& correctors, double alpha1) {
  check_elastic(mesh, correctors);
  const int d = mesh.dim();
  const Q1Element el = cell_element(mesh);
  Matrix l = mesh.matrix_volume() * Matrix::Identity(d, d);
  for (int I = 0; I < mandel_size(d); ++I) {
    const auto [j, k] = mandel_pair(d, I);
    double div = 0.0;
    for (int v = 0; v < mesh.voxel_count(); ++v) {
      if (mesh.phase(v) != Phase::matrix) continue;
      const auto nodes = mesh.voxel_nodes(v);
      for (int q = 0; q < el.point_count(); ++q) div += el.weight(q) * field_strain(el, nodes, correctors.fields[I], q).trace();
    }
    l(j, k) += div;
    if (j != k) l(k, j) += div;
  }
  return alpha1 * l;
}

CellAverages averages(const CellMesh& mesh, const PhaseMaterials& materials, const Vector& f1, const Vector& f2) {
  if (f1.size() != mesh.dim() || f2.size() != mesh.dim()) throw std::invalid_argument("body force dimension mismatch");
  CellAverages avg;
  avg.storage = materials.matrix.storage * mesh.matrix_volume();
  for (const auto& f : mesh.faces()) avg.exchange += materials.interface_permeability * f.area;
  avg.body_force = mesh.matrix_volume() * f1 + mesh.inclusion_volume() * f2;
  return avg;
}

Matrix stiffness_voigt_bound(const PhaseMaterials& materials, double matrix_fraction, double inclusion_fraction) {
  return matrix_fraction * materials.matrix.stiffness.to_mandel() +
         inclusion_fraction * materials.inclusion.stiffness.to_mandel();
}

Matrix stiffness_reuss_bound(const PhaseMaterials& materials, double matrix_fraction, double inclusion_fraction) {
  const Matrix compliance = matrix_fraction * materials.matrix.stiffness.to_mandel().inverse() +
                            inclusion_fraction * materials.inclusion.stiffness.to_mandel().inverse();
  return compliance.inverse();
}

Matrix permeability_voigt_bound(const Matrix& permeability, double matrix_fraction) {
  return matrix_fraction * permeability;
}

EffectiveCoefficients effective_coefficients(const CellMesh& mesh, const PhaseMaterials& materials,
                                             const ElasticCorrectorSet& elastic,
                                             const PressureCorrectorSet& pressure, const Vector& f1,
                                             const Vector& f2) {
  EffectiveCoefficients c;
  c.dim = mesh.dim();
  c.stiffness = effective_elasticity(mesh, materials, elastic);
  c.stiffness_volume_form = effective_elasticity_volume_form(mesh, materials, elastic);
  c.permeability = effective_permeability(mesh, materials.matrix.permeability, pressure);
  const double alpha1 = materials.matrix.biot_willis;
  c.biot_pressure = biot_willis_pressure(mesh, pressure, alpha1);
  c.biot_pressure_volume = biot_willis_pressure_volume(mesh, pressure, alpha1);
  c.biot_strain = biot_willis_strain(mesh, elastic, alpha1);
  const CellAverages avg = averages(mesh, materials, f1, f2);
  c.storage = avg.storage;
  c.exchange = avg.exchange;
  c.body_force = avg.body_force;
  c.matrix_fraction = mesh.matrix_volume();
  c.inclusion_fraction = mesh.inclusion_volume();
  c.interface_area = mesh.interface_area();
  c.provenance.dim = mesh.dim();
  c.provenance.res = mesh.res();
  c.provenance.inclusion_voxels = mesh.inclusion_voxel_count();
  c.provenance.interface_faces = static_cast<int>(mesh.faces().size());
  c.provenance.elastic_iterations = elastic.iterations;
  c.provenance.elastic_residuals = elastic.residuals;
  c.provenance.pressure_iterations = pressure.iterations;
  c.provenance.pressure_residuals = pressure.residuals;
  return c;
}

KernelTable memory_kernels(const StepResponse& zeta, int dim, double alpha2) {
  if (zeta.fields.empty() || zeta.exchange.size() != zeta.fields.size())
    throw std::invalid_argument("empty step-response history");
  KernelTable t;
  t.dim = dim;
  t.dt = zeta.dt;
  t.steps = zeta.steps;
  t.alpha2 = alpha2;
  const int n_total = zeta.steps + 1;
  t.theta.assign(n_total, Point{});
  t.eta.assign(n_total, 0.0);
  t.m.assign(n_total, 0.0);
  t.cum_theta.assign(n_total, Point{});
  t.cum_eta.assign(n_total, 0.0);
  t.cum_m.assign(n_total, 0.0);
  for (int n = 1; n < n_total; ++n) {
    const Vector dz = zeta.fields[n] - zeta.fields[n - 1];
    const Point nf = zeta.aggregates.normal_integral(dz);
    for (int k = 0; k < dim; ++k) t.theta[n][k] = alpha2 * nf[k];
    t.eta[n] = zeta.aggregates.exchange_integral(dz);
    t.m[n] = zeta.aggregates.volume_integral(dz);
    for (int k = 0; k < 3; ++k) t.cum_theta[n][k] = t.cum_theta[n - 1][k] + t.theta[n][k];
    t.cum_eta[n] = t.cum_eta[n - 1] + t.eta[n];
    t.cum_m[n] = t.cum_m[n - 1] + t.m[n];
  }
  return t;
}

Homogenization homogenize(const CellMesh& mesh, const PhaseMaterials& materials, const Vector& f1, const Vector& f2,
                          double dt, int steps) {
  Homogenization h;
  h.elastic = solve_elasticity_cell(mesh, materials);
  h.pressure = solve_pressure_cell(mesh, materials.matrix.permeability);
  h.zeta = solve_robin_evolution(mesh, materials.inclusion.storage, materials.inclusion.permeability,
                                 materials.interface_permeability, dt, steps);
  h.coefficients = effective_coefficients(mesh, materials, h.elastic, h.pressure, f1, f2);
  h.kernels = memory_kernels(h.zeta, mesh.dim(), materials.inclusion.biot_willis);
  return h;
}

}  // namespace biothom
