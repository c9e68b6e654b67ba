#include "biothom/cell_problems.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/SparseCholesky>

#include "biothom/errors.hpp"

namespace biothom {

int strain_pair_index(int dim, int j, int k) {
  for (int index = 0; index < mandel_size(dim); ++index) {
    const auto [a, b] = mandel_pair(dim, index);
    if ((a == j && b == k) || (a == k && b == j)) return index;
  }
  throw std::out_of_range("strain pair index out of range");
}

ElasticCorrectorSet solve_elasticity_cell(const CellMesh& mesh, const PhaseMaterials& materials, double tol) {
  const int d = mesh.dim();
  if (materials.dim() != d) throw std::invalid_argument("material and cell dimensions differ");
  const SparseOperator op = assemble_elasticity(mesh, materials.matrix.stiffness, materials.inclusion.stiffness);
  ElasticCorrectorSet set;
  set.dim = d;
  for (int index = 0; index < mandel_size(d); ++index) {
    const auto [j, k] = mandel_pair(d, index);
    const Vector load =
        constant_strain_load(mesh, materials.matrix.stiffness, materials.inclusion.stiffness, unit_strain(d, j, k));
    CgResult r = solve_projected_cg(op, load, tol);
    set.fields.push_back(std::move(r.solution));
    set.iterations.push_back(r.iterations);
    set.residuals.push_back(r.residual);
  }
  return set;
}

PressureCorrectorSet solve_pressure_cell(const CellMesh& mesh, const Matrix& permeability, double tol) {
  const GeometryReport report = validate_geometry(mesh);
  if (!report.matrix_connected)
    throw GeometryError("matrix phase has " + std::to_string(report.matrix_components) +
                        " components; the pressure cell problem needs a connected matrix");
  const int d = mesh.dim();
  if (permeability.rows() != d || permeability.cols() != d)
    throw std::invalid_argument("permeability must be " + std::to_string(d) + "x" + std::to_string(d));
  PressureCorrectorSet set;
  set.dim = d;
  set.space = CellSpace(mesh, Region::matrix);
  const SparseOperator op = assemble_scalar_diffusion(mesh, set.space, permeability, permeability);
  for (int j = 0; j < d; ++j) {
    const Vector e = Vector::Unit(d, j);
    const Vector load = constant_gradient_load(mesh, set.space, permeability, permeability, e);
    CgResult r = solve_projected_cg(op, load, tol);
    set.fields.push_back(std::move(r.solution));
    set.iterations.push_back(r.iterations);
    set.residuals.push_back(r.residual);
  }
  return set;
}

Point CellAggregates::normal_integral(const Vector& v) const {
  return {normal[0].dot(v), normal[1].dot(v), normal[2].dot(v)};
}

struct RobinStepper::Factor {
  Eigen::SimplicialLDLT<SparseMatrix> ldlt;
};

RobinStepper::RobinStepper(const CellMesh& mesh, double storage, const Matrix& permeability, double exchange,
                           double dt)
    : storage_(storage), dt_(dt) {
  if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
  if (!(storage > 0.0)) throw std::invalid_argument("inclusion storage coefficient must be positive");
  if (exchange < 0.0) throw std::invalid_argument("interface permeability must be nonnegative");
  space_ = CellSpace(mesh, Region::inclusion);
  const int n = space_.size();
  if (n == 0) throw GeometryError("inclusion phase is empty");

  aggregates_.volume = assemble_lumped_mass(mesh, space_);
  aggregates_.exchange = Vector::Zero(n);
  for (auto& w : aggregates_.normal) w = Vector::Zero(n);
  for (const auto& f : mesh.faces())
    for (int a = 0; a < f.node_count; ++a) {
      const int dof = space_.dof(f.nodes[a]);
      aggregates_.exchange[dof] += exchange * f.area / f.node_count;
      for (int k = 0; k < 3; ++k) aggregates_.normal[k][dof] += f.normal[k] * f.area / f.node_count;
    }

  const SparseOperator diffusion = assemble_scalar_diffusion(mesh, space_, permeability, permeability);
  system_ = diffusion.matrix;
  std::vector<Eigen::Triplet<double>> diag;
  for (int i = 0; i < n; ++i)
    diag.emplace_back(i, i, storage / dt * aggregates_.volume[i] + aggregates_.exchange[i]);
  SparseMatrix d(n, n);
  d.setFromTriplets(diag.begin(), diag.end());
  system_ += d;
  factor_ = std::make_unique<Factor>();
  factor_->ldlt.compute(system_);
  if (factor_->ldlt.info() != Eigen::Success) throw SolverError("Robin step factorization failed", 0, 0.0);
}

RobinStepper::~RobinStepper() = default;
RobinStepper::RobinStepper(RobinStepper&&) noexcept = default;
RobinStepper& RobinStepper::operator=(RobinStepper&&) noexcept = default;

namespace {

Vector step_rhs(const CellAggregates& agg, double storage, double dt, const Vector& previous, double boundary_value) {
  Vector rhs = (storage / dt) * agg.volume.cwiseProduct(previous);
  if (boundary_value != 0.0) rhs += boundary_value * agg.exchange;
  return rhs;
}

}  // namespace

Vector RobinStepper::step(const Vector& previous, double boundary_value) const {
  if (previous.size() != size()) throw std::invalid_argument("inclusion field size mismatch");
  Vector next = factor_->ldlt.solve(step_rhs(aggregates_, storage_, dt_, previous, boundary_value));
  if (factor_->ldlt.info() != Eigen::Success) throw SolverError("Robin step solve failed", 0, 0.0);
  return next;
}

double RobinStepper::residual(const Vector& previous, double boundary_value, const Vector& next) const {
  const Vector rhs = step_rhs(aggregates_, storage_, dt_, previous, boundary_value);
  const double scale = rhs.norm();
  const double r = (system_ * next - rhs).norm();
  return scale > 0.0 ? r / scale : r;
}

StepResponse solve_robin_evolution(const RobinStepper& stepper, int steps) {
  if (steps < 0) throw std::invalid_argument("step count must be nonnegative");
  StepResponse h;
  h.dt = stepper.dt();
  h.storage = stepper.storage();
  h.steps = steps;
  h.space = stepper.space();
  h.aggregates = stepper.aggregates();
  h.fields.reserve(steps + 1);
  h.fields.push_back(Vector::Zero(stepper.size()));
  h.residuals.push_back(0.0);
  for (int n = 1; n <= steps; ++n) {
    Vector next = stepper.step(h.fields.back(), 1.0);
    h.residuals.push_back(stepper.residual(h.fields.back(), 1.0, next));
    h.fields.push_back(std::move(next));
  }
  for (const Vector& z : h.fields) {
    h.exchange.push_back(h.aggregates.exchange_integral(z));
    h.normal_flux.push_back(h.aggregates.normal_integral(z));
    h.volume.push_back(h.aggregates.volume_integral(z));
  }
  return h;
}

StepResponse solve_robin_evolution(const CellMesh& mesh, double storage, const Matrix& permeability, double exchange,
                                  double dt, int steps) {
  return solve_robin_evolution(RobinStepper(mesh, storage, permeability, exchange, dt), steps);
}

Vector expand_displacement(const ElasticCorrectorSet& correctors, const Matrix& strain) {
  const int d = correctors.dim;
  if (strain.rows() != d || strain.cols() != d) throw std::invalid_argument("strain dimension mismatch");
  Vector u = Vector::Zero(correctors.fields.front().size());
  for (int j = 0; j < d; ++j)
    for (int k = 0; k < d; ++k)
      if (strain(j, k) != 0.0) u += strain(j, k) * correctors(j, k);
  return u;
}

Vector expand_pressure(const PressureCorrectorSet& correctors, const Vector& gradient) {
  if (gradient.size() != correctors.dim) throw std::invalid_argument("gradient dimension mismatch");
  Vector p = Vector::Zero(correctors.space.size());
  for (int j = 0; j < correctors.dim; ++j)
    if (gradient[j] != 0.0) p += gradient[j] * correctors[j];
  return p;
}

}  // namespace biothom
