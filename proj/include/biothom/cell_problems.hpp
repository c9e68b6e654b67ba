#pragma once

#include <array>
#include <memory>
#include <vector>

#include "biothom/fem.hpp"
#include "biothom/geometry.hpp"
#include "biothom/materials.hpp"

namespace biothom {

/// Position of the unordered pair (j, k) in the Mandel ordering.
int strain_pair_index(int dim, int j, int k);

/// Periodic displacement correctors, one per unordered strain pair j <= k.
/// Fields are interleaved (node * dim + component) and have zero mean per
/// component.
struct ElasticCorrectorSet {
  int dim = 0;
  std::vector<Vector> fields;
  std::vector<int> iterations;
  std::vector<double> residuals;

  const Vector& operator()(int j, int k) const { return fields[strain_pair_index(dim, j, k)]; }
};

/// Pressure correctors on the matrix phase, one per axis, zero nodal mean.
struct PressureCorrectorSet {
  int dim = 0;
  CellSpace space;
  std::vector<Vector> fields;
  std::vector<int> iterations;
  std::vector<double> residuals;

  const Vector& operator[](int j) const { return fields[j]; }
};

ElasticCorrectorSet solve_elasticity_cell(const CellMesh& mesh, const PhaseMaterials& materials, double tol = 1e-12);

/// Throws GeometryError when the matrix phase is not connected.
PressureCorrectorSet solve_pressure_cell(const CellMesh& mesh, const Matrix& permeability, double tol = 1e-12);

/// Weight vectors on a space that turn nodal values into cell integrals by a
/// dot product: lumped volume, interface exchange (g ds) and interface
/// normal (n ds) integrals.
struct CellAggregates {
  Vector volume;
  Vector exchange;
  std::array<Vector, 3> normal;

  double volume_integral(const Vector& v) const { return volume.dot(v); }
  double exchange_integral(const Vector& v) const { return exchange.dot(v); }
  Point normal_integral(const Vector& v) const;
};

/// Backward-Euler step of the inclusion problem with Robin exchange on the
/// interface:
///   (c/dt M + K + R) x = c/dt M x_prev + b R 1
/// with lumped mass M and face-lumped interface mass R. The matrix is
/// factored once; step() may be called any number of times.
class RobinStepper {
 public:
  RobinStepper(const CellMesh& mesh, double storage, const Matrix& permeability, double exchange, double dt);
  ~RobinStepper();
  RobinStepper(RobinStepper&&) noexcept;
  RobinStepper& operator=(RobinStepper&&) noexcept;

  const CellSpace& space() const { return space_; }
  const CellAggregates& aggregates() const { return aggregates_; }
  double dt() const { return dt_; }
  double storage() const { return storage_; }
  int size() const { return space_.size(); }

  Vector step(const Vector& previous, double boundary_value) const;
  /// Relative residual of a step, for diagnostics.
  double residual(const Vector& previous, double boundary_value, const Vector& next) const;

 private:
  struct Factor;
  CellSpace space_;
  CellAggregates aggregates_;
  double storage_;
  double dt_;
  SparseMatrix system_;
  std::unique_ptr<Factor> factor_;
};

/// Step response of the inclusion problem to a unit matrix pressure switched
/// on at t = 0, with per-step aggregates.
struct StepResponse {
  double dt = 0.0;
  int steps = 0;
  double storage = 0.0;
  CellSpace space;
  CellAggregates aggregates;
  std::vector<Vector> fields;       ///< steps + 1 entries, fields[0] = 0
  std::vector<double> exchange;     ///< int_Gamma g zeta_n ds
  std::vector<Point> normal_flux;   ///< int_Gamma zeta_n n ds
  std::vector<double> volume;       ///< int_Y2 zeta_n dy
  std::vector<double> residuals;

  double time(int n) const { return n * dt; }
};

StepResponse solve_robin_evolution(const RobinStepper& stepper, int steps);
StepResponse solve_robin_evolution(const CellMesh& mesh, double storage, const Matrix& permeability, double exchange,
                                  double dt, int steps);

/// sum_{j,k} strain_jk w^jk over all ordered pairs.
Vector expand_displacement(const ElasticCorrectorSet& correctors, const Matrix& strain);
/// sum_j gradient_j pi_j.
Vector expand_pressure(const PressureCorrectorSet& correctors, const Vector& gradient);

}  // namespace biothom
