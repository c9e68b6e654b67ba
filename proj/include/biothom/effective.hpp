#pragma once

#include <string>
#include <vector>

#include "biothom/cell_problems.hpp"
#include "biothom/geometry.hpp"
#include "biothom/materials.hpp"

namespace biothom {

struct CellProvenance {
  int dim = 0;
  int res = 0;
  std::string inclusion;
  int inclusion_voxels = 0;
  int interface_faces = 0;
  std::vector<int> elastic_iterations;
  std::vector<double> elastic_residuals;
  std::vector<int> pressure_iterations;
  std::vector<double> pressure_residuals;
};

struct EffectiveCoefficients {
  int dim = 0;
  Tensor4 stiffness;              ///< energy form
  Tensor4 stiffness_volume_form;  ///< single-sided volume formula
  Matrix permeability;
  Matrix biot_pressure;           ///< pressure-gradient coupling, interface formula
  Matrix biot_pressure_volume;    ///< same coupling from the volume formula
  Matrix biot_strain;             ///< strain-rate coupling
  double storage = 0.0;
  double exchange = 0.0;
  Vector body_force;
  double matrix_fraction = 0.0;
  double inclusion_fraction = 0.0;
  double interface_area = 0.0;
  CellProvenance provenance;
};

/// int_Y A (E^I + e(w^I)) : (E^J + e(w^J)) for every pair of strain pairs.
Tensor4 effective_elasticity(const CellMesh& mesh, const PhaseMaterials& materials,
                             const ElasticCorrectorSet& correctors);
/// int_Y [A (E^J + e(w^J))]_I, the one-sided form; equals the energy form
/// when the correctors are Galerkin solutions.
Tensor4 effective_elasticity_volume_form(const CellMesh& mesh, const PhaseMaterials& materials,
                                         const ElasticCorrectorSet& correctors);

/// int_Y1 K1 (grad pi_j + e_j) . (grad pi_k + e_k)
Matrix effective_permeability(const CellMesh& mesh, const Matrix& permeability,
                              const PressureCorrectorSet& correctors);

/// alpha1 (|Y1| delta_jk + int_Gamma pi_k n_j ds)
Matrix biot_willis_pressure(const CellMesh& mesh, const PressureCorrectorSet& correctors, double alpha1);
/// alpha1 (|Y1| delta_jk + int_Y1 d pi_k / d y_j dy)
Matrix biot_willis_pressure_volume(const CellMesh& mesh, const PressureCorrectorSet& correctors, double alpha1);
/// alpha1 (|Y1| delta_jk + int_Y1 div w^jk dy)
Matrix biot_willis_strain(const CellMesh& mesh, const ElasticCorrectorSet& correctors, double alpha1);

struct CellAverages {
  double storage = 0.0;
  double exchange = 0.0;
  Vector body_force;
};

CellAverages averages(const CellMesh& mesh, const PhaseMaterials& materials, const Vector& f1, const Vector& f2);

/// Arithmetic and harmonic volume averages of the phase stiffnesses in Mandel
/// form, and the arithmetic bound |Y1| K1 for the permeability.
Matrix stiffness_voigt_bound(const PhaseMaterials& materials, double matrix_fraction, double inclusion_fraction);
Matrix stiffness_reuss_bound(const PhaseMaterials& materials, double matrix_fraction, double inclusion_fraction);
Matrix permeability_voigt_bound(const Matrix& permeability, double matrix_fraction);

EffectiveCoefficients effective_coefficients(const CellMesh& mesh, const PhaseMaterials& materials,
                                             const ElasticCorrectorSet& elastic,
                                             const PressureCorrectorSet& pressure, const Vector& f1,
                                             const Vector& f2);

/// Increment kernels on a uniform lag grid; entry 0 is zero and entry n is
/// the increment of the step response between steps n-1 and n.
struct KernelTable {
  int dim = 0;
  double dt = 0.0;
  int steps = 0;
  double alpha2 = 0.0;
  std::vector<Point> theta;
  std::vector<double> eta;
  std::vector<double> m;
  std::vector<Point> cum_theta;
  std::vector<double> cum_eta;
  std::vector<double> cum_m;

  double time(int n) const { return n * dt; }
};

/// theta_n = alpha2 int_Gamma dzeta n ds, eta_n = int_Gamma g dzeta ds,
/// m_n = int_Y2 dzeta dy. The exchange coefficient g is already part of the
/// history's aggregates.
KernelTable memory_kernels(const StepResponse& zeta, int dim, double alpha2);

struct Homogenization {
  ElasticCorrectorSet elastic;
  PressureCorrectorSet pressure;
  StepResponse zeta;
  EffectiveCoefficients coefficients;
  KernelTable kernels;
};

/// Runs the three cell problems and assembles every coefficient and kernel.
Homogenization homogenize(const CellMesh& mesh, const PhaseMaterials& materials, const Vector& f1, const Vector& f2,
                          double dt, int steps);

}  // namespace biothom
