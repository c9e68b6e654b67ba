#pragma once

#include "biothom/tensor.hpp"

namespace biothom {

/// Poroelastic properties of one constituent, piecewise constant on the cell.
struct PhaseProperties {
  Tensor4 stiffness;    ///< fourth-rank elasticity tensor
  double storage = 1.0; ///< specific storage (compressibility) coefficient
  Matrix permeability;  ///< d x d SPD
  double biot_willis = 1.0;
};

/// Per-phase coefficients of the matrix (connected) and inclusion phases,
/// plus the hydraulic permeability of the interface barrier.
struct PhaseMaterials {
  PhaseProperties matrix;
  PhaseProperties inclusion;
  double interface_permeability = 1.0;

  int dim() const { return matrix.stiffness.dim(); }

  /// Throws ConfigError naming the first violated positivity, symmetry or
  /// coercivity requirement. With `allow_degenerate`, zero interface
  /// permeability and zero Biot-Willis coefficients are accepted; these are
  /// the limits used by the single-porosity and deformation-free checks.
  void validate(bool allow_degenerate = false) const;

  static PhaseMaterials isotropic(int dim, double lambda_matrix, double mu_matrix, double lambda_inclusion,
                                  double mu_inclusion);
};

}  // namespace biothom
