#include "biothom/materials.hpp"

#include <cmath>

#include "biothom/errors.hpp"

namespace biothom {

namespace {

void check_phase(const PhaseProperties& p, int dim, const std::string& prefix, const std::string& storage_key,
                 const std::string& permeability_key, const std::string& alpha_key, bool allow_degenerate) {
  if (p.stiffness.dim() != dim) throw ConfigError(prefix + ".stiffness", "dimension mismatch");
  const double scale = std::max(1.0, p.stiffness.max_abs());
  if (p.stiffness.minor_asymmetry() > 1e-12 * scale)
    throw ConfigError(prefix + ".stiffness", "tensor lacks minor symmetries");
  if (!(p.stiffness.coercivity() > 0.0))
    throw ConfigError(prefix + ".stiffness", "tensor is not coercive on symmetric matrices");
  if (!(p.storage > 0.0) || !std::isfinite(p.storage)) throw ConfigError(storage_key, "must be positive");
  if (p.permeability.rows() != dim || p.permeability.cols() != dim)
    throw ConfigError(permeability_key, "must be a " + std::to_string(dim) + "x" + std::to_string(dim) + " matrix");
  if (!is_spd(p.permeability)) throw ConfigError(permeability_key, "must be symmetric positive definite");
  const bool alpha_ok = allow_degenerate ? p.biot_willis >= 0.0 : p.biot_willis > 0.0;
  if (!alpha_ok || !std::isfinite(p.biot_willis)) throw ConfigError(alpha_key, "must be positive");
}

}  // namespace

void PhaseMaterials::validate(bool allow_degenerate) const {
  const int d = dim();
  check_phase(matrix, d, "materials.matrix", "materials.c1", "materials.K1", "materials.alpha1", allow_degenerate);
  check_phase(inclusion, d, "materials.inclusion", "materials.c2", "materials.K2", "materials.alpha2",
              allow_degenerate);
  const bool g_ok = allow_degenerate ? interface_permeability >= 0.0 : interface_permeability > 0.0;
  if (!g_ok || !std::isfinite(interface_permeability)) throw ConfigError("materials.g", "must be positive");
}

PhaseMaterials PhaseMaterials::isotropic(int dim, double lambda_matrix, double mu_matrix, double lambda_inclusion,
                                         double mu_inclusion) {
  PhaseMaterials m;
  m.matrix.stiffness = Tensor4::isotropic(dim, lambda_matrix, mu_matrix);
  m.inclusion.stiffness = Tensor4::isotropic(dim, lambda_inclusion, mu_inclusion);
  m.matrix.permeability = Matrix::Identity(dim, dim);
  m.inclusion.permeability = Matrix::Identity(dim, dim);
  return m;
}

}  // namespace biothom
