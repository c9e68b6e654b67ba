#pragma once

#include <vector>

#include "biothom/effective.hpp"
#include "biothom/geometry.hpp"

namespace biothom {

/// Independent dense steppers on the same structured Q1 grid, assembled from
/// Kronecker products of exact one-dimensional element integrals. Used as
/// oracles for the degenerate limits of the homogenized system.

struct ReferenceBiot {
  std::vector<Vector> u;  ///< node * dim + component
  std::vector<Vector> p;
};

/// Single-porosity Biot consolidation: no exchange, no memory.
ReferenceBiot reference_biot(const MacroDomain& domain, const EffectiveCoefficients& coefficients, double dt,
                             int steps);

/// Deformation-free pressure law with interface exchange and memory:
///   c dp/dt - div(K grad p) + g p - sum eta * p = source.
/// eta[n] is the increment kernel (eta[0] unused).
std::vector<Vector> reference_exchange_diffusion(const MacroDomain& domain, double storage, const Matrix& permeability,
                                                 double exchange, const std::vector<double>& eta, double source,
                                                 double dt, int steps);

}  // namespace biothom
