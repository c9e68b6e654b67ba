#pragma once

#include <string>
#include <vector>

#include "biothom/effective.hpp"
#include "biothom/macro.hpp"

namespace biothom {

struct CheckReport {
  std::string name;
  bool passed = false;
  double measured = 0.0;
  double expected = 0.0;
  double tolerance = 0.0;
  std::string source;  ///< where the expected value comes from
  std::string detail;
};

/// Everything needed to run the pipeline end to end.
struct PipelineSetup {
  CellMesh mesh;
  PhaseMaterials materials;
  Vector f1;
  Vector f2;
  MacroDomain domain;
  double dt = 0.0;
  int steps = 0;
};

std::vector<CheckReport> check_tensor_laws(const EffectiveCoefficients& coefficients,
                                           const PhaseMaterials& materials);

std::vector<CheckReport> check_kernel_laws(const KernelTable& kernels, const EffectiveCoefficients& coefficients,
                                           const StepResponse& zeta);

/// Zero interface permeability against an independent single-porosity Biot
/// stepper; frozen deformation (equal stiffnesses, zero Biot-Willis
/// coefficients) against an independent exchange-diffusion stepper; and
/// the vanishing of theta alone when alpha2 = 0.
std::vector<CheckReport> check_degenerate_limits(const PipelineSetup& setup);

/// Kernel-convolution and micro-coupled runs on identical grids.
CheckReport check_mode_equivalence(const MacroConfig& config, const CellMesh& mesh, const PhaseMaterials& materials);

/// Overwrites one off-diagonal stiffness entry, breaking major symmetry.
void plant_negative_control(EffectiveCoefficients& coefficients);

/// Full suite, sorted by check name.
std::vector<CheckReport> run_verification(const PipelineSetup& setup, bool negative_control = false);

bool all_passed(const std::vector<CheckReport>& reports);

}  // namespace biothom
