#pragma once

#include <functional>
#include <vector>

#include "biothom/cell_problems.hpp"
#include "biothom/effective.hpp"
#include "biothom/fem.hpp"
#include "biothom/geometry.hpp"

namespace biothom {

/// Structured Q1 grid on the macroscopic box; nodes are numbered x fastest.
class MacroGrid {
 public:
  MacroGrid() = default;
  explicit MacroGrid(const MacroDomain& domain);

  const MacroDomain& domain() const { return domain_; }
  int dim() const { return domain_.dim; }
  int node_count() const { return node_count_; }
  int element_count() const { return element_count_; }
  const Point& spacing() const { return spacing_; }
  std::array<int, 3> node_coords(int node) const;
  Point node_position(int node) const;
  bool on_boundary(int node) const;
  /// Global nodes of an element; bit a of the local index is the offset along axis a.
  std::array<int, 8> element_nodes(int element) const;
  Point element_origin(int element) const;

 private:
  MacroDomain domain_;
  Point spacing_{};
  int node_count_ = 0;
  int element_count_ = 0;
};

/// Extra volume sources, used by manufactured-solution tests and the
/// degenerate-limit checks. Both receive the step index n >= 1, t_n and x.
struct MacroSources {
  std::function<Point(int, double, const Point&)> momentum;
  std::function<double(int, double, const Point&)> mass;
};

enum class CouplingMode { kernel, micro };

struct MacroConfig {
  MacroDomain domain;
  EffectiveCoefficients coefficients;
  KernelTable kernels;
  double dt = 0.0;
  int steps = 0;
  MacroSources sources;
};

struct MacroHistory {
  MacroGrid grid;
  double dt = 0.0;
  int steps = 0;
  std::vector<Vector> u;              ///< node * dim + component
  std::vector<Vector> p1;
  std::vector<Vector> inclusion_mean; ///< inclusion-averaged pressure per node
  std::vector<Vector> overall;        ///< |Y1| p1 + int_Y2 p2
  std::vector<double> residuals;      ///< relative residual of each step solve

  double time(int n) const { return n * dt; }
};

/// Homogenized system with memory convolutions built from the kernel table.
MacroHistory run_macro(const MacroConfig& config);

/// Same system with a live inclusion field at every pressure node, advanced
/// by the cell Robin step; no kernel table is consulted.
MacroHistory run_micro_coupled(const MacroConfig& config, const RobinStepper& stepper, double alpha2);
MacroHistory run_micro_coupled(const MacroConfig& config, const CellMesh& mesh, const PhaseMaterials& materials);

/// Discrete Duhamel sum p2_n = sum_{m=1..n} p1_m (zeta_{n-m+1} - zeta_{n-m}).
std::vector<Vector> reconstruct_p2(const std::vector<double>& p1, const StepResponse& zeta);

/// P_n = |Y1| p1_n + sum_{m=1..n} m_{n-m+1} p1_m, node-wise.
std::vector<Vector> overall_pressure(const std::vector<Vector>& p1, const KernelTable& kernels,
                                     double matrix_fraction);

/// Consistent-mass L2 norm of a nodal field with `components` interleaved
/// components (Euclidean norm over components).
double l2_norm(const MacroGrid& grid, const Vector& field, int components = 1);
double max_abs(const Vector& field);
/// L2 distance between a nodal field and an exact function, 3-point Gauss
/// quadrature per axis.
double l2_error(const MacroGrid& grid, const Vector& field, int components,
                const std::function<Point(const Point&)>& exact);

}  // namespace biothom
