#include "biothom/macro.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/SparseLU>

#include "biothom/errors.hpp"

namespace biothom {

MacroGrid::MacroGrid(const MacroDomain& domain) : domain_(domain) {
  domain_.validate();
  node_count_ = 1;
  element_count_ = 1;
  spacing_ = {1.0, 1.0, 1.0};
  for (int a = 0; a < domain_.dim; ++a) {
    node_count_ *= domain_.res[a] + 1;
    element_count_ *= domain_.res[a];
    spacing_[a] = domain_.extent[a] / domain_.res[a];
  }
}

std::array<int, 3> MacroGrid::node_coords(int node) const {
  std::array<int, 3> c{};
  for (int a = 0; a < dim(); ++a) {
    c[a] = node % (domain_.res[a] + 1);
    node /= domain_.res[a] + 1;
  }
  return c;
}

Point MacroGrid::node_position(int node) const {
  const auto c = node_coords(node);
  Point x{};
  for (int a = 0; a < dim(); ++a) x[a] = c[a] * spacing_[a];
  return x;
}

bool MacroGrid::on_boundary(int node) const {
  const auto c = node_coords(node);
  for (int a = 0; a < dim(); ++a)
    if (c[a] == 0 || c[a] == domain_.res[a]) return true;
  return false;
}

std::array<int, 8> MacroGrid::element_nodes(int element) const {
  std::array<int, 3> c{};
  for (int a = 0; a < dim(); ++a) {
    c[a] = element % domain_.res[a];
    element /= domain_.res[a];
  }
  std::array<int, 8> nodes{};
  for (int local = 0; local < (1 << dim()); ++local) {
    int idx = 0;
    for (int a = dim() - 1; a >= 0; --a) idx = idx * (domain_.res[a] + 1) + c[a] + ((local >> a) & 1);
    nodes[local] = idx;
  }
  return nodes;
}

Point MacroGrid::element_origin(int element) const {
  Point x{};
  for (int a = 0; a < dim(); ++a) {
    x[a] = (element % domain_.res[a]) * spacing_[a];
    element /= domain_.res[a];
  }
  return x;
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Operators of the homogenized system in the full layout: displacement dof
// node * d + i, pressure dof N * d + node.
struct MacroOperators {
  int d = 0;
  int n = 0;
  SparseMatrix mass;        // N x N
  SparseMatrix diffusion;   // N x N
  SparseMatrix elasticity;  // Nd x Nd
  SparseMatrix gradient;    // Nd x N, int (B grad p) . v
  SparseMatrix strain;      // N x Nd, int sym(Lambda) : e(u) q
  Vector node_volume;       // int N_a
};

SparseMatrix from_triplets(int rows, int cols, const Triplets& t) {
  SparseMatrix m(rows, cols);
  m.setFromTriplets(t.begin(), t.end());
  return m;
}

MacroOperators build_operators(const MacroGrid& grid, const EffectiveCoefficients& c) {
  MacroOperators op;
  const int d = grid.dim();
  const int n = grid.node_count();
  op.d = d;
  op.n = n;
  if (c.dim != d) throw ConfigError("macro.dim", "macro and cell dimensions differ");
  const Q1Element el(d, grid.spacing());
  const int nn = el.node_count();
  const Matrix me = element_mass(el);
  const Matrix ke = element_diffusion(el, c.permeability);
  const Matrix ue = element_elasticity(el, c.stiffness);
  const Matrix lambda = 0.5 * (c.biot_strain + c.biot_strain.transpose());
  // cross[k](a, b) = int N_a dN_b/dx_k
  std::vector<Matrix> cross(d, Matrix::Zero(nn, nn));
  for (int q = 0; q < el.point_count(); ++q)
    for (int a = 0; a < nn; ++a)
      for (int b = 0; b < nn; ++b)
        for (int k = 0; k < d; ++k) cross[k](a, b) += el.weight(q) * el.shape(q, a) * el.grad(q, b, k);

  Triplets tm, tk, tu, tg, ts;
  op.node_volume = Vector::Zero(n);
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    for (int a = 0; a < nn; ++a) {
      op.node_volume[nodes[a]] += me.row(a).sum();
      for (int b = 0; b < nn; ++b) {
        tm.emplace_back(nodes[a], nodes[b], me(a, b));
        tk.emplace_back(nodes[a], nodes[b], ke(a, b));
        for (int i = 0; i < d; ++i) {
          double g = 0.0;
          double s = 0.0;
          for (int k = 0; k < d; ++k) {
            g += c.biot_pressure(i, k) * cross[k](a, b);
            s += lambda(i, k) * cross[k](a, b);
          }
          tg.emplace_back(nodes[a] * d + i, nodes[b], g);
          ts.emplace_back(nodes[a], nodes[b] * d + i, s);
          for (int j = 0; j < d; ++j) tu.emplace_back(nodes[a] * d + i, nodes[b] * d + j, ue(a * d + i, b * d + j));
        }
      }
    }
  }
  op.mass = from_triplets(n, n, tm);
  op.diffusion = from_triplets(n, n, tk);
  op.elasticity = from_triplets(n * d, n * d, tu);
  op.gradient = from_triplets(n * d, n, tg);
  op.strain = from_triplets(n, n * d, ts);
  return op;
}

// Memory contributions of past steps, per node: theta history (node * d + i)
// and eta history.
struct MemoryTerms {
  Vector theta;
  Vector eta;
};

class MacroStepper {
 public:
  MacroStepper(const MacroConfig& config, const Point& theta1, double eta1)
      : config_(config), grid_(config.domain), op_(build_operators(grid_, config.coefficients)) {
    const int d = op_.d;
    const int n = op_.n;
    const int total = n * d + n;
    free_of_.assign(total, -1);
    for (int node = 0; node < n; ++node) {
      const bool boundary = grid_.on_boundary(node);
      if (!boundary)
        for (int i = 0; i < d; ++i) free_of_[node * d + i] = 0;
      if (!boundary || config.domain.pressure_bc == PressureBoundary::neumann_zero) free_of_[n * d + node] = 0;
    }
    for (int k = 0; k < total; ++k)
      if (free_of_[k] == 0) {
        free_of_[k] = static_cast<int>(dofs_.size());
        dofs_.push_back(k);
      }

    const EffectiveCoefficients& c = config.coefficients;
    const double dt = config.dt;
    Triplets t;
    auto add = [&](const SparseMatrix& m, int row0, int col0, double scale) {
      for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
          const int r = free_of_[row0 + it.row()];
          const int col = free_of_[col0 + it.col()];
          if (r >= 0 && col >= 0) t.emplace_back(r, col, scale * it.value());
        }
    };
    add(op_.elasticity, 0, 0, 1.0);
    add(op_.gradient, 0, n * d, 1.0);
    for (int i = 0; i < d; ++i)
      if (theta1[i] != 0.0)
        for (int k = 0; k < op_.mass.outerSize(); ++k)
          for (SparseMatrix::InnerIterator it(op_.mass, k); it; ++it) {
            const int r = free_of_[it.row() * d + i];
            const int col = free_of_[n * d + it.col()];
            if (r >= 0 && col >= 0) t.emplace_back(r, col, theta1[i] * it.value());
          }
    add(op_.strain, n * d, 0, 1.0 / dt);
    add(op_.diffusion, n * d, n * d, 1.0);
    add(op_.mass, n * d, n * d, c.storage / dt + c.exchange - eta1);
    const int m = static_cast<int>(dofs_.size());
    system_ = from_triplets(m, m, t);
    system_.makeCompressed();
    if (m > 0) {
      lu_.compute(system_);
      if (lu_.info() != Eigen::Success) throw SolverError("macro system factorization failed", 0, 0.0);
    }

    body_ = Vector::Zero(n * d);
    for (int node = 0; node < n; ++node)
      for (int i = 0; i < d; ++i) body_[node * d + i] = c.body_force[i] * op_.node_volume[node];
  }

  const MacroGrid& grid() const { return grid_; }

  // Advances (u, p) by one step given the memory terms; returns the residual.
  double step(int step_index, const MemoryTerms& memory, Vector& u, Vector& p) const {
    const int d = op_.d;
    const int n = op_.n;
    const double dt = config_.dt;
    const double t = step_index * dt;
    Vector full = Vector::Zero(n * d + n);
    Vector mom = body_;
    for (int i = 0; i < d; ++i) {
      Vector hist(n);
      for (int node = 0; node < n; ++node) hist[node] = memory.theta[node * d + i];
      const Vector mh = op_.mass * hist;
      for (int node = 0; node < n; ++node) mom[node * d + i] -= mh[node];
    }
    Vector mass = (config_.coefficients.storage / dt) * (op_.mass * p) + (1.0 / dt) * (op_.strain * u) +
                  op_.mass * memory.eta;
    add_sources(step_index, t, mom, mass);
    full.head(n * d) = mom;
    full.tail(n) = mass;

    const int m = static_cast<int>(dofs_.size());
    Vector rhs(m);
    for (int k = 0; k < m; ++k) rhs[k] = full[dofs_[k]];
    Vector x = Vector::Zero(m);
    double residual = 0.0;
    if (m > 0) {
      x = lu_.solve(rhs);
      if (lu_.info() != Eigen::Success) throw SolverError("macro step solve failed", step_index, 0.0);
      const double scale = rhs.norm();
      residual = (system_ * x - rhs).norm();
      if (scale > 0.0) residual /= scale;
      if (!std::isfinite(residual)) throw SolverError("macro step produced non-finite values", step_index, residual);
    }
    Vector sol = Vector::Zero(n * d + n);
    for (int k = 0; k < m; ++k) sol[dofs_[k]] = x[k];
    u = sol.head(n * d);
    p = sol.tail(n);
    return residual;
  }

 private:
  void add_sources(int step_index, double t, Vector& mom, Vector& mass) const {
    const auto& src = config_.sources;
    if (!src.momentum && !src.mass) return;
    const int d = op_.d;
    const Q1Element el(d, grid_.spacing(), 3);
    for (int e = 0; e < grid_.element_count(); ++e) {
      const auto nodes = grid_.element_nodes(e);
      const Point origin = grid_.element_origin(e);
      for (int q = 0; q < el.point_count(); ++q) {
        Point x{};
        for (int a = 0; a < d; ++a) x[a] = origin[a] + el.offset(q)[a];
        const Point f = src.momentum ? src.momentum(step_index, t, x) : Point{};
        const double s = src.mass ? src.mass(step_index, t, x) : 0.0;
        for (int a = 0; a < el.node_count(); ++a) {
          const double w = el.weight(q) * el.shape(q, a);
          for (int i = 0; i < d; ++i) mom[nodes[a] * d + i] += w * f[i];
          mass[nodes[a]] += w * s;
        }
      }
    }
  }

  const MacroConfig& config_;
  MacroGrid grid_;
  MacroOperators op_;
  std::vector<int> free_of_;
  std::vector<int> dofs_;
  SparseMatrix system_;
  Eigen::SparseLU<SparseMatrix> lu_;
  Vector body_;
};

void check_time_grid(double dt, double other_dt, int steps, int other_steps, const char* what) {
  if (!(dt > 0.0)) throw ConfigError("time.dt", "must be positive");
  if (steps < 0) throw ConfigError("time.steps", "must be nonnegative");
  if (std::abs(dt - other_dt) > 1e-12 * dt)
    throw ConfigError("time.dt", std::string("macro time step differs from the ") + what + " time step");
  if (other_steps < steps) throw ConfigError("time.steps", std::string(what) + " history is shorter than the run");
}

MacroHistory start_history(const MacroGrid& grid, const MacroConfig& config) {
  MacroHistory h;
  h.grid = grid;
  h.dt = config.dt;
  h.steps = config.steps;
  const int n = grid.node_count();
  h.u.push_back(Vector::Zero(n * grid.dim()));
  h.p1.push_back(Vector::Zero(n));
  h.inclusion_mean.push_back(Vector::Zero(n));
  h.overall.push_back(Vector::Zero(n));
  h.residuals.push_back(0.0);
  return h;
}

}  // namespace

MacroHistory run_macro(const MacroConfig& config) {
  const KernelTable& k = config.kernels;
  check_time_grid(config.dt, k.dt, config.steps, k.steps, "kernel table");
  const Point theta1 = config.steps >= 1 ? k.theta[1] : Point{};
  const double eta1 = config.steps >= 1 ? k.eta[1] : 0.0;
  const MacroStepper stepper(config, theta1, eta1);
  const MacroGrid& grid = stepper.grid();
  const int n = grid.node_count();
  const int d = grid.dim();
  MacroHistory h = start_history(grid, config);
  const double y2 = config.coefficients.inclusion_fraction;
  for (int step = 1; step <= config.steps; ++step) {
    MemoryTerms mem{Vector::Zero(n * d), Vector::Zero(n)};
    for (int m = 1; m < step; ++m) {
      const int lag = step - m + 1;
      mem.eta += k.eta[lag] * h.p1[m];
      for (int node = 0; node < n; ++node)
        for (int i = 0; i < d; ++i) mem.theta[node * d + i] += k.theta[lag][i] * h.p1[m][node];
    }
    Vector u = h.u.back();
    Vector p = h.p1.back();
    h.residuals.push_back(stepper.step(step, mem, u, p));
    h.u.push_back(std::move(u));
    h.p1.push_back(std::move(p));
  }
  h.overall = overall_pressure(h.p1, k, config.coefficients.matrix_fraction);
  h.inclusion_mean.clear();
  for (int step = 0; step <= config.steps; ++step)
    h.inclusion_mean.push_back((h.overall[step] - config.coefficients.matrix_fraction * h.p1[step]) / y2);
  return h;
}

MacroHistory run_micro_coupled(const MacroConfig& config, const RobinStepper& cell, double alpha2) {
  check_time_grid(config.dt, cell.dt(), config.steps, config.steps, "cell");
  const CellAggregates& agg = cell.aggregates();
  const Vector zeta1 = cell.step(Vector::Zero(cell.size()), 1.0);
  const Point nf = agg.normal_integral(zeta1);
  Point theta1{};
  for (int i = 0; i < config.coefficients.dim; ++i) theta1[i] = alpha2 * nf[i];
  const double eta1 = agg.exchange_integral(zeta1);
  const MacroStepper stepper(config, theta1, eta1);
  const MacroGrid& grid = stepper.grid();
  const int n = grid.node_count();
  const int d = grid.dim();
  const double y1 = config.coefficients.matrix_fraction;
  const double y2 = config.coefficients.inclusion_fraction;
  MacroHistory h = start_history(grid, config);
  std::vector<Vector> p2(n, Vector::Zero(cell.size()));
  for (int step = 1; step <= config.steps; ++step) {
    MemoryTerms mem{Vector::Zero(n * d), Vector::Zero(n)};
    std::vector<Vector> free_response(n);
    for (int node = 0; node < n; ++node) {
      free_response[node] = cell.step(p2[node], 0.0);
      mem.eta[node] = agg.exchange_integral(free_response[node]);
      const Point f = agg.normal_integral(free_response[node]);
      for (int i = 0; i < d; ++i) mem.theta[node * d + i] = alpha2 * f[i];
    }
    Vector u = h.u.back();
    Vector p = h.p1.back();
    h.residuals.push_back(stepper.step(step, mem, u, p));
    Vector mean(n);
    Vector overall(n);
    for (int node = 0; node < n; ++node) {
      p2[node] = free_response[node] + p[node] * zeta1;
      const double integral = agg.volume_integral(p2[node]);
      mean[node] = integral / y2;
      overall[node] = y1 * p[node] + integral;
    }
    h.u.push_back(std::move(u));
    h.p1.push_back(std::move(p));
    h.inclusion_mean.push_back(std::move(mean));
    h.overall.push_back(std::move(overall));
  }
  return h;
}

MacroHistory run_micro_coupled(const MacroConfig& config, const CellMesh& mesh, const PhaseMaterials& materials) {
  const RobinStepper cell(mesh, materials.inclusion.storage, materials.inclusion.permeability,
                          materials.interface_permeability, config.dt);
  return run_micro_coupled(config, cell, materials.inclusion.biot_willis);
}

std::vector<Vector> reconstruct_p2(const std::vector<double>& p1, const StepResponse& zeta) {
  if (p1.empty()) throw std::invalid_argument("empty pressure history");
  const int steps = static_cast<int>(p1.size()) - 1;
  if (steps > zeta.steps) throw ConfigError("time.steps", "step-response history is shorter than the pressure history");
  std::vector<Vector> p2(steps + 1, Vector::Zero(zeta.space.size()));
  for (int n = 1; n <= steps; ++n)
    for (int m = 1; m <= n; ++m) {
      if (p1[m] == 0.0) continue;
      p2[n] += p1[m] * (zeta.fields[n - m + 1] - zeta.fields[n - m]);
    }
  return p2;
}

std::vector<Vector> overall_pressure(const std::vector<Vector>& p1, const KernelTable& kernels,
                                     double matrix_fraction) {
  if (p1.empty()) throw std::invalid_argument("empty pressure history");
  const int steps = static_cast<int>(p1.size()) - 1;
  if (steps > kernels.steps) throw ConfigError("time.steps", "kernel table is shorter than the pressure history");
  std::vector<Vector> out;
  out.reserve(p1.size());
  for (int n = 0; n <= steps; ++n) {
    Vector v = matrix_fraction * p1[n];
    for (int m = 1; m <= n; ++m) v += kernels.m[n - m + 1] * p1[m];
    out.push_back(std::move(v));
  }
  return out;
}

double l2_norm(const MacroGrid& grid, const Vector& field, int components) {
  const Q1Element el(grid.dim(), grid.spacing());
  const Matrix me = element_mass(el);
  double sum = 0.0;
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    for (int c = 0; c < components; ++c) {
      Vector local(el.node_count());
      for (int a = 0; a < el.node_count(); ++a) local[a] = field[nodes[a] * components + c];
      sum += local.dot(me * local);
    }
  }
  return std::sqrt(std::max(sum, 0.0));
}

double max_abs(const Vector& field) { return field.size() == 0 ? 0.0 : field.cwiseAbs().maxCoeff(); }

double l2_error(const MacroGrid& grid, const Vector& field, int components,
                const std::function<Point(const Point&)>& exact) {
  const int d = grid.dim();
  const Q1Element el(d, grid.spacing(), 3);
  double sum = 0.0;
  for (int e = 0; e < grid.element_count(); ++e) {
    const auto nodes = grid.element_nodes(e);
    const Point origin = grid.element_origin(e);
    for (int q = 0; q < el.point_count(); ++q) {
      Point x{};
      for (int a = 0; a < d; ++a) x[a] = origin[a] + el.offset(q)[a];
      const Point ex = exact(x);
      for (int c = 0; c < components; ++c) {
        double v = 0.0;
        for (int a = 0; a < el.node_count(); ++a) v += el.shape(q, a) * field[nodes[a] * components + c];
        sum += el.weight(q) * (v - ex[c]) * (v - ex[c]);
      }
    }
  }
  return std::sqrt(sum);
}

}  // namespace biothom
