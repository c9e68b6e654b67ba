#include "biothom/verify.hpp"

#include <algorithm>
#include <cmath>

#include "biothom/reference.hpp"

namespace biothom {

namespace {

CheckReport at_most(std::string name, double measured, double tolerance, std::string source,
                    std::string detail = {}) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.expected = 0.0;
  r.tolerance = tolerance;
  r.passed = std::isfinite(measured) && measured <= tolerance;
  r.source = std::move(source);
  r.detail = std::move(detail);
  return r;
}

// Passes when measured >= -tolerance (or > 0 when strict and tolerance is 0).
CheckReport at_least(std::string name, double measured, double tolerance, bool strict, std::string source,
                     std::string detail = {}) {
  CheckReport r;
  r.name = std::move(name);
  r.measured = measured;
  r.expected = 0.0;
  r.tolerance = tolerance;
  r.passed = std::isfinite(measured) && (strict ? measured > -tolerance : measured >= -tolerance);
  r.source = std::move(source);
  r.detail = std::move(detail);
  return r;
}

double max_abs_matrix(const Matrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

double sym_min_eigenvalue(const Matrix& m) { return min_eigenvalue(0.5 * (m + m.transpose())); }

double max_field_diff(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  double d = 0.0;
  for (std::size_t n = 0; n < std::min(a.size(), b.size()); ++n)
    d = std::max(d, (a[n] - b[n]).cwiseAbs().maxCoeff());
  return a.size() == b.size() ? d : INFINITY;
}

MacroDomain coarse_domain(const MacroDomain& domain) {
  // The degenerate oracles assemble dense matrices.
  MacroDomain d = domain;
  const int cap = d.dim == 2 ? 8 : 4;
  for (int a = 0; a < d.dim; ++a) d.res[a] = std::min(d.res[a], cap);
  return d;
}

MacroConfig macro_config(const PipelineSetup& setup, const Homogenization& h, const MacroDomain& domain) {
  MacroConfig c;
  c.domain = domain;
  c.coefficients = h.coefficients;
  c.kernels = h.kernels;
  c.dt = setup.dt;
  c.steps = setup.steps;
  return c;
}

}  // namespace

std::vector<CheckReport> check_tensor_laws(const EffectiveCoefficients& c, const PhaseMaterials& materials) {
  std::vector<CheckReport> out;
  const double a_scale = std::max(c.stiffness.max_abs(), 1e-300);
  out.push_back(at_most("stiffness.minor_symmetry", c.stiffness.minor_asymmetry() / a_scale, 1e-12,
                        "exact symmetry of the energy form"));
  out.push_back(at_most("stiffness.major_symmetry", c.stiffness.major_asymmetry() / a_scale, 1e-8,
                        "exact symmetry of the energy form"));
  out.push_back(at_most("stiffness.energy_vs_volume", c.stiffness.max_abs_diff(c.stiffness_volume_form) / a_scale,
                        1e-8, "Galerkin orthogonality of the correctors"));
  const Matrix am = c.stiffness.to_mandel();
  out.push_back(at_least("stiffness.positive_definite", sym_min_eigenvalue(am), 0.0, true, "coercivity"));
  const double bound_tol = 1e-10 * max_abs_matrix(am);
  out.push_back(at_least("stiffness.voigt_bound",
                         sym_min_eigenvalue(stiffness_voigt_bound(materials, c.matrix_fraction, c.inclusion_fraction) - am), bound_tol, false,
                         "arithmetic-average upper bound"));
  out.push_back(at_least("stiffness.reuss_bound",
                         sym_min_eigenvalue(am - stiffness_reuss_bound(materials, c.matrix_fraction, c.inclusion_fraction)), bound_tol, false,
                         "harmonic-average lower bound"));

  const Matrix& k = c.permeability;
  const double k_scale = std::max(max_abs_matrix(k), 1e-300);
  out.push_back(at_most("permeability.symmetry", max_abs_matrix(k - k.transpose()) / k_scale, 1e-12,
                        "Gram matrix"));
  out.push_back(at_least("permeability.positive_definite", sym_min_eigenvalue(k), 0.0, true, "Gram matrix"));
  out.push_back(at_least("permeability.voigt_bound",
                         sym_min_eigenvalue(permeability_voigt_bound(materials.matrix.permeability, c.matrix_fraction) - k), 1e-12, false,
                         "arithmetic-average upper bound"));

  out.push_back(at_most("biot_pressure.dual_formula", max_abs_matrix(c.biot_pressure - c.biot_pressure_volume), 1e-10,
                        "divergence theorem"));
  const Matrix& l = c.biot_strain;
  out.push_back(at_most("biot_strain.symmetry",
                        max_abs_matrix(l - l.transpose()) / std::max(max_abs_matrix(l), 1e-300), 1e-12,
                        "corrector symmetry"));
  out.push_back(at_most("storage.average", std::abs(c.storage - materials.matrix.storage * c.matrix_fraction),
                        1e-14 * std::max(1.0, c.storage), "volume average"));
  out.push_back(at_most("exchange.average",
                        std::abs(c.exchange - materials.interface_permeability * c.interface_area),
                        1e-12 * std::max(1.0, c.exchange), "interface integral"));
  return out;
}

std::vector<CheckReport> check_kernel_laws(const KernelTable& kernels, const EffectiveCoefficients& c,
                                           const StepResponse& zeta) {
  std::vector<CheckReport> out;
  const int steps = zeta.steps;
  const auto& agg = zeta.aggregates;
  const double g_tilde = agg.exchange.sum();
  const double y2 = agg.volume.sum();

  out.push_back(at_most("zeta.initial", zeta.fields.front().size() ? zeta.fields.front().cwiseAbs().maxCoeff() : 0.0,
                        0.0, "zero initial condition"));
  double lo = 0.0;
  double hi = 0.0;
  double dec = 0.0;
  for (int n = 0; n <= steps; ++n) {
    if (zeta.fields[n].size() == 0) continue;
    lo = std::min(lo, zeta.fields[n].minCoeff());
    hi = std::max(hi, zeta.fields[n].maxCoeff() - 1.0);
    if (n > 0) dec = std::max(dec, -(zeta.fields[n] - zeta.fields[n - 1]).minCoeff());
  }
  out.push_back(at_most("zeta.lower_bound", -lo, 1e-12, "discrete maximum principle"));
  out.push_back(at_most("zeta.upper_bound", hi, 1e-12, "discrete maximum principle"));
  out.push_back(at_most("zeta.monotone", dec, 1e-12, "monotone step response"));

  // c2 (V_n - V_{n-1}) / dt = int_Gamma g (1 - zeta_n); relative to the
  // inflow, floored at 1e-6 of its initial scale.
  double balance = 0.0;
  for (int n = 1; n <= steps; ++n) {
    const double lhs = zeta.storage * (zeta.volume[n] - zeta.volume[n - 1]) / zeta.dt;
    const double rhs = g_tilde - zeta.exchange[n];
    balance = std::max(balance, std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-6 * g_tilde));
  }
  out.push_back(at_most("zeta.mass_balance", g_tilde > 0.0 ? balance : 0.0, 1e-8, "backward-Euler balance"));

  double tel = 0.0;
  const double theta_scale = std::max(kernels.alpha2 * c.interface_area, 1e-300);
  for (int n = 0; n <= steps; ++n) {
    tel = std::max(tel, std::abs(kernels.cum_eta[n] - zeta.exchange[n]) / std::max(g_tilde, 1e-300));
    tel = std::max(tel, std::abs(kernels.cum_m[n] - zeta.volume[n]) / std::max(y2, 1e-300));
    for (int k = 0; k < kernels.dim; ++k)
      tel = std::max(tel, std::abs(kernels.cum_theta[n][k] - kernels.alpha2 * zeta.normal_flux[n][k]) / theta_scale);
  }
  out.push_back(at_most("kernel.telescoping", tel, 1e-12, "reassociated sums"));

  double eta_min = 0.0;
  for (int n = 1; n <= steps; ++n) eta_min = std::min(eta_min, kernels.eta[n]);
  out.push_back(at_least("kernel.eta_nonnegative", eta_min, 1e-12, false, "monotone step response"));

  // Tail tolerances from the measured distance of zeta_N to 1.
  double gap_gamma = 0.0;
  double gap_y2 = 0.0;
  const Vector& last = zeta.fields.back();
  for (int i = 0; i < last.size(); ++i) {
    gap_y2 = std::max(gap_y2, std::abs(1.0 - last[i]));
    if (agg.exchange[i] != 0.0 || agg.normal[0][i] != 0.0 || agg.normal[1][i] != 0.0 || agg.normal[2][i] != 0.0)
      gap_gamma = std::max(gap_gamma, std::abs(1.0 - last[i]));
  }
  {
    CheckReport r = at_most("kernel.exchange_limit", std::abs(kernels.cum_eta[steps] - c.exchange),
                            c.exchange * gap_gamma + 1e-12 * std::max(1.0, c.exchange), "tail estimate");
    r.expected = c.exchange;
    out.push_back(r);
  }
  {
    CheckReport r = at_most("kernel.volume_limit", std::abs(kernels.cum_m[steps] - c.inclusion_fraction),
                            c.inclusion_fraction * gap_y2 + 1e-12, "tail estimate");
    r.expected = c.inclusion_fraction;
    out.push_back(r);
  }
  double theta_excess = 0.0;
  for (int n = 0; n <= steps; ++n) {
    double gap = 0.0;
    for (int i = 0; i < zeta.fields[n].size(); ++i)
      if (agg.normal[0][i] != 0.0 || agg.normal[1][i] != 0.0 || agg.normal[2][i] != 0.0)
        gap = std::max(gap, std::abs(1.0 - zeta.fields[n][i]));
    double norm = 0.0;
    for (int k = 0; k < kernels.dim; ++k) norm += kernels.cum_theta[n][k] * kernels.cum_theta[n][k];
    theta_excess = std::max(theta_excess, std::sqrt(norm) - kernels.alpha2 * c.interface_area * gap);
  }
  out.push_back(at_most("kernel.theta_bound", theta_excess, 1e-12 * theta_scale, "closed interface"));
  return out;
}

std::vector<CheckReport> check_degenerate_limits(const PipelineSetup& setup) {
  std::vector<CheckReport> out;
  const MacroDomain domain = coarse_domain(setup.domain);

  {
    PhaseMaterials m = setup.materials;
    m.interface_permeability = 0.0;
    const Homogenization h = homogenize(setup.mesh, m, setup.f1, setup.f2, setup.dt, setup.steps);
    const MacroHistory run = run_macro(macro_config(setup, h, domain));
    const ReferenceBiot ref = reference_biot(domain, h.coefficients, setup.dt, setup.steps);
    const double diff = std::max(max_field_diff(run.u, ref.u), max_field_diff(run.p1, ref.p));
    out.push_back(at_most("degenerate.single_porosity", diff, 1e-12, "independent dense Biot stepper"));
  }
  {
    PhaseMaterials m = setup.materials;
    m.inclusion.stiffness = m.matrix.stiffness;
    m.matrix.biot_willis = 0.0;
    m.inclusion.biot_willis = 0.0;
    const Homogenization h = homogenize(setup.mesh, m, setup.f1, setup.f2, setup.dt, setup.steps);
    MacroConfig cfg = macro_config(setup, h, domain);
    cfg.sources.mass = [](int, double, const Point&) { return 1.0; };
    const MacroHistory run = run_macro(cfg);
    const auto ref = reference_exchange_diffusion(domain, h.coefficients.storage, h.coefficients.permeability,
                                                  h.coefficients.exchange, h.kernels.eta, 1.0, setup.dt, setup.steps);
    out.push_back(at_most("degenerate.frozen_deformation", max_field_diff(run.p1, ref), 1e-12,
                          "independent dense exchange-diffusion stepper"));
  }
  {
    PhaseMaterials m = setup.materials;
    m.inclusion.biot_willis = 0.0;
    const StepResponse zeta = solve_robin_evolution(setup.mesh, m.inclusion.storage, m.inclusion.permeability,
                                                   m.interface_permeability, setup.dt, setup.steps);
    const KernelTable k = memory_kernels(zeta, setup.mesh.dim(), 0.0);
    double theta = 0.0;
    double eta = 0.0;
    for (int n = 1; n <= k.steps; ++n) {
      for (int i = 0; i < k.dim; ++i) theta = std::max(theta, std::abs(k.theta[n][i]));
      eta = std::max(eta, std::abs(k.eta[n]));
    }
    CheckReport r = at_most("degenerate.no_inclusion_coupling", theta, 0.0, "alpha2 multiplies theta only");
    r.detail = "max |eta_n| = " + std::to_string(eta);
    if (k.steps > 0 && m.interface_permeability > 0.0 && !(eta > 0.0)) r.passed = false;
    out.push_back(r);
  }
  return out;
}

CheckReport check_mode_equivalence(const MacroConfig& config, const CellMesh& mesh, const PhaseMaterials& materials) {
  const MacroHistory a = run_macro(config);
  const MacroHistory b = run_micro_coupled(config, mesh, materials);
  const double diff = std::max({max_field_diff(a.p1, b.p1), max_field_diff(a.u, b.u),
                                max_field_diff(a.overall, b.overall)});
  return at_most("macro.mode_equivalence", diff, 1e-8, "discrete Duhamel principle");
}

void plant_negative_control(EffectiveCoefficients& c) { c.stiffness(0, 0, 1, 1) += 1e-3; }

std::vector<CheckReport> run_verification(const PipelineSetup& setup, bool negative_control) {
  Homogenization h = homogenize(setup.mesh, setup.materials, setup.f1, setup.f2, setup.dt, setup.steps);
  if (negative_control) plant_negative_control(h.coefficients);
  std::vector<CheckReport> out = check_tensor_laws(h.coefficients, setup.materials);
  for (auto& r : check_kernel_laws(h.kernels, h.coefficients, h.zeta)) out.push_back(std::move(r));
  for (auto& r : check_degenerate_limits(setup)) out.push_back(std::move(r));
  out.push_back(check_mode_equivalence(macro_config(setup, h, setup.domain), setup.mesh, setup.materials));
  std::stable_sort(out.begin(), out.end(), [](const CheckReport& a, const CheckReport& b) { return a.name < b.name; });
  return out;
}

bool all_passed(const std::vector<CheckReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const CheckReport& r) { return r.passed; });
}

}  // namespace biothom
