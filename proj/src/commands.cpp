#include "biothom/commands.hpp"

#include <filesystem>
#include <functional>

#include "biothom/errors.hpp"
#include "biothom/io.hpp"

namespace biothom {

namespace fs = std::filesystem;

namespace {

int guarded(std::ostream& err, const std::function<int()>& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const GeometryError& e) {
    err << "geometry error: " << e.what() << '\n';
    return exit_config_error;
  } catch (const SolverError& e) {
    err << "solver failure: " << e.what() << '\n';
    return exit_solver_error;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_solver_error;
  }
}

fs::path output_dir(const CommandOptions& opts, const RunConfig& config) {
  return opts.out_dir ? fs::path(*opts.out_dir) : fs::path(config.output_dir);
}

Homogenization homogenize(const RunConfig& config, const PipelineSetup& setup) {
  Homogenization h = biothom::homogenize(setup.mesh, setup.materials, setup.f1, setup.f2, setup.dt, setup.steps);
  h.coefficients.provenance.inclusion = config.inclusion.describe();
  return h;
}

}  // namespace

int cmd_cell(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_config(opts.config_path);
    const PipelineSetup setup = config.setup();
    Homogenization h = homogenize(config, setup);
    if (opts.negative_control) plant_negative_control(h.coefficients);
    const auto checks = check_tensor_laws(h.coefficients, setup.materials);
    const fs::path path = output_dir(opts, config) / "effective.json";
    write_text(path, dump_json(effective_to_json(h.coefficients, checks)));
    log << "wrote " << path.string() << '\n';
    for (const auto& r : checks)
      if (!r.passed) err << "check failed: " << r.name << " measured " << r.measured << " tolerance " << r.tolerance << '\n';
    return all_passed(checks) ? exit_ok : exit_check_failed;
  });
}

int cmd_kernels(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_config(opts.config_path);
    const PipelineSetup setup = config.setup();
    const auto& m = setup.materials;
    const StepResponse zeta = solve_robin_evolution(setup.mesh, m.inclusion.storage, m.inclusion.permeability,
                                                   m.interface_permeability, setup.dt, setup.steps);
    const KernelTable kernels = memory_kernels(zeta, setup.mesh.dim(), m.inclusion.biot_willis);
    const fs::path dir = output_dir(opts, config);
    write_text(dir / "kernels.csv", kernels_csv(kernels));
    write_text(dir / "kernels.svg", kernels_svg(kernels));
    log << "wrote " << (dir / "kernels.csv").string() << " and " << (dir / "kernels.svg").string() << '\n';
    return exit_ok;
  });
}

int cmd_macro(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_config(opts.config_path);
    const PipelineSetup setup = config.setup();
    const Homogenization h = homogenize(config, setup);
    MacroConfig mc;
    mc.domain = setup.domain;
    mc.coefficients = h.coefficients;
    mc.kernels = h.kernels;
    mc.dt = setup.dt;
    mc.steps = setup.steps;
    const CouplingMode mode = opts.mode.value_or(config.mode);
    const MacroHistory run = mode == CouplingMode::kernel ? run_macro(mc)
                                                          : run_micro_coupled(mc, setup.mesh, setup.materials);
    const fs::path dir = output_dir(opts, config);
    write_text(dir / "series.csv", series_csv(run));
    for (int n : config.output_steps) write_text(dir / ("step_" + std::to_string(n) + ".vtk"), vtk_structured_points(run, n));
    log << "wrote " << (dir / "series.csv").string() << " and " << config.output_steps.size() << " VTK file(s)\n";
    return exit_ok;
  });
}

int cmd_verify(const CommandOptions& opts, std::ostream& log, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig config = load_config(opts.config_path);
    const PipelineSetup setup = config.setup();
    const auto checks = run_verification(setup, opts.negative_control);
    const fs::path path = output_dir(opts, config) / "report.json";
    write_text(path, dump_json(report_to_json(checks)));
    for (const auto& r : checks)
      log << (r.passed ? "PASS " : "FAIL ") << r.name << " measured=" << format_double(r.measured)
          << " tolerance=" << format_double(r.tolerance) << '\n';
    log << "wrote " << path.string() << '\n';
    return all_passed(checks) ? exit_ok : exit_check_failed;
  });
}

}  // namespace biothom
