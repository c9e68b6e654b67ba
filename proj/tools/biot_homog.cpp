#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "biothom/commands.hpp"

int main(int argc, char** argv) {
  using namespace biothom;
  CLI::App app{"Double-porosity homogenization of Biot poroelasticity"};
  app.require_subcommand(1);

  CommandOptions opts;
  std::string mode;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config_path, "configuration file (JSON)")->required();
    sub->add_option_function<std::string>("--out", [&](const std::string& dir) { opts.out_dir = dir; },
                                          "output directory, overrides output.dir");
  };
  auto* cell = app.add_subcommand("cell", "solve the cell problems, write effective.json");
  auto* kernels = app.add_subcommand("kernels", "compute memory kernels, write kernels.csv and kernels.svg");
  auto* macro = app.add_subcommand("macro", "run the homogenized system, write series.csv and VTK fields");
  auto* verify = app.add_subcommand("verify", "run the verification suite, write report.json");
  for (auto* sub : {cell, kernels, macro, verify}) add_common(sub);
  macro->add_option("--mode", mode, "coupling mode")->check(CLI::IsMember({"kernel", "micro"}));
  for (auto* sub : {cell, verify})
    sub->add_flag("--negative-control", opts.negative_control, "plant a corrupted coefficient that must be caught");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_config_error;
  }
  if (!mode.empty()) opts.mode = mode == "kernel" ? CouplingMode::kernel : CouplingMode::micro;

  if (cell->parsed()) return cmd_cell(opts, std::cout, std::cerr);
  if (kernels->parsed()) return cmd_kernels(opts, std::cout, std::cerr);
  if (macro->parsed()) return cmd_macro(opts, std::cout, std::cerr);
  return cmd_verify(opts, std::cout, std::cerr);
}
