#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "biothom/effective.hpp"
#include "biothom/macro.hpp"
#include "biothom/verify.hpp"

namespace biothom {

/// Parsed run configuration. See README.md for the schema.
struct RunConfig {
  int dim = 3;
  int cell_res = 8;
  InclusionShape inclusion;
  Point center{0.5, 0.5, 0.5};
  PhaseMaterials materials;
  Vector f1;
  Vector f2;
  double dt = 0.0;
  int steps = 0;
  MacroDomain macro;
  CouplingMode mode = CouplingMode::kernel;
  std::vector<int> output_steps;
  std::string output_dir = "out";

  /// Builds the unit cell; throws GeometryError on invalid geometry.
  PipelineSetup setup() const;
};

/// Throws ConfigError naming the offending field (dotted path).
RunConfig parse_config(const nlohmann::ordered_json& j);
RunConfig load_config(const std::filesystem::path& path);

/// Shortest-free fixed format: 17 significant digits, "-0" printed as "0".
std::string format_double(double x);
/// Two-space indented JSON with doubles printed by format_double; arrays of
/// scalars stay on one line.
std::string dump_json(const nlohmann::ordered_json& j);

nlohmann::ordered_json effective_to_json(const EffectiveCoefficients& c, const std::vector<CheckReport>& checks);
nlohmann::ordered_json report_to_json(const std::vector<CheckReport>& checks);

/// Columns: t, eta, theta_1..d, m, cum_eta, cum_theta_1..d, cum_m.
std::string kernels_csv(const KernelTable& k);
std::string kernels_svg(const KernelTable& k);
/// Columns: t, p1_l2, p1_max, u_l2, overall_l2.
std::string series_csv(const MacroHistory& h);
/// Legacy ASCII VTK, STRUCTURED_POINTS, point data p1, u, overall_pressure
/// and inclusion_pressure.
std::string vtk_structured_points(const MacroHistory& h, int step);

void write_text(const std::filesystem::path& path, const std::string& content);

}  // namespace biothom
