#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "biothom/errors.hpp"
#include "biothom/io.hpp"

using namespace biothom;
using nlohmann::ordered_json;
namespace fs = std::filesystem;

namespace {

ordered_json read_json(const fs::path& p) {
  std::ifstream in(p);
  return ordered_json::parse(in);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("biot_homog_test_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(BIOT_HOMOG_EXE) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string field_of(const ordered_json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return {};
}

}  // namespace

TEST(Config, ParsesShippedConfigs) {
  const RunConfig a = load_config(fs::path(CONFIG_DIR) / "plane.json");
  EXPECT_EQ(a.dim, 2);
  EXPECT_EQ(a.cell_res, 8);
  EXPECT_DOUBLE_EQ(a.materials.matrix.permeability(1, 1), 0.5);
  EXPECT_DOUBLE_EQ(a.materials.inclusion.biot_willis, 0.8);
  EXPECT_EQ(a.output_steps, (std::vector<int>{8, 16}));
  const RunConfig b = load_config(fs::path(CONFIG_DIR) / "default.json");
  EXPECT_EQ(b.dim, 3);
  EXPECT_EQ(b.macro.res[2], 4);
}

TEST(Config, MissingAndInvalidFieldsNamed) {
  const ordered_json base = read_json(fs::path(CONFIG_DIR) / "plane.json");
  EXPECT_EQ(field_of(base), "");
  ordered_json j = base;
  j["materials"].erase("alpha1");
  EXPECT_EQ(field_of(j), "materials.alpha1");
  j = base;
  j["materials"]["c2"] = -1.0;
  EXPECT_EQ(field_of(j), "materials.c2");
  j = base;
  j["time"]["dt"] = "fast";
  EXPECT_EQ(field_of(j), "time.dt");
  j = base;
  j["geometry"].erase("res");
  EXPECT_EQ(field_of(j), "geometry.res");
  j = base;
  j["materials"]["K2"] = {{1.0, 0.0}, {0.0, -1.0}};
  EXPECT_EQ(field_of(j), "materials.K2");
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Format, Doubles) {
  EXPECT_EQ(format_double(0.0), "0");
  EXPECT_EQ(format_double(-0.0), "0");
  EXPECT_EQ(format_double(1.5), "1.5");
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(std::strtod(format_double(1.0 / 3.0).c_str(), nullptr), 1.0 / 3.0);
}

TEST(Format, JsonRoundTripIsByteIdentical) {
  const RunConfig cfg = load_config(fs::path(CONFIG_DIR) / "plane.json");
  const PipelineSetup s = cfg.setup();
  const Homogenization h = homogenize(s.mesh, s.materials, s.f1, s.f2, s.dt, s.steps);
  const std::string text = dump_json(effective_to_json(h.coefficients, check_tensor_laws(h.coefficients, s.materials)));
  const ordered_json back = ordered_json::parse(text);
  EXPECT_EQ(dump_json(back), text);
  EXPECT_EQ(back["A_eff"]["values"].size(), 16u);
  EXPECT_EQ(back["K_eff"][1][1].get<double>(), h.coefficients.permeability(1, 1));
  EXPECT_EQ(back["g_tilde"].get<double>(), h.coefficients.exchange);
}

TEST(Format, KernelCsvParsesBackExactly) {
  const CellMesh mesh = build_unit_cell(2, 8, InclusionShape::cube(0.5), {0.5, 0.5, 0.5});
  const KernelTable k = memory_kernels(solve_robin_evolution(mesh, 1.0, 0.1 * Matrix::Identity(2, 2), 1.0, 0.02, 5), 2, 0.8);
  std::istringstream in(kernels_csv(k));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "t,eta,theta_1,theta_2,m,cum_eta,cum_theta_1,cum_theta_2,cum_m");
  int row = 0;
  while (std::getline(in, line)) {
    std::vector<double> v;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) v.push_back(std::strtod(cell.c_str(), nullptr));
    ASSERT_EQ(v.size(), 9u);
    EXPECT_EQ(v[0], k.time(row));
    EXPECT_EQ(v[1], k.eta[row]);
    EXPECT_EQ(v[2], k.theta[row][0]);
    EXPECT_EQ(v[4], k.m[row]);
    EXPECT_EQ(v[5], k.cum_eta[row]);
    EXPECT_EQ(v[8], k.cum_m[row]);
    ++row;
  }
  EXPECT_EQ(row, 6);
  EXPECT_NE(kernels_svg(k).find("<svg"), std::string::npos);
}

TEST(Format, VtkHeaderAndValues) {
  const RunConfig cfg = load_config(fs::path(CONFIG_DIR) / "plane.json");
  const PipelineSetup s = cfg.setup();
  const Homogenization h = homogenize(s.mesh, s.materials, s.f1, s.f2, s.dt, 2);
  MacroConfig mc;
  mc.domain = s.domain;
  mc.coefficients = h.coefficients;
  mc.kernels = h.kernels;
  mc.dt = s.dt;
  mc.steps = 2;
  const MacroHistory run = run_macro(mc);
  std::istringstream in(vtk_structured_points(run, 2));
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "# vtk DataFile Version 3.0");
  std::getline(in, line);
  std::getline(in, line);
  EXPECT_EQ(line, "ASCII");
  std::getline(in, line);
  EXPECT_EQ(line, "DATASET STRUCTURED_POINTS");
  std::getline(in, line);
  EXPECT_EQ(line, "DIMENSIONS 9 9 1");
  const std::string text = in.str();
  EXPECT_NE(text.find("POINT_DATA 81"), std::string::npos);
  EXPECT_NE(text.find("SCALARS p1 double 1"), std::string::npos);
  EXPECT_NE(text.find("VECTORS u double"), std::string::npos);
  // first p1 value after the lookup table line
  const auto pos = text.find("SCALARS p1 double 1\nLOOKUP_TABLE default\n");
  ASSERT_NE(pos, std::string::npos);
  std::istringstream values(text.substr(pos + 41));
  for (int i = 0; i < 81; ++i) {
    std::string token;
    values >> token;
    EXPECT_EQ(std::strtod(token.c_str(), nullptr), run.p1[2][i]);
  }
  EXPECT_THROW(vtk_structured_points(run, 3), std::out_of_range);
}

TEST(Cli, ExitCodesAndDeterminism) {
  const fs::path dir = scratch("cli");
  const std::string plane = std::string(CONFIG_DIR) + "/plane.json";
  EXPECT_EQ(run_cli("cell --config " + plane + " --out " + (dir / "a").string()), 0);
  EXPECT_EQ(run_cli("cell --config " + plane + " --out " + (dir / "b").string()), 0);
  EXPECT_EQ(read_file(dir / "a" / "effective.json"), read_file(dir / "b" / "effective.json"));
  EXPECT_EQ(run_cli("cell --negative-control --config " + plane + " --out " + (dir / "c").string()), 1);

  ordered_json j = read_json(plane);
  j["materials"].erase("alpha1");
  std::ofstream(dir / "broken.json") << j.dump();
  EXPECT_EQ(run_cli("cell --config " + (dir / "broken.json").string() + " --out " + dir.string()), 2);
  EXPECT_EQ(run_cli("cell --config " + (dir / "missing.json").string()), 2);
  EXPECT_EQ(run_cli("bogus"), 2);
  EXPECT_EQ(run_cli("macro --mode sideways --config " + plane), 2);

  j = read_json(plane);
  j["geometry"]["size"] = 1.0;  // inclusion touches the cell boundary
  std::ofstream(dir / "touching.json") << j.dump();
  EXPECT_EQ(run_cli("cell --config " + (dir / "touching.json").string() + " --out " + dir.string()), 2);
}
