#include "biothom/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "biothom/errors.hpp"

namespace biothom {

using nlohmann::ordered_json;

namespace {

std::string join(const std::string& prefix, const std::string& key) { return prefix.empty() ? key : prefix + "." + key; }

const ordered_json& need(const ordered_json& j, const std::string& prefix, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) throw ConfigError(join(prefix, key), "missing required field");
  return j.at(key);
}

const ordered_json* maybe(const ordered_json& j, const std::string& key) {
  if (!j.is_object() || !j.contains(key)) return nullptr;
  return &j.at(key);
}

double as_number(const ordered_json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(field, "must be finite");
  return x;
}

int as_int(const ordered_json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
  return v.get<int>();
}

std::string as_string(const ordered_json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "must be a string");
  return v.get<std::string>();
}

Vector as_vector(const ordered_json& v, int dim, const std::string& field) {
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ConfigError(field, "must be an array of " + std::to_string(dim) + " numbers");
  Vector out(dim);
  for (int i = 0; i < dim; ++i) out[i] = as_number(v[i], field);
  return out;
}

Matrix as_matrix(const ordered_json& v, int rows, const std::string& field) {
  if (!v.is_array() || static_cast<int>(v.size()) != rows)
    throw ConfigError(field, "must be a " + std::to_string(rows) + "x" + std::to_string(rows) + " array");
  Matrix m(rows, rows);
  for (int i = 0; i < rows; ++i) {
    if (!v[i].is_array() || static_cast<int>(v[i].size()) != rows)
      throw ConfigError(field, "must be a " + std::to_string(rows) + "x" + std::to_string(rows) + " array");
    for (int k = 0; k < rows; ++k) m(i, k) = as_number(v[i][k], field);
  }
  return m;
}

Matrix permeability(const ordered_json& v, int dim, const std::string& field) {
  if (v.is_number()) return as_number(v, field) * Matrix::Identity(dim, dim);
  return as_matrix(v, dim, field);
}

Tensor4 stiffness(const ordered_json& v, int dim, const std::string& field) {
  if (!v.is_object()) throw ConfigError(field, "must be an object with lambda/mu or tensor");
  if (const auto* t = maybe(v, "tensor")) {
    const Matrix m = as_matrix(*t, mandel_size(dim), join(field, "tensor"));
    Tensor4 a = Tensor4::from_mandel(m);
    return a;
  }
  const double lambda = as_number(need(v, field, "lambda"), join(field, "lambda"));
  const double mu = as_number(need(v, field, "mu"), join(field, "mu"));
  return Tensor4::isotropic(dim, lambda, mu);
}

std::array<int, 3> int_per_axis(const ordered_json& v, int dim, const std::string& field) {
  std::array<int, 3> out{1, 1, 1};
  if (v.is_number_integer()) {
    for (int a = 0; a < dim; ++a) out[a] = v.get<int>();
    return out;
  }
  if (!v.is_array() || static_cast<int>(v.size()) != dim)
    throw ConfigError(field, "must be an integer or an array of " + std::to_string(dim) + " integers");
  for (int a = 0; a < dim; ++a) out[a] = as_int(v[a], field);
  return out;
}

Point number_per_axis(const ordered_json& v, int dim, const std::string& field) {
  Point out{1.0, 1.0, 1.0};
  if (v.is_number()) {
    for (int a = 0; a < dim; ++a) out[a] = as_number(v, field);
    return out;
  }
  const Vector x = as_vector(v, dim, field);
  for (int a = 0; a < dim; ++a) out[a] = x[a];
  return out;
}

void dump_value(const ordered_json& j, std::string& out, int indent) {
  const std::string pad(indent, ' ');
  const std::string inner(indent + 2, ' ');
  switch (j.type()) {
    case ordered_json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ",\n";
        first = false;
        out += inner + ordered_json(it.key()).dump() + ": ";
        dump_value(it.value(), out, indent + 2);
      }
      out += "\n" + pad + "}";
      return;
    }
    case ordered_json::value_t::array: {
      bool flat = true;
      for (const auto& e : j)
        if (e.is_structured()) flat = false;
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          dump_value(j[i], out, indent);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        dump_value(j[i], out, indent + 2);
      }
      out += "\n" + pad + "]";
      return;
    }
    case ordered_json::value_t::number_float:
      out += format_double(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

ordered_json matrix_json(const Matrix& m) {
  ordered_json rows = ordered_json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    ordered_json row = ordered_json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
    rows.push_back(row);
  }
  return rows;
}

ordered_json vector_json(const Vector& v) {
  ordered_json a = ordered_json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

ordered_json check_json(const CheckReport& r) {
  ordered_json c;
  c["name"] = r.name;
  c["passed"] = r.passed;
  c["measured"] = r.measured;
  c["expected"] = r.expected;
  c["tolerance"] = r.tolerance;
  c["source"] = r.source;
  if (!r.detail.empty()) c["detail"] = r.detail;
  return c;
}

}  // namespace

PipelineSetup RunConfig::setup() const {
  PipelineSetup s;
  s.mesh = build_unit_cell(dim, cell_res, inclusion, center);
  s.materials = materials;
  s.f1 = f1;
  s.f2 = f2;
  s.domain = macro;
  s.dt = dt;
  s.steps = steps;
  return s;
}

RunConfig parse_config(const ordered_json& j) {
  RunConfig c;
  if (!j.is_object()) throw ConfigError("", "configuration must be a JSON object");

  const auto& geo = need(j, "", "geometry");
  c.dim = as_int(need(geo, "geometry", "dim"), "geometry.dim");
  if (c.dim != 2 && c.dim != 3) throw ConfigError("geometry.dim", "must be 2 or 3");
  const int d = c.dim;
  c.cell_res = as_int(need(geo, "geometry", "res"), "geometry.res");
  if (c.cell_res < 4) throw ConfigError("geometry.res", "must be at least 4");
  const std::string kind = as_string(need(geo, "geometry", "inclusion"), "geometry.inclusion");
  const double size = as_number(need(geo, "geometry", "size"), "geometry.size");
  if (!(size > 0.0)) throw ConfigError("geometry.size", "must be positive");
  if (kind == "cube")
    c.inclusion = InclusionShape::cube(size);
  else if (kind == "sphere")
    c.inclusion = InclusionShape::sphere(size);
  else
    throw ConfigError("geometry.inclusion", "must be \"cube\" or \"sphere\"");
  if (const auto* v = maybe(geo, "center")) c.center = number_per_axis(*v, d, "geometry.center");

  const auto& mat = need(j, "", "materials");
  c.materials.matrix.stiffness = stiffness(need(mat, "materials", "matrix"), d, "materials.matrix");
  c.materials.inclusion.stiffness = stiffness(need(mat, "materials", "inclusion"), d, "materials.inclusion");
  c.materials.matrix.storage = as_number(need(mat, "materials", "c1"), "materials.c1");
  c.materials.inclusion.storage = as_number(need(mat, "materials", "c2"), "materials.c2");
  c.materials.matrix.permeability = permeability(need(mat, "materials", "K1"), d, "materials.K1");
  c.materials.inclusion.permeability = permeability(need(mat, "materials", "K2"), d, "materials.K2");
  c.materials.interface_permeability = as_number(need(mat, "materials", "g"), "materials.g");
  c.materials.matrix.biot_willis = as_number(need(mat, "materials", "alpha1"), "materials.alpha1");
  c.materials.inclusion.biot_willis = as_number(need(mat, "materials", "alpha2"), "materials.alpha2");
  c.f1 = Vector::Zero(d);
  c.f2 = Vector::Zero(d);
  if (const auto* v = maybe(mat, "f1")) c.f1 = as_vector(*v, d, "materials.f1");
  if (const auto* v = maybe(mat, "f2")) c.f2 = as_vector(*v, d, "materials.f2");
  c.materials.validate();

  const auto& time = need(j, "", "time");
  c.dt = as_number(need(time, "time", "dt"), "time.dt");
  if (!(c.dt > 0.0)) throw ConfigError("time.dt", "must be positive");
  c.steps = as_int(need(time, "time", "steps"), "time.steps");
  if (c.steps < 0) throw ConfigError("time.steps", "must be nonnegative");

  const auto& macro = need(j, "", "macro");
  c.macro.dim = d;
  c.macro.extent = number_per_axis(need(macro, "macro", "extent"), d, "macro.extent");
  c.macro.res = int_per_axis(need(macro, "macro", "res"), d, "macro.res");
  if (const auto* v = maybe(macro, "p1_bc")) {
    const std::string bc = as_string(*v, "macro.p1_bc");
    if (bc == "dirichlet")
      c.macro.pressure_bc = PressureBoundary::dirichlet_zero;
    else if (bc == "neumann")
      c.macro.pressure_bc = PressureBoundary::neumann_zero;
    else
      throw ConfigError("macro.p1_bc", "must be \"dirichlet\" or \"neumann\"");
  }
  c.macro.validate();
  if (const auto* v = maybe(macro, "mode")) {
    const std::string mode = as_string(*v, "macro.mode");
    if (mode == "kernel")
      c.mode = CouplingMode::kernel;
    else if (mode == "micro")
      c.mode = CouplingMode::micro;
    else
      throw ConfigError("macro.mode", "must be \"kernel\" or \"micro\"");
  }
  if (const auto* v = maybe(macro, "output_steps")) {
    if (!v->is_array()) throw ConfigError("macro.output_steps", "must be an array of step indices");
    for (const auto& e : *v) {
      const int n = as_int(e, "macro.output_steps");
      if (n < 0 || n > c.steps) throw ConfigError("macro.output_steps", "step index outside 0..time.steps");
      c.output_steps.push_back(n);
    }
  } else {
    c.output_steps.push_back(c.steps);
  }

  if (const auto* out = maybe(j, "output"))
    if (const auto* dir = maybe(*out, "dir")) c.output_dir = as_string(*dir, "output.dir");
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read configuration file " + path.string());
  ordered_json j;
  try {
    j = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("", std::string("malformed JSON: ") + e.what());
  }
  return parse_config(j);
}

std::string format_double(double x) {
  if (x == 0.0) return "0";
  if (!std::isfinite(x)) return "null";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string dump_json(const ordered_json& j) {
  std::string out;
  dump_value(j, out, 0);
  out += "\n";
  return out;
}

ordered_json effective_to_json(const EffectiveCoefficients& c, const std::vector<CheckReport>& checks) {
  const int d = c.dim;
  ordered_json j;
  ordered_json mesh;
  mesh["dim"] = d;
  mesh["res"] = c.provenance.res;
  mesh["inclusion"] = c.provenance.inclusion;
  mesh["inclusion_voxels"] = c.provenance.inclusion_voxels;
  mesh["interface_faces"] = c.provenance.interface_faces;
  mesh["interface_area"] = c.interface_area;
  j["mesh"] = mesh;
  j["volume_fractions"] = {{"matrix", c.matrix_fraction}, {"inclusion", c.inclusion_fraction}};

  ordered_json a;
  a["index_order"] = "a[i][j][k][l] flattened with l fastest";
  ordered_json flat = ordered_json::array();
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        for (int m = 0; m < d; ++m) flat.push_back(c.stiffness(i, k, l, m));
  a["values"] = flat;
  a["mandel"] = matrix_json(c.stiffness.to_mandel());
  j["A_eff"] = a;
  j["K_eff"] = matrix_json(c.permeability);
  j["B"] = matrix_json(c.biot_pressure);
  j["B_volume_form"] = matrix_json(c.biot_pressure_volume);
  j["Lambda"] = matrix_json(c.biot_strain);
  j["c_tilde"] = c.storage;
  j["g_tilde"] = c.exchange;
  j["f_bar"] = vector_json(c.body_force);

  ordered_json solver;
  solver["elastic_iterations"] = c.provenance.elastic_iterations;
  solver["elastic_residuals"] = c.provenance.elastic_residuals;
  solver["pressure_iterations"] = c.provenance.pressure_iterations;
  solver["pressure_residuals"] = c.provenance.pressure_residuals;
  j["solver"] = solver;

  int passed = 0;
  for (const auto& r : checks) passed += r.passed ? 1 : 0;
  ordered_json summary;
  summary["passed"] = passed;
  summary["failed"] = static_cast<int>(checks.size()) - passed;
  ordered_json list = ordered_json::array();
  for (const auto& r : checks) list.push_back(check_json(r));
  summary["results"] = list;
  j["checks"] = summary;
  return j;
}

ordered_json report_to_json(const std::vector<CheckReport>& checks) {
  ordered_json j;
  j["passed"] = all_passed(checks);
  ordered_json list = ordered_json::array();
  for (const auto& r : checks) list.push_back(check_json(r));
  j["checks"] = list;
  return j;
}

std::string kernels_csv(const KernelTable& k) {
  std::ostringstream os;
  os << "t,eta";
  for (int i = 1; i <= k.dim; ++i) os << ",theta_" << i;
  os << ",m,cum_eta";
  for (int i = 1; i <= k.dim; ++i) os << ",cum_theta_" << i;
  os << ",cum_m\n";
  for (int n = 0; n <= k.steps; ++n) {
    os << format_double(k.time(n)) << ',' << format_double(k.eta[n]);
    for (int i = 0; i < k.dim; ++i) os << ',' << format_double(k.theta[n][i]);
    os << ',' << format_double(k.m[n]) << ',' << format_double(k.cum_eta[n]);
    for (int i = 0; i < k.dim; ++i) os << ',' << format_double(k.cum_theta[n][i]);
    os << ',' << format_double(k.cum_m[n]) << '\n';
  }
  return os.str();
}

std::string kernels_svg(const KernelTable& k) {
  const double width = 640.0;
  const double height = 400.0;
  const double left = 60.0;
  const double right = 20.0;
  const double top = 20.0;
  const double bottom = 50.0;
  const double t_max = std::max(k.time(k.steps), 1e-300);
  double y_max = 0.0;
  for (int n = 0; n <= k.steps; ++n) y_max = std::max({y_max, std::abs(k.eta[n]), std::abs(k.m[n])});
  if (y_max == 0.0) y_max = 1.0;
  auto px = [&](double t) { return left + (width - left - right) * t / t_max; };
  auto py = [&](double y) { return height - bottom - (height - top - bottom) * y / y_max; };
  auto polyline = [&](const std::vector<double>& v, const char* color) {
    std::ostringstream os;
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (int n = 0; n <= k.steps; ++n) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%s%.3f,%.3f", n ? " " : "", px(k.time(n)), py(v[n]));
      os << buf;
    }
    os << "\"/>\n";
    return os.str();
  };
  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"640\" height=\"400\" viewBox=\"0 0 640 400\">\n";
  os << "<rect width=\"640\" height=\"400\" fill=\"white\"/>\n";
  char buf[256];
  std::snprintf(buf, sizeof buf,
                "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n"
                "<line x1=\"%.3f\" y1=\"%.3f\" x2=\"%.3f\" y2=\"%.3f\" stroke=\"black\"/>\n",
                left, height - bottom, width - right, height - bottom, left, top, left, height - bottom);
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"%.3f\" y=\"%.3f\" font-size=\"12\">t (max %s)</text>\n",
                0.5 * width, height - 15.0, format_double(t_max).c_str());
  os << buf;
  std::snprintf(buf, sizeof buf, "<text x=\"5\" y=\"%.3f\" font-size=\"12\">%s</text>\n", top + 5.0,
                format_double(y_max).c_str());
  os << buf;
  os << polyline(k.eta, "#1f77b4") << polyline(k.m, "#d62728");
  os << "<text x=\"" << width - 120 << "\" y=\"" << top + 15 << "\" font-size=\"12\" fill=\"#1f77b4\">eta</text>\n";
  os << "<text x=\"" << width - 120 << "\" y=\"" << top + 30 << "\" font-size=\"12\" fill=\"#d62728\">m</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string series_csv(const MacroHistory& h) {
  std::ostringstream os;
  os << "t,p1_l2,p1_max,u_l2,overall_l2\n";
  const int d = h.grid.dim();
  for (int n = 0; n <= h.steps; ++n) {
    os << format_double(h.time(n)) << ',' << format_double(l2_norm(h.grid, h.p1[n])) << ','
       << format_double(max_abs(h.p1[n])) << ',' << format_double(l2_norm(h.grid, h.u[n], d)) << ','
       << format_double(l2_norm(h.grid, h.overall[n])) << '\n';
  }
  return os.str();
}

std::string vtk_structured_points(const MacroHistory& h, int step) {
  if (step < 0 || step >= static_cast<int>(h.p1.size())) throw std::out_of_range("no stored step " + std::to_string(step));
  const MacroGrid& g = h.grid;
  const int d = g.dim();
  const auto& res = g.domain().res;
  std::ostringstream os;
  os << "# vtk DataFile Version 3.0\n";
  os << "homogenized fields step " << step << " t=" << format_double(h.time(step)) << "\n";
  os << "ASCII\nDATASET STRUCTURED_POINTS\n";
  os << "DIMENSIONS " << res[0] + 1 << ' ' << res[1] + 1 << ' ' << (d == 3 ? res[2] + 1 : 1) << '\n';
  os << "ORIGIN 0 0 0\n";
  os << "SPACING " << format_double(g.spacing()[0]) << ' ' << format_double(g.spacing()[1]) << ' '
     << format_double(d == 3 ? g.spacing()[2] : 1.0) << '\n';
  const int n = g.node_count();
  os << "POINT_DATA " << n << '\n';
  auto scalars = [&](const char* name, const Vector& v) {
    os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
    for (int i = 0; i < n; ++i) os << format_double(v[i]) << '\n';
  };
  scalars("p1", h.p1[step]);
  os << "VECTORS u double\n";
  for (int i = 0; i < n; ++i) {
    for (int k = 0; k < 3; ++k) {
      if (k) os << ' ';
      os << format_double(k < d ? h.u[step][i * d + k] : 0.0);
    }
    os << '\n';
  }
  scalars("overall_pressure", h.overall[step]);
  scalars("inclusion_pressure", h.inclusion_mean[step]);
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace biothom
