#include "halfheat/runspec.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>

namespace halfheat {

using nlohmann::json;

std::string to_string(Command c) {
  switch (c) {
    case Command::kernel_check: return "kernel-check";
    case Command::classify: return "classify";
    case Command::certify: return "certify";
    case Command::solve: return "solve";
    case Command::dichotomy: return "dichotomy";
    case Command::trace: return "trace";
    case Command::global_probe: return "global-probe";
  }
  return "?";
}

Command command_from_string(const std::string& name) {
  for (Command c : {Command::kernel_check, Command::classify, Command::certify, Command::solve, Command::dichotomy,
                    Command::trace, Command::global_probe})
    if (to_string(c) == name) return c;
  throw SpecError("/command", "unknown command '" + name + "'");
}

namespace {

const json& require(const json& j, const char* key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) throw SpecError(path + "/" + key, "missing field");
  return j.at(key);
}

double number(const json& j, const std::string& path) {
  if (!j.is_number()) throw SpecError(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw SpecError(path, "expected a finite number");
  return v;
}

double number_or(const json& j, const char* key, double fallback, const std::string& path) {
  return j.contains(key) ? number(j.at(key), path + "/" + key) : fallback;
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SpecError(path, "expected an integer");
  return j.get<int>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& path) {
  for (const auto& [key, value] : j.items())
    if (!allowed.count(key)) throw SpecError(path + "/" + key, "unknown field");
}

Point parse_point(const json& j, int N, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != N)
    throw SpecError(path, "expected an array of " + std::to_string(N) + " coordinates");
  Coords c{};
  for (int i = 0; i < N; ++i) c[i] = number(j[i], path + "/" + std::to_string(i));
  if (c[N - 1] < 0.0) throw SpecError(path, "normal coordinate must be nonnegative");
  return Point(N, c);
}

Density fold_scale(const Density& d, double k) {
  if (k == 1.0) return d;
  if (d.is_radial())
    return Density::radial(
        d.dim(), d.radial_center(), [d, k](double r) { return k * d.radial_value(r); }, d.support().radius,
        d.singularity());
  return Density(d.dim(), [d, k](const Coords& x) { return k * d(x); }, d.support(), d.singularity());
}

HalfSpaceMeasure make_component(const MeasureComponent& c, int N) {
  if (c.kind == "atom") return atom_measure(c.center, c.kappa);
  if (c.kind == "gaussian") return gaussian_measure(c.center, c.width, c.kappa);
  if (c.kind == "bump") return bump_measure(c.center, c.radius, c.kappa);
  if (c.kind == "constant")
    return constant_measure(N, c.kappa, c.center, c.radius > 0.0 ? c.radius : quadrature::kInf);
  return make_profile(SingularProfile{profile_kind_from_string(c.kind), c.center, c.p}, c.kappa);
}

}  // namespace

MeasureComponent parse_measure_component(const json& j, int N, const std::string& path) {
  if (!j.is_object()) throw SpecError(path, "expected an object");
  MeasureComponent c;
  const json& kind = require(j, "kind", path);
  if (!kind.is_string()) throw SpecError(path + "/kind", "expected a string");
  c.kind = kind.get<std::string>();
  c.center = j.contains("center") ? parse_point(j.at("center"), N, path + "/center") : Point::origin(N);
  c.kappa = number_or(j, "kappa", 1.0, path);
  if (!(c.kappa >= 0.0)) throw SpecError(path + "/kappa", "must be nonnegative");
  if (c.kind == "atom" || c.kind == "constant") {
    reject_unknown(j, {"kind", "center", "kappa", "radius"}, path);
    c.radius = number_or(j, "radius", 0.0, path);
    if (c.kind == "atom" && j.contains("radius")) throw SpecError(path + "/radius", "atoms take no radius");
  } else if (c.kind == "gaussian") {
    reject_unknown(j, {"kind", "center", "kappa", "width"}, path);
    c.width = number(require(j, "width", path), path + "/width");
    if (!(c.width > 0.0)) throw SpecError(path + "/width", "must be positive");
  } else if (c.kind == "bump") {
    reject_unknown(j, {"kind", "center", "kappa", "radius"}, path);
    c.radius = number(require(j, "radius", path), path + "/radius");
    if (!(c.radius > 0.0)) throw SpecError(path + "/radius", "must be positive");
  } else {
    try {
      profile_kind_from_string(c.kind);
    } catch (const std::exception&) {
      throw SpecError(path + "/kind", "unknown measure kind '" + c.kind + "'");
    }
    reject_unknown(j, {"kind", "center", "kappa", "p"}, path);
    c.p = number_or(j, "p", 0.0, path);
  }
  return c;
}

HalfSpaceMeasure build_measure(const std::vector<MeasureComponent>& components, int N, double p) {
  HalfSpaceMeasure out(N);
  bool interior = false;
  for (std::size_t i = 0; i < components.size(); ++i) {
    MeasureComponent c = components[i];
    if (c.p == 0.0) c.p = p;
    const std::string path = "/measure/" + std::to_string(i);
    HalfSpaceMeasure m(N);
    try {
      m = make_component(c, N);
    } catch (const std::exception& e) {
      throw SpecError(path, e.what());
    }
    const double k = m.scale();
    if (const auto& d = m.interior()) {
      if (interior) throw SpecError(path, "only one interior density component is supported");
      interior = true;
      out = m.interior_form() == InteriorForm::weighted ? out.with_weighted_density(fold_scale(*d, k))
                                                          : out.with_interior_density(fold_scale(*d, k));
    }
    if (const auto& h = m.boundary_line()) {
      if (out.boundary_line()) throw SpecError(path, "only one boundary-line component is supported");
      out = out.with_boundary_line(fold_scale(*h, k));
    }
    for (const auto& a : m.atoms()) out = out.with_atom(a.location, k * a.mass);
  }
  return out;
}

GridSpec build_grid(const HalfSpaceMeasure& mu, double T, const json& o) {
  GridSpec g = default_grid(mu, T);
  if (o.is_null()) return g;
  if (!o.is_object()) throw SpecError("/grid", "expected an object");
  reject_unknown(o,
                 {"t_min_ratio", "time_nodes", "uniform_time_nodes", "x_min", "grading", "h_core", "normal_core",
                  "tangential_core", "h_far", "R", "tangential_half_width", "max_nodes_per_axis"},
                 "/grid");
  auto num = [&](const char* key, double& field) {
    if (o.contains(key)) field = number(o.at(key), std::string("/grid/") + key);
  };
  auto integ = [&](const char* key, int& field) {
    if (o.contains(key)) field = integer(o.at(key), std::string("/grid/") + key);
  };
  num("t_min_ratio", g.t_min_ratio);
  if (o.contains("t_min_ratio")) g.t_min = 0.0;
  integ("time_nodes", g.time_nodes);
  integ("uniform_time_nodes", g.uniform_time_nodes);
  num("x_min", g.x_min);
  num("grading", g.grading);
  num("h_core", g.h_core);
  num("normal_core", g.normal_core);
  num("tangential_core", g.tangential_core);
  num("h_far", g.h_far);
  num("R", g.R);
  num("tangential_half_width", g.tangential_half_width);
  integ("max_nodes_per_axis", g.max_nodes_per_axis);
  try {
    g.validate();
  } catch (const std::exception& e) {
    throw SpecError("/grid", e.what());
  }
  return g;
}

ConvexGauge parse_gauge(const json& j, const std::string& path) {
  if (!j.is_object()) throw SpecError(path, "expected an object");
  const json& kind = require(j, "kind", path);
  if (!kind.is_string()) throw SpecError(path + "/kind", "expected a string");
  const std::string k = kind.get<std::string>();
  try {
    if (k == "identity") {
      reject_unknown(j, {"kind"}, path);
      return ConvexGauge::identity();
    }
    if (k == "power") {
      reject_unknown(j, {"kind", "alpha"}, path);
      return ConvexGauge::power(number(require(j, "alpha", path), path + "/alpha"));
    }
    if (k == "log") {
      reject_unknown(j, {"kind", "beta"}, path);
      return ConvexGauge::log_type(number(require(j, "beta", path), path + "/beta"));
    }
    if (k == "shifted_log") {
      reject_unknown(j, {"kind", "beta", "L"}, path);
      return ConvexGauge::shifted_log(number(require(j, "beta", path), path + "/beta"),
                                      number(require(j, "L", path), path + "/L"));
    }
  } catch (const SpecError&) {
    throw;
  } catch (const std::exception& e) {
    throw SpecError(path, e.what());
  }
  throw SpecError(path + "/kind", "unknown gauge '" + k + "'");
}

RunSpec parse_run_spec(const json& doc) {
  if (!doc.is_object()) throw SpecError("", "run specification must be a JSON object");
  reject_unknown(doc, {"schema", "command", "N", "p", "T", "measure", "grid", "tolerances", "options"}, "");
  if (doc.contains("schema") && doc.at("schema") != kRunSpecSchema)
    throw SpecError("/schema", std::string("expected '") + kRunSpecSchema + "'");
  RunSpec s;
  const json& cmd = require(doc, "command", "");
  if (!cmd.is_string()) throw SpecError("/command", "expected a string");
  s.command = command_from_string(cmd.get<std::string>());
  if (doc.contains("N")) s.N = integer(doc.at("N"), "/N");
  if (s.N < 1 || s.N > 3) throw SpecError("/N", "dimension must be 1, 2 or 3");
  s.p = number_or(doc, "p", s.p, "");
  if (!(s.p > 1.0)) throw SpecError("/p", "exponent must exceed 1");
  s.T = number_or(doc, "T", s.T, "");
  if (!(s.T > 0.0)) throw SpecError("/T", "horizon must be positive");
  if (doc.contains("measure")) {
    const json& m = doc.at("measure");
    if (m.is_object()) {
      s.measure.push_back(parse_measure_component(m, s.N, "/measure"));
    } else if (m.is_array()) {
      for (std::size_t i = 0; i < m.size(); ++i)
        s.measure.push_back(parse_measure_component(m[i], s.N, "/measure/" + std::to_string(i)));
    } else {
      throw SpecError("/measure", "expected an object or an array of components");
    }
  }
  if (doc.contains("grid")) s.grid = doc.at("grid");
  if (doc.contains("tolerances")) {
    const json& t = doc.at("tolerances");
    if (!t.is_object()) throw SpecError("/tolerances", "expected an object");
    reject_unknown(t, {"picard", "conditions"}, "/tolerances");
    if (t.contains("picard")) {
      const json& pc = t.at("picard");
      const std::string path = "/tolerances/picard";
      if (!pc.is_object()) throw SpecError(path, "expected an object");
      reject_unknown(pc, {"max_sweeps", "sup_cap", "tol", "growth_window"}, path);
      if (pc.contains("max_sweeps")) s.picard.max_sweeps = integer(pc.at("max_sweeps"), path + "/max_sweeps");
      s.picard.sup_cap = number_or(pc, "sup_cap", s.picard.sup_cap, path);
      s.picard.tol = number_or(pc, "tol", s.picard.tol, path);
      if (pc.contains("growth_window"))
        s.picard.growth_window = integer(pc.at("growth_window"), path + "/growth_window");
      try {
        s.picard.validate();
      } catch (const std::exception& e) {
        throw SpecError(path, e.what());
      }
    }
    if (t.contains("conditions")) {
      const json& c = t.at("conditions");
      const std::string path = "/tolerances/conditions";
      if (!c.is_object()) throw SpecError(path, "expected an object");
      reject_unknown(c, {"slope_tol", "residual_fraction", "per_axis", "sigma_lo", "sigma_hi"}, path);
      s.conditions.slope_tol = number_or(c, "slope_tol", s.conditions.slope_tol, path);
      s.conditions.residual_fraction = number_or(c, "residual_fraction", s.conditions.residual_fraction, path);
      if (c.contains("per_axis")) s.conditions.per_axis = integer(c.at("per_axis"), path + "/per_axis");
      s.conditions.sigma_lo = number_or(c, "sigma_lo", s.conditions.sigma_lo, path);
      s.conditions.sigma_hi = number_or(c, "sigma_hi", s.conditions.sigma_hi, path);
    }
  }
  if (doc.contains("options")) {
    s.options = doc.at("options");
    if (!s.options.is_object()) throw SpecError("/options", "expected an object");
  }
  const bool needs_measure = s.command != Command::kernel_check;
  if (needs_measure && !doc.contains("measure")) throw SpecError("/measure", "missing field");
  return s;
}

std::size_t locate_key(const std::string& text, const std::string& pointer) {
  if (pointer.empty()) return 0;
  std::string key = pointer.substr(pointer.rfind('/') + 1);
  std::size_t pos = std::string::npos;
  // Array indices have no key in the text; fall back to the enclosing field.
  std::string p = pointer;
  while (!key.empty() && std::all_of(key.begin(), key.end(), [](unsigned char ch) { return std::isdigit(ch) != 0; })) {
    p = p.substr(0, p.rfind('/'));
    if (p.empty()) return 0;
    key = p.substr(p.rfind('/') + 1);
  }
  pos = text.find("\"" + key + "\"");
  if (pos == std::string::npos) return 0;
  return 1 + static_cast<std::size_t>(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n'));
}

}  // namespace halfheat
