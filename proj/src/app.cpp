#include "halfheat/app.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>

#include "halfheat/conditions.hpp"
#include "halfheat/duhamel.hpp"
#include "halfheat/kernel_checks.hpp"
#include "halfheat/quadrature.hpp"
#include "halfheat/supersolutions.hpp"

namespace halfheat {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string coords_header(int n) {
  std::string h;
  for (int i = 0; i < n; ++i) h += ",x" + std::to_string(i + 1);
  return h;
}

std::string coords_csv(const Point& x) {
  std::string s;
  for (int i = 0; i < x.dim(); ++i) s += "," + fmt(x[i]);
  return s;
}

ordered_json header(const RunSpec& spec, const RunContext& ctx) {
  ordered_json r;
  r["schema"] = kReportSchema;
  r["command"] = to_string(spec.command);
  r["N"] = spec.N;
  r["p"] = spec.p;
  r["T"] = spec.T;
  r["refine"] = ctx.refine;
  return r;
}

ordered_json grid_json(const Grid& g) {
  ordered_json j;
  j["time_nodes"] = g.times().size();
  j["normal_nodes"] = g.normal_count();
  j["tangential_nodes"] = g.dim() > 1 ? g.tangential_count() : 0;
  j["nodes_per_slice"] = g.nodes_per_slice();
  j["t_min"] = g.times().front();
  return j;
}

GridSpec run_grid(const HalfSpaceMeasure& mu, double T, const RunSpec& spec, const RunContext& ctx) {
  GridSpec g = build_grid(mu, T, spec.grid);
  return ctx.refine ? g.refined() : g;
}

ordered_json condition_json(const ConditionReport& r) {
  ordered_json j;
  j["which_condition"] = to_string(r.which);
  j["verdict"] = to_string(r.verdict);
  j["sup_estimate"] = r.sup_estimate;
  j["growth_exponent_fit"] = {{"slope", r.growth_exponent}, {"halfwidth_95", r.growth_halfwidth}};
  j["sigmas"] = r.sigmas;
  j["sup_by_sigma"] = r.sup_by_sigma;
  j["samples"] = r.samples.size();
  j["diagnostic"] = r.diagnostic;
  return j;
}

/// Rows "tag,t,x...,value" sorted by (t, x) for every slice of a field.
std::string field_csv(const Grid& grid, const SliceValues& values) {
  const int n = grid.dim();
  std::ostringstream out;
  out << "t" << coords_header(n) << ",u\n";
  std::vector<std::pair<Point, std::size_t>> nodes;
  for (std::size_t i = 0; i < grid.nodes_per_slice(); ++i) nodes.emplace_back(grid.node(i), i);
  std::sort(nodes.begin(), nodes.end(), [n](const auto& a, const auto& b) {
    for (int k = 0; k < n; ++k)
      if (a.first[k] != b.first[k]) return a.first[k] < b.first[k];
    return false;
  });
  for (std::size_t k = 0; k < values.size(); ++k)
    for (const auto& [x, i] : nodes) out << fmt(grid.times()[k]) << coords_csv(x) << "," << fmt(values[k][i]) << "\n";
  return out.str();
}

struct TestSpec {
  std::string label;
  TestFunction phi;
};

std::vector<TestSpec> parse_tests(const json& arr, int n) {
  std::vector<TestSpec> out;
  if (!arr.is_array() || arr.empty()) throw SpecError("/options/tests", "expected a non-empty array");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string path = "/options/tests/" + std::to_string(i);
    const json& t = arr[i];
    if (!t.is_object() || !t.contains("kind") || !t.at("kind").is_string())
      throw SpecError(path, "expected an object with a kind");
    const std::string kind = t.at("kind").get<std::string>();
    if (kind == "one") {
      out.push_back({"one", [](const Coords&) { return 1.0; }});
      continue;
    }
    if (kind != "gaussian" && kind != "bump") throw SpecError(path + "/kind", "test kinds are one, gaussian, bump");
    json as_component = t;
    const char* size_key = kind == "gaussian" ? "width" : "radius";
    if (!as_component.contains(size_key)) as_component[size_key] = 1.0;
    const MeasureComponent c = parse_measure_component(as_component, n, path);
    const Coords ctr = c.center.raw();
    const double w = kind == "gaussian" ? c.width : c.radius;
    TestFunction phi;
    if (kind == "gaussian")
      phi = [ctr, w, n](const Coords& x) { return std::exp(-distance_squared(x, ctr, n) / (w * w)); };
    else
      phi = [ctr, w, n](const Coords& x) {
        const double q = distance_squared(x, ctr, n) / (w * w);
        return q < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - q)) : 0.0;
      };
    out.push_back({kind + "@" + std::to_string(i), phi});
  }
  return out;
}

/// int phi d mu for measures with compactly supported parts; NaN when some part is unbounded.
double pair_with_measure(const HalfSpaceMeasure& mu, const TestFunction& phi) {
  const int n = mu.dim();
  double total = 0.0;
  for (const auto& a : mu.atoms()) total += a.mass * mu.scale() * phi(a.location.raw());
  auto over = [&](const Density& d, int dim, bool weighted, bool boundary) {
    const auto& s = d.support();
    if (!std::isfinite(s.radius)) return std::numeric_limits<double>::quiet_NaN();
    quadrature::Region region{dim, !boundary, {{s.center, s.radius}}};
    quadrature::PolarOptions po;
    po.singular_pole = d.singularity().has_value();
    po.rel_tol = 1e-10;
    const Coords pole = d.singularity() ? d.singularity()->center : s.center;
    return quadrature::integrate_polar(
        region, pole,
        [&](const Coords& y) {
          Coords full = y;
          if (boundary) full[n - 1] = 0.0;
          return d(y) * (weighted ? y[n - 1] : 1.0) * phi(full);
        },
        po);
  };
  if (const auto& d = mu.interior()) total += mu.scale() * over(*d, n, mu.interior_form() == InteriorForm::weighted, false);
  if (const auto& h = mu.boundary_line()) total += mu.scale() * over(*h, n - 1, false, true);
  return total;
}

/// Grid times nearest to the targets (duplicates dropped, order kept).
std::vector<double> snap_times(const Grid& grid, const std::vector<double>& targets) {
  std::vector<double> out;
  for (double t : targets) {
    const auto& ts = grid.times();
    std::size_t best = 0;
    for (std::size_t k = 1; k < ts.size(); ++k)
      if (std::abs(std::log(ts[k] / t)) < std::abs(std::log(ts[best] / t))) best = k;
    if (std::find(out.begin(), out.end(), ts[best]) == out.end()) out.push_back(ts[best]);
  }
  return out;
}

std::vector<double> double_list(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) throw SpecError(path, "expected a non-empty array of numbers");
  std::vector<double> v;
  for (const auto& e : j) {
    if (!e.is_number()) throw SpecError(path, "expected numbers");
    v.push_back(e.get<double>());
  }
  return v;
}

RunOutcome kernel_check(const RunSpec& spec, const RunContext& ctx) {
  kernels::CheckOptions o;
  o.seed = ctx.seed;
  const json& opt = spec.options;
  if (opt.contains("invariant_samples")) o.invariant_samples = opt.at("invariant_samples").get<std::size_t>();
  if (opt.contains("semigroup_samples")) o.semigroup_samples = opt.at("semigroup_samples").get<std::size_t>();
  if (opt.contains("mass_samples")) o.mass_samples = opt.at("mass_samples").get<std::size_t>();
  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["seed"] = ctx.seed;
  ordered_json rows = ordered_json::array();
  std::ostringstream csv;
  csv << "check,samples,failures,max_error,tolerance,result\n";
  bool all = true;
  for (const auto& r : kernels::run_kernel_checks(o)) {
    ordered_json j;
    j["check"] = r.name;
    j["samples"] = r.samples;
    j["failures"] = r.failures;
    j["max_error"] = r.max_error;
    j["tolerance"] = r.tolerance;
    j["result"] = r.pass ? "PASS" : "FAIL";
    rows.push_back(j);
    csv << r.name << "," << r.samples << "," << r.failures << "," << fmt(r.max_error) << "," << fmt(r.tolerance) << ","
        << (r.pass ? "PASS" : "FAIL") << "\n";
    all = all && r.pass;
  }
  out.report["rows"] = rows;
  out.report["all_pass"] = all;
  out.csv = csv.str();
  out.exit_code = all ? kExitOk : kExitNumerical;
  return out;
}

RunOutcome classify(const RunSpec& spec, const RunContext& ctx) {
  const auto mu = build_measure(spec.measure, spec.N, spec.p);
  ConditionOptions co = spec.conditions;
  co.threads = ctx.threads;
  auto res = classify_measure(mu, spec.p, spec.T, co);
  if (spec.options.value("global_growth", false)) {
    GrowthOptions go;
    go.threads = ctx.threads;
    res.reports.push_back(check_global_growth(mu, spec.p, go));
    if (res.reports.back().verdict == ConditionVerdict::OBSTRUCTED_NONEXISTENCE)
      res.verdict = ConditionVerdict::OBSTRUCTED_NONEXISTENCE;
    else if (res.reports.back().verdict == ConditionVerdict::INCONCLUSIVE &&
             res.verdict == ConditionVerdict::UNOBSTRUCTED)
      res.verdict = ConditionVerdict::INCONCLUSIVE;
  }
  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["verdict"] = to_string(res.verdict);
  ordered_json reps = ordered_json::array();
  std::ostringstream csv;
  csv << "which_condition" << coords_header(spec.N) << ",sigma,value\n";
  for (const auto& r : res.reports) {
    reps.push_back(condition_json(r));
    for (const auto& s : r.samples) csv << to_string(r.which) << coords_csv(s.z) << "," << fmt(s.sigma) << "," << fmt(s.value) << "\n";
  }
  out.report["reports"] = reps;
  out.csv = csv.str();
  out.exit_code = res.verdict == ConditionVerdict::OBSTRUCTED_NONEXISTENCE ? kExitVerdict : kExitOk;
  return out;
}

RunOutcome certify(const RunSpec& spec, const RunContext& ctx) {
  const auto mu = build_measure(spec.measure, spec.N, spec.p);
  const ConvexGauge gauge =
      spec.options.contains("gauge") ? parse_gauge(spec.options.at("gauge"), "/options/gauge") : ConvexGauge::identity();
  const auto candidate = build_phi_supersolution(mu, gauge, spec.p);
  const auto grid = std::make_shared<Grid>(run_grid(mu, spec.T, spec, ctx));
  const auto thresholds = gauge_threshold_conditions(candidate, *grid);
  const auto ball = ball_integral_smallness(mu, spec.p, spec.T);
  const DuhamelOperator op(grid, ctx.threads);
  const auto ver = verify_supersolution(candidate.evaluator(), mu, spec.p, op);

  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["gauge"] = gauge.describe();
  out.report["grid"] = grid_json(*grid);
  ordered_json th;
  th["interior_lhs"] = thresholds.interior_lhs;
  th["interior_threshold"] = thresholds.interior_threshold;
  th["interior_pass"] = thresholds.interior_pass;
  th["boundary_lhs"] = thresholds.boundary_lhs;
  th["boundary_threshold"] = thresholds.boundary_threshold;
  th["boundary_pass"] = thresholds.boundary_pass;
  out.report["gauge_thresholds"] = th;
  ordered_json bs;
  bs["value"] = ball.value;
  bs["infinite"] = ball.infinite;
  bs["small_s_slope"] = ball.small_s_slope;
  bs["calibrated_bound"] = kBallSmallnessCalibrated;
  bs["below_bound"] = !ball.infinite && ball.value < kBallSmallnessCalibrated;
  out.report["ball_smallness"] = bs;
  ordered_json v;
  v["pass"] = ver.pass;
  v["min_defect"] = ver.min_defect;
  v["tol_margin"] = ver.tol_margin;
  v["fraction_below"] = ver.fraction_below;
  v["candidate_sup"] = ver.candidate_sup;
  v["nodes"] = ver.nodes;
  v["diagnostic"] = ver.diagnostic;
  out.report["verification"] = v;
  out.report["certified"] = ver.pass;
  std::ostringstream csv;
  csv << "t,interior_product,boundary_product\n";
  for (std::size_t k = 0; k < thresholds.times.size(); ++k)
    csv << fmt(thresholds.times[k]) << "," << fmt(thresholds.interior_products[k]) << ","
        << fmt(thresholds.boundary_products[k]) << "\n";
  out.csv = csv.str();
  return out;
}

ordered_json solution_json(const SolutionField& u) {
  ordered_json j;
  j["status"] = to_string(u.status);
  j["iterations"] = u.iterations;
  j["final_sup"] = u.sup_history.empty() ? 0.0 : u.sup_history.back();
  j["amplification"] = u.amplification_history.empty() ? 1.0 : u.amplification_history.back();
  j["monotonicity_violations"] = u.monotonicity_violations;
  j["diagnostic"] = u.diagnostic;
  return j;
}

struct Solved {
  std::shared_ptr<const Grid> grid;
  SolutionField u;
};

Solved solve_field(const HalfSpaceMeasure& mu, const RunSpec& spec, const RunContext& ctx) {
  auto grid = std::make_shared<const Grid>(run_grid(mu, spec.T, spec, ctx));
  const DuhamelOperator op(grid, ctx.threads);
  return {grid, picard_solve(mu, spec.p, op, spec.picard)};
}

ordered_json trace_json(const std::vector<TestSpec>& tests, const std::vector<TraceResult>& res,
                        const HalfSpaceMeasure& mu, std::ostringstream* csv) {
  ordered_json arr = ordered_json::array();
  for (std::size_t i = 0; i < tests.size(); ++i) {
    ordered_json j;
    j["test"] = tests[i].label;
    j["times"] = res[i].times;
    j["pairings"] = res[i].pairings;
    j["limit"] = res[i].limit;
    const double ref = pair_with_measure(mu, tests[i].phi);
    j["measure_pairing"] = ref;
    j["relative_error"] = ref != 0.0 ? std::abs(res[i].limit / ref - 1.0) : std::abs(res[i].limit);
    j["inconclusive"] = res[i].inconclusive;
    arr.push_back(j);
    if (csv) {
      for (std::size_t k = 0; k < res[i].times.size(); ++k)
        *csv << tests[i].label << "," << fmt(res[i].times[k]) << "," << fmt(res[i].pairings[k]) << "\n";
      *csv << tests[i].label << ",0," << fmt(res[i].limit) << "\n";
    }
  }
  return arr;
}

std::vector<TestSpec> tests_for(const RunSpec& spec) {
  if (spec.options.contains("tests")) return parse_tests(spec.options.at("tests"), spec.N);
  json defaults = json::array({json{{"kind", "one"}}});
  std::vector<double> c(spec.N, 0.0);
  c.back() = 1.0;
  defaults.push_back(json{{"kind", "gaussian"}, {"center", c}, {"width", 1.0}});
  return parse_tests(defaults, spec.N);
}

std::vector<double> trace_times(const Grid& grid, const RunSpec& spec) {
  const std::vector<double> targets = spec.options.contains("times")
                                          ? double_list(spec.options.at("times"), "/options/times")
                                          : std::vector<double>{1e-3 * spec.T, 2e-3 * spec.T, 4e-3 * spec.T};
  return snap_times(grid, targets);
}

RunOutcome solve(const RunSpec& spec, const RunContext& ctx) {
  const auto mu = build_measure(spec.measure, spec.N, spec.p);
  const auto [grid, u] = solve_field(mu, spec, ctx);
  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["grid"] = grid_json(*grid);
  out.report["solution"] = solution_json(u);
  if (u.status == SolveStatus::CONVERGED) {
    const auto tests = tests_for(spec);
    std::vector<TestFunction> phis;
    for (const auto& t : tests) phis.push_back(t.phi);
    out.report["trace"] = trace_json(tests, initial_trace(u, phis, trace_times(*grid, spec)), mu, nullptr);
  }
  out.csv = field_csv(*grid, u.values);
  out.exit_code = u.status == SolveStatus::DIVERGED ? kExitVerdict : kExitOk;
  return out;
}

RunOutcome trace(const RunSpec& spec, const RunContext& ctx) {
  const auto mu = build_measure(spec.measure, spec.N, spec.p);
  const auto [grid, u] = solve_field(mu, spec, ctx);
  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["grid"] = grid_json(*grid);
  out.report["solution"] = solution_json(u);
  std::ostringstream csv;
  csv << "test,t,pairing\n";
  if (u.status != SolveStatus::DIVERGED) {
    const auto tests = tests_for(spec);
    std::vector<TestFunction> phis;
    for (const auto& t : tests) phis.push_back(t.phi);
    out.report["trace"] = trace_json(tests, initial_trace(u, phis, trace_times(*grid, spec)), mu, &csv);
  }
  out.csv = csv.str();
  out.exit_code = u.status == SolveStatus::DIVERGED ? kExitVerdict : kExitOk;
  return out;
}

RunOutcome dichotomy(const RunSpec& spec, const RunContext& ctx) {
  DichotomyOptions o;
  const json& opt = spec.options;
  o.kappa_min = opt.value("kappa_min", o.kappa_min);
  o.kappa_max = opt.value("kappa_max", o.kappa_max);
  o.ratio_tol = opt.value("ratio_tol", o.ratio_tol);
  o.refine = opt.value("refine_check", o.refine);
  o.caps = spec.picard;
  o.threads = ctx.threads;
  const auto unit = build_measure(spec.measure, spec.N, spec.p);
  const GridSpec grid = run_grid(unit, spec.T, spec, ctx);
  DichotomyResult res;
  const bool single_profile = spec.measure.size() == 1 && spec.measure[0].kind != "atom" &&
                              spec.measure[0].kind != "gaussian" && spec.measure[0].kind != "bump" &&
                              spec.measure[0].kind != "constant";
  if (single_profile) {
    const auto& c = spec.measure[0];
    res = dichotomy_bisect(SingularProfile{profile_kind_from_string(c.kind), c.center, c.p > 0.0 ? c.p : spec.p},
                           spec.p, grid, o);
  } else {
    res = dichotomy_bisect(unit, spec.p, grid, o);
  }
  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["outcome"] = to_string(res.outcome);
  out.report["kappa_lo"] = res.kappa_lo;
  out.report["kappa_hi"] = res.kappa_hi;
  out.report["bracket_ratio"] = res.bracket_ratio;
  ordered_json trend;
  trend["checked"] = res.refinement_trend.checked;
  trend["lo_refined"] = res.refinement_trend.lo_refined ? ordered_json(to_string(*res.refinement_trend.lo_refined)) : ordered_json();
  trend["hi_refined"] = res.refinement_trend.hi_refined ? ordered_json(to_string(*res.refinement_trend.hi_refined)) : ordered_json();
  trend["persistent"] = res.refinement_trend.persistent;
  out.report["refinement_trend"] = trend;
  out.report["spatial_nodes"] = res.spatial_nodes;
  out.report["time_nodes"] = res.time_nodes;
  std::ostringstream csv;
  csv << "kappa,status,sweeps,refined\n";
  ordered_json evals = ordered_json::array();
  for (const auto& v : res.evaluations) {
    evals.push_back({{"kappa", v.kappa}, {"status", to_string(v.status)}, {"sweeps", v.sweeps}, {"refined", v.refined}});
    csv << fmt(v.kappa) << "," << to_string(v.status) << "," << v.sweeps << "," << (v.refined ? 1 : 0) << "\n";
  }
  out.report["evaluations"] = evals;
  out.csv = csv.str();
  out.exit_code = res.outcome == DichotomyOutcome::ALL_DIVERGE ? kExitVerdict : kExitOk;
  return out;
}

RunOutcome global_probe(const RunSpec& spec, const RunContext& ctx) {
  const auto mu = build_measure(spec.measure, spec.N, spec.p);
  const std::vector<double> horizons = spec.options.contains("horizons")
                                           ? double_list(spec.options.at("horizons"), "/options/horizons")
                                           : std::vector<double>{1.0, 10.0, 100.0, 1000.0};
  const GridSpec base = run_grid(mu, horizons.front(), spec, ctx);
  const auto rep = global_existence_probe(mu, spec.p, horizons, base, spec.picard, ctx.threads);
  RunOutcome out;
  out.report = header(spec, ctx);
  out.report["trend"] = rep.trend;
  out.report["largest_converged"] = rep.largest_converged;
  ordered_json hs = ordered_json::array();
  std::ostringstream csv;
  csv << "T,status,sweeps,amplification\n";
  for (const auto& h : rep.horizons) {
    hs.push_back({{"T", h.T}, {"status", to_string(h.status)}, {"sweeps", h.sweeps}, {"amplification", h.amplification}});
    csv << fmt(h.T) << "," << to_string(h.status) << "," << h.sweeps << "," << fmt(h.amplification) << "\n";
  }
  out.report["horizons"] = hs;
  out.csv = csv.str();
  out.exit_code = rep.trend == "diverges-eventually" ? kExitVerdict : kExitOk;
  return out;
}

}  // namespace

RunOutcome execute(const RunSpec& spec, const RunContext& ctx) {
  switch (spec.command) {
    case Command::kernel_check: return kernel_check(spec, ctx);
    case Command::classify: return classify(spec, ctx);
    case Command::certify: return certify(spec, ctx);
    case Command::solve: return solve(spec, ctx);
    case Command::dichotomy: return dichotomy(spec, ctx);
    case Command::trace: return trace(spec, ctx);
    case Command::global_probe: return global_probe(spec, ctx);
  }
  throw SpecError("/command", "unhandled command");
}

RunOutcome run(const RunSpec& spec, const RunContext& ctx) {
  RunOutcome out = execute(spec, ctx);
  std::error_code ec;
  std::filesystem::create_directories(ctx.out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + ctx.out_dir.string() + ": " + ec.message());
  auto write = [&](const std::string& name, const std::string& text) {
    const auto path = ctx.out_dir / name;
    std::ofstream f(path, std::ios::binary);
    f << text;
    f.close();
    if (!f) throw std::runtime_error("cannot write " + path.string());
  };
  write("report.json", out.report.dump(2) + "\n");
  write("samples.csv", out.csv);
  return out;
}

}  // namespace halfheat
