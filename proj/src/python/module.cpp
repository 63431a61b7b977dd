#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "halfheat/app.hpp"
#include "halfheat/kernel_checks.hpp"
#include "halfheat/kernels.hpp"

namespace py = pybind11;
using namespace halfheat;
using namespace halfheat::kernels;

namespace {

Point to_point(const std::vector<double>& xs) {
  if (xs.empty() || xs.size() > static_cast<std::size_t>(kMaxDim))
    throw std::domain_error("points need 1 to 3 coordinates");
  Coords c{};
  for (std::size_t i = 0; i < xs.size(); ++i) c[i] = xs[i];
  return Point(static_cast<int>(xs.size()), c);
}

py::object from_json(const nlohmann::ordered_json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

py::dict run_spec(const py::object& spec, std::uint64_t seed, int threads, bool refine) {
  const std::string text = py::isinstance<py::str>(spec)
                               ? spec.cast<std::string>()
                               : py::module_::import("json").attr("dumps")(spec).cast<std::string>();
  RunContext ctx;
  ctx.seed = seed;
  ctx.threads = threads;
  ctx.refine = refine;
  RunOutcome out;
  {
    py::gil_scoped_release release;
    out = execute(parse_run_spec(nlohmann::json::parse(text)), ctx);
  }
  py::dict d;
  d["exit_code"] = out.exit_code;
  d["report"] = from_json(out.report);
  d["csv"] = out.csv;
  return d;
}

}  // namespace

PYBIND11_MODULE(halfheat, m) {
  m.doc() = "Heat semigroup on the half-space and the nonlinear boundary problem it drives.";

  py::register_exception<SpecError>(m, "SpecError", PyExc_ValueError);

  m.def("fujita_exponent", &fujita_exponent, py::arg("d"));
  m.def(
      "dirichlet_kernel",
      [](const std::vector<double>& x, const std::vector<double>& y, double t) {
        return dirichlet_kernel(to_point(x), to_point(y), t);
      },
      py::arg("x"), py::arg("y"), py::arg("t"));
  m.def(
      "k_kernel",
      [](const std::vector<double>& x, const std::vector<double>& y, double t) {
        return k_kernel(to_point(x), to_point(y), t);
      },
      py::arg("x"), py::arg("y"), py::arg("t"));
  m.def("dirichlet_kernel_mass", py::overload_cast<double, double>(&dirichlet_kernel_mass), py::arg("x_normal"),
        py::arg("t"));
  m.def("boundary_k_mass", &boundary_k_mass, py::arg("t"));

  m.def(
      "kernel_checks",
      [](std::uint64_t seed, int invariant_samples) {
        CheckOptions opts;
        opts.seed = seed;
        opts.invariant_samples = invariant_samples;
        py::list rows;
        for (const auto& r : run_kernel_checks(opts)) {
          py::dict d;
          d["name"] = r.name;
          d["samples"] = r.samples;
          d["failures"] = r.failures;
          d["max_error"] = r.max_error;
          d["tolerance"] = r.tolerance;
          d["pass"] = r.pass;
          rows.append(d);
        }
        return rows;
      },
      py::arg("seed") = 20261016, py::arg("invariant_samples") = 2000);

  m.def("run", &run_spec, py::arg("spec"), py::arg("seed") = 20261016, py::arg("threads") = 1,
        py::arg("refine") = false,
        "Execute a run specification (JSON text or dict); returns exit_code, report and csv.");
  m.attr("REPORT_SCHEMA") = kReportSchema;
  m.attr("RUNSPEC_SCHEMA") = kRunSpecSchema;
}
