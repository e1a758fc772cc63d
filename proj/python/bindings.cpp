#include <sstream>

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "freeflow/cli.hpp"
#include "freeflow/io.hpp"
#include "freeflow/levyflow.hpp"

namespace py = pybind11;
using namespace freeflow;

namespace {

py::dict densityDict(const DensityTable& t) {
  std::vector<std::string> flags;
  for (auto f : t.flags) flags.emplace_back(io::flagName(f));
  py::dict d;
  d["x"] = t.x;
  d["density"] = t.density;
  d["flags"] = flags;
  d["mass_deficit"] = t.massDeficit;
  d["eps"] = t.eps;
  return d;
}

py::dict fal2Dict(const Fal2Result& r) {
  py::dict d;
  d["verdict"] = verdictName(r.verdict);
  d["route"] = r.route;
  d["t"] = r.t ? py::cast(*r.t) : py::none();
  d["witness"] = r.witness ? py::cast(*r.witness) : py::none();
  d["value"] = r.value ? py::cast(*r.value) : py::none();
  return d;
}

std::string routeOf(const FlowField& ff) {
  if (ff.pair()) return "pair";
  if (ff.conjugacy()) return "conjugacy";
  return "ode";
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Free additive Levy flows: Nevanlinna functions, Cauchy transforms, conformal primitives";
  m.attr("__version__") = FREEFLOW_VERSION;
  py::register_exception<Error>(m, "FreeflowError", PyExc_RuntimeError);

  py::class_<AnalyticFn>(m, "Function")
      .def(py::init([](const std::string& spec) { return io::parseFunction(spec); }), py::arg("spec"))
      .def("__call__", &AnalyticFn::operator(), py::arg("z"))
      .def("derivative", &AnalyticFn::derivative, py::arg("z"))
      .def_property_readonly("name", &AnalyticFn::name);

  py::class_<FlowField>(m, "Field")
      .def_static(
          "from_psi",
          [](const std::string& spec) { return buildFal2(io::parsePsi(spec)); }, py::arg("spec"),
          py::call_guard<py::gil_scoped_release>())
      .def_static(
          "from_phi",
          [](const std::string& spec) {
            FlowField ff(io::parseFunction(spec));
            ff.validate();
            return ff;
          },
          py::arg("spec"), py::call_guard<py::gil_scoped_release>())
      .def("phi", [](const FlowField& ff, cplx w) { return ff.phi()(w); }, py::arg("w"))
      .def_property_readonly("route", &routeOf)
      .def(
          "flow",
          [](const FlowField& ff, cplx z, double t, const std::string& route) {
            if (route == "ode") return flowOde(ff, z, t);
            if (route == "conformal") return flowConformal(ff, z, t);
            if (route == "auto") return flow(ff, z, t);
            throw InvalidInput("route must be auto, conformal or ode");
          },
          py::arg("z"), py::arg("t"), py::arg("route") = "auto",
          py::call_guard<py::gil_scoped_release>())
      .def("flow_inverse", &flowInverse, py::arg("z"), py::arg("t"),
           py::call_guard<py::gil_scoped_release>())
      .def(
          "fal2_check", [](const FlowField& ff) { return fal2Dict(fal2Check(ff)); })
      .def(
          "transition_kernel",
          [](const FlowField& ff, double t, double x, const std::vector<double>& grid, double eps) {
            return densityDict(transitionKernel(ff, t, x, grid, eps).table);
          },
          py::arg("t"), py::arg("x"), py::arg("grid"), py::arg("eps") = 1e-3)
      .def(
          "marginal",
          [](const FlowField& ff, double t, const std::vector<double>& grid, double eps) {
            return densityDict(marginalLaw(ff, t, grid, eps).table);
          },
          py::arg("t"), py::arg("grid"), py::arg("eps") = 1e-3)
      .def("increment", &incrementTransform, py::arg("s"), py::arg("t"), py::arg("z"));

  m.def(
      "fal2_check", [](const std::string& phi) { return fal2Dict(fal2Check(io::parseFunction(phi))); },
      py::arg("phi"));

  m.def(
      "recover_parameters",
      [](const std::string& spec) {
        const RecoveredNevanlinna r = recoverParameters(io::parseFunction(spec));
        py::dict d;
        d["alpha"] = r.alpha;
        d["beta"] = r.beta;
        d["mass"] = r.nu.totalMass();
        d["mass_from_identity"] = r.massFromIdentity;
        d["mass_deficit"] = r.massDeficit;
        d["real_constant"] = r.realConstant;
        d["atomic_warning"] = r.atomicWarning;
        return d;
      },
      py::arg("spec"));

  m.def(
      "slit_image",
      [](double a, double b, std::vector<double> poles, std::vector<double> residues) {
        std::vector<std::pair<double, double>> out;
        for (const Slit& s : slitImage({a, b, std::move(poles), std::move(residues)}).slits)
          out.emplace_back(s.height, s.tip);
        return out;
      },
      py::arg("a"), py::arg("b"), py::arg("poles"), py::arg("residues"));

  m.def(
      "contains_halfplane_translate",
      [](const std::string& psi) {
        const ContainmentCertificate c = containsHalfplaneTranslate(io::parsePsi(psi));
        py::dict d;
        d["contains"] = c.contains;
        d["alpha"] = c.alpha;
        d["m2plus"] = c.m2plus;
        d["decisive"] = c.decisive;
        d["reason"] = c.reason;
        return d;
      },
      py::arg("psi"));

  m.def(
      "semigroup_density",
      [](const std::string& phi, double t, const std::vector<double>& grid, double eps) {
        const AnalyticFn f = io::parseFunction(phi);
        return densityDict(
            stieltjesInvert([&](cplx z) { return semigroupMarginal(f, t, z); }, grid, eps));
      },
      py::arg("phi"), py::arg("t"), py::arg("grid"), py::arg("eps") = 1e-3);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        const int code = cli::run(args, out, err);
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"));
}
