#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hjm/curve.hpp"
#include "hjm/deflator.hpp"
#include "hjm/drift.hpp"
#include "hjm/mmm.hpp"
#include "hjm/scenario.hpp"
#include "hjm/solver.hpp"

namespace py = pybind11;
using namespace hjm;

namespace {

py::object to_py(const nlohmann::json& j) { return py::module_::import("json").attr("loads")(j.dump()); }

py::array_t<double> arr(std::span<const double> s) { return py::array_t<double>(s.size(), s.data()); }

py::dict ensemble_dict(const PathEnsemble& e) {
  const std::size_t P = e.paths(), R = e.records(), I = e.indices(), M = e.maturities().size();
  py::array_t<double> spots({P, R, I}), shorts({P, R, I}), num({P, R}), defl({P, R}), bonds({P, R, I, M});
  auto s = spots.mutable_unchecked<3>();
  auto h = shorts.mutable_unchecked<3>();
  auto n = num.mutable_unchecked<2>();
  auto d = defl.mutable_unchecked<2>();
  auto b = bonds.mutable_unchecked<4>();
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t r = 0; r < R; ++r) {
      n(p, r) = e.numeraire(p, r);
      d(p, r) = e.deflator(p, r);
      for (std::size_t i = 0; i < I; ++i) {
        s(p, r, i) = e.spot(p, r, i);
        h(p, r, i) = e.short_end(p, r, i);
        for (std::size_t j = 0; j < M; ++j) b(p, r, i, j) = e.bond_price(p, r, i, j);
      }
    }
  py::dict out;
  out["times"] = py::array_t<double>(e.times().size(), e.times().data());
  out["maturities"] = py::array_t<double>(M, e.maturities().data());
  out["spots"] = spots;
  out["short_ends"] = shorts;
  out["numeraire"] = num;
  out["deflator"] = defl;
  out["bonds"] = bonds;
  out["fast_path"] = e.fast_path;
  return out;
}

}  // namespace

PYBIND11_MODULE(_hjmrw, m) {
  m.doc() = "HJM multi-curve simulation and checks";
  m.attr("__version__") = kVersion;

  auto base = py::register_exception<Error>(m, "HjmError");
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Curve>(m, "Curve")
      .def(py::init([](double h0, std::vector<double> deriv, double step) { return Curve(h0, std::move(deriv), step); }),
           py::arg("h0"), py::arg("derivative"), py::arg("step"))
      .def_static("constant", &Curve::constant, py::arg("value"), py::arg("step"), py::arg("intervals"))
      .def_property_readonly("values", [](const Curve& c) { return arr(c.values()); })
      .def_property_readonly("derivative", [](const Curve& c) { return arr(c.derivative()); })
      .def_property_readonly("step", &Curve::grid_step)
      .def_property_readonly("horizon", &Curve::horizon)
      .def("__call__", &Curve::operator(), py::arg("xi"))
      .def("norm", [](const Curve& c, double rho) { return norm(c, rho); }, py::arg("rho"))
      .def("shift", [](const Curve& c, double t) { return shift(c, t); }, py::arg("t"))
      .def("integrate", [](const Curve& c, double tau) { return integrate(c, tau); }, py::arg("tau"))
      .def("integral_op", [](const Curve& c) { return integral_op(c); });

  m.def("space_constants", [](double rho, double rho_prime) {
    const auto k = constants({rho, rho_prime});
    return py::make_tuple(k.c_rho, k.c_rho_rhop, k.k_rho_rhop);
  }, py::arg("rho"), py::arg("rho_prime"));
  m.def("v_k", &v_k, py::arg("k"), py::arg("r"));
  m.def("w_k_inverse", &w_k_inverse, py::arg("k"), py::arg("r"));

  py::class_<ScenarioConfig>(m, "Scenario")
      .def_readwrite("seed", &ScenarioConfig::seed)
      .def_readwrite("n_paths", &ScenarioConfig::n_paths)
      .def_readwrite("threads", &ScenarioConfig::threads)
      .def_readwrite("output_dir", &ScenarioConfig::output_dir)
      .def_readwrite("commands", &ScenarioConfig::commands)
      .def_readwrite("maturities", &ScenarioConfig::maturities)
      .def_property_readonly("has_model", [](const ScenarioConfig& c) { return c.model.has_value(); })
      .def_property_readonly("config_hash", [](const ScenarioConfig& c) { return fnv1a(c.canonical); })
      .def_property_readonly("model_yaml", [](const ScenarioConfig& c) { return c.model_yaml; });

  m.def("parse_scenario", &parse_scenario, py::arg("text"));
  m.def("load_scenario", &load_scenario, py::arg("path"));
  m.def("command_names", &command_names);

  m.def("run_command", [](const ScenarioConfig& c, const std::string& cmd) {
    CommandResult r;
    {
      py::gil_scoped_release nogil;
      r = run_command(c, cmd);
    }
    py::dict tables;
    for (const auto& t : r.tables) tables[py::str(t.name)] = to_csv(t);
    py::dict out;
    out["passed"] = r.pass;
    out["report"] = to_py(r.report);
    out["tables"] = tables;
    return out;
  }, py::arg("scenario"), py::arg("command"), "Run one command; returns the report and CSV text per table.");

  m.def("run", [](const ScenarioConfig& c, std::optional<std::vector<std::string>> cmds) {
    RunSummary s;
    {
      py::gil_scoped_release nogil;
      s = run(c, cmds ? *cmds : c.commands);
    }
    return py::make_tuple(s.exit_code, to_py(s.manifest));
  }, py::arg("scenario"), py::arg("commands") = py::none(), "Run and write reports; returns (exit_code, manifest).");

  m.def("simulate", [](const ScenarioConfig& c) {
    const ModelSpec& spec = c.require_model("simulate");
    SimulationConfig sc = c.simulation();
    sc.track_cone = false;
    std::optional<PathEnsemble> e;
    {
      py::gil_scoped_release nogil;
      e.emplace(simulate(sc, spec));
    }
    return ensemble_dict(*e);
  }, py::arg("scenario"), "Simulate the scenario's model; arrays are indexed [path, record, index(, maturity)].");

  m.def("drift_residual", [](const ScenarioConfig& c, double t, double T) {
    const ModelSpec& spec = c.require_model("drift_residual");
    const CurveFamily fam = spec.initial_family(c.grid.dt, c.grid.xi_intervals());
    return integrated_drift_residual(drift_inputs(fam, t, spec), T);
  }, py::arg("scenario"), py::arg("t"), py::arg("T"));

  py::class_<MmmParams>(m, "MmmParams")
      .def(py::init<>())
      .def_readwrite("alpha0", &MmmParams::alpha0)
      .def_readwrite("eta", &MmmParams::eta)
      .def_readwrite("x0", &MmmParams::x0);
  m.def("phi_time", &phi_time, py::arg("params"), py::arg("t"));
  m.def("mprc", &mprc, py::arg("params"), py::arg("t"), py::arg("T"), py::arg("xbar"));
  m.def("mprc_complement", &mprc_complement, py::arg("params"), py::arg("t"), py::arg("T"), py::arg("xbar"));
  m.def("bond0_mmm", &bond0_mmm, py::arg("params"), py::arg("t"), py::arg("T"), py::arg("xbar"));
  m.def("expected_ratio", [](const MmmParams& p, double t, double T, std::size_t n, double dt, std::uint64_t seed,
                             std::size_t threads) {
    RatioEstimate e;
    {
      py::gil_scoped_release nogil;
      e = expected_ratio(p, t, T, n, dt, seed, threads);
    }
    py::dict d;
    d["mean"] = e.mean;
    d["se"] = e.se;
    d["oracle"] = e.oracle;
    d["oracle_complement"] = e.oracle_complement;
    d["z"] = e.z;
    d["within_3se"] = e.within_3se;
    return d;
  }, py::arg("params"), py::arg("t"), py::arg("T"), py::arg("n_paths"), py::arg("dt"), py::arg("seed") = 42,
     py::arg("threads") = 1);
}
