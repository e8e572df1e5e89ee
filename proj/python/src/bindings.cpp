#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <algorithm>
#include <cstring>

#include "steadylab/checkpoint.hpp"
#include "steadylab/config.hpp"
#include "steadylab/decay_lab.hpp"
#include "steadylab/error.hpp"
#include "steadylab/experiment.hpp"
#include "steadylab/linear_evolution.hpp"
#include "steadylab/semigroup.hpp"
#include "steadylab/spectral.hpp"
#include "steadylab/steady_builder.hpp"

namespace py = pybind11;
using namespace steadylab;

namespace {

using CArray = py::array_t<Complex, py::array::c_style | py::array::forcecast>;

CArray coefficients(const SpectralVectorField& u) {
  const auto n = static_cast<py::ssize_t>(u.lattice().n());
  CArray out({py::ssize_t{3}, n, n, n});
  std::memcpy(out.mutable_data(), u.data().data(), u.data().size() * sizeof(Complex));
  return out;
}

SpectralVectorField from_coefficients(const Lattice& lat, const CArray& a) {
  SpectralVectorField u(lat);
  if (static_cast<std::size_t>(a.size()) != u.data().size())
    throw PreconditionError("coefficient array must have shape (3, n, n, n)");
  std::memcpy(u.data().data(), a.data(), u.data().size() * sizeof(Complex));
  return u;
}

py::array_t<double> vec(const std::vector<double>& v) {
  return py::array_t<double>(static_cast<py::ssize_t>(v.size()), v.data());
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Periodic spectral steady-state and decay toolkit";
  m.attr("__version__") = kToolVersion;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<PreconditionError>(m, "PreconditionError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());

  py::class_<Lattice>(m, "Lattice")
      .def(py::init(&make_lattice), py::arg("n"), py::arg("period") = 1.0,
           py::arg("dealias_fraction") = 2.0 / 3.0)
      .def_property_readonly("n", &Lattice::n)
      .def_property_readonly("period", &Lattice::period)
      .def_property_readonly("dealias_fraction", &Lattice::dealias_fraction)
      .def_property_readonly("cutoff", &Lattice::cutoff)
      .def("__eq__", &Lattice::operator==)
      .def("__repr__", [](const Lattice& l) {
        return "Lattice(n=" + std::to_string(l.n()) + ", period=" + std::to_string(l.period()) + ")";
      });

  py::class_<PhysicalParams>(m, "PhysicalParams")
      .def(py::init([](double nu, double rho0, double m_energy) {
             PhysicalParams p{nu, rho0, m_energy};
             p.validate();
             return p;
           }),
           py::arg("nu") = 0.05, py::arg("rho0") = 3.0, py::arg("m_energy") = 1.0)
      .def_readonly("nu", &PhysicalParams::nu)
      .def_readonly("rho0", &PhysicalParams::rho0)
      .def_readonly("m_energy", &PhysicalParams::m_energy);

  py::class_<SpectralVectorField>(m, "Field")
      .def(py::init<Lattice>())
      .def_static("from_coefficients", &from_coefficients)
      .def_static("from_physical",
                  [](const Lattice& lat, py::array_t<double, py::array::c_style | py::array::forcecast> a) {
                    const std::size_t cells = std::size_t(lat.n()) * lat.n() * lat.n();
                    if (static_cast<std::size_t>(a.size()) != 3 * cells)
                      throw PreconditionError("physical array must have shape (3, n, n, n)");
                    std::array<std::vector<double>, 3> v;
                    for (int c = 0; c < 3; ++c) v[c].assign(a.data() + c * cells, a.data() + (c + 1) * cells);
                    return from_physical(lat, v);
                  })
      .def_property_readonly("lattice", &SpectralVectorField::lattice)
      .def("coefficients", &coefficients)
      .def("physical", [](const SpectralVectorField& u) {
        const auto n = static_cast<py::ssize_t>(u.lattice().n());
        const auto v = to_physical(u);
        py::array_t<double> out({py::ssize_t{3}, n, n, n});
        for (int c = 0; c < 3; ++c)
          std::copy(v[c].begin(), v[c].end(), out.mutable_data() + c * v[c].size());
        return out;
      })
      .def("norm", [](const SpectralVectorField& u, const std::string& kind) {
        if (kind == "L2") return norm(u, NormKind::L2);
        if (kind == "H1dot") return norm(u, NormKind::H1dot);
        if (kind == "Hminus1") return norm(u, NormKind::Hminus1);
        if (kind == "X") return norm(u, NormKind::X);
        throw PreconditionError("unknown norm '" + kind + "' (L2, H1dot, Hminus1, X)");
      }, py::arg("kind") = "L2")
      .def("divergence_ratio", &divergence_ratio)
      .def("__add__", [](const SpectralVectorField& a, const SpectralVectorField& b) { return a + b; })
      .def("__sub__", [](const SpectralVectorField& a, const SpectralVectorField& b) { return a - b; })
      .def("__mul__", [](const SpectralVectorField& a, double s) { return s * a; })
      .def("__rmul__", [](const SpectralVectorField& a, double s) { return s * a; });

  m.def("forcing", [](const Lattice& lat, double rho0, double rho1, double x_norm, std::uint64_t seed) {
    return random_bandpass_forcing(lat, {rho0, rho1, x_norm, seed});
  }, py::arg("lattice"), py::arg("rho0") = 3.0, py::arg("rho1") = 5.0, py::arg("x_norm") = 1.0,
     py::arg("seed") = 1);
  m.def("random_band_field", &random_band_field, py::arg("lattice"), py::arg("lo"), py::arg("hi"),
        py::arg("seed"));
  m.def("leray_project", &leray_project);
  m.def("nonlinear_term", [](const SpectralVectorField& a, const SpectralVectorField& b) {
    return nonlinear_term(a, b);
  });
  m.def("heat_evolve", &heat_evolve, py::arg("f"), py::arg("nu"), py::arg("t"));
  m.def("stokes_solve", &stokes_solve, py::arg("f"), py::arg("nu"));
  m.def("steady_residual", &steady_residual, py::arg("u"), py::arg("f"), py::arg("nu"),
        py::arg("nonlinear") = true);

  m.def("build_steady", [](const SpectralVectorField& f, const PhysicalParams& p, const std::string& route,
                           double tol_outer, double tol_inner) {
    BuildOptions o;
    o.route = parse_route(route);
    o.tol_outer = tol_outer;
    o.tol_inner = tol_inner;
    BuildResult r = build_steady(f, p, o);
    py::dict trace;
    trace["converged"] = r.trace.converged;
    trace["iterations"] = r.trace.iterates.size();
    trace["max_ratio"] = r.trace.max_ratio();
    trace["median_ratio"] = r.trace.median_ratio();
    trace["gradient_bound"] = r.trace.gradient_bound;
    trace["bound_violations"] = r.trace.bound_violations;
    trace["budget_violations"] = r.trace.budget_violations;
    trace["csv"] = r.trace.to_csv();
    return py::make_tuple(std::move(r.field), trace);
  }, py::arg("f"), py::arg("params"), py::arg("route") = "direct", py::arg("tol_outer") = 1e-8,
     py::arg("tol_inner") = 1e-10);

  m.def("evolve_difference", [](const SpectralVectorField& u, const SpectralVectorField& f,
                                const PhysicalParams& p, double dt, double horizon, int stride) {
    EvolutionConfig cfg{.dt = dt, .horizon = horizon, .tail_tolerance = 0.0, .snapshot_stride = stride};
    const TrajectoryRecord tr = evolve_difference(u, f, p, cfg, {.store_snapshots = false});
    py::dict d;
    d["times"] = vec(tr.times);
    d["l2"] = vec(tr.l2);
    d["h1dot"] = vec(tr.h1dot);
    d["l2_v"] = vec(tr.l2_v);
    d["cumulative_enstrophy"] = vec(tr.cumulative_enstrophy);
    d["phi_l2"] = vec(tr.phi_l2);
    d["phi_h1dot"] = vec(tr.phi_h1dot);
    return d;
  }, py::arg("u"), py::arg("f"), py::arg("params"), py::arg("dt") = 5e-3, py::arg("horizon") = 2.0,
     py::arg("stride") = 4);

  m.def("check_decay_envelope", [](const std::vector<double>& times, const std::vector<double>& l2,
                                   double calibration_fraction) {
    TrajectoryRecord tr;
    tr.times = times;
    tr.l2 = l2;
    return json_to_py(to_json(check_decay_envelope(tr, calibration_fraction)));
  }, py::arg("times"), py::arg("l2"), py::arg("calibration_fraction") = 0.1);

  m.def("save_checkpoint", &save_checkpoint, py::arg("u"), py::arg("path"));
  m.def("load_checkpoint", &load_checkpoint, py::arg("path"), py::arg("dealias_fraction") = 2.0 / 3.0);

  m.def("run_command", [](const std::string& command, const std::string& config_text,
                          const std::filesystem::path& out_dir, int workers) {
    const ExperimentConfig cfg = parse_config(config_text);
    RunManifest man;
    {
      py::gil_scoped_release release;
      man = run_command(command, cfg, out_dir, workers);
    }
    return json_to_py(man.to_json());
  }, py::arg("command"), py::arg("config_text"), py::arg("out_dir"), py::arg("workers") = 1);
  m.def("config_keys", &config_keys);
}
