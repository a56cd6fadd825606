#include <array>
#include <string>
#include <tuple>
#include <vector>

#include <nlohmann/json.hpp>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "blochbeam/bloch.hpp"
#include "blochbeam/config.hpp"
#include "blochbeam/frame.hpp"
#include "blochbeam/levels.hpp"
#include "blochbeam/orbit.hpp"
#include "blochbeam/phases.hpp"
#include "blochbeam/pipeline.hpp"
#include "blochbeam/version.hpp"

namespace py = pybind11;

namespace {

using coeff_list = std::vector<std::tuple<std::array<int, 3>, double, double>>;

blochbeam::bloch_solver make_solver(const coeff_list& pot, double cutoff,
                                    int band_index) {
  std::vector<blochbeam::fourier_coeff> list;
  list.reserve(pot.size());
  for (const auto& [g, re, im] : pot) {
    blochbeam::fourier_coeff fc;
    fc.g = Eigen::Vector3i(g[0], g[1], g[2]);
    fc.v = blochbeam::cplx(re, im);
    list.push_back(fc);
  }
  return blochbeam::bloch_solver(blochbeam::lattice::cubic(),
                                 blochbeam::potential::from_list(list), cutoff,
                                 band_index);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Gaussian-beam construction for a Bloch electron in a weak constant "
      "magnetic field: band structure, cyclotron orbits, beam frames, "
      "geometric phases and magnetic levels.";
  m.attr("__version__") = blochbeam::version_string;

  m.def(
      "band_energy",
      [](const coeff_list& pot, double cutoff, int band_index,
         const blochbeam::Vec3& k) {
        return make_solver(pot, cutoff, band_index).energy(k);
      },
      py::arg("potential"), py::arg("cutoff"), py::arg("band_index"),
      py::arg("k"),
      "Energy of the configured band at Bloch momentum k (cubic lattice). "
      "`potential` is a list of ((g1, g2, g3), re, im) Fourier coefficients.");

  m.def(
      "band_state",
      [](const coeff_list& pot, double cutoff, int band_index,
         const blochbeam::Vec3& k) {
        const auto st = make_solver(pot, cutoff, band_index).solve(k);
        return py::make_tuple(st.E, st.gap, st.c);
      },
      py::arg("potential"), py::arg("cutoff"), py::arg("band_index"),
      py::arg("k"),
      "(E, gap, coefficients) of the gauge-fixed band state at k.");

  m.def(
      "band_derivs",
      [](const coeff_list& pot, double cutoff, int band_index,
         const blochbeam::Vec3& k) {
        const auto r = make_solver(pot, cutoff, band_index).rates(k);
        py::dict out;
        out["E"] = r.state.E;
        out["grad"] = r.grad;
        out["hess"] = r.hess;
        out["wr"] = r.wr;
        return out;
      },
      py::arg("potential"), py::arg("cutoff"), py::arg("band_index"),
      py::arg("k"),
      "Gradient, Hessian and interband rate of the band at k.");

  m.def(
      "trace_orbit",
      [](const coeff_list& pot, double cutoff, int band_index, double E0,
         double k3, double mu) {
        const auto solver = make_solver(pot, cutoff, band_index);
        blochbeam::orbit_params par;
        par.E0 = E0;
        par.k3 = k3;
        par.mu = mu;
        const auto orb = blochbeam::orbit_tracer(solver).trace(par);
        py::dict out;
        out["T"] = orb.T;
        out["S"] = orb.area;
        out["seed"] = std::array<double, 2>{orb.seed[0], orb.seed[1]};
        out["closure_error"] = orb.closure_error;
        out["samples"] = orb.J;
        return out;
      },
      py::arg("potential"), py::arg("cutoff"), py::arg("band_index"),
      py::arg("E0"), py::arg("k3") = 0.0, py::arg("mu") = 1.0,
      "Closed cyclotron orbit at energy E0: period, enclosed area, seed.");

  m.def(
      "magnetic_levels",
      [](const coeff_list& pot, double cutoff, int band_index, double E0,
         double k3, double mu, int n_min, int n_max) {
        const auto solver = make_solver(pot, cutoff, band_index);
        blochbeam::orbit_params par;
        par.E0 = E0;
        par.k3 = k3;
        par.mu = mu;
        const auto orb = blochbeam::orbit_tracer(solver).trace(par);
        const auto frame =
            blochbeam::frame_propagator(solver, orb).propagate();
        const auto pl =
            blochbeam::phase_accumulator(solver).compute(orb, frame);
        const auto levels = blochbeam::quantized_levels(pl, n_min, n_max);
        py::list out;
        for (const auto& lv : levels) {
          py::dict d;
          d["n"] = lv.n;
          d["eps_n"] = lv.eps;
          d["gamma"] = lv.gamma;
          d["theta_b"] = lv.theta_b;
          d["theta_rw"] = lv.theta_rw;
          d["N_M"] = lv.maslov;
          d["k3"] = lv.k3;
          out.append(d);
        }
        return out;
      },
      py::arg("potential"), py::arg("cutoff"), py::arg("band_index"),
      py::arg("E0"), py::arg("k3") = 0.0, py::arg("mu") = 1.0,
      py::arg("n_min") = 0, py::arg("n_max") = 5,
      "Quantized magnetic levels eps_n of the orbit at energy E0.");

  m.def(
      "run",
      [](const std::string& command, const std::string& config_json,
         const std::string& out_dir) {
        const auto cfg =
            blochbeam::parse_config_json(nlohmann::json::parse(config_json));
        return blochbeam::run_command(command, cfg, out_dir).dump();
      },
      py::arg("command"), py::arg("config_json"), py::arg("out_dir") = "out",
      "Run one pipeline command from a JSON configuration string; returns "
      "the JSON summary as a string and writes artifacts to out_dir.");
}
