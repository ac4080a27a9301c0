// Copyright 2026 The res-lru Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Python bindings. Units follow the C++ core: rad/s and seconds.

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "reslru/errors.hpp"
#include "reslru/lindblad.hpp"
#include "reslru/markov.hpp"
#include "reslru/optimizer.hpp"
#include "reslru/swt.hpp"

namespace py = pybind11;
using namespace reslru;

namespace {

py::dict trajectory_dict(const Trajectory& tr) {
  Eigen::MatrixXd pops(tr.times.size(), tr.dims.size());
  for (std::size_t k = 0; k < tr.times.size(); ++k) pops.row(k) = tr.populations[k].transpose();
  py::dict d;
  d["times"] = tr.times;
  d["populations"] = pops;  // rows: times, columns: m * n_r + l
  d["n_transmon"] = tr.dims.n_t;
  d["n_resonator"] = tr.dims.n_r;
  d["steps"] = tr.steps;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Readout-resonator leakage reduction: model, analytics, dynamics and leakage statistics";

  py::register_exception<NumericalError>(m, "NumericalError", PyExc_RuntimeError);

  py::class_<DeviceParams>(m, "DeviceParams")
      .def(py::init<>())
      .def_static("standard", &DeviceParams::standard)
      .def_readwrite("omega_q", &DeviceParams::omega_q)
      .def_readwrite("omega_r", &DeviceParams::omega_r)
      .def_readwrite("alpha", &DeviceParams::alpha)
      .def_readwrite("g", &DeviceParams::g)
      .def_readwrite("kappa", &DeviceParams::kappa)
      .def_readwrite("nbar", &DeviceParams::nbar)
      .def_readwrite("T1_q", &DeviceParams::T1_q)
      .def_readwrite("T2_q", &DeviceParams::T2_q)
      .def_readwrite("T2_r", &DeviceParams::T2_r)
      .def_readwrite("n_transmon", &DeviceParams::n_transmon)
      .def_readwrite("n_resonator", &DeviceParams::n_resonator)
      .def("validate", &DeviceParams::validate);

  py::class_<DrivePulse>(m, "DrivePulse")
      .def(py::init([](double Omega, double omega_d, double t_rise, double t_p, double phi) {
             DrivePulse d;
             d.Omega = Omega;
             d.omega_d = omega_d;
             d.t_rise = t_rise;
             d.t_p = t_p;
             d.phi = phi;
             return d;
           }),
           py::arg("Omega") = 0.0, py::arg("omega_d") = 0.0, py::arg("t_rise") = 30e-9, py::arg("t_p") = 60e-9,
           py::arg("phi") = 0.0)
      .def_readwrite("Omega", &DrivePulse::Omega)
      .def_readwrite("omega_d", &DrivePulse::omega_d)
      .def_readwrite("t_rise", &DrivePulse::t_rise)
      .def_readwrite("t_p", &DrivePulse::t_p)
      .def_readwrite("phi", &DrivePulse::phi);

  py::class_<CrossingComparison>(m, "CrossingComparison")
      .def_readonly("Omega", &CrossingComparison::Omega)
      .def_readonly("omega_d_exact", &CrossingComparison::omega_d_exact)
      .def_readonly("omega_d_order3", &CrossingComparison::omega_d_order3)
      .def_readonly("omega_d_lowest", &CrossingComparison::omega_d_lowest)
      .def_readonly("g_exact", &CrossingComparison::g_exact)
      .def_readonly("g_order3", &CrossingComparison::g_order3)
      .def_readonly("g_lowest", &CrossingComparison::g_lowest);

  m.def("compare_crossing", &compare_crossing, py::arg("params"), py::arg("Omega"),
        py::arg("scan_half_width") = kTwoPi * 60e6);
  m.def("g_tilde_lowest_order", &g_tilde_lowest_order, py::arg("params"), py::arg("Omega"));
  m.def(
      "critical_amplitude",
      [](const DeviceParams& p, double Omega_max) { return critical_amplitude(p, Omega_max); }, py::arg("params"),
      py::arg("Omega_max") = kTwoPi * 500e6);

  m.def(
      "run_lru",
      [](const DeviceParams& p, const DrivePulse& d, int level, double T_slot, const std::vector<double>& times) {
        const LruRun r = run_lru(p, d, level, T_slot, times);
        py::dict out = trajectory_dict(r.trajectory);
        out["p2_final"] = r.p2_final;
        return out;
      },
      py::arg("params"), py::arg("pulse"), py::arg("level"), py::arg("T_slot") = 440e-9,
      py::arg("times") = std::vector<double>{});
  m.def(
      "long_drive_run",
      [](const DeviceParams& p, double Omega, double omega_d, double T_slot, int level,
         const std::vector<double>& times) {
        return trajectory_dict(long_drive_run(p, Omega, omega_d, T_slot, 30e-9, level, times));
      },
      py::arg("params"), py::arg("Omega"), py::arg("omega_d"), py::arg("T_slot") = 440e-9, py::arg("level") = 2,
      py::arg("times") = std::vector<double>{});
  m.def(
      "effective_T1",
      [](const DeviceParams& p, const DrivePulse& d, double T_slot, bool always_on) {
        return effective_T1(p, d, T_slot, always_on ? Envelope::AlwaysOn : Envelope::Pulsed);
      },
      py::arg("params"), py::arg("pulse"), py::arg("T_slot") = 440e-9, py::arg("always_on") = false);
  m.def(
      "effective_T2",
      [](const DeviceParams& p, const DrivePulse& d, double T_slot) { return effective_T2(p, d, T_slot); },
      py::arg("params"), py::arg("pulse"), py::arg("T_slot") = 440e-9);
  m.def(
      "zz_sensitivity",
      [](const DeviceParams& p, const DrivePulse& d, const std::vector<double>& zetas, double T_slot) {
        std::vector<double> R;
        for (const ZZPoint& z : zz_sensitivity(p, d, zetas, T_slot)) R.push_back(z.R);
        return R;
      },
      py::arg("params"), py::arg("pulse"), py::arg("zetas"), py::arg("T_slot") = 440e-9);

  py::class_<MarkovRates>(m, "MarkovRates")
      .def(py::init([](double cl, double lc) { return MarkovRates{cl, lc, false}; }), py::arg("gamma_CL"),
           py::arg("gamma_LC"))
      .def_readwrite("gamma_CL", &MarkovRates::gamma_CL)
      .def_readwrite("gamma_LC", &MarkovRates::gamma_LC)
      .def_readonly("clamped", &MarkovRates::clamped);

  py::class_<LRUParams>(m, "LRUParams")
      .def(py::init([](double R, double L1_LRU, double pM22, double pM11) {
             return LRUParams{R, L1_LRU, pM22, pM11};
           }),
           py::arg("R") = 0.0, py::arg("L1_LRU") = 0.0, py::arg("pM22") = 1.0, py::arg("pM11") = 1.0)
      .def_readwrite("R", &LRUParams::R)
      .def_readwrite("L1_LRU", &LRUParams::L1_LRU)
      .def_readwrite("pM22", &LRUParams::pM22)
      .def_readwrite("pM11", &LRUParams::pM11);

  m.def("rates_from_physical", &rates_from_physical, py::arg("n_flux"), py::arg("L1"), py::arg("L2"),
        py::arg("t_c") = 800e-9, py::arg("T1") = 30e-6);
  m.def("pbar_curve", &pbar_curve, py::arg("rates"), py::arg("n_cycles"));
  m.def("lifetime", &lifetime, py::arg("rates"));
  m.def("steady_state", &steady_state, py::arg("rates"));
  m.def(
      "fit_pbar",
      [](const std::vector<double>& pbar) {
        const FitResult f = fit_pbar(pbar);
        py::dict d;
        d["gamma_CL"] = f.rates.gamma_CL;
        d["gamma_LC"] = f.rates.gamma_LC;
        d["clamped"] = f.rates.clamped;
        d["lifetime"] = f.lifetime;
        d["steady_state"] = f.steady_state;
        d["rss"] = f.rss;
        return d;
      },
      py::arg("pbar"));
  m.def(
      "surface17_layout",
      [] {
        py::list out;
        for (const QubitSpec& q : surface17_layout()) {
          py::dict d;
          d["name"] = q.name;
          d["role"] = q.role == QubitRole::Data ? "data" : "ancilla";
          d["n_flux"] = q.n_flux;
          d["leakage_prone"] = q.leakage_prone;
          out.append(d);
        }
        return out;
      });
  m.def(
      "monte_carlo_surface17",
      [](double L1, double L2, const LRUParams& lru, bool data_lru, bool ancilla_lru, int cycles, int runs,
         std::uint64_t seed, int threads) {
        MonteCarloOptions o;
        o.threads = threads;
        py::dict out;
        for (const auto& [name, tr] :
             monte_carlo_surface17(surface17_layout(), L1, L2, lru, data_lru, ancilla_lru, cycles, runs, seed, o))
          out[py::str(name)] = tr.pbar;
        return out;
      },
      py::arg("L1"), py::arg("L2"), py::arg("lru") = LRUParams{}, py::arg("data_lru") = false,
      py::arg("ancilla_lru") = false, py::arg("cycles") = 20, py::arg("runs") = 20000, py::arg("seed") = 1,
      py::arg("threads") = 1);
  m.def(
      "res_lru_channel",
      [](const LRUParams& lru, double t, double T1, double Tphi) {
        const QutritChannel ch = build_res_lru_channel(lru, t, T1, Tphi);
        py::dict d;
        d["superoperator"] = Eigen::MatrixXcd(ch.S);
        d["population_transfer"] = Eigen::MatrixXd(ch.population_transfer());
        d["choi_min_eigenvalue"] = ch.choi_min_eigenvalue();
        d["trace_preservation_error"] = ch.trace_preservation_error();
        return d;
      },
      py::arg("lru"), py::arg("t") = 100e-9, py::arg("T1") = 30e-6, py::arg("Tphi") = 60e-6);
}
