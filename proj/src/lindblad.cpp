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

#include "reslru/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace reslru {

namespace {

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;

Dims dims_of(const DeviceParams& p) { return {p.n_transmon, p.n_resonator}; }

JumpOperator monomial(std::string name, const CMatrix& m) {
  JumpOperator j;
  j.name = std::move(name);
  const int n = static_cast<int>(m.rows());
  j.source.assign(n, -1);
  j.value.assign(n, 0.0);
  std::vector<int> used(n, 0);
  for (int i = 0; i < n; ++i)
    for (int c = 0; c < n; ++c) {
      if (m(i, c) == 0.0) continue;
      if (j.source[i] >= 0 || used[c]++)
        fail(ErrorCode::InvalidArgument, "jump operator " + j.name + " is not monomial");
      j.source[i] = c;
      j.value[i] = m(i, c);
    }
  return j;
}

void check_density(const DensityMatrix& rho, const Dims& d) {
  if (!(rho.dims == d) || rho.entries.rows() != d.size())
    fail(ErrorCode::DimensionMismatch, "density matrix dims do not match the device");
  const double tr = rho.entries.trace().real();
  if (std::fabs(tr - 1.0) > 1e-7) fail(ErrorCode::InvalidArgument, "density matrix trace != 1");
  if (rho.hermiticity_defect() > 1e-10)
    fail(ErrorCode::InvalidArgument, "density matrix is not hermitian");
}

}  // namespace

ThermalState thermal_resonator_state(double nbar, int n_r) {
  if (!(nbar >= 0.0)) fail(ErrorCode::InvalidArgument, "nbar must be non-negative");
  if (nbar >= 0.2) fail(ErrorCode::OutOfRegime, "two-level thermal state needs nbar < 0.2");
  if (n_r < 2) fail(ErrorCode::InvalidArgument, "resonator needs at least two levels");
  ThermalState s;
  s.nbar = nbar;
  s.matrix = CMatrix::Zero(n_r, n_r);
  const double p1 = nbar / (1.0 + 2.0 * nbar);
  s.matrix(0, 0) = 1.0 - p1;
  s.matrix(1, 1) = p1;
  return s;
}

double pulse_value(const DrivePulse& pulse, double t, Envelope env) {
  if (t < 0.0) return 0.0;
  const double tr = pulse.t_rise;
  auto rise = [&](double x) {
    const double s = std::sin(0.5 * kPi * x / tr);
    return pulse.Omega * s * s;
  };
  if (env == Envelope::AlwaysOn) return t < tr ? rise(t) : pulse.Omega;
  if (t >= pulse.t_p) return 0.0;
  if (t < tr) return rise(t);
  if (t > pulse.t_p - tr) return rise(pulse.t_p - t);
  return pulse.Omega;
}

JumpOperatorSet build_jump_operators(const DeviceParams& params) {
  const LadderOps ops = build_ladder_ops(params);
  const Dims d = dims_of(params);
  const CMatrix& a = ops.a.entries;
  const CMatrix& b = ops.b.entries;
  JumpOperatorSet set;
  auto add = [&](std::string name, double rate, const CMatrix& m) {
    JumpOperator j = monomial(std::move(name), std::sqrt(rate) * m);
    j.op = OperatorMatrix(d, std::sqrt(rate) * m, false);
    set.push_back(std::move(j));
  };
  add("resonator_decay", params.kappa, a);
  add("resonator_excitation", params.kappa * params.nbar / (1.0 + params.nbar), a.adjoint());
  const double tphi_r = params.Tphi_r();
  if (std::isfinite(tphi_r)) add("resonator_dephasing", 2.0 / tphi_r, a.adjoint() * a);
  add("transmon_decay", 1.0 / params.T1_q, b);
  const double tphi_q = params.Tphi_q();
  // Kept even at zero rate so the set has a fixed layout.
  add("transmon_dephasing", std::isfinite(tphi_q) ? 2.0 / tphi_q : 0.0, b.adjoint() * b);
  return set;
}

std::vector<double> Trajectory::label_population(int m, int l) const {
  const int idx = dims.index(m, l);
  std::vector<double> out;
  out.reserve(populations.size());
  for (const RVector& p : populations) out.push_back(p(idx));
  return out;
}

LindbladEngine::LindbladEngine(const DeviceParams& params, const DrivePulse& pulse, Envelope envelope,
                               IntegratorOptions options)
    : LindbladEngine(params, pulse, diagonalize_static(params, pulse.omega_d), envelope, options) {}

LindbladEngine::LindbladEngine(const DeviceParams& params, const DrivePulse& pulse,
                               const DressedFrame& frame, Envelope envelope, IntegratorOptions options)
    : params_(params), pulse_(pulse), envelope_(envelope), opt_(options), frame_(frame) {
  params_.validate();
  pulse_.validate();
  if (std::fabs(frame_.omega_d - pulse_.omega_d) > 1e-9 * std::fabs(pulse_.omega_d))
    fail(ErrorCode::InvalidArgument, "frame does not match the drive frequency");
  setup();
}

void LindbladEngine::setup() {
  const int n = params_.dim();
  drive_ = to_dressed_frame(build_drive_operator(params_, pulse_.Omega, pulse_.phi), frame_).entries;
  jumps_ = build_jump_operators(params_);
  gamma_ = RVector::Zero(n);
  for (const JumpOperator& j : jumps_)
    for (int i = 0; i < n; ++i)
      if (j.source[i] >= 0) gamma_(j.source[i]) += std::norm(j.value[i]);
  rho_s_.resize(n, n);
  x_.resize(n, n);
  dis_.resize(n, n);
  phase_.resize(n);
}

double LindbladEngine::next_boundary(double t) const {
  const double tr = pulse_.t_rise;
  std::vector<double> marks{tr};
  if (envelope_ == Envelope::Pulsed) {
    marks.push_back(pulse_.t_p - tr);
    marks.push_back(pulse_.t_p);
  }
  for (double m : marks)
    if (m > t * (1 + 1e-14) + 1e-18) return m;
  return std::numeric_limits<double>::infinity();
}

bool LindbladEngine::in_ramp(double t) const {
  const double tr = pulse_.t_rise;
  if (t < tr) return true;
  return envelope_ == Envelope::Pulsed && t >= pulse_.t_p - tr && t < pulse_.t_p;
}

// d(rho_I)/dt with rho_I = e^{iE(t-t_ref)} rho e^{-iE(t-t_ref)}.
void LindbladEngine::rhs(double t, double t_ref, double scale, const CMatrix& rho_i, CMatrix& out) {
  const int n = static_cast<int>(rho_i.rows());
  const double tau = t - t_ref;
  for (int i = 0; i < n; ++i) phase_[i] = std::polar(1.0, frame_.energies(i) * tau);
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) rho_s_(i, j) = std::conj(phase_[i]) * phase_[j] * rho_i(i, j);

  if (scale != 0.0) {
    x_.noalias() = drive_ * rho_s_;
    out = cdouble(0.0, -scale) * (x_ - x_.adjoint());
  } else {
    out.setZero();
  }
  for (const JumpOperator& k : jumps_) {
    for (int j = 0; j < n; ++j) {
      const int sj = k.source[j];
      if (sj < 0) continue;
      const cdouble vj = std::conj(k.value[j]);
      for (int i = 0; i < n; ++i) {
        const int si = k.source[i];
        if (si < 0) continue;
        out(i, j) += k.value[i] * vj * rho_s_(si, sj);
      }
    }
  }
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const cdouble v = out(i, j) - 0.5 * (gamma_(i) + gamma_(j)) * rho_s_(i, j);
      out(i, j) = phase_[i] * std::conj(phase_[j]) * v;
    }
}

void LindbladEngine::step_segment(CMatrix& y, double t0, double t1, double t_ref, bool ramp) {
  const int n = static_cast<int>(y.rows());
  const double hmax = ramp ? opt_.ramp_step_fraction * pulse_.t_rise : t1 - t0;
  const double Om = pulse_.Omega;
  auto scale = [&](double t) {
    if (Om == 0.0) return 0.0;
    // Sample inside the open segment so boundaries use the right piece.
    const double tc = std::clamp(t, t0 + 1e-6 * (t1 - t0), t1 - 1e-6 * (t1 - t0));
    return pulse_value(pulse_, tc, envelope_) / Om;
  };
  CMatrix k1(n, n), k2(n, n), k3(n, n), k4(n, n), k5(n, n), k6(n, n), k7(n, n), ys(n, n), yn(n, n);
  double h = last_h_ > 0.0 ? last_h_ : 1e-12;
  h = std::min({h, hmax, t1 - t0});
  double t = t0;
  rhs(t, t_ref, scale(t), y, k1);
  bool rejected = false;
  while (t < t1) {
    if (steps_ >= opt_.max_steps) fail(ErrorCode::StepFailure, "step budget exhausted");
    const double remaining = t1 - t;
    bool last = false;
    if (h >= remaining * (1 - 1e-12)) {
      h = remaining;
      last = true;
    }
    ys = y + h * a21 * k1;
    rhs(t + c2 * h, t_ref, scale(t + c2 * h), ys, k2);
    ys = y + h * (a31 * k1 + a32 * k2);
    rhs(t + c3 * h, t_ref, scale(t + c3 * h), ys, k3);
    ys = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
    rhs(t + c4 * h, t_ref, scale(t + c4 * h), ys, k4);
    ys = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
    rhs(t + c5 * h, t_ref, scale(t + c5 * h), ys, k5);
    ys = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
    rhs(t + h, t_ref, scale(t + h), ys, k6);
    yn = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    rhs(t + h, t_ref, scale(t + h), yn, k7);
    ys = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

    double acc = 0.0;
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i) {
        const double s = opt_.atol + opt_.rtol * std::max(std::abs(y(i, j)), std::abs(yn(i, j)));
        acc += std::norm(ys(i, j)) / (s * s);
      }
    const double err = std::sqrt(acc / (2.0 * n * n));
    if (!std::isfinite(err)) fail(ErrorCode::StepFailure, "non-finite error estimate");

    if (err <= 1.0) {
      t = last ? t1 : t + h;
      ++steps_;
      y = 0.5 * (yn + yn.adjoint());
      const double tr = y.trace().real();
      if (std::fabs(tr - 1.0) > opt_.trace_tolerance)
        fail(ErrorCode::TraceDrift, "trace drifted to " + std::to_string(tr));
      // FSAL: k7 was evaluated at yn; symmetrization changes it by O(eps).
      k1 = k7;
      double fac = err == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(err, -0.2), 0.2, 5.0);
      if (rejected) fac = std::min(fac, 1.0);
      if (!last) last_h_ = h;
      h = std::min(h * fac, hmax);
      if (!last) last_h_ = h;
      rejected = false;
    } else {
      h *= std::clamp(0.9 * std::pow(err, -0.2), 0.1, 1.0);
      rejected = true;
      if (h < 1e-10 * std::max(std::fabs(t), 1e-9) || h < 1e-22)
        fail(ErrorCode::StepFailure, "step size underflow");
    }
  }
}

DensityMatrix LindbladEngine::propagate(const DensityMatrix& rho, double t0, double t1) {
  const Dims d = dims_of(params_);
  if (!(rho.dims == d)) fail(ErrorCode::DimensionMismatch, "density matrix dims do not match");
  if (t1 < t0) fail(ErrorCode::InvalidArgument, "propagate backwards in time");
  const int n = d.size();
  CMatrix y = rho.entries;
  double t = t0;
  while (t < t1) {
    const double b = std::min(next_boundary(t), t1);
    step_segment(y, t, b, t, in_ramp(0.5 * (t + b)));
    // Back to the rotating frame at b; the next piece re-references there.
    for (int j = 0; j < n; ++j)
      for (int i = 0; i < n; ++i)
        y(i, j) *= std::polar(1.0, -(frame_.energies(i) - frame_.energies(j)) * (b - t));
    t = b;
  }
  return DensityMatrix(d, y, true);
}

Trajectory LindbladEngine::evolve(const DensityMatrix& rho0, double t_final,
                                  std::vector<double> sample_times, bool keep_states) {
  const Dims d = dims_of(params_);
  check_density(rho0, d);
  if (!(t_final >= 0.0)) fail(ErrorCode::InvalidArgument, "t_final must be non-negative");
  std::sort(sample_times.begin(), sample_times.end());
  for (double s : sample_times)
    if (s < 0.0 || s > t_final) fail(ErrorCode::InvalidArgument, "sample time outside [0, t_final]");
  if (sample_times.empty() || sample_times.back() < t_final) sample_times.push_back(t_final);

  Trajectory tr;
  tr.dims = d;
  const long steps0 = steps_;
  DensityMatrix rho = rho0;
  double t = 0.0;
  for (double s : sample_times) {
    if (s > t) rho = propagate(rho, t, s);
    t = s;
    tr.times.push_back(s);
    tr.populations.push_back(rho.entries.diagonal().real());
    if (keep_states) tr.states.push_back(rho);
  }
  if (!keep_states) tr.states.push_back(rho);  // final state is always kept
  tr.steps = steps_ - steps0;
  return tr;
}

DensityMatrix transmon_product_state(const DeviceParams& params, const CMatrix& transmon_rho) {
  const Dims d = dims_of(params);
  if (transmon_rho.rows() > d.n_t || transmon_rho.rows() != transmon_rho.cols())
    fail(ErrorCode::DimensionMismatch, "transmon state larger than truncation");
  const CMatrix th = thermal_resonator_state(params.nbar, d.n_r).matrix;
  CMatrix rho = CMatrix::Zero(d.size(), d.size());
  const int k = static_cast<int>(transmon_rho.rows());
  for (int m = 0; m < k; ++m)
    for (int mp = 0; mp < k; ++mp)
      for (int l = 0; l < d.n_r; ++l)
        for (int lp = 0; lp < d.n_r; ++lp)
          rho(d.index(m, l), d.index(mp, lp)) = transmon_rho(m, mp) * th(l, lp);
  return DensityMatrix(d, rho, true);
}

DensityMatrix level_state(const DeviceParams& params, int level) {
  if (level < 0 || level >= params.n_transmon)
    fail(ErrorCode::InvalidArgument, "initial level outside truncation");
  CMatrix t = CMatrix::Zero(level + 1, level + 1);
  t(level, level) = 1.0;
  return transmon_product_state(params, t);
}

DensityMatrix plus_state(const DeviceParams& params) {
  CMatrix t = CMatrix::Constant(2, 2, 0.5);
  return transmon_product_state(params, t);
}

CMatrix transmon_reduced(const DensityMatrix& rho) {
  const Dims d = rho.dims;
  CMatrix r = CMatrix::Zero(d.n_t, d.n_t);
  for (int m = 0; m < d.n_t; ++m)
    for (int mp = 0; mp < d.n_t; ++mp)
      for (int l = 0; l < d.n_r; ++l) r(m, mp) += rho.entries(d.index(m, l), d.index(mp, l));
  return r;
}

double leakage_population(const DensityMatrix& rho) { return transmon_reduced(rho)(2, 2).real(); }

Trajectory evolve(const DeviceParams& params, const DrivePulse& pulse, const DensityMatrix& rho0,
                  double t_final, const std::vector<double>& sample_times, Envelope envelope,
                  IntegratorOptions options) {
  LindbladEngine engine(params, pulse, envelope, options);
  return engine.evolve(rho0, t_final, sample_times, false);
}

namespace {

DensityMatrix final_state(const DeviceParams& params, const DrivePulse& pulse, const DensityMatrix& rho0,
                          double T_slot, Envelope env, IntegratorOptions options) {
  if (env == Envelope::Pulsed && pulse.t_p > T_slot * (1 + 1e-12))
    fail(ErrorCode::PulseTooLong, "t_p exceeds T_slot");
  LindbladEngine engine(params, pulse, env, options);
  return engine.evolve(rho0, T_slot, {}, false).states.back();
}

}  // namespace

LruRun run_lru(const DeviceParams& params, const DrivePulse& pulse, int initial_level, double T_slot,
               const std::vector<double>& sample_times, IntegratorOptions options) {
  if (initial_level < 0 || initial_level > 2)
    fail(ErrorCode::InvalidArgument, "initial level must be 0, 1 or 2");
  if (pulse.t_p > T_slot * (1 + 1e-12)) fail(ErrorCode::PulseTooLong, "t_p exceeds T_slot");
  LindbladEngine engine(params, pulse, Envelope::Pulsed, options);
  LruRun run;
  run.trajectory = engine.evolve(level_state(params, initial_level), T_slot, sample_times, false);
  run.final_state = run.trajectory.states.back();
  run.p2_final = leakage_population(run.final_state);
  return run;
}

double T1_from_population(double p1, double T_slot) {
  if (!(p1 > 0.0)) fail(ErrorCode::NonPositivePopulation, "p1 is not positive");
  if (p1 >= 1.0) return std::numeric_limits<double>::infinity();
  return -T_slot / std::log(p1);
}

double T2_from_coherence(double coherence, double T_slot) {
  if (!(coherence > 0.0)) fail(ErrorCode::NonPositiveCoherence, "coherence is not positive");
  if (2.0 * coherence >= 1.0) return std::numeric_limits<double>::infinity();
  return -T_slot / std::log(2.0 * coherence);
}

std::optional<double> T1up_from_population(double p1, double T_slot) {
  // Below roundoff of the propagated populations there is no signal.
  if (!(p1 > 1e-13)) return std::nullopt;
  return -T_slot / std::log1p(-p1);
}

double effective_T1(const DeviceParams& params, const DrivePulse& pulse, double T_slot, Envelope envelope,
                    IntegratorOptions options) {
  const DensityMatrix rho = final_state(params, pulse, level_state(params, 1), T_slot, envelope, options);
  return T1_from_population(transmon_reduced(rho)(1, 1).real(), T_slot);
}

double effective_T2(const DeviceParams& params, const DrivePulse& pulse, double T_slot, Envelope envelope,
                    IntegratorOptions options) {
  const DensityMatrix rho = final_state(params, pulse, plus_state(params), T_slot, envelope, options);
  return T2_from_coherence(std::abs(transmon_reduced(rho)(0, 1)), T_slot);
}

std::optional<double> excitation_time(const DeviceParams& params, const DrivePulse& pulse, double T_slot,
                                      Envelope envelope, IntegratorOptions options) {
  const DensityMatrix rho = final_state(params, pulse, level_state(params, 0), T_slot, envelope, options);
  return T1up_from_population(transmon_reduced(rho)(1, 1).real(), T_slot);
}

std::vector<ZZPoint> zz_sensitivity(const DeviceParams& params, const DrivePulse& pulse,
                                    const std::vector<double>& zetas, double T_slot,
                                    IntegratorOptions options) {
  std::vector<ZZPoint> out;
  out.reserve(zetas.size());
  for (double z : zetas) {
    DeviceParams p = params;
    p.omega_q += z;
    out.push_back({z, 1.0 - run_lru(p, pulse, 2, T_slot, {}, options).p2_final});
  }
  return out;
}

Trajectory long_drive_run(const DeviceParams& params, double Omega, double omega_d, double T_slot,
                          double t_rise, int initial_level, const std::vector<double>& sample_times,
                          IntegratorOptions options) {
  DrivePulse pulse;
  pulse.Omega = Omega;
  pulse.omega_d = omega_d;
  pulse.t_rise = t_rise;
  pulse.t_p = std::max(T_slot, 2.0 * t_rise);
  LindbladEngine engine(params, pulse, Envelope::AlwaysOn, options);
  return engine.evolve(level_state(params, initial_level), T_slot, sample_times, false);
}

}  // namespace reslru
