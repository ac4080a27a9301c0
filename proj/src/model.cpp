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

#include "reslru/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "json.hpp"
#include "reslru/numerics.hpp"

namespace reslru {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::LabelAmbiguity: return "LabelAmbiguity";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::NoCrossingInRange: return "NoCrossingInRange";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::OutOfRegime: return "OutOfRegime";
    case ErrorCode::StepFailure: return "StepFailure";
    case ErrorCode::TraceDrift: return "TraceDrift";
    case ErrorCode::PulseTooLong: return "PulseTooLong";
    case ErrorCode::NonPositivePopulation: return "NonPositivePopulation";
    case ErrorCode::NonPositiveCoherence: return "NonPositiveCoherence";
    case ErrorCode::NoRoot: return "NoRoot";
    case ErrorCode::Overdamped: return "Overdamped";
    case ErrorCode::NoCandidate: return "NoCandidate";
    case ErrorCode::BudgetExhausted: return "BudgetExhausted";
    case ErrorCode::RateOverflow: return "RateOverflow";
    case ErrorCode::ZeroSeepage: return "ZeroSeepage";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::InvalidRates: return "InvalidRates";
    case ErrorCode::FitDiverged: return "FitDiverged";
  }
  return "Unknown";
}

namespace {

double dephasing_time(double T1, double T2) {
  const double rate = 1.0 / T2 - 1.0 / (2.0 * T1);
  // T2 = 2 T1 up to rounding means no pure dephasing.
  if (rate <= 1e-12 / T2) return std::numeric_limits<double>::infinity();
  return 1.0 / rate;
}

}  // namespace

double DeviceParams::Tphi_q() const { return dephasing_time(T1_q, T2_q); }

double DeviceParams::Tphi_r() const { return dephasing_time(1.0 / kappa, T2_r); }

void DeviceParams::validate() const {
  auto bad = [](const std::string& m) { fail(ErrorCode::InvalidArgument, m); };
  if (!(omega_q > 0) || !(omega_r > 0)) bad("frequencies must be positive");
  if (!(alpha < 0)) bad("anharmonicity must be negative");
  if (!(g >= 0)) bad("coupling g must be non-negative");
  if (!(kappa > 0)) bad("kappa must be positive");
  if (!(nbar >= 0)) bad("nbar must be non-negative");
  if (!(T1_q > 0) || !(T2_q > 0) || !(T2_r > 0)) bad("coherence times must be positive");
  if (n_transmon < 3) bad("n_transmon must be at least 3");
  if (n_resonator < 2) bad("n_resonator must be at least 2");
  if (T2_q > 2.0 * T1_q * (1 + 1e-12)) bad("T2_q exceeds 2 T1_q");
  if (T2_r > 2.0 / kappa * (1 + 1e-12)) bad("T2_r exceeds 2/kappa");
}

DeviceParams DeviceParams::standard() {
  DeviceParams p;
  p.omega_q = hz_to_rad(6.7e9);
  p.omega_r = hz_to_rad(7.8e9);
  p.alpha = hz_to_rad(-300e6);
  p.g = hz_to_rad(135e6);
  p.kappa = hz_to_rad(10e6);
  p.nbar = 0.005;
  p.T1_q = 30e-6;
  p.T2_q = 30e-6;
  // T2_r = 32 ns is 2 T1 of the resonator (no pure dephasing).
  p.T2_r = 2.0 / p.kappa;
  p.n_transmon = 6;
  p.n_resonator = 3;
  return p;
}

void DrivePulse::validate() const {
  if (!(Omega >= 0)) fail(ErrorCode::InvalidArgument, "Omega must be non-negative");
  if (!(t_rise >= 0)) fail(ErrorCode::InvalidArgument, "t_rise must be non-negative");
  if (t_p < 2.0 * t_rise * (1 - 1e-12))
    fail(ErrorCode::InvalidArgument, "t_p must be at least 2 t_rise");
}

OperatorMatrix OperatorMatrix::zero(Dims d) {
  return {d, CMatrix::Zero(d.size(), d.size()), true};
}

OperatorMatrix OperatorMatrix::identity(Dims d) {
  return {d, CMatrix::Identity(d.size(), d.size()), true};
}

OperatorMatrix OperatorMatrix::adjoint() const {
  return {dims, entries.adjoint(), hermitian};
}

double OperatorMatrix::hermiticity_defect() const {
  if (entries.size() == 0) return 0.0;
  return (entries - entries.adjoint()).cwiseAbs().maxCoeff();
}

std::string to_json(const OperatorMatrix& op) {
  nlohmann::json j;
  j["dims"] = {op.dims.n_t, op.dims.n_r};
  j["hermitian"] = op.hermitian;
  std::vector<double> data;
  data.reserve(2 * op.entries.size());
  for (int i = 0; i < op.entries.rows(); ++i)
    for (int k = 0; k < op.entries.cols(); ++k) {
      data.push_back(op.entries(i, k).real());
      data.push_back(op.entries(i, k).imag());
    }
  j["data"] = data;
  return j.dump();
}

OperatorMatrix operator_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  Dims d{j.at("dims").at(0).get<int>(), j.at("dims").at(1).get<int>()};
  const auto data = j.at("data").get<std::vector<double>>();
  const int n = d.size();
  if (static_cast<int>(data.size()) != 2 * n * n)
    fail(ErrorCode::DimensionMismatch, "matrix data length does not match dims");
  CMatrix m(n, n);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k) m(i, k) = {data[2 * (i * n + k)], data[2 * (i * n + k) + 1]};
  return {d, m, j.value("hermitian", false)};
}

CMatrix ladder_matrix(int n) {
  CMatrix a = CMatrix::Zero(n, n);
  for (int k = 1; k < n; ++k) a(k - 1, k) = std::sqrt(static_cast<double>(k));
  return a;
}

namespace {

CMatrix kron(const CMatrix& A, const CMatrix& B) {
  CMatrix out(A.rows() * B.rows(), A.cols() * B.cols());
  for (int i = 0; i < A.rows(); ++i)
    for (int j = 0; j < A.cols(); ++j)
      out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
  return out;
}

Dims dims_of(const DeviceParams& p) { return {p.n_transmon, p.n_resonator}; }

}  // namespace

LadderOps build_ladder_ops(const DeviceParams& params) {
  const Dims d = dims_of(params);
  const CMatrix It = CMatrix::Identity(d.n_t, d.n_t);
  const CMatrix Ir = CMatrix::Identity(d.n_r, d.n_r);
  return {{d, kron(It, ladder_matrix(d.n_r)), false},
          {d, kron(ladder_matrix(d.n_t), Ir), false}};
}

OperatorMatrix build_static_hamiltonian(const DeviceParams& params, double omega_d) {
  const Dims d = dims_of(params);
  const double dr = delta_r(params, omega_d);
  const double dq = delta_q(params, omega_d);
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  for (int m = 0; m < d.n_t; ++m)
    for (int l = 0; l < d.n_r; ++l)
      H(d.index(m, l), d.index(m, l)) = l * dr + m * dq + 0.5 * params.alpha * m * (m - 1);
  // g (a b^dagger + a^dagger b)
  for (int m = 0; m + 1 < d.n_t; ++m)
    for (int l = 1; l < d.n_r; ++l) {
      const double c = params.g * std::sqrt(static_cast<double>(l) * (m + 1));
      H(d.index(m + 1, l - 1), d.index(m, l)) = c;
      H(d.index(m, l), d.index(m + 1, l - 1)) = c;
    }
  return {d, H, true};
}

OperatorMatrix build_drive_operator(const DeviceParams& params, double Omega, double phi) {
  const Dims d = dims_of(params);
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  const cdouble e = std::polar(1.0, phi);
  for (int m = 0; m + 1 < d.n_t; ++m)
    for (int l = 0; l < d.n_r; ++l) {
      const double c = 0.5 * Omega * std::sqrt(static_cast<double>(m + 1));
      H(d.index(m, l), d.index(m + 1, l)) = c * e;
      H(d.index(m + 1, l), d.index(m, l)) = c * std::conj(e);
    }
  return {d, H, true};
}

OperatorMatrix build_hamiltonian(const DeviceParams& params, const DrivePulse& drive,
                                 double amplitude_scale) {
  OperatorMatrix H = build_static_hamiltonian(params, drive.omega_d);
  if (amplitude_scale != 0.0 && drive.Omega != 0.0)
    H.entries += build_drive_operator(params, amplitude_scale * drive.Omega, drive.phi).entries;
  return H;
}

DressedFrame diagonalize_static(const DeviceParams& params, double omega_d) {
  const Dims d = dims_of(params);
  const int n = d.size();
  const OperatorMatrix H = build_static_hamiltonian(params, omega_d);

  DressedFrame frame;
  frame.omega_d = omega_d;
  frame.energies = RVector::Zero(n);
  CMatrix U = CMatrix::Zero(n, n);
  double min_overlap = 1.0;

  const int max_sector = (d.n_t - 1) + (d.n_r - 1);
  for (int N = 0; N <= max_sector; ++N) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (d.transmon(i) + d.resonator(i) == N) idx.push_back(i);
    const int s = static_cast<int>(idx.size());
    CMatrix block(s, s);
    for (int i = 0; i < s; ++i)
      for (int j = 0; j < s; ++j) block(i, j) = H.entries(idx[i], idx[j]);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(block);
    const CMatrix& V = es.eigenvectors();
    const RVector& w = es.eigenvalues();  // ascending

    // Greedy maximal-overlap assignment; eigenvectors scanned in energy
    // order with strict comparison so ties go to the lower energy.
    std::vector<bool> vec_used(s, false), lab_used(s, false);
    for (int step = 0; step < s; ++step) {
      double best = -1.0;
      int bv = -1, bl = -1;
      for (int v = 0; v < s; ++v) {
        if (vec_used[v]) continue;
        for (int l = 0; l < s; ++l) {
          if (lab_used[l]) continue;
          const double ov = std::norm(V(l, v));
          if (ov > best) {
            best = ov;
            bv = v;
            bl = l;
          }
        }
      }
      if (best < 0.25) {
        std::ostringstream os;
        os << "dressed state overlap " << best << " below 0.25 for bare label (m,l)=("
           << d.transmon(idx[bl]) << "," << d.resonator(idx[bl]) << ")";
        fail(ErrorCode::LabelAmbiguity, os.str());
      }
      min_overlap = std::min(min_overlap, best);
      vec_used[bv] = lab_used[bl] = true;
      CVector col = V.col(bv);
      const cdouble c = col(bl);
      col *= std::abs(c) / c;  // labeled component real and positive
      for (int i = 0; i < s; ++i) U(idx[i], idx[bl]) = col(i);
      frame.energies(idx[bl]) = w(bv);
    }
  }
  frame.unitary = {d, U, false};
  frame.min_overlap = min_overlap;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return frame.energies(a) < frame.energies(b); });
  frame.labels = order;
  return frame;
}

DressedFrame reframe(const DressedFrame& frame, double omega_d) {
  DressedFrame out = frame;
  const Dims d = frame.unitary.dims;
  for (int i = 0; i < d.size(); ++i)
    out.energies(i) -= (omega_d - frame.omega_d) * (d.transmon(i) + d.resonator(i));
  out.omega_d = omega_d;
  std::stable_sort(out.labels.begin(), out.labels.end(),
                   [&](int a, int b) { return out.energies(a) < out.energies(b); });
  return out;
}

OperatorMatrix to_dressed_frame(const OperatorMatrix& op, const DressedFrame& frame) {
  if (!(op.dims == frame.unitary.dims))
    fail(ErrorCode::DimensionMismatch, "operator and frame dimensions differ");
  const CMatrix& U = frame.unitary.entries;
  return {op.dims, U.adjoint() * op.entries * U, op.hermitian};
}

OperatorMatrix from_dressed_frame(const OperatorMatrix& op, const DressedFrame& frame) {
  if (!(op.dims == frame.unitary.dims))
    fail(ErrorCode::DimensionMismatch, "operator and frame dimensions differ");
  const CMatrix& U = frame.unitary.entries;
  return {op.dims, U * op.entries * U.adjoint(), op.hermitian};
}

FrequencyScan default_crossing_scan(const DeviceParams& params) {
  return crossing_scan_around(bare_crossing_frequency(params));
}

FrequencyScan crossing_scan_around(double center, double half_width, int samples) {
  FrequencyScan s;
  s.lo = center - half_width;
  s.hi = center + half_width;
  s.samples = samples;
  return s;
}

double crossing_gap(const DeviceParams& params, const DressedFrame& frame,
                    const CMatrix& drive_dressed, double omega_d) {
  const Dims d{params.n_transmon, params.n_resonator};
  const int n = d.size();
  CMatrix H = drive_dressed;
  for (int i = 0; i < n; ++i)
    H(i, i) += frame.energies(i) - (omega_d - frame.omega_d) * (d.transmon(i) + d.resonator(i));
  Eigen::SelfAdjointEigenSolver<CMatrix> es(H);
  const int i20 = d.index(2, 0), i01 = d.index(0, 1);
  int first = -1, second = -1;
  double w1 = -1.0, w2 = -1.0;
  for (int k = 0; k < n; ++k) {
    const double w = std::norm(es.eigenvectors()(i20, k)) + std::norm(es.eigenvectors()(i01, k));
    if (w > w1) {
      second = first;
      w2 = w1;
      first = k;
      w1 = w;
    } else if (w > w2) {
      second = k;
      w2 = w;
    }
  }
  if (w2 < 0.25)
    fail(ErrorCode::LabelAmbiguity, "|2,0>/|0,1> weight spread over more than two eigenstates");
  return std::fabs(es.eigenvalues()(first) - es.eigenvalues()(second));
}

AvoidedCrossing find_avoided_crossing_exact(const DeviceParams& params, double Omega,
                                            const FrequencyScan& scan, double phi) {
  if (scan.samples < 3 || !(scan.hi > scan.lo))
    fail(ErrorCode::InvalidArgument, "scan needs at least 3 samples on a non-empty interval");
  const DressedFrame frame = diagonalize_static(params, scan.lo);
  const CMatrix drive = to_dressed_frame(build_drive_operator(params, Omega, phi), frame).entries;

  AvoidedCrossing out;
  out.gap_curve.reserve(scan.samples);
  int best = 0;
  for (int k = 0; k < scan.samples; ++k) {
    const double w = scan.lo + (scan.hi - scan.lo) * k / (scan.samples - 1);
    const double gap = crossing_gap(params, frame, drive, w);
    out.gap_curve.emplace_back(w, gap);
    if (gap < out.gap_curve[best].second) best = k;
  }
  if (best == 0 || best == scan.samples - 1)
    fail(ErrorCode::NoCrossingInRange, "gap is minimal at the edge of the scan interval");
  const double lo = out.gap_curve[best - 1].first;
  const double hi = out.gap_curve[best + 1].first;
  const auto r = minimize_bounded(
      [&](double w) { return crossing_gap(params, frame, drive, w); }, lo, hi, scan.tolerance);
  if (r.fx <= out.gap_curve[best].second) {
    out.omega_d_star = r.x;
    out.g_tilde = 0.5 * r.fx;
  } else {
    out.omega_d_star = out.gap_curve[best].first;
    out.g_tilde = 0.5 * out.gap_curve[best].second;
  }
  // No path of nonzero elements between the two states: a true crossing.
  const Dims d{params.n_transmon, params.n_resonator};
  const int n = d.size();
  const double cut = 1e-12 * std::max(drive.cwiseAbs().maxCoeff(), 1.0);
  std::vector<char> seen(n, 0);
  std::vector<int> stack{d.index(2, 0)};
  seen[stack.back()] = 1;
  while (!stack.empty()) {
    const int i = stack.back();
    stack.pop_back();
    for (int j = 0; j < n; ++j)
      if (!seen[j] && std::abs(drive(i, j)) > cut) {
        seen[j] = 1;
        stack.push_back(j);
      }
  }
  out.uncoupled = !seen[d.index(0, 1)];
  if (out.uncoupled) out.g_tilde = 0.0;
  return out;
}

ConvergenceReport crossing_truncation_check(const DeviceParams& params, double Omega,
                                            const FrequencyScan& scan, int extra_transmon,
                                            int extra_resonator) {
  ConvergenceReport rep;
  rep.base = find_avoided_crossing_exact(params, Omega, scan);
  DeviceParams big = params;
  big.n_transmon += extra_transmon;
  big.n_resonator += extra_resonator;
  rep.enlarged = find_avoided_crossing_exact(big, Omega, scan);
  rep.omega_d_star_drift = std::fabs(rep.enlarged.omega_d_star - rep.base.omega_d_star);
  rep.g_tilde_drift = std::fabs(rep.enlarged.g_tilde - rep.base.g_tilde);
  return rep;
}

}  // namespace reslru
