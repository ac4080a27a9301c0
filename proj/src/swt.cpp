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

#include "reslru/swt.hpp"

#include <cmath>
#include <sstream>

#include "reslru/numerics.hpp"

namespace reslru {

CMatrix block_diagonal_part(const CMatrix& X, const BlockMap& blocks) {
  CMatrix out = CMatrix::Zero(X.rows(), X.cols());
  for (int i = 0; i < X.rows(); ++i)
    for (int j = 0; j < X.cols(); ++j)
      if (blocks[i] == blocks[j]) out(i, j) = X(i, j);
  return out;
}

CMatrix block_off_diagonal_part(const CMatrix& X, const BlockMap& blocks) {
  return X - block_diagonal_part(X, blocks);
}

CMatrix solve_commutator_equation(const RVector& h0, const CMatrix& X, const BlockMap& blocks) {
  const int n = static_cast<int>(h0.size());
  if (X.rows() != n || X.cols() != n || static_cast<int>(blocks.size()) != n)
    fail(ErrorCode::DimensionMismatch, "commutator equation operands differ in size");
  const double scale = std::max(h0.cwiseAbs().maxCoeff(), 1e-300);
  CMatrix S = CMatrix::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      if (blocks[i] == blocks[j]) continue;
      const double d = h0(i) - h0(j);
      if (std::fabs(d) < 1e-12 * scale) {
        if (X(i, j) == cdouble(0.0)) continue;
        fail(ErrorCode::DegenerateDenominator, "degenerate levels in different blocks");
      }
      S(i, j) = X(i, j) / d;
    }
  return S;
}

SwtSeries schrieffer_wolff_series(const RVector& h0, const CMatrix& V, const BlockMap& blocks) {
  auto D = [&](const CMatrix& X) { return block_diagonal_part(X, blocks); };
  auto OD = [&](const CMatrix& X) { return block_off_diagonal_part(X, blocks); };
  auto c = [](const CMatrix& A, const CMatrix& B) { return commutator(A, B); };

  SwtSeries s;
  s.S1 = solve_commutator_equation(h0, V, blocks);
  const CMatrix S1V = c(s.S1, V);
  s.S2 = solve_commutator_equation(h0, 0.5 * OD(S1V), blocks);
  const CMatrix S2V = c(s.S2, V);
  const CMatrix rhs3 = 0.5 * OD(S2V) + OD(c(s.S1, D(S1V))) / 3.0 + OD(c(s.S1, OD(S1V))) / 12.0;
  s.S3 = solve_commutator_equation(h0, rhs3, blocks);

  CMatrix H = h0.cast<cdouble>().asDiagonal();
  H += 0.5 * D(S1V);
  H += 0.5 * D(S2V) + D(c(s.S1, OD(S1V))) / 12.0;
  // Direct expansion of e^S H e^-S at fourth order. The [S2,[S1,V]_OD]_D
  // weight is 1/12; with -1/6 the block-diagonal remainder is only O(eps^4)
  // whenever S2 is non-zero.
  H += 0.5 * D(c(s.S3, V)) - D(c(s.S1, OD(c(s.S1, D(S1V))))) / 24.0 +
       D(c(s.S2, OD(S1V))) / 12.0 + D(c(s.S1, OD(S2V))) / 12.0;
  s.H_prime = H;
  return s;
}

// ---------------------------------------------------------------------------

namespace {

constexpr double kDenominatorFloor = kTwoPi * 1e6;
constexpr double kDetuningFloor = kTwoPi * 10e6;

double checked(double x, const char* what) {
  if (std::fabs(x) < kDenominatorFloor) {
    std::ostringstream os;
    os << what << " = 2pi*" << rad_to_hz(x) << " Hz is below the 1 MHz guard";
    fail(ErrorCode::DegenerateDenominator, os.str());
  }
  return x;
}

double sq(int k) { return k > 0 ? std::sqrt(static_cast<double>(k)) : 0.0; }

// First-order dressed transmon energy of level m (resonator empty).
double dressed_level(const DeviceParams& p, double omega_d, int m) {
  const double dq = delta_q(p, omega_d);
  double e = m * dq + 0.5 * p.alpha * m * (m - 1);
  if (m > 0) e += p.g * p.g * m / checked(p.Delta_m(m - 1), "Delta_{m-1}");
  return e;
}

// Dispersive pull of the resonator frequency for transmon level m.
double dispersive_shift(const DeviceParams& p, int m) {
  return -p.g * p.g * p.Delta_m(-1) /
         (checked(p.Delta_m(m), "Delta_m") * checked(p.Delta_m(m - 1), "Delta_{m-1}"));
}

CMatrix on_transmon(const CMatrix& T, int n_r) {
  const int n_t = static_cast<int>(T.rows());
  CMatrix out = CMatrix::Zero(n_t * n_r, n_t * n_r);
  for (int m = 0; m < n_t; ++m)
    for (int k = 0; k < n_t; ++k)
      if (T(m, k) != cdouble(0.0))
        for (int l = 0; l < n_r; ++l) out(m * n_r + l, k * n_r + l) = T(m, k);
  return out;
}

// Closed-form coefficient helper bound to one drive frequency.
struct Coeffs {
  const DeviceParams& p;
  Detunings det;
  double Omega;

  Coeffs(const DeviceParams& params, double Om, double wd) : p(params), det(params, wd), Omega(Om) {}

  double d(int m) const { return checked(det.delta_q_tilde_m(m), "delta~_m"); }
  // dd_m / d_m and dd_m / d_{m-1}, written without dividing by d_{-1}.
  double dd_over_d(int m) const { return (m + 1) * d(m - 1) / d(m) - m; }
  double dd_over_dprev(int m) const { return (m + 1) - (m > 0 ? m * d(m) / d(m - 1) : 0.0); }
  double gt(int m) const { return m >= 0 ? g_tilde_m(p, Omega, m) : 0.0; }
  double gp(int m) const { return m >= 0 ? g_prime_m(p, Omega, m) : 0.0; }

  double s1(int m) const { return -0.5 * Omega * sq(m + 1) / d(m); }
  double s2(int m) const {
    return Omega * Omega / 8.0 * sq(m + 1) * sq(m + 2) / checked(d(m) + d(m + 1), "delta_m+delta_{m+1}") *
           (1.0 / d(m) - 1.0 / d(m + 1));
  }
  // Coefficient of e^{i phi}|m><m+1| in S'_3 (anti-hermitian completion
  // added by the caller).
  double s3_single(int m) const {
    const double O3 = Omega * Omega * Omega;
    double t = sq(m + 1) / std::pow(d(m), 3) * (dd_over_d(m + 1) - dd_over_dprev(m)) / 12.0;
    double u = (m + 2) * sq(m + 1) * (d(m) + 4 * d(m + 1)) / (d(m + 1) * (d(m) + d(m + 1))) *
               (1.0 / d(m) - 1.0 / d(m + 1));
    if (m > 0)
      u -= sq(m + 1) * m * (4 * d(m - 1) + d(m)) / (d(m - 1) * (d(m - 1) + d(m))) *
           (1.0 / d(m - 1) - 1.0 / d(m));
    t += u / (96.0 * d(m));
    return -O3 * t;
  }
  double s3_triple(int m) const {
    const double O3 = Omega * Omega * Omega;
    const double a = d(m), b = d(m + 1), c = d(m + 2);
    const double bracket = (3 * c - b - a) / (c * (a + b)) * (1.0 / a - 1.0 / b) -
                           (3 * a - b - c) / (a * (b + c)) * (1.0 / b - 1.0 / c);
    return -O3 / 96.0 * sq(m + 1) * sq(m + 2) * sq(m + 3) / checked(a + b + c, "delta sum") * bracket;
  }

  double level(int m) const {
    const double O2 = Omega * Omega, O4 = O2 * O2;
    double x = dressed_level(p, det.omega_d, m);
    if (Omega == 0.0) return x;
    x += 0.25 * O2 * ((m > 0 ? m / d(m - 1) : 0.0) - (m + 1) / d(m));
    double q = (m + 1) / std::pow(d(m), 3) * (dd_over_d(m + 1) - dd_over_dprev(m));
    if (m > 0) q -= m / std::pow(d(m - 1), 3) * (dd_over_d(m) - dd_over_dprev(m - 1));
    x -= O4 / 32.0 * q;
    double r = (m + 2) * (m + 1) * (d(m) + 5 * d(m + 1)) / (d(m + 1) * (d(m) + d(m + 1))) *
               (1.0 / d(m) - 1.0 / d(m + 1));
    if (m > 0)
      r -= (m + 1) * m * (5 * d(m - 1) + d(m)) / (d(m - 1) * (d(m - 1) + d(m))) *
           (1.0 / d(m - 1) - 1.0 / d(m));
    r /= d(m);
    if (m > 0) {
      double r2 = (m + 1) * m * (d(m - 1) + 5 * d(m)) / (d(m) * (d(m - 1) + d(m))) *
                  (1.0 / d(m - 1) - 1.0 / d(m));
      if (m > 1)
        r2 -= m * (m - 1) * (5 * d(m - 2) + d(m - 1)) / (d(m - 2) * (d(m - 2) + d(m - 1))) *
              (1.0 / d(m - 2) - 1.0 / d(m - 1));
      r -= r2 / d(m - 1);
    }
    x -= O4 / 192.0 * r;
    double v = (m + 2) * (m + 1) / (d(m) + d(m + 1)) * std::pow(1.0 / d(m) - 1.0 / d(m + 1), 2);
    if (m > 1)
      v -= m * (m - 1) / (d(m - 2) + d(m - 1)) * std::pow(1.0 / d(m - 2) - 1.0 / d(m - 1), 2);
    // Coefficient follows the corrected fourth-order series (1/12 instead of
    // -1/6 on [S2,[S1,V]_OD]_D), which turns +1/96 into -1/192.
    x -= O4 / 192.0 * v;
    return x;
  }

  // Coefficient of e^{i phi} a^dagger |m><m+2| before the H_d2 sign.
  double eff(int m) const {
    const double O2 = Omega * Omega;
    double c = 1.0 - O2 / 8.0 *
                         ((m + 3) / std::pow(d(m + 2), 2) + (m + 2) / std::pow(d(m + 1), 2) +
                          (m + 1) / std::pow(d(m), 2) + (m > 0 ? m / std::pow(d(m - 1), 2) : 0.0));
    double x = gt(m) * c;
    x += O2 / 4.0 * sq(m + 1) * sq(m + 3) / (d(m) * d(m + 2)) * gt(m + 1);
    if (m > 0) x += O2 / 4.0 * sq(m) * sq(m + 2) / (d(m - 1) * d(m + 1)) * gt(m - 1);
    x += O2 / 4.0 * sq(m + 1) * sq(m + 2) * two_photon_gp(m);
    return x;
  }
  double two_photon_gp(int m) const {
    return gp(m + 2) / (d(m) * (d(m) + d(m + 1))) - gp(m + 1) / (d(m) * d(m + 1)) +
           gp(m) / (d(m + 1) * (d(m) + d(m + 1)));
  }
  double resid_diag(int m) const {
    const double O2 = Omega * Omega;
    const double up = (m + 1) / std::pow(d(m), 2);
    const double dn = m > 0 ? m / std::pow(d(m - 1), 2) : 0.0;
    double x = gp(m) * (1.0 - O2 / 4.0 * (up + dn)) + O2 / 4.0 * (up * gp(m + 1) + dn * gp(m - 1));
    double y = sq(m + 1) * sq(m + 2) * gt(m) / (d(m) * (d(m) + d(m + 1)));
    if (m > 0) y -= sq(m) * sq(m + 1) * gt(m - 1) / (d(m) * d(m - 1));
    if (m > 1) y += sq(m - 1) * sq(m) * gt(m - 2) / (d(m - 1) * (d(m - 2) + d(m - 1)));
    return x + O2 / 4.0 * y;
  }
};

// Overall sign of H_d2 relative to the g~/g' coefficients (see header).
constexpr double kDriveTwoSign = -1.0;

}  // namespace

double Detunings::delta_q_m(int m) const { return delta_q(p, omega_d) + p.alpha * m; }

double Detunings::delta_q_tilde_m(int m) const {
  return delta_q_m(m) + p.g * p.g * p.Delta_m(-1) /
                            (checked(p.Delta_m(m - 1), "Delta_{m-1}") * checked(p.Delta_m(m), "Delta_m"));
}

double Detunings::delta_q_doubletilde_m(int m) const {
  return delta_q(p, omega_d) - p.alpha +
         p.g * p.g * p.Delta_m(-1) * p.Delta_m(3 * m) /
             (checked(p.Delta_m(m), "Delta_m") * checked(p.Delta_m(m - 1), "Delta_{m-1}") *
              checked(p.Delta_m(m - 2), "Delta_{m-2}"));
}

OperatorMatrix s1_capacitive(const DeviceParams& params) {
  const Dims d{params.n_transmon, params.n_resonator};
  CMatrix S = CMatrix::Zero(d.size(), d.size());
  for (int m = 1; m < d.n_t; ++m) {
    const double c = params.g * std::sqrt(static_cast<double>(m)) /
                     checked(params.Delta_m(m - 1), "Delta + alpha(m-1)");
    // a |m><m-1|: |m-1, l> -> sqrt(l) |m, l-1>
    for (int l = 1; l < d.n_r; ++l) {
      const double v = c * std::sqrt(static_cast<double>(l));
      S(d.index(m, l - 1), d.index(m - 1, l)) += v;
      S(d.index(m - 1, l), d.index(m, l - 1)) -= v;
    }
  }
  return {d, S, false};
}

OperatorMatrix dressed_static_1st(const DeviceParams& params, double omega_d) {
  const Dims d{params.n_transmon, params.n_resonator};
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  const double dr = delta_r(params, omega_d);
  for (int m = 0; m < d.n_t; ++m) {
    const double em = dressed_level(params, omega_d, m);
    const double chi = dispersive_shift(params, m);
    for (int l = 0; l < d.n_r; ++l) H(d.index(m, l), d.index(m, l)) = em + l * (dr + chi);
  }
  return {d, H, true};
}

double g_tilde_m(const DeviceParams& p, double Omega, int m) {
  return p.g * p.alpha * Omega * sq(m + 1) * sq(m + 2) /
         (2.0 * checked(p.Delta_m(m), "Delta_m") * checked(p.Delta_m(m + 1), "Delta_{m+1}"));
}

double g_prime_m(const DeviceParams& p, double Omega, int m) {
  return p.g * Omega * p.Delta_m(-1) /
         (2.0 * checked(p.Delta_m(m), "Delta_m") * checked(p.Delta_m(m - 1), "Delta_{m-1}"));
}

double g_tilde_lowest_order(const DeviceParams& p, double Omega) {
  return Omega * p.g * p.alpha /
         (std::sqrt(2.0) * checked(p.Delta(), "Delta") * checked(p.Delta() + p.alpha, "Delta + alpha"));
}

DressedDrive dressed_drive_terms(const DeviceParams& params, const DrivePulse& drive) {
  const Dims d{params.n_transmon, params.n_resonator};
  const cdouble e = std::polar(1.0, drive.phi);
  DressedDrive out;
  out.H_d1 = build_drive_operator(params, drive.Omega, drive.phi);
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  for (int m = 0; m < d.n_t; ++m) {
    const double gp = g_prime_m(params, drive.Omega, m);
    for (int l = 0; l + 1 < d.n_r; ++l)  // e a g'_m |m><m|
      H(d.index(m, l), d.index(m, l + 1)) += kDriveTwoSign * e * gp * std::sqrt(l + 1.0);
    if (m + 2 < d.n_t) {
      const double gt = g_tilde_m(params, drive.Omega, m);
      for (int l = 0; l + 1 < d.n_r; ++l)  // e a^dagger g~_m |m><m+2|
        H(d.index(m, l + 1), d.index(m + 2, l)) += kDriveTwoSign * e * gt * std::sqrt(l + 1.0);
    }
  }
  H += H.adjoint().eval();
  out.H_d2 = {d, H, true};
  return out;
}

SWTGenerators second_swt_generators(const DeviceParams& params, const DrivePulse& drive) {
  const int n_t = params.n_transmon, n_r = params.n_resonator;
  const Coeffs k(params, drive.Omega, drive.omega_d);
  for (int m = 0; m + 1 < n_t; ++m) {
    const double dm = k.det.delta_q_tilde_m(m);
    if (std::fabs(dm) <= kDetuningFloor) {
      std::ostringstream os;
      os << "transmon detuning delta~_" << m << " = 2pi*" << rad_to_hz(dm)
         << " Hz is within 10 MHz of resonance";
      fail(ErrorCode::DegenerateDenominator, os.str());
    }
  }
  const cdouble e = std::polar(1.0, drive.phi);
  CMatrix T1 = CMatrix::Zero(n_t, n_t), T2 = T1, T3 = T1;
  for (int m = 0; m + 1 < n_t; ++m) T1(m, m + 1) = e * k.s1(m);
  for (int m = 0; m + 2 < n_t; ++m) T2(m, m + 2) = e * e * k.s2(m);
  for (int m = 0; m + 1 < n_t; ++m) T3(m, m + 1) = e * k.s3_single(m);
  for (int m = 0; m + 3 < n_t; ++m) T3(m, m + 3) = e * e * e * k.s3_triple(m);
  T1 -= T1.adjoint().eval();
  T2 -= T2.adjoint().eval();
  T3 -= T3.adjoint().eval();

  const Dims d{n_t, n_r};
  SWTGenerators g;
  g.S1 = s1_capacitive(params);
  g.S1_prime = {d, on_transmon(T1, n_r), false};
  g.S2_prime = {d, on_transmon(T2, n_r), false};
  g.S3_prime = {d, on_transmon(T3, n_r), false};
  return g;
}

double double_dressed_level(const DeviceParams& params, double Omega, double omega_d, int m) {
  return Coeffs(params, Omega, omega_d).level(m);
}

OperatorMatrix double_dressed_static(const DeviceParams& params, double Omega, double omega_d) {
  const Dims d{params.n_transmon, params.n_resonator};
  const Coeffs k(params, Omega, omega_d);
  const double dr = delta_r(params, omega_d);
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  for (int m = 0; m < d.n_t; ++m) {
    const double em = k.level(m);
    const double chi = dispersive_shift(params, m);
    for (int l = 0; l < d.n_r; ++l) H(d.index(m, l), d.index(m, l)) = em + l * (dr + chi);
  }
  return {d, H, true};
}

OperatorMatrix effective_coupling(const DeviceParams& params, const DrivePulse& drive, double omega_d) {
  const Dims d{params.n_transmon, params.n_resonator};
  const Coeffs k(params, drive.Omega, omega_d);
  const cdouble e = std::polar(1.0, drive.phi);
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  for (int m = 0; m + 2 < d.n_t; ++m) {
    const cdouble c = kDriveTwoSign * e * k.eff(m);
    for (int l = 0; l + 1 < d.n_r; ++l) H(d.index(m, l + 1), d.index(m + 2, l)) += c * std::sqrt(l + 1.0);
  }
  H += H.adjoint().eval();
  return {d, H, true};
}

OperatorMatrix residual_coupling(const DeviceParams& params, const DrivePulse& drive, double omega_d) {
  const Dims d{params.n_transmon, params.n_resonator};
  const int n_t = d.n_t, n_r = d.n_r;
  const Coeffs k(params, drive.Omega, omega_d);
  const double Om = drive.Omega, O2 = Om * Om;
  const cdouble e = std::polar(1.0, drive.phi);
  CMatrix H = CMatrix::Zero(d.size(), d.size());
  if (Om == 0.0) return {d, H, true};
  // Upper-triangle-style pieces; the hermitian completion is added at the end.
  auto a_term = [&](int m, int mp, cdouble c) {  // c a |m><mp|
    for (int l = 0; l + 1 < n_r; ++l) H(d.index(m, l), d.index(mp, l + 1)) += c * std::sqrt(l + 1.0);
  };
  auto ad_term = [&](int m, int mp, cdouble c) {  // c a^dagger |m><mp|
    for (int l = 0; l + 1 < n_r; ++l) H(d.index(m, l + 1), d.index(mp, l)) += c * std::sqrt(l + 1.0);
  };
  for (int m = 0; m < n_t; ++m) a_term(m, m, e * k.resid_diag(m));  // its h.c. is the a^dagger part
  for (int m = 0; m + 1 < n_t; ++m) {
    const double dgp = k.gp(m + 1) - k.gp(m);
    a_term(m, m + 1, -0.5 * Om * e * e * sq(m + 1) / k.d(m) * dgp);
    double c = sq(m + 1) / k.d(m) * dgp + sq(m + 2) / k.d(m + 1) * k.gt(m);
    if (m > 0) c -= sq(m) / k.d(m - 1) * k.gt(m - 1);
    ad_term(m, m + 1, -0.5 * Om * c);
  }
  for (int m = 0; m + 2 < n_t; ++m)
    a_term(m, m + 2, 0.25 * O2 * e * e * e * sq(m + 1) * sq(m + 2) * k.two_photon_gp(m));
  for (int m = 0; m + 3 < n_t; ++m)
    ad_term(m, m + 3,
            -0.5 * Om * e * e * (sq(m + 1) / k.d(m) * k.gt(m + 1) - sq(m + 3) / k.d(m + 2) * k.gt(m)));
  for (int m = 0; m + 4 < n_t; ++m) {
    const double c = sq(m + 1) * sq(m + 2) * k.gt(m + 2) / (k.d(m) * (k.d(m) + k.d(m + 1))) -
                     sq(m + 4) * sq(m + 1) * k.gt(m + 1) / (k.d(m) * k.d(m + 3)) +
                     sq(m + 3) * sq(m + 4) * k.gt(m) / (k.d(m + 3) * (k.d(m + 3) + k.d(m + 2)));
    ad_term(m, m + 4, 0.25 * O2 * e * e * e * c);
  }
  H += H.adjoint().eval();
  H *= kDriveTwoSign;
  return {d, H, true};
}

double eta(const DeviceParams& params, double Omega, double omega_d) {
  const Coeffs k(params, Omega, omega_d);
  return k.level(2) - (k.level(0) + delta_r(params, omega_d) + dispersive_shift(params, 0));
}

double g_tilde_order3(const DeviceParams& params, double Omega, double omega_d) {
  return std::fabs(Coeffs(params, Omega, omega_d).eff(0));
}

double residual_norm(const DeviceParams& params, const DrivePulse& drive, double omega_d) {
  const OperatorMatrix R = residual_coupling(params, drive, omega_d);
  const Dims d = R.dims;
  double best = 0.0;
  for (int i = 0; i < d.size(); ++i) {
    if (d.transmon(i) + d.resonator(i) > 3) continue;
    for (int j = 0; j < d.size(); ++j) {
      if (d.transmon(j) + d.resonator(j) > 3) continue;
      best = std::max(best, std::abs(R.entries(i, j)));
    }
  }
  return best;
}

double solve_eta_root(const DeviceParams& params, double Omega, int* iterations, bool* used_bisection) {
  const double tol = kTwoPi * 1e3;
  const double x0 = bare_crossing_frequency(params);
  auto f = [&](double w) { return eta(params, Omega, w); };
  double xa = x0, xb = x0 + kTwoPi * 10e6;
  double fa = f(xa), fb = f(xb);
  if (used_bisection) *used_bisection = false;
  for (int it = 1; it <= 50; ++it) {
    if (fb == fa) break;
    const double xc = xb - fb * (xb - xa) / (fb - fa);
    if (!std::isfinite(xc) || std::fabs(xc - x0) > kTwoPi * 2e9) break;
    xa = xb;
    fa = fb;
    xb = xc;
    fb = f(xb);
    if (std::fabs(xb - xa) < tol) {
      if (iterations) *iterations = it;
      return xb;
    }
  }
  // Secant diverged or stalled: bracket a sign change around the bare
  // crossing and bisect.
  if (used_bisection) *used_bisection = true;
  const double f0 = f(x0);
  for (double w = kTwoPi * 20e6; w <= kTwoPi * 1.6e9; w *= 2) {
    for (double s : {-1.0, 1.0}) {
      const double x1 = x0 + s * w;
      double fx1;
      try {
        fx1 = f(x1);
      } catch (const NumericalError&) {
        continue;
      }
      if ((fx1 > 0) != (f0 > 0)) {
        if (iterations) *iterations = -1;
        return bisect_root(f, std::min(x0, x1), std::max(x0, x1), tol);
      }
    }
  }
  fail(ErrorCode::NoConvergence, "eta root not found within 50 secant iterations or by bisection");
}

EffectiveCouplingReport solve_omega_d_star_analytic(const DeviceParams& params, double Omega) {
  EffectiveCouplingReport r;
  r.omega_d_star_analytic = solve_eta_root(params, Omega, &r.secant_iterations, &r.used_bisection);
  r.g_tilde_lowest = std::fabs(g_tilde_lowest_order(params, Omega));
  r.g_tilde_order3 = g_tilde_order3(params, Omega, r.omega_d_star_analytic);
  DrivePulse drive;
  drive.Omega = Omega;
  drive.omega_d = r.omega_d_star_analytic;
  r.residual_norm = residual_norm(params, drive, r.omega_d_star_analytic);
  return r;
}

CrossingComparison compare_crossing(const DeviceParams& params, double Omega, double scan_half_width) {
  CrossingComparison c;
  c.Omega = Omega;
  const EffectiveCouplingReport a = solve_omega_d_star_analytic(params, Omega);
  c.omega_d_order3 = a.omega_d_star_analytic;
  c.g_order3 = a.g_tilde_order3;
  c.omega_d_lowest = drive_free_crossing(params);
  c.g_lowest = std::fabs(g_tilde_lowest_order(params, Omega));
  const AvoidedCrossing ex =
      find_avoided_crossing_exact(params, Omega, crossing_scan_around(a.omega_d_star_analytic, scan_half_width));
  c.omega_d_exact = ex.omega_d_star;
  c.g_exact = ex.g_tilde;
  return c;
}

}  // namespace reslru
