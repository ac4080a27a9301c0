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

#include "reslru/markov.hpp"

#include <Eigen/Eigenvalues>
#include <unsupported/Eigen/MatrixFunctions>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "reslru/numerics.hpp"

namespace reslru {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool is_prob(double x) { return x >= 0.0 && x <= 1.0; }

double relax_prob(double t, double T1) { return std::isinf(T1) ? 0.0 : -std::expm1(-t / (0.5 * T1)); }

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double counter_uniform(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  h = splitmix64(h ^ c);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

void LRUParams::validate() const {
  if (!is_prob(R) || !is_prob(L1_LRU) || !is_prob(pM22) || !is_prob(pM11))
    fail(ErrorCode::InvalidArgument, "LRU parameters must lie in [0, 1]");
}

std::vector<QubitSpec> surface17_layout() {
  std::vector<QubitSpec> q;
  for (int i = 0; i < 9; ++i) {
    const int nf = i == 4 ? 4 : (i == 3 || i == 5) ? 3 : 0;
    q.push_back({"D" + std::to_string(i), QubitRole::Data, nf, nf > 0});
  }
  for (const char* x : {"X0", "X1", "X2", "X3"}) q.push_back({x, QubitRole::Ancilla, 2, true});
  for (int i = 0; i < 4; ++i)
    q.push_back({"Z" + std::to_string(i), QubitRole::Ancilla, (i == 0 || i == 3) ? 1 : 2, true});
  return q;
}

MarkovRates rates_from_physical(int n_flux, double L1, double L2, double t_c, double T1) {
  if (n_flux < 0 || n_flux > 4) fail(ErrorCode::InvalidArgument, "n_flux must be in 0..4");
  if (!is_prob(L1) || !is_prob(L2)) fail(ErrorCode::InvalidArgument, "L1, L2 must lie in [0, 1]");
  if (!(t_c >= 0.0) || !(T1 > 0.0)) fail(ErrorCode::InvalidArgument, "need t_c >= 0 and T1 > 0");
  MarkovRates r;
  r.gamma_CL = n_flux * L1;
  r.gamma_LC = n_flux * L2 + relax_prob(t_c, T1);
  if (r.gamma_CL > 1.0 || r.gamma_LC > 1.0) {
    r.clamped = true;
    r.gamma_CL = std::min(r.gamma_CL, 1.0);
    r.gamma_LC = std::min(r.gamma_LC, 1.0);
  }
  return r;
}

double lifetime(const MarkovRates& r) {
  if (!(r.gamma_LC > 0.0)) fail(ErrorCode::ZeroSeepage, "gamma_LC = 0: leakage never ends");
  return 1.0 / r.gamma_LC;
}

double steady_state(const MarkovRates& r) {
  const double s = r.gamma_CL + r.gamma_LC;
  return s > 0.0 ? r.gamma_CL / s : 0.0;
}

std::vector<double> pbar_curve(const MarkovRates& r, int n_cycles) {
  std::vector<double> out(std::max(n_cycles, 0), 0.0);
  const double s = r.gamma_CL + r.gamma_LC;
  for (int n = 1; n <= n_cycles; ++n)
    out[n - 1] = s > 0.0 ? r.gamma_CL / s * -std::expm1(-s * n) : 0.0;
  return out;
}

MarkovRates lru_augmented_rates(const MarkovRates& base, const LRUParams& lru, QubitRole role,
                                double p0) {
  lru.validate();
  if (!is_prob(p0)) fail(ErrorCode::InvalidArgument, "p0_occupancy must lie in [0, 1]");
  const bool data = role == QubitRole::Data;
  const double s = data ? lru.R : lru.pM22;
  const double induced = data ? 2.0 * lru.L1_LRU * p0 : (1.0 - lru.pM11) * (1.0 - p0);
  MarkovRates r;
  r.gamma_LC = 1.0 - (1.0 - base.gamma_LC) * (1.0 - s);
  r.gamma_CL = base.gamma_CL + induced;
  r.clamped = base.clamped;
  if (r.gamma_CL > 1.0) {
    r.gamma_CL = 1.0;
    r.clamped = true;
  }
  return r;
}

Populations3 res_lru_population_map(const Populations3& p, const LRUParams& lru) {
  lru.validate();
  if (p.p0 < 0.0 || p.p1 < 0.0 || p.p2 < 0.0 || p.p0 + p.p1 + p.p2 > 1.0 + 1e-9)
    fail(ErrorCode::InvalidDistribution, "populations must be non-negative and sum to at most 1");
  const double removed = lru.R * p.p2;
  const double induced = 2.0 * lru.L1_LRU * p.p0;
  return {p.p0 + removed - induced, p.p1, p.p2 - removed + induced};
}

int readout_declare(int true_state, const LRUParams& lru, double u) {
  switch (true_state) {
    case 0: return 0;
    case 1: return u < lru.pM11 ? 1 : 2;
    case 2: return u < lru.pM22 ? 2 : 1;
    default: fail(ErrorCode::InvalidArgument, "true_state must be 0, 1 or 2");
  }
}

// ---- qutrit channel ----

namespace {

Superop3 dissipator(const Density3& K, double rate) {
  const Density3 I = Density3::Identity();
  const Density3 KdK = K.adjoint() * K;
  Superop3 L;
  // vec(A X B) = (B^T kron A) vec(X)
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
          L(3 * a + c, 3 * b + d) = std::conj(K(a, b)) * K(c, d) - 0.5 * I(a, b) * KdK(c, d) -
                                    0.5 * KdK(b, a) * I(c, d);
  return rate * L;
}

Density3 ket_bra(int i, int j) {
  Density3 m = Density3::Zero();
  m(i, j) = 1.0;
  return m;
}

}  // namespace

Density3 QutritChannel::apply(const Density3& rho) const {
  Eigen::Matrix<std::complex<double>, 9, 1> v = Eigen::Map<const Eigen::Matrix<std::complex<double>, 9, 1>>(rho.data());
  v = S * v;
  return Eigen::Map<Density3>(v.data());
}

double QutritChannel::choi_min_eigenvalue() const {
  Superop3 C;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      const Density3 out = apply(ket_bra(i, j));
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) C(3 * i + a, 3 * j + b) = out(a, b);
    }
  const Superop3 H = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<Superop3> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double QutritChannel::trace_preservation_error() const {
  double e = 0.0;
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      e = std::max(e, std::abs(apply(ket_bra(i, j)).trace() - (i == j ? 1.0 : 0.0)));
  return e;
}

Eigen::Matrix3d QutritChannel::population_transfer() const {
  Eigen::Matrix3d T;
  for (int j = 0; j < 3; ++j) {
    const Density3 out = apply(ket_bra(j, j));
    for (int i = 0; i < 3; ++i) T(i, j) = out(i, i).real();
  }
  return T;
}

QutritChannel build_res_lru_channel(const LRUParams& lru, double t_lru, double T1, double Tphi) {
  lru.validate();
  const double R_sim = lru.R + 2.0 * lru.L1_LRU;
  // R_sim = 1 is the infinite-rate limit, handled as an instantaneous reset.
  const bool reset_limit = std::fabs(R_sim - 1.0) <= 1e-12;
  if ((!(R_sim < 1.0) && !reset_limit) || !(2.0 * lru.L1_LRU < 1.0))
    fail(ErrorCode::InvalidRates, "need R + 2 L1_LRU <= 1 and 2 L1_LRU < 1");
  if (!(t_lru > 0.0) || !(T1 > 0.0) || !(Tphi > 0.0))
    fail(ErrorCode::InvalidRates, "durations and coherence times must be positive");

  Superop3 Ldown = Superop3::Zero();
  if (!reset_limit) Ldown += dissipator(ket_bra(0, 2), -std::log1p(-R_sim) / t_lru);
  if (!std::isinf(T1)) {
    Ldown += dissipator(ket_bra(0, 1), 1.0 / T1);
    Ldown += dissipator(ket_bra(1, 2), 2.0 / T1);
  }
  if (!std::isinf(Tphi)) {
    Density3 n = Density3::Zero();
    n(1, 1) = 1.0;
    n(2, 2) = 2.0;
    Ldown += dissipator(n, 2.0 / Tphi);
  }
  const Superop3 Lup = dissipator(ket_bra(2, 0), -std::log1p(-2.0 * lru.L1_LRU));
  QutritChannel ch;
  if (!reset_limit) {
    ch.S = Lup.exp() * (t_lru * Ldown).exp();
    return ch;
  }
  // gamma -> inf: exp(t (gamma D + L)) -> exp(t P L P) P, with P the
  // stationary projector of the reset (|2> to |0>, coherences with |2> gone).
  Superop3 P = Superop3::Zero();
  auto idx = [](int i, int j) { return 3 * j + i; };
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) P(idx(i, j), idx(i, j)) = 1.0;
  P(idx(0, 0), idx(2, 2)) = 1.0;
  ch.S = Lup.exp() * (t_lru * (P * Ldown * P)).exp() * P;
  return ch;
}

// ---- Monte Carlo ----

namespace {

struct ChainRates {
  double leak = 0.0, seep = 0.0;
};

ChainRates chain_rates(const QubitSpec& q, double L1, double L2, const MonteCarloOptions& o) {
  const MarkovRates r = rates_from_physical(q.n_flux, L1, L2, o.t_c, o.T1);
  return {r.gamma_CL, r.gamma_LC};
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (threads <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex mu;
  auto worker = [&] {
    for (int i = next++; i < n; i = next++) {
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(mu);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int t = 0; t < std::min(threads, n); ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace

std::map<std::string, LeakageTrace> monte_carlo_surface17(const std::vector<QubitSpec>& layout, double L1,
                                                          double L2, const LRUParams& lru, bool use_data_lru,
                                                          bool use_ancilla_lru, int cycles, int runs,
                                                          std::uint64_t seed, const MonteCarloOptions& o) {
  if (cycles < 5 || runs < 100) fail(ErrorCode::InvalidArgument, "need cycles >= 5 and runs >= 100");
  if (o.threads < 1) fail(ErrorCode::InvalidArgument, "threads must be at least 1");
  lru.validate();

  std::vector<int> active;
  for (int i = 0; i < static_cast<int>(layout.size()); ++i)
    if (layout[i].leakage_prone) active.push_back(i);

  std::vector<LeakageTrace> traces(active.size());
  std::vector<ChainRates> rates(active.size());
  for (size_t k = 0; k < active.size(); ++k) {
    const QubitSpec& q = layout[active[k]];
    rates[k] = chain_rates(q, L1, L2, o);
    traces[k].qubit = q.name;
    traces[k].cycles = cycles;
    traces[k].runs = runs;
    traces[k].leaked.assign(static_cast<size_t>(runs) * cycles, 0);
  }

  constexpr int kBlock = 1000;
  const int blocks = (runs + kBlock - 1) / kBlock;
  const int tasks = static_cast<int>(active.size()) * blocks;
  parallel_for(tasks, o.threads, [&](int task) {
    const int k = task / blocks;
    const int blk = task % blocks;
    const QubitSpec& q = layout[active[k]];
    const bool data = q.role == QubitRole::Data;
    const bool lru_on = data ? use_data_lru : use_ancilla_lru;
    const ChainRates cr = rates[k];
    // Stream id: layout position, so adding qubits does not shift others.
    const std::uint64_t qid = static_cast<std::uint64_t>(active[k]);
    std::uint8_t* rows = traces[k].leaked.data();
    for (int r = blk * kBlock; r < std::min(runs, (blk + 1) * kBlock); ++r) {
      bool leaked = false;
      for (int c = 0; c < cycles; ++c) {
        auto u = [&](int slot) { return counter_uniform(seed, qid, static_cast<std::uint64_t>(r), 8ULL * c + slot); };
        if (!leaked && u(0) < cr.leak) leaked = true;
        rows[static_cast<size_t>(r) * cycles + c] = leaked;
        if (leaked && u(1) < cr.seep) leaked = false;
        if (!lru_on) continue;
        if (data) {
          if (leaked) {
            if (u(2) < lru.R) leaked = false;
          } else if (u(3) < o.p0_occupancy && u(4) < 2.0 * lru.L1_LRU) {
            leaked = true;
          }
        } else {
          const int level = leaked ? 2 : (u(3) < o.p0_occupancy ? 0 : 1);
          if (readout_declare(level, lru, u(2)) == 2) leaked = level == 1;  // pi pulse swaps 1 and 2
        }
      }
    }
  });

  std::map<std::string, LeakageTrace> out;
  for (LeakageTrace& t : traces) {
    t.pbar.assign(cycles, 0.0);
    t.stderr_.assign(cycles, 0.0);
    std::vector<long> count(cycles, 0);
    for (int r = 0; r < runs; ++r)
      for (int c = 0; c < cycles; ++c) count[c] += t.leaked[static_cast<size_t>(r) * cycles + c];
    for (int c = 0; c < cycles; ++c) {
      const double p = static_cast<double>(count[c]) / runs;
      t.pbar[c] = p;
      t.stderr_[c] = std::sqrt(p * (1.0 - p) / runs);
    }
    out.emplace(t.qubit, std::move(t));
  }
  return out;
}

std::vector<double> chain_expectation(const QubitSpec& q, double L1, double L2, const LRUParams& lru, bool use_lru,
                                      int cycles, const MonteCarloOptions& o) {
  lru.validate();
  const ChainRates cr = chain_rates(q, L1, L2, o);
  const double p0 = o.p0_occupancy;
  std::vector<double> rec(std::max(cycles, 0));
  double p = 0.0;
  for (int c = 0; c < cycles; ++c) {
    p += (1.0 - p) * cr.leak;
    rec[c] = p;
    p *= 1.0 - cr.seep;
    if (!use_lru) continue;
    if (q.role == QubitRole::Data)
      p = p * (1.0 - lru.R) + (1.0 - p) * p0 * 2.0 * lru.L1_LRU;
    else
      p = p * (1.0 - lru.pM22) + (1.0 - p) * (1.0 - p0) * (1.0 - lru.pM11);
  }
  return rec;
}

// ---- fitting ----

namespace {

// (1 - e^{-s n}) / s and its s-derivative, with the s -> 0 limits.
double shape(double s, int n) { return s > 1e-12 ? -std::expm1(-s * n) / s : n; }
double shape_ds(double s, int n) {
  if (s < 1e-6) return -0.5 * n * n;
  return (n * std::exp(-s * n) - shape(s, n)) / s;
}

constexpr double kSMin = 1e-9;
// e^{-50} is far below any trace resolution; beyond this s is unidentifiable.
constexpr double kSMax = 50.0;

// Feasible set: 0 <= c <= min(1, s), s in [kSMin, kSMax].
void project(double& c, double& s) {
  s = std::clamp(s, kSMin, kSMax);
  c = std::clamp(c, 0.0, std::min(1.0, s));
}

double rss_at(const std::vector<double>& y, double c, double s) {
  double e = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double r = c * shape(s, static_cast<int>(i) + 1) - y[i];
    e += r * r;
  }
  return e;
}

// Best c for fixed s (linear least squares, then clamped).
double profile_c(const std::vector<double>& y, double s) {
  double num = 0.0, den = 0.0;
  for (size_t i = 0; i < y.size(); ++i) {
    const double g = shape(s, static_cast<int>(i) + 1);
    num += g * y[i];
    den += g * g;
  }
  double c = den > 0.0 ? num / den : 0.0;
  project(c, s);
  return c;
}

}  // namespace

FitResult fit_pbar(const std::vector<double>& y) {
  if (y.size() < 5) fail(ErrorCode::InvalidArgument, "trace needs at least 5 cycles");
  if (std::all_of(y.begin(), y.end(), [](double v) { return v <= 0.0; }))
    fail(ErrorCode::FitDiverged, "all-zero trace: gamma_CL = 0 and gamma_LC is unidentifiable");

  // Coarse log grid over s with c profiled out.
  constexpr int kGrid = 121;
  const double lg_lo = std::log(1e-4), lg_hi = std::log(kSMax);
  int best = 0;
  double best_rss = kInf;
  std::vector<double> grid(kGrid);
  for (int i = 0; i < kGrid; ++i) {
    grid[i] = std::exp(lg_lo + (lg_hi - lg_lo) * i / (kGrid - 1));
    const double e = rss_at(y, profile_c(y, grid[i]), grid[i]);
    if (e < best_rss) {
      best_rss = e;
      best = i;
    }
  }
  const double lo = grid[std::max(best - 1, 0)];
  const double hi = grid[std::min(best + 1, kGrid - 1)];
  double s = grid[best];
  if (hi > lo) {
    const ScalarMin m = minimize_bounded([&](double x) { return rss_at(y, profile_c(y, x), x); }, lo, hi,
                                         1e-10 * hi);
    if (m.fx <= best_rss) s = m.x;
  }
  double c = profile_c(y, s);

  // Projected Gauss-Newton with Levenberg damping.
  FitResult fr;
  double rss = rss_at(y, c, s);
  double mu = 1e-12;
  for (int it = 0; it < 200; ++it) {
    fr.iterations = it + 1;
    Eigen::Matrix2d JtJ = Eigen::Matrix2d::Zero();
    Eigen::Vector2d Jtr = Eigen::Vector2d::Zero();
    for (size_t i = 0; i < y.size(); ++i) {
      const int n = static_cast<int>(i) + 1;
      const Eigen::Vector2d J(shape(s, n), c * shape_ds(s, n));
      const double r = c * J(0) - y[i];
      JtJ += J * J.transpose();
      Jtr += J * r;
    }
    bool accepted = false;
    for (int tries = 0; tries < 30 && !accepted; ++tries) {
      Eigen::Matrix2d A = JtJ;
      A.diagonal() *= 1.0 + mu;
      const Eigen::Vector2d d = A.ldlt().solve(-Jtr);
      double c1 = c + d(0), s1 = s + d(1);
      project(c1, s1);
      const double e = rss_at(y, c1, s1);
      if (e <= rss) {
        const double step = std::hypot(c1 - c, s1 - s);
        c = c1;
        s = s1;
        accepted = true;
        mu = std::max(mu * 0.1, 1e-15);
        if (step < 1e-15 || rss - e <= 1e-30) {
          rss = e;
          it = 200;
          break;
        }
        rss = e;
      } else {
        mu = mu * 10.0 + 1e-12;
      }
    }
    if (!accepted) break;
  }
  if (!std::isfinite(rss)) fail(ErrorCode::FitDiverged, "non-finite residual");

  fr.curve.gamma_CL = c;
  fr.curve.gamma_LC = s - c;
  fr.rss = rss;
  fr.steady_state = steady_state(fr.curve);
  fr.rates = fr.curve;
  if (fr.rates.gamma_LC > 1.0) {
    fr.rates.gamma_LC = 1.0;
    fr.rates.clamped = true;
  }
  fr.lifetime = fr.rates.gamma_LC > 0.0 ? 1.0 / fr.rates.gamma_LC : kInf;
  return fr;
}

FitSummary fit_trace(const LeakageTrace& t, int bootstrap_samples, std::uint64_t seed) {
  if (t.cycles < 5) fail(ErrorCode::InvalidArgument, "trace needs at least 5 cycles");
  FitSummary out;
  out.fit = fit_pbar(t.pbar);
  if (bootstrap_samples <= 0 || t.leaked.empty()) return out;

  std::vector<double> gcl, glc, life, ss;
  std::vector<long> count(t.cycles);
  std::vector<double> y(t.cycles);
  for (int b = 0; b < bootstrap_samples; ++b) {
    std::fill(count.begin(), count.end(), 0);
    for (int i = 0; i < t.runs; ++i) {
      const auto r = static_cast<size_t>(counter_uniform(seed, 0xb007, b, i) * t.runs);
      const std::uint8_t* row = t.leaked.data() + r * t.cycles;
      for (int c = 0; c < t.cycles; ++c) count[c] += row[c];
    }
    for (int c = 0; c < t.cycles; ++c) y[c] = static_cast<double>(count[c]) / t.runs;
    try {
      const FitResult f = fit_pbar(y);
      gcl.push_back(f.rates.gamma_CL);
      glc.push_back(f.rates.gamma_LC);
      ss.push_back(f.steady_state);
      if (std::isfinite(f.lifetime)) life.push_back(f.lifetime);
    } catch (const NumericalError&) {
      // resample with no leakage at all; contributes nothing
    }
  }
  auto sd = [](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= v.size();
    double q = 0.0;
    for (double x : v) q += (x - m) * (x - m);
    return std::sqrt(q / (v.size() - 1));
  };
  out.sigma_gamma_CL = sd(gcl);
  out.sigma_gamma_LC = sd(glc);
  out.sigma_lifetime = sd(life);
  out.sigma_steady_state = sd(ss);
  out.bootstrap_samples = static_cast<int>(gcl.size());
  return out;
}

}  // namespace reslru
