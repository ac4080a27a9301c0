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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"
#include "reslru/markov.hpp"

#include <cmath>
#include <random>

using namespace reslru;

namespace {

constexpr double kL1 = 0.005;
constexpr double kL2 = 0.01;

QubitSpec find(const std::string& name) {
  for (const QubitSpec& q : surface17_layout())
    if (q.name == name) return q;
  throw std::runtime_error("no qubit " + name);
}

LRUParams operating_lru() { return {0.95, 0.0025, 0.9, 0.995}; }

}  // namespace

TEST_CASE("layout") {
  const auto L = surface17_layout();
  REQUIRE(L.size() == 17);
  int flux = 0, prone = 0;
  for (const QubitSpec& q : L) {
    flux += q.n_flux;
    prone += q.leakage_prone;
    CHECK(q.n_flux >= 0);
    CHECK(q.n_flux <= 4);
  }
  CHECK(flux == 24);  // one fluxed transmon per CZ, 4 x 4 + 4 x 2 CZs
  CHECK(prone == 11);
  CHECK(find("D4").n_flux == 4);
  CHECK(find("D3").n_flux == 3);
  CHECK(find("Z3").n_flux == 1);
  CHECK(find("X2").n_flux == 2);
  CHECK_FALSE(find("D0").leakage_prone);
}

TEST_CASE("rates from physical parameters") {
  const MarkovRates r = rates_from_physical(0, 0.0, 0.0, 800e-9, 30e-6);
  CHECK(r.gamma_CL == 0.0);
  CHECK(r.gamma_LC == doctest::Approx(0.0519361).epsilon(1e-6));
  // Relaxation-only seepage over the idle slot.
  CHECK(rates_from_physical(0, 0, 0, 440e-9, 30e-6).gamma_LC == doctest::Approx(0.029).epsilon(0.01));
  const MarkovRates d4 = rates_from_physical(4, kL1, kL2, 800e-9, 30e-6);
  CHECK(d4.gamma_CL == doctest::Approx(0.02));
  CHECK(d4.gamma_LC == doctest::Approx(0.04 + 0.0519361).epsilon(1e-6));
  CHECK_FALSE(d4.clamped);

  const MarkovRates big = rates_from_physical(4, 0.3, 0.3, 800e-9, 30e-6);
  CHECK(big.clamped);
  CHECK(big.gamma_CL == 1.0);
  CHECK(big.gamma_LC == 1.0);
  CHECK_THROWS_AS(rates_from_physical(5, kL1, kL2, 800e-9, 30e-6), NumericalError);
  CHECK_THROWS_AS(rates_from_physical(1, -0.1, kL2, 800e-9, 30e-6), NumericalError);
}

TEST_CASE("lifetime, steady state and the averaged curve") {
  CHECK(lifetime({0.0, 0.5}) == doctest::Approx(2.0));
  CHECK(lifetime({0.0, 1.0}) == doctest::Approx(1.0));
  CHECK(lifetime({0.0, 0.052}) == doctest::Approx(19.23).epsilon(1e-3));
  CHECK_THROWS_AS(lifetime({0.1, 0.0}), NumericalError);

  CHECK(steady_state({0.02, 0.10}) == doctest::Approx(1.0 / 6.0));
  for (double v : pbar_curve({0.0, 0.3}, 20)) CHECK(v == 0.0);

  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const MarkovRates r{u(rng), u(rng)};
    if (r.gamma_CL + r.gamma_LC <= 1e-3) continue;
    CHECK(std::fabs(pbar_curve(r, 10000).back() - steady_state(r)) < 1e-8);
    const auto c = pbar_curve(r, 30);
    for (size_t k = 1; k < c.size(); ++k) CHECK(c[k] >= c[k - 1]);
  }
}

TEST_CASE("LRU-augmented rates") {
  const MarkovRates base{0.02, 0.072};
  LRUParams perfect{1.0, 0.0, 1.0, 1.0};
  CHECK(lifetime(lru_augmented_rates(base, perfect, QubitRole::Data)) == doctest::Approx(1.0));
  CHECK(lifetime(lru_augmented_rates(base, perfect, QubitRole::Ancilla)) == doctest::Approx(1.0));

  const MarkovRates d = lru_augmented_rates(base, {0.95, 0.0, 1.0, 1.0}, QubitRole::Data);
  CHECK(d.gamma_LC == doctest::Approx(0.9536));
  CHECK(lifetime(d) == doctest::Approx(1.0 / 0.9536));

  const MarkovRates same = lru_augmented_rates(base, {0.0, 0.0, 0.0, 1.0}, QubitRole::Data);
  CHECK(same.gamma_CL == base.gamma_CL);
  CHECK(same.gamma_LC == doctest::Approx(base.gamma_LC).epsilon(1e-15));

  const LRUParams f = operating_lru();
  CHECK(lru_augmented_rates(base, f, QubitRole::Data).gamma_CL == doctest::Approx(0.02 + 0.0025));
  CHECK(lru_augmented_rates(base, f, QubitRole::Ancilla).gamma_CL == doctest::Approx(0.02 + 0.0025));
  CHECK(lru_augmented_rates(base, f, QubitRole::Ancilla).gamma_LC ==
        doctest::Approx(1.0 - 0.928 * 0.1));
  CHECK(lru_augmented_rates(base, f, QubitRole::Data, 1.0).gamma_CL == doctest::Approx(0.025));
}

TEST_CASE("population map") {
  LRUParams l{0.995, 0.0025, 1.0, 1.0};
  CHECK(res_lru_population_map({0, 0, 1}, l).p2 == doctest::Approx(0.005));
  CHECK(res_lru_population_map({1, 0, 0}, l).p2 == doctest::Approx(0.005));
  CHECK(res_lru_population_map({0, 1, 0}, l).p2 == 0.0);
  CHECK_THROWS_AS(res_lru_population_map({0.6, 0.6, 0.0}, l), NumericalError);
  CHECK_THROWS_AS(res_lru_population_map({-0.1, 0.5, 0.0}, l), NumericalError);

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 100; ++i) {
    double a = u(rng), b = u(rng), c = u(rng);
    const double s = a + b + c;
    const Populations3 in{a / s, b / s, c / s};
    const LRUParams q{u(rng), 0.5 * u(rng), 1.0, 1.0};
    const Populations3 out = res_lru_population_map(in, q);
    CHECK(out.p0 + out.p1 + out.p2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(out.p0 >= -1e-15);
    CHECK(out.p2 >= -1e-15);
  }
}

TEST_CASE("readout declaration") {
  LRUParams l{0.0, 0.0, 0.9, 0.995};
  int declared2 = 0;
  constexpr int kN = 100000;
  for (int i = 0; i < kN; ++i) {
    CHECK(readout_declare(0, l, counter_uniform(5, 0, 0, i)) == 0);
    declared2 += readout_declare(2, l, counter_uniform(5, 1, 0, i)) == 2;
  }
  const double sigma = std::sqrt(0.9 * 0.1 / kN);
  CHECK(std::fabs(declared2 / double(kN) - 0.9) < 4 * sigma);
  const LRUParams ideal{0, 0, 1.0, 1.0};
  for (int i = 0; i < 1000; ++i) {
    const double v = counter_uniform(8, 0, 0, i);
    CHECK(readout_declare(1, ideal, v) == 1);
    CHECK(readout_declare(2, ideal, v) == 2);
  }
  CHECK_THROWS_AS(readout_declare(3, l, 0.5), NumericalError);
}

TEST_CASE("counter-based uniforms") {
  double m = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double v = counter_uniform(1, 2, 3, i);
    CHECK(v >= 0.0);
    CHECK(v < 1.0);
    m += v;
  }
  CHECK(std::fabs(m / 100000 - 0.5) < 4 * std::sqrt(1.0 / 12 / 100000));
  CHECK(counter_uniform(1, 2, 3, 4) == counter_uniform(1, 2, 3, 4));
  CHECK(counter_uniform(1, 2, 3, 4) != counter_uniform(2, 2, 3, 4));
}

TEST_CASE("qutrit LRU channel") {
  const double inf = std::numeric_limits<double>::infinity();
  const LRUParams op{0.995, 0.0025, 1.0, 1.0};
  const QutritChannel ch = build_res_lru_channel(op, 100e-9, 30e-6, 60e-6);
  CHECK(ch.trace_preservation_error() < 1e-10);
  CHECK(ch.choi_min_eigenvalue() > -1e-9);
  const Eigen::Matrix3d T = ch.population_transfer();
  CHECK(std::fabs(T(2, 2) - 0.005) < 1e-3);
  CHECK(std::fabs(T(2, 0) - 0.005) < 1e-4);

  // Identity when nothing acts.
  const QutritChannel id = build_res_lru_channel({0, 0, 1, 1}, 100e-9, inf, inf);
  CHECK((id.S - Superop3::Identity()).cwiseAbs().maxCoeff() < 1e-14);

  // Finite rates just below the reset limit approach it.
  const QutritChannel near = build_res_lru_channel({0.995 - 1e-9, 0.0025, 1, 1}, 100e-9, 30e-6, 60e-6);
  CHECK((near.S - ch.S).cwiseAbs().maxCoeff() < 1e-3);

  CHECK_THROWS_AS(build_res_lru_channel({0.999, 0.0025, 1, 1}, 100e-9, 30e-6, 60e-6), NumericalError);
  CHECK_THROWS_AS(build_res_lru_channel({0.9, 0.0025, 1, 1}, 0.0, 30e-6, 60e-6), NumericalError);

  // CPTP everywhere; the affine map drops the 2 L1_LRU (1 - R_sim) term of
  // the leaked column, so the relaxation bound alone holds for large R.
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const double t = 100e-9, T1 = 30e-6;
  auto compare = [&](const LRUParams& l, bool large_R) {
    const QutritChannel c = build_res_lru_channel(l, t, T1, 10e-6 + 100e-6 * u(rng));
    CHECK(c.trace_preservation_error() < 1e-10);
    CHECK(c.choi_min_eigenvalue() > -1e-9);
    const Eigen::Matrix3d P = c.population_transfer();
    const double R_sim = l.R + 2 * l.L1_LRU;
    const double dropped = large_R ? 0.0 : 2 * l.L1_LRU * (1 - R_sim);
    for (int j = 0; j < 3; ++j) {
      Populations3 in;
      (j == 0 ? in.p0 : j == 1 ? in.p1 : in.p2) = 1.0;
      const Populations3 m = res_lru_population_map(in, l);
      CHECK(std::fabs(P(2, j) - m.p2) <= 2 * t / T1 + dropped);
      CHECK(std::fabs(P(1, j) - m.p1) <= 2 * t / T1 + dropped);
    }
  };
  for (int i = 0; i < 40; ++i) compare({0.98 * u(rng), 0.01 * u(rng), 1.0, 1.0}, false);
  for (int i = 0; i < 40; ++i) compare({0.95 + 0.045 * u(rng), 0.0025 * u(rng), 1.0, 1.0}, true);
}

TEST_CASE("Monte Carlo chain") {
  const auto L = surface17_layout();
  const LRUParams f = operating_lru();
  CHECK_THROWS_AS(monte_carlo_surface17(L, kL1, kL2, f, true, true, 4, 1000, 1), NumericalError);
  CHECK_THROWS_AS(monte_carlo_surface17(L, kL1, kL2, f, true, true, 20, 50, 1), NumericalError);

  MonteCarloOptions quiet;
  quiet.T1 = std::numeric_limits<double>::infinity();
  const auto zero = monte_carlo_surface17(L, 0.0, 0.0, {}, false, false, 20, 1000, 3, quiet);
  CHECK(zero.size() == 11);
  for (const auto& [name, t] : zero)
    for (double v : t.pbar) CHECK(v == 0.0);

  MonteCarloOptions one, three;
  three.threads = 3;
  const auto a = monte_carlo_surface17(L, kL1, kL2, f, true, true, 20, 4000, 17, one);
  const auto b = monte_carlo_surface17(L, kL1, kL2, f, true, true, 20, 4000, 17, three);
  for (const auto& [name, t] : a) CHECK(t.leaked == b.at(name).leaked);
  const auto c = monte_carlo_surface17(L, kL1, kL2, f, true, true, 20, 4000, 18, one);
  CHECK(a.at("D4").leaked != c.at("D4").leaked);

  // Per-cycle averages against the exactly propagated chain.
  for (bool lru : {false, true}) {
    const auto m = monte_carlo_surface17(L, kL1, kL2, f, lru, lru, 20, 20000, 5);
    for (const QubitSpec& q : L) {
      if (!q.leakage_prone) continue;
      const auto ex = chain_expectation(q, kL1, kL2, f, lru, 20);
      const LeakageTrace& t = m.at(q.name);
      for (int k = 0; k < 20; ++k) {
        const double s = std::sqrt(ex[k] * (1 - ex[k]) / t.runs);
        CHECK(std::fabs(t.pbar[k] - ex[k]) <= 5 * s + 1e-12);
      }
    }
  }
}

TEST_CASE("fitting") {
  const FitResult rt = fit_pbar(pbar_curve({0.02, 0.3}, 20));
  CHECK(std::fabs(rt.rates.gamma_CL - 0.02) < 1e-6);
  CHECK(std::fabs(rt.rates.gamma_LC - 0.3) < 1e-6);
  CHECK_FALSE(rt.rates.clamped);
  const FitResult slow = fit_pbar(pbar_curve({0.004, 0.06}, 20));
  CHECK(std::fabs(slow.rates.gamma_CL - 0.004) < 1e-6);
  CHECK(std::fabs(slow.rates.gamma_LC - 0.06) < 1e-6);
  CHECK_THROWS_AS(fit_pbar(std::vector<double>(20, 0.0)), NumericalError);
  CHECK_THROWS_AS(fit_pbar(std::vector<double>(4, 0.1)), NumericalError);

  // A trace that is flat from the first cycle saturates the exponent; the
  // per-cycle seepage is clamped to 1 and the plateau is still recovered.
  const FitResult flat = fit_pbar(std::vector<double>(20, 0.02));
  CHECK(flat.rates.clamped);
  CHECK(flat.lifetime == doctest::Approx(1.0));
  CHECK(flat.steady_state == doctest::Approx(0.02).epsilon(1e-6));
}

TEST_CASE("fitted rates against the chain") {
  const auto L = surface17_layout();
  const auto m = monte_carlo_surface17(L, kL1, kL2, {}, false, false, 20, 20000, 7);
  for (const QubitSpec& q : L) {
    if (!q.leakage_prone) continue;
    const MarkovRates gen = rates_from_physical(q.n_flux, kL1, kL2, 800e-9, 30e-6);
    const FitResult ex = fit_pbar(chain_expectation(q, kL1, kL2, {}, false, 20));
    // The per-cycle chain decays as (1 - a)(1 - b)^n, the fitted curve as
    // e^{-(a + b) n}: a few percent between the two at these rates.
    CHECK(std::fabs(ex.rates.gamma_CL / gen.gamma_CL - 1) < 0.07);
    CHECK(std::fabs(ex.rates.gamma_LC / gen.gamma_LC - 1) < 0.05);
    const FitSummary s = fit_trace(m.at(q.name), 200, 7);
    CHECK(std::fabs(s.fit.rates.gamma_CL - ex.rates.gamma_CL) < 4 * s.sigma_gamma_CL);
    CHECK(std::fabs(s.fit.rates.gamma_LC - ex.rates.gamma_LC) < 4 * s.sigma_gamma_LC);
    CHECK(s.fit.lifetime >= 1.0 - 2 * s.sigma_lifetime);
  }
}

TEST_CASE("lifetime against the leakage-reduction rate") {
  const QubitSpec d4 = find("D4");
  const MarkovRates base = rates_from_physical(4, kL1, kL2, 800e-9, 30e-6);
  double prev = 1e9;
  for (double R : {0.0, 0.2, 0.5, 0.8, 0.95, 1.0}) {
    const LRUParams l{R, 0.0, 1.0, 1.0};
    const auto m = monte_carlo_surface17({d4}, kL1, kL2, l, true, false, 20, 20000, 13);
    const FitSummary s = fit_trace(m.at("D4"), 200, 13);
    const FitResult ex = fit_pbar(chain_expectation(d4, kL1, kL2, l, true, 20));
    const double naive = 1.0 / (base.gamma_LC + R - base.gamma_LC * R);
    CHECK(s.fit.lifetime >= 1.0 - 2 * s.sigma_lifetime);
    CHECK(std::fabs(s.fit.lifetime - ex.lifetime) <= 3 * s.sigma_lifetime + 1e-9);
    // Exponential fit of a geometric chain never reads longer than 1 / exit probability.
    CHECK(ex.lifetime <= naive + 1e-9);
    CHECK(s.fit.lifetime <= prev + 2 * s.sigma_lifetime);
    prev = s.fit.lifetime;
  }
  CHECK(prev == doctest::Approx(1.0));
}

TEST_CASE("bootstrap error scaling") {
  const QubitSpec d4 = find("D4");
  auto var = [&](int runs) {
    const auto m = monte_carlo_surface17({d4}, kL1, kL2, {}, false, false, 20, runs, 9);
    const FitSummary s = fit_trace(m.at("D4"), 400, 3);
    return s.sigma_steady_state * s.sigma_steady_state;
  };
  const double ratio = var(20000) / var(10000);
  CHECK(ratio > 0.35);
  CHECK(ratio < 0.65);
}
