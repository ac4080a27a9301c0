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

// Thin wrappers over Boost.Math scalar solvers with absolute tolerances.

#pragma once

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <cstdint>
#include <functional>
#include <utility>

#include "reslru/errors.hpp"

namespace reslru {

struct ScalarMin {
  double x = 0.0;
  double fx = 0.0;
  std::uintmax_t evaluations = 0;
};

// Bounded Brent minimization (golden section + parabolic steps) on [lo, hi]
// with an absolute tolerance on x. The variable is mapped onto [1, 2] so
// Boost's relative tolerance becomes an absolute one.
inline ScalarMin minimize_bounded(const std::function<double(double)>& f,
                                  double lo, double hi, double abs_tol,
                                  std::uintmax_t max_iter = 200) {
  if (!(hi > lo)) fail(ErrorCode::InvalidArgument, "empty minimization bracket");
  const double width = hi - lo;
  const double eps = std::max(abs_tol / width / 1.75, 1e-15);
  int bits = static_cast<int>(std::ceil(1.0 - std::log2(eps)));
  bits = std::min(bits, 52);
  auto g = [&](double u) { return f(lo + (u - 1.0) * width); };
  std::uintmax_t iters = max_iter;
  auto r = boost::math::tools::brent_find_minima(g, 1.0, 2.0, bits, iters);
  return {lo + (r.first - 1.0) * width, r.second, iters};
}

// Bisection for a sign change of f on [lo, hi] down to abs_tol.
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, double abs_tol,
                          std::uintmax_t max_iter = 200) {
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo > 0) == (fhi > 0)) fail(ErrorCode::NoRoot, "bisection bracket has no sign change");
  auto tol = [abs_tol](double a, double b) { return std::fabs(b - a) <= abs_tol; };
  std::uintmax_t iters = max_iter;
  auto r = boost::math::tools::bisect(f, lo, hi, tol, iters);
  return 0.5 * (r.first + r.second);
}

}  // namespace reslru
