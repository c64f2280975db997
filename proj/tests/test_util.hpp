// Copyright 2026 The LBWQ Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <random>

#include "lbwq/types.hpp"

namespace lbwq::testing {

template <typename Scalar = double>
WeightVector<Scalar> vec(std::initializer_list<Scalar> xs) {
  WeightVector<Scalar> v(static_cast<Index>(xs.size()));
  Index i = 0;
  for (Scalar x : xs) v(i++) = x;
  return v;
}

inline WeightVector<double> normal_vector(std::mt19937_64& rng, Index n, double sigma = 1.0) {
  std::normal_distribution<double> d(0.0, sigma);
  WeightVector<double> v(n);
  for (Index i = 0; i < n; ++i) v(i) = d(rng);
  return v;
}

inline double rel_diff(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

// Raw-objective scan: min over s in [lo, hi] of 2^(2s) v - 2^(s+1) u.
inline double scan_excess(double u, double v, int lo, int hi, int* argmin = nullptr) {
  double best = INFINITY;
  for (int s = lo; s <= hi; ++s) {
    const double e = std::pow(2.0, 2 * s) * v - std::pow(2.0, s + 1) * u;
    if (e < best) {
      best = e;
      if (argmin) *argmin = s;
    }
  }
  return best;
}

}  // namespace lbwq::testing
