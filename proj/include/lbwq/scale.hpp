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

// Scale-exponent arithmetic shared by the exact and thresholding quantizers.
//
// With u = <Q, W> (sign-matched) and v = ||Q||^2, the squared error of 2^s Q
// against W is ||W||^2 + 2^(2s) v - 2^(s+1) u. Over integer s this parabola in
// 2^s is minimized at the power of two nearest u/v in the sense of the
// midpoint 3/4 * 2^(s+1), i.e. s = floor(log2(4u / 3v)).

#pragma once

#include <cmath>
#include <string>

#include "lbwq/error.hpp"

namespace lbwq {

/// floor(log2(num / den)) for positive finite num, den. Exact: reads the
/// binary exponents and compares mantissas, no transcendental calls.
template <typename Scalar>
int floor_log2_ratio(Scalar num, Scalar den) {
  int en = 0;
  int ed = 0;
  const Scalar mn = std::frexp(num, &en);
  const Scalar md = std::frexp(den, &ed);
  return (mn >= md) ? en - ed : en - ed - 1;
}

/// s = floor(log2(4u / (3v))), computed as the largest s with 3v * 2^s <= 4u.
/// The product 3v is never rounded: the comparison goes through a fused
/// multiply-add whose sign is exact. At midpoints (u/v = 1.5 * 2^(s-1)) the
/// larger power wins.
template <typename Scalar>
int optimal_scale_exponent(Scalar u, Scalar v) {
  if (!(u > 0) || !(v > 0) || !std::isfinite(u) || !std::isfinite(v)) {
    throw Error(ErrorKind::DegenerateObjective,
                "scale exponent needs u > 0 and v > 0 (u=" + std::to_string(u) +
                    ", v=" + std::to_string(v) + ")");
  }
  const Scalar four_u = std::ldexp(u, 2);
  auto fits = [&](int s) { return std::fma(Scalar(3), std::ldexp(v, s), -four_u) <= Scalar(0); };

  // log2(4/3) is about 0.415, so the ratio estimate is off by at most two.
  int s = floor_log2_ratio(u, v);
  while (!fits(s)) --s;
  while (fits(s + 1)) ++s;
  return s;
}

/// 2^(2s) v - 2^(s+1) u: the error excess over ||W||^2 at a given s.
/// Both products are exact, so this rounds once.
template <typename Scalar>
Scalar scale_excess(Scalar u, Scalar v, int s) {
  return std::ldexp(v, 2 * s) - std::ldexp(u, s + 1);
}

/// g(u, v) = v (2^floor(log2(4u/3v)) - u/v)^2 - u^2/v, evaluated through the
/// algebraically identical min_s (2^(2s) v - 2^(s+1) u).
template <typename Scalar>
Scalar g_objective(Scalar u, Scalar v) {
  return scale_excess(u, v, optimal_scale_exponent(u, v));
}

}  // namespace lbwq
