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

#include <cmath>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lbwq/error.hpp"

namespace lbwq {

using Index = Eigen::Index;

/// A layer's full-precision weights, flattened.
template <typename Scalar>
using WeightVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Number of nonzero magnitude levels for a bit-width: n = 2^(bits-2).
constexpr int levels_for_bits(int bits) { return 1 << (bits - 2); }

constexpr int kMinBits = 2;
constexpr int kMaxBits = 16;

inline void check_bits(int bits) {
  if (bits < kMinBits || bits > kMaxBits) {
    throw Error(ErrorKind::UnsupportedBitWidth,
                "bit-width must lie in [2, 16], got " + std::to_string(bits));
  }
}

/// One quantized entry: Zero, or sign * 2^(-level).
struct LevelCode {
  std::int8_t sign = 0;  // -1, 0 (Zero) or +1
  int level = 0;         // meaningful only when sign != 0

  static constexpr LevelCode zero() { return {}; }
  static constexpr LevelCode make(int sign, int level) {
    return {static_cast<std::int8_t>(sign < 0 ? -1 : 1), level};
  }

  constexpr bool is_zero() const { return sign == 0; }

  /// Value before the layer scale is applied. Exact.
  template <typename Scalar>
  Scalar value() const {
    return is_zero() ? Scalar(0) : Scalar(sign) * std::ldexp(Scalar(1), -level);
  }

  /// Value of 2^scale_exp * code. Exact as long as the exponent is representable.
  template <typename Scalar>
  Scalar scaled(int scale_exp) const {
    return is_zero() ? Scalar(0) : Scalar(sign) * std::ldexp(Scalar(1), scale_exp - level);
  }

  constexpr LevelCode operator-() const { return {static_cast<std::int8_t>(-sign), level}; }

  friend constexpr bool operator==(const LevelCode& a, const LevelCode& b) {
    return a.sign == b.sign && (a.sign == 0 || a.level == b.level);
  }
};

using CodeVector = std::vector<LevelCode>;

/// mu = ratio * max|W|.
struct MuRatioOfMax {
  double ratio = 0.75;
};

/// mu given directly.
struct MuAbsolute {
  double mu = 1.0;
};

using MuPolicy = std::variant<MuRatioOfMax, MuAbsolute>;

struct QuantConfig {
  int bits = 4;
  MuPolicy mu_policy = MuRatioOfMax{};
  /// Leading levels used in the scale sums; values >= levels() mean all levels.
  int scale_levels_cap = 4;

  int levels() const { return levels_for_bits(bits); }

  void validate() const {
    check_bits(bits);
    if (scale_levels_cap < 1) {
      throw Error(ErrorKind::InvalidArgument, "scale_levels_cap must be >= 1");
    }
    if (const auto* r = std::get_if<MuRatioOfMax>(&mu_policy)) {
      if (!(r->ratio > 0.0 && r->ratio <= 1.0)) {
        throw Error(ErrorKind::InvalidArgument, "mu ratio must lie in (0, 1]");
      }
    } else if (const auto* a = std::get_if<MuAbsolute>(&mu_policy)) {
      if (!(a->mu > 0.0) || !std::isfinite(a->mu)) {
        throw Error(ErrorKind::InvalidArgument, "absolute mu must be positive and finite");
      }
    }
  }
};

/// Per-weight codes plus the layer scale exponent; entry i reconstructs to
/// 2^scale_exp * codes[i].
struct QuantizedTensor {
  CodeVector codes;
  int scale_exp = 0;
  int bits = 2;

  Index size() const { return static_cast<Index>(codes.size()); }
  int levels() const { return levels_for_bits(bits); }

  friend bool operator==(const QuantizedTensor&, const QuantizedTensor&) = default;
};

/// Counts k_t of weights at each nonzero level t.
struct LevelPartition {
  std::vector<Index> counts;
  Index total = 0;  // N

  Index nonzeros() const {
    Index s = 0;
    for (Index k : counts) s += k;
    return s;
  }
  Index zeros() const { return total - nonzeros(); }

  friend bool operator==(const LevelPartition&, const LevelPartition&) = default;
};

template <typename Scalar>
struct QuantResult {
  QuantizedTensor tensor;
  LevelPartition partition;
  Scalar l2_error = 0;
  double sparsity = 0.0;
};

/// Exponent range inside which 2^s * 2^(-t) stays an exact normal number.
template <typename Scalar>
struct ExponentLimits;

template <>
struct ExponentLimits<double> {
  static constexpr int max_abs_scale = 500;
  static constexpr int min_level_exp = -1000;
};

template <>
struct ExponentLimits<float> {
  static constexpr int max_abs_scale = 60;
  static constexpr int min_level_exp = -120;
};

template <typename Scalar>
void check_exponent(int scale_exp, int levels) {
  using L = ExponentLimits<Scalar>;
  if (scale_exp > L::max_abs_scale || scale_exp < -L::max_abs_scale ||
      scale_exp - (levels - 1) < L::min_level_exp) {
    throw Error(ErrorKind::ExponentOverflow,
                "scale exponent " + std::to_string(scale_exp) + " outside the exact range");
  }
}

template <typename Derived>
void check_finite(const Eigen::MatrixBase<Derived>& w) {
  if (!w.allFinite()) throw Error(ErrorKind::NonFiniteInput, "weights must be finite");
}

inline LevelPartition partition_of(const CodeVector& codes, int levels) {
  LevelPartition p;
  p.counts.assign(static_cast<std::size_t>(levels), 0);
  p.total = static_cast<Index>(codes.size());
  for (const auto& c : codes) {
    if (c.is_zero()) continue;
    if (c.level < 0 || c.level >= levels) {
      throw Error(ErrorKind::InvalidArgument, "level code outside [0, n)");
    }
    ++p.counts[static_cast<std::size_t>(c.level)];
  }
  return p;
}

inline double zero_fraction(const CodeVector& codes) {
  if (codes.empty()) return 0.0;
  std::size_t z = 0;
  for (const auto& c : codes) z += c.is_zero() ? 1 : 0;
  return static_cast<double>(z) / static_cast<double>(codes.size());
}

}  // namespace lbwq
