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
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lbwq/error.hpp"
#include "lbwq/types.hpp"

namespace lbwq::stats {

/// Counts of |w| per power-of-two band. Band e (e_lo <= e < e_hi) holds
/// 2^e <= |w| < 2^(e+1); underflow holds |w| < 2^e_lo (including exact
/// zeros), overflow holds |w| >= 2^e_hi.
struct MagnitudeHistogram {
  int e_lo = 0;
  int e_hi = 0;
  Index underflow = 0;
  std::vector<Index> bands;  // index e - e_lo
  Index overflow = 0;
  Index total = 0;

  double percent(Index count) const {
    return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
  }

  struct Row {
    std::optional<int> lower_exp;  // none for the underflow row
    std::optional<int> upper_exp;  // none for the overflow row
    Index count = 0;
    double percent = 0.0;
  };

  /// Rows in increasing magnitude: underflow, bands, overflow.
  std::vector<Row> rows() const {
    std::vector<Row> out;
    out.reserve(bands.size() + 2);
    out.push_back({std::nullopt, e_lo, underflow, percent(underflow)});
    for (std::size_t k = 0; k < bands.size(); ++k) {
      const int e = e_lo + static_cast<int>(k);
      out.push_back({e, e + 1, bands[k], percent(bands[k])});
    }
    out.push_back({e_hi, std::nullopt, overflow, percent(overflow)});
    return out;
  }
};

struct MomentsReport {
  double mean = 0;
  double variance = 0;
  double skewness = 0;
  double excess_kurtosis = 0;
  double jb_statistic = 0;
  double jb_p_value = 1;
  Index n = 0;
};

struct JarqueBera {
  double statistic = 0;
  double p_value = 1;
};

template <typename Derived>
MagnitudeHistogram power_bins(const Eigen::MatrixBase<Derived>& w, int e_lo, int e_hi) {
  if (!(e_lo < e_hi)) throw Error(ErrorKind::InvalidArgument, "power_bins needs e_lo < e_hi");
  check_finite(w);
  MagnitudeHistogram h;
  h.e_lo = e_lo;
  h.e_hi = e_hi;
  h.bands.assign(static_cast<std::size_t>(e_hi - e_lo), 0);
  h.total = w.size();
  for (Index i = 0; i < w.size(); ++i) {
    const auto a = std::abs(w(i));
    if (a == 0) {
      ++h.underflow;
      continue;
    }
    int exp = 0;
    std::frexp(a, &exp);  // a in [2^(exp-1), 2^exp)
    const int e = exp - 1;
    if (e < e_lo) {
      ++h.underflow;
    } else if (e >= e_hi) {
      ++h.overflow;
    } else {
      ++h.bands[static_cast<std::size_t>(e - e_lo)];
    }
  }
  return h;
}

/// JB = n/6 (S^2 + K^2/4); p from the chi-square(2) survival function exp(-JB/2).
inline JarqueBera jarque_bera(Index n, double skewness, double excess_kurtosis) {
  JarqueBera r;
  r.statistic = static_cast<double>(n) / 6.0 *
                (skewness * skewness + excess_kurtosis * excess_kurtosis / 4.0);
  r.p_value = std::exp(-r.statistic / 2.0);
  return r;
}

inline JarqueBera jarque_bera(const MomentsReport& m) {
  return jarque_bera(m.n, m.skewness, m.excess_kurtosis);
}

/// Population central moments (divide by n), with Jarque-Bera filled in.
/// Two passes: mean first, then centred powers.
template <typename Derived>
MomentsReport moments(const Eigen::MatrixBase<Derived>& w) {
  check_finite(w);
  const Index n = w.size();
  if (n < 2) throw Error(ErrorKind::DegenerateSample, "moments need at least two samples");

  const Eigen::VectorXd x = w.template cast<double>();
  const double mean = x.mean();
  const Eigen::ArrayXd d = x.array() - mean;
  const Eigen::ArrayXd d2 = d.square();
  const double m2 = d2.mean();
  const double m3 = (d2 * d).mean();
  const double m4 = d2.square().mean();
  if (!(m2 > 0)) throw Error(ErrorKind::DegenerateSample, "sample has zero variance");

  MomentsReport r;
  r.n = n;
  r.mean = mean;
  r.variance = m2;
  r.skewness = m3 / std::pow(m2, 1.5);
  r.excess_kurtosis = m4 / (m2 * m2) - 3.0;
  const JarqueBera jb = jarque_bera(r);
  r.jb_statistic = jb.statistic;
  r.jb_p_value = jb.p_value;
  return r;
}

/// Fraction of weights quantized exactly to zero.
template <typename Scalar>
double sparsity_report(const QuantResult<Scalar>& q) {
  return zero_fraction(q.tensor.codes);
}

}  // namespace lbwq::stats
