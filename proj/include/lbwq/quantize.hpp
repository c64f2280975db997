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

// Least-squares quantization of a weight vector onto 2^s * {0, ±2^(1-n), ..., ±1}.
//
// Two routes are provided:
//  * exact solvers: sort magnitudes, assign the k_0 largest to level 0, the
//    next k_1 to level 1, and so on, picking the counts that minimize
//    g(u, v). For ternary weights (n = 1) this is a single prefix-sum scan.
//  * a thresholding scheme controlled by one parameter mu, followed by the
//    closed-form scale exponent for the resulting codes.
//
// All floating-point reductions are done in a canonical (value-sorted) order
// so results are bitwise invariant under permutation of the input.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "lbwq/error.hpp"
#include "lbwq/scale.hpp"
#include "lbwq/types.hpp"

namespace lbwq {

/// Default cap on C(N + n, n) for exact_general.
constexpr double kDefaultPartitionBudget = 1e7;

namespace detail {

/// Sum of terms after sorting them in decreasing order; the result depends
/// only on the multiset of terms.
template <typename Scalar>
Scalar canonical_sum(std::vector<Scalar>& terms) {
  std::sort(terms.begin(), terms.end(), std::greater<Scalar>());
  Scalar acc = 0;
  for (Scalar t : terms) acc += t;
  return acc;
}

template <typename Scalar>
int sign_of(Scalar x) {
  return x < 0 ? -1 : 1;
}

}  // namespace detail

/// Indices of w sorted by decreasing magnitude; equal magnitudes keep index order.
template <typename Derived>
std::vector<Index> magnitude_order(const Eigen::MatrixBase<Derived>& w) {
  std::vector<Index> order(static_cast<std::size_t>(w.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) {
    return std::abs(w(a)) > std::abs(w(b));
  });
  return order;
}

/// ||w||^2 summed in canonical order.
template <typename Derived>
typename Derived::Scalar squared_norm(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  std::vector<Scalar> terms(static_cast<std::size_t>(w.size()));
  for (Index i = 0; i < w.size(); ++i) terms[static_cast<std::size_t>(i)] = w(i) * w(i);
  return detail::canonical_sum(terms);
}

/// Binomial C(N + n, n), saturating at +inf.
inline double partition_count(Index n_weights, int levels) {
  double c = 1.0;
  for (int i = 1; i <= levels; ++i) {
    c = c * static_cast<double>(n_weights + i) / static_cast<double>(i);
    if (!std::isfinite(c)) break;
  }
  return c;
}

/// Entry i = 2^scale_exp * codes[i]; exact.
template <typename Scalar>
WeightVector<Scalar> reconstruct(const QuantizedTensor& t) {
  check_bits(t.bits);
  check_exponent<Scalar>(t.scale_exp, t.levels());
  const int n = t.levels();
  WeightVector<Scalar> out(t.size());
  for (Index i = 0; i < t.size(); ++i) {
    const LevelCode& c = t.codes[static_cast<std::size_t>(i)];
    if (!c.is_zero() && (c.level < 0 || c.level >= n)) {
      throw Error(ErrorKind::InvalidArgument, "level code outside [0, n)");
    }
    out(i) = c.scaled<Scalar>(t.scale_exp);
  }
  return out;
}

/// sum_i (reconstruct(t)_i - w_i)^2.
template <typename Derived>
typename Derived::Scalar quant_error(const Eigen::MatrixBase<Derived>& w, const QuantizedTensor& t) {
  using Scalar = typename Derived::Scalar;
  if (w.size() != t.size()) {
    throw Error(ErrorKind::ShapeMismatch, "weights have " + std::to_string(w.size()) +
                                              " entries, codes have " + std::to_string(t.size()));
  }
  const WeightVector<Scalar> r = reconstruct<Scalar>(t);
  std::vector<Scalar> terms(static_cast<std::size_t>(w.size()));
  for (Index i = 0; i < w.size(); ++i) {
    const Scalar d = r(i) - w(i);
    terms[static_cast<std::size_t>(i)] = d * d;
  }
  return detail::canonical_sum(terms);
}

/// Packs codes and scale into a QuantResult with error and partition filled in.
template <typename Derived>
QuantResult<typename Derived::Scalar> make_result(const Eigen::MatrixBase<Derived>& w,
                                                  CodeVector codes, int scale_exp, int bits) {
  QuantResult<typename Derived::Scalar> r;
  r.tensor.codes = std::move(codes);
  r.tensor.scale_exp = scale_exp;
  r.tensor.bits = bits;
  r.partition = partition_of(r.tensor.codes, levels_for_bits(bits));
  r.l2_error = quant_error(w, r.tensor);
  r.sparsity = zero_fraction(r.tensor.codes);
  return r;
}

/// Visits every (k_0, ..., k_(n-1)) with sum <= N in lexicographic order,
/// passing the counts and the pair (u, v) = (sum_t 2^-t ||W_[k_t]||_1,
/// sum_t k_t 2^-2t) over the magnitude-sorted weights. The all-zero
/// partition is visited first with u = v = 0.
template <typename Derived, typename Visitor>
void enumerate_partitions(const Eigen::MatrixBase<Derived>& w, int bits, Visitor&& visit) {
  using Scalar = typename Derived::Scalar;
  check_bits(bits);
  const int n = levels_for_bits(bits);
  const Index size = w.size();

  const std::vector<Index> order = magnitude_order(w);
  std::vector<Scalar> prefix(static_cast<std::size_t>(size) + 1, Scalar(0));
  for (Index j = 0; j < size; ++j) {
    prefix[static_cast<std::size_t>(j) + 1] =
        prefix[static_cast<std::size_t>(j)] + std::abs(w(order[static_cast<std::size_t>(j)]));
  }

  std::vector<Index> counts(static_cast<std::size_t>(n), 0);
  auto recurse = [&](auto&& self, int level, Index start, Scalar u, Scalar v) -> void {
    if (level == n) {
      visit(std::span<const Index>(counts), u, v);
      return;
    }
    for (Index k = 0; start + k <= size; ++k) {
      counts[static_cast<std::size_t>(level)] = k;
      const Scalar group = prefix[static_cast<std::size_t>(start + k)] -
                           prefix[static_cast<std::size_t>(start)];
      self(self, level + 1, start + k, u + std::ldexp(group, -level),
           v + std::ldexp(static_cast<Scalar>(k), -2 * level));
    }
    counts[static_cast<std::size_t>(level)] = 0;
  };
  recurse(recurse, 0, Index{0}, Scalar(0), Scalar(0));
}

/// Codes for a partition over the magnitude-sorted weights: the first k_0
/// get level 0, the next k_1 level 1, etc., each carrying sign(w).
template <typename Derived>
CodeVector codes_from_partition(const Eigen::MatrixBase<Derived>& w, std::span<const Index> counts) {
  const std::vector<Index> order = magnitude_order(w);
  CodeVector codes(static_cast<std::size_t>(w.size()), LevelCode::zero());
  std::size_t pos = 0;
  for (std::size_t t = 0; t < counts.size(); ++t) {
    for (Index j = 0; j < counts[t]; ++j, ++pos) {
      const Index i = order[pos];
      codes[static_cast<std::size_t>(i)] = LevelCode::make(detail::sign_of(w(i)), static_cast<int>(t));
    }
  }
  return codes;
}

/// Exact b = 2 solver. O(N log N): one sort and one prefix-sum scan.
template <typename Derived>
QuantResult<typename Derived::Scalar> exact_ternary(const Eigen::MatrixBase<Derived>& w) {
  using Scalar = typename Derived::Scalar;
  if (w.size() < 1) throw Error(ErrorKind::InvalidArgument, "empty weight vector");
  check_finite(w);

  const std::vector<Index> order = magnitude_order(w);
  // The all-zero candidate has excess 0 over ||W||^2; g < 0 whenever u > 0.
  Index best_k = 0;
  Scalar best_g = 0;
  Scalar best_u = 0;
  Scalar prefix = 0;
  for (Index k = 1; k <= w.size(); ++k) {
    prefix += std::abs(w(order[static_cast<std::size_t>(k - 1)]));
    if (prefix == 0) continue;
    const Scalar g = g_objective(prefix, static_cast<Scalar>(k));
    if (g < best_g) {
      best_g = g;
      best_k = k;
      best_u = prefix;
    }
  }

  CodeVector codes(static_cast<std::size_t>(w.size()), LevelCode::zero());
  int s = 0;
  if (best_k > 0) {
    for (Index j = 0; j < best_k; ++j) {
      const Index i = order[static_cast<std::size_t>(j)];
      codes[static_cast<std::size_t>(i)] = LevelCode::make(detail::sign_of(w(i)), 0);
    }
    s = optimal_scale_exponent(best_u, static_cast<Scalar>(best_k));
    check_exponent<Scalar>(s, 1);
  }
  return make_result(w, std::move(codes), s, 2);
}

/// Exact solver for any bit-width by enumerating every level partition.
/// Ties go to the lexicographically smallest (k_0, ..., k_(n-1)).
/// Throws BudgetExceeded when C(N + n, n) > budget.
template <typename Derived>
QuantResult<typename Derived::Scalar> exact_general(const Eigen::MatrixBase<Derived>& w, int bits,
                                                    double budget = kDefaultPartitionBudget) {
  using Scalar = typename Derived::Scalar;
  check_bits(bits);
  if (w.size() < 1) throw Error(ErrorKind::InvalidArgument, "empty weight vector");
  check_finite(w);
  const int n = levels_for_bits(bits);
  const double count = partition_count(w.size(), n);
  if (count > budget) {
    throw Error(ErrorKind::BudgetExceeded, "C(N+n, n) = " + std::to_string(count) +
                                               " partitions exceeds budget " +
                                               std::to_string(budget));
  }

  std::vector<Index> best_counts(static_cast<std::size_t>(n), 0);
  Scalar best_g = 0;
  Scalar best_u = 0;
  Scalar best_v = 0;
  enumerate_partitions(w, bits, [&](std::span<const Index> counts, Scalar u, Scalar v) {
    // u == 0 covers the all-zero partition and partitions made only of zero
    // weights; neither beats the all-zero baseline.
    if (u == 0) return;
    const Scalar g = g_objective(u, v);
    if (g < best_g) {
      best_g = g;
      best_u = u;
      best_v = v;
      best_counts.assign(counts.begin(), counts.end());
    }
  });

  int s = 0;
  if (best_u > 0) {
    s = optimal_scale_exponent(best_u, best_v);
    check_exponent<Scalar>(s, n);
  }
  return make_result(w, codes_from_partition(w, best_counts), s, bits);
}

/// Band thresholding with a single parameter mu (bits >= 3):
///   |w| <  2^(2-n) mu / 3             -> 0
///   2^(2-n) mu / 3 <= |w| < 2^(2-n) mu -> ±2^(1-n)
///   2^(-t) mu <= |w| < 2^(1-t) mu      -> ±2^(-t),  t = 1..n-2
///   mu <= |w|                          -> ±1
/// Band edges are compared exactly, including the division by 3.
template <typename Derived>
CodeVector threshold_codes(const Eigen::MatrixBase<Derived>& w, int bits,
                           typename Derived::Scalar mu) {
  using Scalar = typename Derived::Scalar;
  check_bits(bits);
  if (bits == 2) {
    throw Error(ErrorKind::UnsupportedBitWidth, "thresholding needs bits >= 3; use exact_ternary");
  }
  if (!(mu > 0) || !std::isfinite(mu)) {
    throw Error(ErrorKind::InvalidArgument, "mu must be positive and finite");
  }
  check_finite(w);
  const int n = levels_for_bits(bits);
  const Scalar low_edge = std::ldexp(mu, 2 - n);

  CodeVector codes(static_cast<std::size_t>(w.size()), LevelCode::zero());
  for (Index i = 0; i < w.size(); ++i) {
    const Scalar a = std::abs(w(i));
    int level = -1;
    if (a >= mu) {
      level = 0;
    } else if (a >= low_edge) {
      level = -floor_log2_ratio(a, mu);
    } else if (std::fma(Scalar(3), a, -low_edge) >= 0) {
      level = n - 1;
    }
    if (level >= 0) codes[static_cast<std::size_t>(i)] = LevelCode::make(detail::sign_of(w(i)), level);
  }
  return codes;
}

/// Closed-form scale exponent for fixed sign-matched codes:
/// floor(log2(4 u / 3 v)) with u = sum_t 2^-t sum_{level t} |w_i| and
/// v = sum_t k_t 2^-2t, both restricted to levels t < cap. If no code falls in
/// the leading cap levels the full sums are used.
template <typename Derived>
int scale_from_codes(const Eigen::MatrixBase<Derived>& w, const CodeVector& codes, int cap) {
  using Scalar = typename Derived::Scalar;
  if (static_cast<Index>(codes.size()) != w.size()) {
    throw Error(ErrorKind::ShapeMismatch, "codes and weights differ in length");
  }
  if (cap < 1) throw Error(ErrorKind::InvalidArgument, "levels cap must be >= 1");

  int top = -1;
  for (const auto& c : codes) {
    if (c.is_zero()) continue;
    if (c.level < 0) throw Error(ErrorKind::InvalidArgument, "negative level code");
    top = std::max(top, c.level);
  }
  if (top < 0) throw Error(ErrorKind::NoNonzeroCodes, "all codes are zero");

  std::vector<std::vector<Scalar>> groups(static_cast<std::size_t>(top) + 1);
  for (Index i = 0; i < w.size(); ++i) {
    const LevelCode& c = codes[static_cast<std::size_t>(i)];
    if (!c.is_zero()) groups[static_cast<std::size_t>(c.level)].push_back(std::abs(w(i)));
  }

  auto sums = [&](int limit) {
    Scalar u = 0;
    Scalar v = 0;
    for (int t = 0; t < std::min(limit, top + 1); ++t) {
      auto& g = groups[static_cast<std::size_t>(t)];
      const auto k = static_cast<Scalar>(g.size());
      u += std::ldexp(detail::canonical_sum(g), -t);
      v += std::ldexp(k, -2 * t);
    }
    return std::pair{u, v};
  };

  auto [u, v] = sums(cap);
  if (u == 0 && v == 0) std::tie(u, v) = sums(top + 1);
  return optimal_scale_exponent(u, v);
}

/// mu resolved from the policy for a given layer.
template <typename Derived>
typename Derived::Scalar resolve_mu(const Eigen::MatrixBase<Derived>& w, const MuPolicy& policy) {
  using Scalar = typename Derived::Scalar;
  if (const auto* r = std::get_if<MuRatioOfMax>(&policy)) {
    return static_cast<Scalar>(r->ratio) * w.cwiseAbs().maxCoeff();
  }
  return static_cast<Scalar>(std::get<MuAbsolute>(policy).mu);
}

/// Layerwise quantization: exact ternary for 2 bits, thresholding plus the
/// closed-form scale otherwise. An all-zero input (or one where every weight
/// falls below the lowest band) yields all-Zero codes with s = 0.
template <typename Derived>
QuantResult<typename Derived::Scalar> quantize_layer(const Eigen::MatrixBase<Derived>& w,
                                                     const QuantConfig& cfg) {
  cfg.validate();
  if (w.size() < 1) throw Error(ErrorKind::InvalidArgument, "empty weight vector");
  check_finite(w);
  if (cfg.bits == 2) return exact_ternary(w);

  CodeVector codes;
  const auto mu = resolve_mu(w, cfg.mu_policy);
  if (mu > 0) {
    codes = threshold_codes(w, cfg.bits, mu);
  } else {
    codes.assign(static_cast<std::size_t>(w.size()), LevelCode::zero());
  }
  const bool any = std::any_of(codes.begin(), codes.end(), [](const LevelCode& c) { return !c.is_zero(); });
  int s = 0;
  if (any) {
    s = scale_from_codes(w, codes, cfg.scale_levels_cap);
    check_exponent<typename Derived::Scalar>(s, cfg.levels());
  }
  return make_result(w, std::move(codes), s, cfg.bits);
}

}  // namespace lbwq
