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

// Brute-force reference solvers. These exist to certify the fast solvers and
// deliberately avoid sharing code paths with them: errors are always computed
// by explicit reconstruction, summed in index order.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "lbwq/error.hpp"
#include "lbwq/scale.hpp"
#include "lbwq/types.hpp"

namespace lbwq::oracle {

struct ScaleWindow {
  int lo = -20;
  int hi = 20;

  int size() const { return hi - lo + 1; }
};

constexpr double kAssignmentBudget = 1e8;
constexpr double kPartitionBudget = 1e7;

template <typename Scalar>
struct OracleResult {
  Scalar best_error = 0;
  CodeVector best_codes;
  int best_scale = 0;
  std::uint64_t candidates_evaluated = 0;
};

namespace detail {

template <typename Scalar>
struct Best {
  Scalar error = std::numeric_limits<Scalar>::infinity();
  Index nonzeros = 0;
  int scale = 0;

  // smallest error, then fewest nonzero codes, then largest s
  bool improved_by(Scalar e, Index nz, int s) const {
    if (e != error) return e < error;
    if (nz != nonzeros) return nz < nonzeros;
    return s > scale;
  }
};

template <typename Derived>
typename Derived::Scalar direct_error(const Eigen::MatrixBase<Derived>& w, const CodeVector& codes, int s) {
  using Scalar = typename Derived::Scalar;
  Scalar acc = 0;
  for (Index i = 0; i < w.size(); ++i) {
    const LevelCode& c = codes[static_cast<std::size_t>(i)];
    const Scalar q = c.is_zero() ? Scalar(0) : Scalar(c.sign) * std::ldexp(Scalar(1), s - c.level);
    const Scalar d = q - w(i);
    acc += d * d;
  }
  return acc;
}

inline Index count_nonzero(const CodeVector& codes) {
  return static_cast<Index>(std::count_if(codes.begin(), codes.end(),
                                          [](const LevelCode& c) { return !c.is_zero(); }));
}

}  // namespace detail

/// Exhaustive search of the raw problem: every entry independently takes any
/// of the 2n + 1 values, crossed with every s in the window.
/// Throws BudgetExceeded when (2n+1)^N * |window| > budget.
template <typename Derived>
OracleResult<typename Derived::Scalar> brute_force_assignment(const Eigen::MatrixBase<Derived>& w, int bits,
                                                              ScaleWindow window = {},
                                                              double budget = kAssignmentBudget) {
  using Scalar = typename Derived::Scalar;
  check_bits(bits);
  check_finite(w);
  if (window.hi < window.lo) throw Error(ErrorKind::InvalidArgument, "empty scale window");
  const int n = levels_for_bits(bits);
  const Index size = w.size();
  const int nvals = 2 * n + 1;
  const double space = std::pow(static_cast<double>(nvals), static_cast<double>(size)) * window.size();
  if (space > budget) {
    throw Error(ErrorKind::BudgetExceeded,
                "assignment search space " + std::to_string(space) + " exceeds " + std::to_string(budget));
  }

  // value slot 0 is zero, then +2^-t, -2^-t for each level
  std::vector<LevelCode> alphabet(static_cast<std::size_t>(nvals));
  for (int t = 0; t < n; ++t) {
    alphabet[static_cast<std::size_t>(1 + 2 * t)] = LevelCode::make(+1, t);
    alphabet[static_cast<std::size_t>(2 + 2 * t)] = LevelCode::make(-1, t);
  }

  OracleResult<Scalar> out;
  detail::Best<Scalar> best;
  std::vector<int> pick(static_cast<std::size_t>(size), 0);
  std::vector<int> best_pick(static_cast<std::size_t>(size), 0);
  std::vector<Scalar> terms(static_cast<std::size_t>(size * nvals));

  for (int s = window.lo; s <= window.hi; ++s) {
    for (Index i = 0; i < size; ++i) {
      for (int k = 0; k < nvals; ++k) {
        const LevelCode& c = alphabet[static_cast<std::size_t>(k)];
        const Scalar q = c.is_zero() ? Scalar(0) : Scalar(c.sign) * std::ldexp(Scalar(1), s - c.level);
        const Scalar d = q - w(i);
        terms[static_cast<std::size_t>(i * nvals + k)] = d * d;
      }
    }
    auto dfs = [&](auto&& self, Index i, Scalar acc, Index nz) -> void {
      if (i == size) {
        ++out.candidates_evaluated;
        if (best.improved_by(acc, nz, s)) {
          best = {acc, nz, s};
          best_pick = pick;
        }
        return;
      }
      for (int k = 0; k < nvals; ++k) {
        pick[static_cast<std::size_t>(i)] = k;
        self(self, i + 1, acc + terms[static_cast<std::size_t>(i * nvals + k)], nz + (k != 0));
      }
    };
    dfs(dfs, Index{0}, Scalar(0), Index{0});
  }

  out.best_error = best.error;
  out.best_codes.resize(static_cast<std::size_t>(size));
  for (Index i = 0; i < size; ++i) {
    out.best_codes[static_cast<std::size_t>(i)] = alphabet[static_cast<std::size_t>(best_pick[static_cast<std::size_t>(i)])];
  }
  // every s ties for the all-zero assignment; report the canonical 0
  out.best_scale = best.nonzeros == 0 ? 0 : best.scale;
  return out;
}

/// Enumerates level partitions over magnitude-sorted weights and evaluates
/// the true squared error on s in [s_hat - 3, s_hat + 3], where s_hat is the
/// closed-form exponent for the partition.
template <typename Derived>
OracleResult<typename Derived::Scalar> brute_force_partition(const Eigen::MatrixBase<Derived>& w, int bits,
                                                             double budget = kPartitionBudget) {
  using Scalar = typename Derived::Scalar;
  check_bits(bits);
  check_finite(w);
  const int n = levels_for_bits(bits);
  const Index size = w.size();

  double space = 1.0;
  for (int i = 1; i <= n; ++i) space = space * static_cast<double>(size + i) / i;
  if (space > budget) {
    throw Error(ErrorKind::BudgetExceeded, "partition count " + std::to_string(space) +
                                               " exceeds " + std::to_string(budget));
  }

  std::vector<Index> sorted(static_cast<std::size_t>(size));
  std::iota(sorted.begin(), sorted.end(), Index{0});
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](Index a, Index b) { return std::abs(w(a)) > std::abs(w(b)); });

  OracleResult<Scalar> out;
  detail::Best<Scalar> best;
  CodeVector codes(static_cast<std::size_t>(size), LevelCode::zero());

  auto evaluate = [&]() {
    Scalar u = 0;
    Scalar v = 0;
    for (Index i = 0; i < size; ++i) {
      const LevelCode& c = codes[static_cast<std::size_t>(i)];
      if (c.is_zero()) continue;
      u += std::abs(w(i)) * std::ldexp(Scalar(1), -c.level);
      v += std::ldexp(Scalar(1), -2 * c.level);
    }
    const Index nz = detail::count_nonzero(codes);
    if (nz == 0) {
      ++out.candidates_evaluated;
      const Scalar e = detail::direct_error(w, codes, 0);
      if (best.improved_by(e, nz, 0)) {
        best = {e, nz, 0};
        out.best_codes = codes;
      }
      return;
    }
    // only zero-valued weights selected: error ||W||^2 + v 4^s, dominated by all-zero
    if (u == 0) return;
    const int s_hat = optimal_scale_exponent(u, v);
    for (int s = s_hat - 3; s <= s_hat + 3; ++s) {
      ++out.candidates_evaluated;
      const Scalar e = detail::direct_error(w, codes, s);
      if (best.improved_by(e, nz, s)) {
        best = {e, nz, s};
        out.best_codes = codes;
      }
    }
  };

  auto recurse = [&](auto&& self, int level, Index start) -> void {
    if (level == n) {
      evaluate();
      return;
    }
    // k = 0 first, then grow the group one weight at a time
    self(self, level + 1, start);
    for (Index end = start + 1; end <= size; ++end) {
      const Index i = sorted[static_cast<std::size_t>(end - 1)];
      codes[static_cast<std::size_t>(i)] = LevelCode::make(w(i) < 0 ? -1 : 1, level);
      self(self, level + 1, end);
    }
    for (Index j = start; j < size; ++j) codes[static_cast<std::size_t>(sorted[static_cast<std::size_t>(j)])] = LevelCode::zero();
  };
  recurse(recurse, 0, Index{0});

  out.best_error = best.error;
  out.best_scale = best.scale;
  return out;
}

/// Integer s in the window minimizing the squared error for fixed codes.
/// Ties go to the larger s.
template <typename Derived>
int scale_scan(const Eigen::MatrixBase<Derived>& w, const CodeVector& codes, ScaleWindow window = {}) {
  using Scalar = typename Derived::Scalar;
  if (static_cast<Index>(codes.size()) != w.size()) {
    throw Error(ErrorKind::ShapeMismatch, "codes and weights differ in length");
  }
  if (detail::count_nonzero(codes) == 0) throw Error(ErrorKind::NoNonzeroCodes, "all codes are zero");
  int best_s = window.lo;
  Scalar best_e = std::numeric_limits<Scalar>::infinity();
  for (int s = window.lo; s <= window.hi; ++s) {
    const Scalar e = detail::direct_error(w, codes, s);
    if (e <= best_e) {
      best_e = e;
      best_s = s;
    }
  }
  return best_s;
}

}  // namespace lbwq::oracle
