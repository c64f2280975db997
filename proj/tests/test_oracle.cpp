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

#include <doctest.h>

#include <random>

#include "lbwq/oracle.hpp"
#include "lbwq/quantize.hpp"
#include "test_util.hpp"

using namespace lbwq;
using lbwq::testing::normal_vector;
using lbwq::testing::rel_diff;
using lbwq::testing::vec;

namespace {
LevelCode P(int t) { return LevelCode::make(+1, t); }
constexpr LevelCode Z = LevelCode::zero();
}  // namespace

TEST_CASE("brute_force_assignment examples") {
  SUBCASE("[4, 1]") {
    const auto r = oracle::brute_force_assignment(vec({4.0, 1.0}), 2, {-8, 8});
    CHECK(r.best_error == 1.0);
    CHECK(r.best_codes == CodeVector{P(0), Z});
    CHECK(r.best_scale == 2);
    CHECK(r.candidates_evaluated == 9u * 17u);
  }
  SUBCASE("[1]") {
    const auto r = oracle::brute_force_assignment(vec({1.0}), 2, {-4, 4});
    CHECK(r.best_error == 0.0);
    CHECK(r.best_codes == CodeVector{P(0)});
    CHECK(r.best_scale == 0);
  }
  SUBCASE("zeros") {
    for (int bits = 2; bits <= 4; ++bits) {
      const auto r = oracle::brute_force_assignment(vec({0.0, 0.0}), bits);
      CHECK(r.best_error == 0.0);
      CHECK(r.best_codes == CodeVector{Z, Z});
      CHECK(r.best_scale == 0);
    }
  }
  SUBCASE("budget") {
    try {
      oracle::brute_force_assignment(WeightVector<double>::Ones(12).eval(), 4);
      FAIL("expected BudgetExceeded");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::BudgetExceeded);
    }
  }
}

TEST_CASE("brute_force_partition examples") {
  {
    const auto r = oracle::brute_force_partition(vec({4.0, 1.0}), 2);
    CHECK(r.best_error == 1.0);
    CHECK(partition_of(r.best_codes, 1).counts == std::vector<Index>{1});
  }
  {
    const auto r = oracle::brute_force_partition(vec({1.0, -1.0, 1.0, -1.0}), 2);
    CHECK(r.best_error == 0.0);
    CHECK(partition_of(r.best_codes, 1).counts == std::vector<Index>{4});
  }
  {
    const auto r = oracle::brute_force_partition(vec({1.0, 0.45, 0.3}), 3);
    CHECK(partition_of(r.best_codes, 2).counts == std::vector<Index>{1, 2});
    CHECK(r.best_scale == 0);
    CHECK(r.best_error == doctest::Approx(0.0425).epsilon(1e-14));
  }
}

TEST_CASE("scale_scan examples") {
  CHECK(oracle::scale_scan(vec({4.0, 1.0}), CodeVector{P(0), Z}, {-8, 8}) == 2);
  CHECK(oracle::scale_scan(vec({0.5}), CodeVector{P(0)}) == -1);
  CHECK(oracle::scale_scan(vec({3.0}), CodeVector{P(0)}) == 2);
  CHECK_THROWS_AS(oracle::scale_scan(vec({3.0}), CodeVector{Z}), Error);
}

TEST_CASE("assignment and partition oracles agree with each other and the exact solver") {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 60; ++trial) {
    const int bits = trial % 3 == 0 ? 3 : 2;
    const int n = 1 + trial % (bits == 2 ? 7 : 5);
    const auto w = normal_vector(rng, n);
    const auto a = oracle::brute_force_assignment(w, bits);
    const auto p = oracle::brute_force_partition(w, bits);
    const auto e = exact_general(w, bits);
    CHECK(rel_diff(a.best_error, p.best_error) < 1e-12);
    CHECK(rel_diff(a.best_error, e.l2_error) < 1e-12);
  }
}

TEST_CASE("scale_scan matches the closed form") {
  std::mt19937_64 rng(43);
  for (int trial = 0; trial < 100; ++trial) {
    const int bits = 3 + trial % 3;
    const auto w = normal_vector(rng, 2 + trial % 20);
    const auto c = threshold_codes(w, bits, 0.75 * w.cwiseAbs().maxCoeff());
    CHECK(oracle::scale_scan(w, c) == scale_from_codes(w, c, 1 << 10));
  }
}
