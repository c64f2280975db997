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

#include <numeric>
#include <random>

#include "lbwq/quantize.hpp"
#include "lbwq/stats.hpp"
#include "stats_oracle.hpp"
#include "test_util.hpp"

using namespace lbwq;
using lbwq::testing::normal_vector;
using lbwq::testing::vec;

TEST_CASE("power_bins examples") {
  const auto h = stats::power_bins(vec({0.3, 0.6, 0.05}), -5, 0);
  CHECK(h.bands.size() == 5u);
  CHECK(h.bands[static_cast<std::size_t>(-2 - -5)] == 1);  // [2^-2, 2^-1)
  CHECK(h.bands[static_cast<std::size_t>(-1 - -5)] == 1);  // [2^-1, 2^0)
  CHECK(h.bands[static_cast<std::size_t>(-5 - -5)] == 1);  // [2^-5, 2^-4)
  CHECK(h.underflow == 0);
  CHECK(h.overflow == 0);

  const auto z = stats::power_bins(vec({0.0}), -5, 0);
  CHECK(z.underflow == 1);

  // residual-block table layout: underflow, 15 bands, overflow
  const auto t = stats::power_bins(vec({0.1}), -16, -1);
  CHECK(t.rows().size() == 17u);
  CHECK(*t.rows().front().upper_exp == -16);
  CHECK(*t.rows().back().lower_exp == -1);

  CHECK_THROWS_AS(stats::power_bins(vec({1.0}), 0, 0), Error);
}

TEST_CASE("power_bins edges are half-open and exhaustive") {
  const auto h = stats::power_bins(vec({0.25, std::nextafter(0.25, 0.0), 1.0, -1.0, std::nextafter(1.0, 0.0)}), -3, 0);
  CHECK(h.bands[static_cast<std::size_t>(-2 + 3)] == 1);
  CHECK(h.bands[static_cast<std::size_t>(-3 + 3)] == 1);
  CHECK(h.bands[static_cast<std::size_t>(-1 + 3)] == 1);
  CHECK(h.overflow == 2);

  std::mt19937_64 rng(3);
  const WeightVector<double> w = normal_vector(rng, 5000, 0.01);
  const auto g = stats::power_bins(w, -16, -1);
  Index total = g.underflow + g.overflow;
  for (Index c : g.bands) total += c;
  CHECK(total == w.size());
  double pct = 0;
  for (const auto& r : g.rows()) pct += r.percent;
  CHECK(pct == doctest::Approx(100.0).epsilon(1e-11));
}

TEST_CASE("moments examples") {
  const auto two = stats::moments(vec({-1.0, 1.0, -1.0, 1.0}));
  CHECK(two.skewness == 0.0);
  CHECK(two.excess_kurtosis == -2.0);
  CHECK(two.mean == 0.0);
  CHECK(two.variance == 1.0);

  CHECK(stats::moments(vec({-1.0, 0.0, 1.0})).skewness == 0.0);

  try {
    stats::moments(vec({2.0, 2.0, 2.0, 2.0}));
    FAIL("expected DegenerateSample");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DegenerateSample);
  }
}

TEST_CASE("moments agree with an independent one-pass oracle") {
  std::mt19937_64 rng(2024);
  const WeightVector<double> w = normal_vector(rng, 10000);
  const auto m = stats::moments(w);
  const auto ref = testing::reference_moments(w);
  CHECK(std::abs(m.mean - ref.mean) < 1e-12);
  CHECK(std::abs(m.variance - ref.variance) < 1e-12);
  CHECK(std::abs(m.skewness - ref.skewness) < 1e-9);
  CHECK(std::abs(m.excess_kurtosis - ref.excess_kurtosis) < 1e-9);
  CHECK(m.excess_kurtosis > -0.15);
  CHECK(m.excess_kurtosis < 0.15);
}

TEST_CASE("jarque_bera closed forms") {
  auto r = stats::jarque_bera(100, 0.0, 0.0);
  CHECK(r.statistic == 0.0);
  CHECK(r.p_value == 1.0);

  r = stats::jarque_bera(6, 1.0, 2.0);
  CHECK(r.statistic == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(r.p_value == doctest::Approx(0.36787944117144233).epsilon(1e-14));

  // large excess kurtosis at n = 10^4
  r = stats::jarque_bera(10000, 0.0, 3.0);
  CHECK(r.p_value < 1e-5);

  double prev = 2.0;
  for (double k = 0.0; k < 3.0; k += 0.25) {
    const double p = stats::jarque_bera(50, 0.1, k).p_value;
    CHECK(p < prev);
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
    prev = p;
  }
}

TEST_CASE("skewness and kurtosis are affine invariant") {
  std::mt19937_64 rng(8);
  std::exponential_distribution<double> ex(1.0);
  WeightVector<double> w(500);
  for (Index i = 0; i < w.size(); ++i) w(i) = ex(rng);
  const auto base = stats::moments(w);
  const auto pos = stats::moments((3.5 * w.array() + 2.0).matrix().eval());
  CHECK(pos.skewness == doctest::Approx(base.skewness).epsilon(1e-10));
  CHECK(pos.excess_kurtosis == doctest::Approx(base.excess_kurtosis).epsilon(1e-10));
  const auto neg = stats::moments((-0.5 * w.array() + 1.0).matrix().eval());
  CHECK(neg.skewness == doctest::Approx(-base.skewness).epsilon(1e-10));
  CHECK(neg.excess_kurtosis == doctest::Approx(base.excess_kurtosis).epsilon(1e-10));
}

TEST_CASE("sparsity_report") {
  QuantResult<double> q;
  q.tensor.codes.assign(4, LevelCode::zero());
  CHECK(stats::sparsity_report(q) == 1.0);
  q.tensor.codes.assign(4, LevelCode::make(1, 0));
  CHECK(stats::sparsity_report(q) == 0.0);

  QuantConfig cfg;
  cfg.bits = 4;
  const auto r = quantize_layer(vec({1.0, 0.4, 0.1, -0.02}), cfg);
  CHECK(stats::sparsity_report(r) == 0.25);
}
