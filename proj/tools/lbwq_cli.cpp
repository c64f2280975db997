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

// lbwq: command-line front end.
//
// Exit codes: 0 success, 1 runtime or numeric failure, 2 usage or budget error.

#include <cmath>
#include <cstdio>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lbwq/error.hpp"
#include "lbwq/oracle.hpp"
#include "lbwq/quantize.hpp"
#include "lbwq/stats.hpp"
#include "lbwq/tensorio.hpp"
#include "lbwq/toytrain.hpp"

namespace {

using lbwq::io::format_double;

constexpr int kOk = 0;
constexpr int kRuntime = 1;
constexpr int kUsage = 2;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

int exit_code_for(lbwq::ErrorKind kind) {
  switch (kind) {
    case lbwq::ErrorKind::BudgetExceeded:
    case lbwq::ErrorKind::InvalidArgument:
    case lbwq::ErrorKind::UnsupportedBitWidth:
      return kUsage;
    default:
      return kRuntime;
  }
}

void print_summary(const lbwq::QuantResult<double>& q) {
  std::cout << "bits=" << q.tensor.bits << " s=" << q.tensor.scale_exp << " error=" << format_double(q.l2_error)
            << " sparsity=" << format_double(q.sparsity) << "\n";
}

// ---------------------------------------------------------------------------

struct QuantizeArgs {
  std::string input;
  std::string out;
  int bits = 0;
  double mu_ratio = 0;
  double mu_abs = 0;
  int levels_cap = 4;
  CLI::Option* ratio_opt = nullptr;
  CLI::Option* abs_opt = nullptr;
};

int run_quantize(const QuantizeArgs& a) {
  const bool has_ratio = a.ratio_opt->count() > 0;
  const bool has_abs = a.abs_opt->count() > 0;
  lbwq::QuantConfig cfg;
  cfg.bits = a.bits;
  cfg.scale_levels_cap = a.levels_cap;
  if (a.bits == 2) {
    if (has_ratio || has_abs) throw UsageError("--mu-ratio/--mu-abs do not apply to --bits 2 (exact solver)");
  } else {
    if (has_ratio == has_abs) throw UsageError("--bits >= 3 needs exactly one of --mu-ratio or --mu-abs");
    if (has_ratio) {
      cfg.mu_policy = lbwq::MuRatioOfMax{a.mu_ratio};
    } else {
      cfg.mu_policy = lbwq::MuAbsolute{a.mu_abs};
    }
  }
  const auto w = lbwq::io::read_weights(a.input);
  const auto q = lbwq::quantize_layer(w, cfg);
  if (!a.out.empty()) lbwq::io::write_quantized(q, a.out);
  print_summary(q);
  return kOk;
}

struct ExactArgs {
  std::string input;
  std::string out;
  int bits = 2;
  double budget = lbwq::kDefaultPartitionBudget;
};

int run_exact(const ExactArgs& a) {
  const auto w = lbwq::io::read_weights(a.input);
  const auto q = a.bits == 2 ? lbwq::exact_ternary(w) : lbwq::exact_general(w, a.bits, a.budget);
  if (!a.out.empty()) lbwq::io::write_quantized(q, a.out);
  print_summary(q);
  return kOk;
}

struct VerifyArgs {
  int bits = 2;
  int n = 8;
  int trials = 100;
  std::uint64_t seed = 7;
  int s_lo = -20;
  int s_hi = 20;
};

double relative_deviation(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(a - b) / std::max(std::abs(a), std::abs(b));
}

int run_oracle_verify(const VerifyArgs& a) {
  lbwq::check_bits(a.bits);
  if (a.n < 1 || a.trials < 1) throw UsageError("--n and --trials must be positive");
  const lbwq::oracle::ScaleWindow window{a.s_lo, a.s_hi};
  const int nvals = 2 * lbwq::levels_for_bits(a.bits) + 1;
  const double space = std::pow(static_cast<double>(nvals), a.n) * window.size();
  if (space > lbwq::oracle::kAssignmentBudget) {
    throw lbwq::Error(lbwq::ErrorKind::BudgetExceeded,
                      "brute-force search space " + format_double(space) + " exceeds 1e8");
  }

  std::mt19937_64 rng(a.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  double worst = 0;
  for (int trial = 0; trial < a.trials; ++trial) {
    lbwq::WeightVector<double> w(a.n);
    for (int i = 0; i < a.n; ++i) w(i) = normal(rng);
    const auto fast = a.bits == 2 ? lbwq::exact_ternary(w) : lbwq::exact_general(w, a.bits);
    const auto brute = lbwq::oracle::brute_force_assignment(w, a.bits, window);
    worst = std::max(worst, relative_deviation(fast.l2_error, brute.best_error));
  }
  const bool ok = worst < 1e-12;
  std::cout << "bits=" << a.bits << " n=" << a.n << " trials=" << a.trials
            << " max_relative_deviation=" << format_double(worst) << (ok ? " OK" : " FAIL") << "\n";
  return ok ? kOk : kRuntime;
}

struct StatsArgs {
  std::string input;
  std::string json;
  int e_lo = -16;
  int e_hi = -1;
};

std::string band_label(const lbwq::stats::MagnitudeHistogram::Row& r) {
  if (!r.lower_exp) return "|w| < 2^" + std::to_string(*r.upper_exp);
  if (!r.upper_exp) return "2^" + std::to_string(*r.lower_exp) + " <= |w|";
  return "2^" + std::to_string(*r.lower_exp) + " <= |w| < 2^" + std::to_string(*r.upper_exp);
}

int run_stats(const StatsArgs& a) {
  const auto w = lbwq::io::read_weights(a.input);
  const auto hist = lbwq::stats::power_bins(w, a.e_lo, a.e_hi);
  const auto m = lbwq::stats::moments(w);
  for (const auto& row : hist.rows()) {
    std::printf("%-26s %10lld %9.3f%%\n", band_label(row).c_str(), static_cast<long long>(row.count), row.percent);
  }
  std::cout << "n=" << m.n << " mean=" << format_double(m.mean) << " variance=" << format_double(m.variance)
            << " skewness=" << format_double(m.skewness) << " excess_kurtosis=" << format_double(m.excess_kurtosis)
            << "\n"
            << "jarque_bera=" << format_double(m.jb_statistic) << " p_value=" << format_double(m.jb_p_value)
            << "\n";
  if (!a.json.empty()) lbwq::io::write_file(a.json, lbwq::io::stats_report_string(hist, m));
  return kOk;
}

struct TrainArgs {
  int bits = 4;
  bool full = false;
  double mu_ratio = 0.75;
  int levels_cap = 4;
  std::uint64_t seed = 1;
  int epochs = 90;
  std::vector<double> ratios{0.25, 0.5, 0.75, 1.0};
  std::string json;
  CLI::Option* bits_opt = nullptr;
};

lbwq::toy::TrainConfig train_config(const TrainArgs& a) {
  lbwq::toy::TrainConfig cfg;
  cfg.seed = a.seed;
  cfg.epochs = a.epochs;
  if (!a.full) {
    lbwq::QuantConfig q;
    q.bits = a.bits;
    q.mu_policy = lbwq::MuRatioOfMax{a.mu_ratio};
    q.scale_levels_cap = a.levels_cap;
    cfg.quant = q;
  }
  return cfg;
}

int run_train(const TrainArgs& a) {
  if (a.full == (a.bits_opt->count() > 0)) throw UsageError("train-toy needs exactly one of --bits or --full");
  const auto report = lbwq::toy::train(train_config(a));
  if (!a.json.empty()) lbwq::io::write_file(a.json, lbwq::io::train_report_string(report));
  std::cout << "final_test_accuracy=" << format_double(report.final_test_accuracy) << "\n";
  return kOk;
}

int run_sweep(const TrainArgs& a) {
  const auto rows = lbwq::toy::sweep_mu(train_config(a), a.ratios);
  std::cout << "ratio final_accuracy mean_l2_error\n";
  for (const auto& r : rows) {
    std::cout << format_double(r.ratio) << " " << format_double(r.final_accuracy) << " "
              << format_double(r.mean_l2_error) << "\n";
  }
  if (!a.json.empty()) lbwq::io::write_file(a.json, lbwq::io::sweep_report_string(rows));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Low bit-width power-of-two weight quantization"};
  app.require_subcommand(1);

  QuantizeArgs qa;
  auto* quantize = app.add_subcommand("quantize", "Quantize one layer (exact for 2 bits, thresholding otherwise)");
  quantize->add_option("--input", qa.input, "Weights: text (one value per line) or JSON tensor")->required();
  quantize->add_option("--bits", qa.bits, "Bit-width b >= 2")->required();
  qa.ratio_opt = quantize->add_option("--mu-ratio", qa.mu_ratio, "mu = R * max|W|");
  qa.abs_opt = quantize->add_option("--mu-abs", qa.mu_abs, "mu given directly");
  qa.ratio_opt->excludes(qa.abs_opt);
  quantize->add_option("--levels-cap", qa.levels_cap, "Leading levels in the scale sums")->capture_default_str();
  quantize->add_option("--out", qa.out, "Write quantized JSON here");

  ExactArgs ea;
  auto* exact = app.add_subcommand("exact", "Exact least-squares quantization by partition enumeration");
  exact->add_option("--input", ea.input, "Weights file")->required();
  exact->add_option("--bits", ea.bits, "Bit-width b >= 2")->required();
  exact->add_option("--budget", ea.budget, "Maximum number of partitions C(N+n, n)")->capture_default_str();
  exact->add_option("--out", ea.out, "Write quantized JSON here");

  VerifyArgs va;
  auto* verify = app.add_subcommand("oracle-verify", "Compare the exact solver with brute force on random vectors");
  verify->add_option("--bits", va.bits)->capture_default_str();
  verify->add_option("--n", va.n, "Vector length")->capture_default_str();
  verify->add_option("--trials", va.trials)->capture_default_str();
  verify->add_option("--seed", va.seed)->capture_default_str();
  verify->add_option("--s-lo", va.s_lo, "Lowest scale exponent searched")->capture_default_str();
  verify->add_option("--s-hi", va.s_hi, "Highest scale exponent searched")->capture_default_str();

  StatsArgs sa;
  auto* stats = app.add_subcommand("stats", "Power-of-two magnitude histogram, moments and Jarque-Bera");
  stats->add_option("--input", sa.input, "Weights file")->required();
  stats->add_option("--e-lo", sa.e_lo)->capture_default_str();
  stats->add_option("--e-hi", sa.e_hi)->capture_default_str();
  stats->add_option("--json", sa.json, "Write the report as JSON");

  TrainArgs ta;
  auto* train = app.add_subcommand("train-toy", "Projected-SGD training of a toy classifier");
  ta.bits_opt = train->add_option("--bits", ta.bits, "Quantize weights to this bit-width");
  auto* full_flag = train->add_flag("--full", ta.full, "Train at full precision");
  ta.bits_opt->excludes(full_flag);
  train->add_option("--mu-ratio", ta.mu_ratio)->capture_default_str();
  train->add_option("--levels-cap", ta.levels_cap)->capture_default_str();
  train->add_option("--seed", ta.seed)->capture_default_str();
  train->add_option("--epochs", ta.epochs)->capture_default_str();
  train->add_option("--json", ta.json, "Write the TrainReport as JSON");

  TrainArgs wa;
  auto* sweep = app.add_subcommand("sweep-mu", "Train once per mu ratio and tabulate accuracy and error");
  sweep->add_option("--bits", wa.bits)->capture_default_str();
  sweep->add_option("--ratios", wa.ratios, "mu ratios in (0, 1]")->delimiter(',')->capture_default_str();
  sweep->add_option("--levels-cap", wa.levels_cap)->capture_default_str();
  sweep->add_option("--seed", wa.seed)->capture_default_str();
  sweep->add_option("--epochs", wa.epochs)->capture_default_str();
  sweep->add_option("--json", wa.json, "Write the sweep table as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    if (*quantize) return run_quantize(qa);
    if (*exact) return run_exact(ea);
    if (*verify) return run_oracle_verify(va);
    if (*stats) return run_stats(sa);
    if (*train) return run_train(ta);
    if (*sweep) return run_sweep(wa);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const lbwq::DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const lbwq::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
