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

#include "lbwq/tensorio.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "lbwq/error.hpp"

namespace lbwq::io {

using json = nlohmann::ordered_json;

namespace {

std::string_view trim(std::string_view s) {
  const auto* ws = " \t\r\n\v\f";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(ws);
  return s.substr(b, e - b + 1);
}

json parse_json(std::string_view text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::SchemaError, std::string("invalid JSON: ") + e.what());
  }
}

const json& require(const json& obj, const char* key) {
  if (!obj.is_object()) throw Error(ErrorKind::SchemaError, "expected a JSON object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::SchemaError, std::string("missing key \"") + key + "\"");
  return *it;
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorKind::SchemaError, std::string(what) + " must be a number");
  return j.get<double>();
}

long long integer(const json& j, const char* what) {
  if (!j.is_number_integer()) throw Error(ErrorKind::SchemaError, std::string(what) + " must be an integer");
  return j.get<long long>();
}

json histogram_json(const stats::MagnitudeHistogram& h) {
  json rows = json::array();
  for (const auto& r : h.rows()) {
    rows.push_back({{"lower_exp", r.lower_exp ? json(*r.lower_exp) : json(nullptr)},
                    {"upper_exp", r.upper_exp ? json(*r.upper_exp) : json(nullptr)},
                    {"count", r.count},
                    {"percent", r.percent}});
  }
  return {{"e_lo", h.e_lo}, {"e_hi", h.e_hi}, {"total", h.total}, {"rows", rows}};
}

}  // namespace

std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

WeightVector<double> parse_text_vector(std::string_view text) {
  std::vector<double> values;
  std::size_t line_no = 0;
  while (!text.empty()) {
    ++line_no;
    const auto nl = text.find('\n');
    std::string_view line = trim(text.substr(0, nl));
    text = (nl == std::string_view::npos) ? std::string_view{} : text.substr(nl + 1);
    if (line.empty() || line.front() == '#') continue;
    if (line.front() == '+') line.remove_prefix(1);
    double v = 0;
    const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), v);
    if (ec != std::errc{} || ptr != line.data() + line.size()) {
      throw ParseError(line_no, "not a decimal number: \"" + std::string(line) + "\"");
    }
    if (!std::isfinite(v)) throw ParseError(line_no, "value is not finite");
    values.push_back(v);
  }
  if (values.empty()) throw Error(ErrorKind::EmptyInput, "no values in input");
  return Eigen::Map<const WeightVector<double>>(values.data(), static_cast<Index>(values.size()));
}

WeightVector<double> read_text_vector(const std::filesystem::path& path) {
  return parse_text_vector(read_file(path));
}

TensorFile parse_json_tensor(std::string_view text) {
  const json j = parse_json(text);
  TensorFile t;
  const json& name = require(j, "name");
  if (!name.is_string()) throw Error(ErrorKind::SchemaError, "name must be a string");
  t.name = name.get<std::string>();

  const json& shape = require(j, "shape");
  if (!shape.is_array()) throw Error(ErrorKind::SchemaError, "shape must be an array");
  Index expected = 1;
  for (const auto& d : shape) {
    const long long dim = integer(d, "shape entry");
    if (dim < 1) throw Error(ErrorKind::SchemaError, "shape entries must be positive");
    t.shape.push_back(static_cast<Index>(dim));
    expected *= static_cast<Index>(dim);
  }

  const json& data = require(j, "data");
  if (!data.is_array()) throw Error(ErrorKind::SchemaError, "data must be an array");
  if (static_cast<Index>(data.size()) != expected) {
    throw Error(ErrorKind::ShapeMismatch, "shape holds " + std::to_string(expected) + " values, data has " +
                                              std::to_string(data.size()));
  }
  t.data.resize(expected);
  for (Index i = 0; i < expected; ++i) t.data(i) = number(data[static_cast<std::size_t>(i)], "data entry");
  return t;
}

std::string json_tensor_string(const TensorFile& t) {
  Index expected = 1;
  for (Index d : t.shape) expected *= d;
  if (expected != t.data.size()) throw Error(ErrorKind::ShapeMismatch, "shape does not match data length");
  json j;
  j["name"] = t.name;
  j["shape"] = t.shape;
  j["data"] = std::vector<double>(t.data.data(), t.data.data() + t.data.size());
  return j.dump() + "\n";
}

TensorFile read_json_tensor(const std::filesystem::path& path) { return parse_json_tensor(read_file(path)); }

void write_json_tensor(const TensorFile& t, const std::filesystem::path& path) {
  write_file(path, json_tensor_string(t));
}

WeightVector<double> read_weights(const std::filesystem::path& path) {
  if (path.extension() == ".json") return read_json_tensor(path).data;
  return read_text_vector(path);
}

std::string quantized_string(const QuantResult<double>& q) {
  json codes = json::array();
  for (const auto& c : q.tensor.codes) {
    if (c.is_zero()) {
      codes.push_back({{"sign", 0}, {"level", nullptr}});
    } else {
      codes.push_back({{"sign", static_cast<int>(c.sign)}, {"level", c.level}});
    }
  }
  json j;
  j["bits"] = q.tensor.bits;
  j["scale_exp"] = q.tensor.scale_exp;
  j["codes"] = std::move(codes);
  j["l2_error"] = q.l2_error;
  j["sparsity"] = q.sparsity;
  j["partition"] = q.partition.counts;
  return j.dump() + "\n";
}

QuantResult<double> parse_quantized(std::string_view text) {
  const json j = parse_json(text);
  QuantResult<double> q;
  const long long bits = integer(require(j, "bits"), "bits");
  if (bits < kMinBits || bits > kMaxBits) throw Error(ErrorKind::SchemaError, "bits out of range");
  q.tensor.bits = static_cast<int>(bits);
  q.tensor.scale_exp = static_cast<int>(integer(require(j, "scale_exp"), "scale_exp"));
  const int n = q.tensor.levels();

  const json& codes = require(j, "codes");
  if (!codes.is_array()) throw Error(ErrorKind::SchemaError, "codes must be an array");
  for (const auto& c : codes) {
    const long long sign = integer(require(c, "sign"), "sign");
    const json& level = require(c, "level");
    if (sign == 0) {
      if (!level.is_null()) throw Error(ErrorKind::SchemaError, "zero codes must have a null level");
      q.tensor.codes.push_back(LevelCode::zero());
    } else if (sign == 1 || sign == -1) {
      const long long t = integer(level, "level");
      if (t < 0 || t >= n) throw Error(ErrorKind::SchemaError, "level outside [0, n)");
      q.tensor.codes.push_back(LevelCode::make(static_cast<int>(sign), static_cast<int>(t)));
    } else {
      throw Error(ErrorKind::SchemaError, "sign must be -1, 0 or 1");
    }
  }

  q.l2_error = number(require(j, "l2_error"), "l2_error");
  q.sparsity = number(require(j, "sparsity"), "sparsity");
  const json& part = require(j, "partition");
  if (!part.is_array()) throw Error(ErrorKind::SchemaError, "partition must be an array");
  q.partition = partition_of(q.tensor.codes, n);
  std::vector<Index> stored;
  for (const auto& k : part) stored.push_back(static_cast<Index>(integer(k, "partition entry")));
  if (stored != q.partition.counts) throw Error(ErrorKind::SchemaError, "partition disagrees with codes");
  check_exponent<double>(q.tensor.scale_exp, n);
  return q;
}

void write_quantized(const QuantResult<double>& q, const std::filesystem::path& path) {
  write_file(path, quantized_string(q));
}

QuantResult<double> read_quantized(const std::filesystem::path& path) { return parse_quantized(read_file(path)); }

std::string stats_report_string(const stats::MagnitudeHistogram& h, const stats::MomentsReport& m) {
  json j;
  j["histogram"] = histogram_json(h);
  j["moments"] = {{"n", m.n},
                  {"mean", m.mean},
                  {"variance", m.variance},
                  {"skewness", m.skewness},
                  {"excess_kurtosis", m.excess_kurtosis}};
  j["jarque_bera"] = {{"statistic", m.jb_statistic}, {"p_value", m.jb_p_value}};
  return j.dump(2) + "\n";
}

namespace {

json train_json(const toy::TrainReport& r) {
  json epochs = json::array();
  for (const auto& e : r.epochs) {
    epochs.push_back({{"epoch", e.epoch},
                      {"learning_rate", e.learning_rate},
                      {"loss", e.loss},
                      {"train_accuracy", e.train_accuracy}});
  }
  json layers = json::array();
  for (const auto& l : r.layers) {
    layers.push_back({{"rows", l.rows},
                      {"cols", l.cols},
                      {"bits", l.bits == 0 ? json(nullptr) : json(l.bits)},
                      {"scale_exp", l.scale_exp},
                      {"l2_error", l.l2_error},
                      {"sparsity", l.sparsity},
                      {"partition", l.partition}});
  }
  return {{"epochs", epochs},
          {"final_train_accuracy", r.final_train_accuracy},
          {"final_test_accuracy", r.final_test_accuracy},
          {"layers", layers}};
}

}  // namespace

std::string train_report_string(const toy::TrainReport& r) { return train_json(r).dump(2) + "\n"; }

std::string sweep_report_string(const std::vector<toy::SweepRow>& rows) {
  json arr = json::array();
  for (const auto& row : rows) {
    arr.push_back({{"ratio", row.ratio},
                   {"final_accuracy", row.final_accuracy},
                   {"mean_l2_error", row.mean_l2_error},
                   {"report", train_json(row.report)}});
  }
  return json{{"rows", arr}}.dump(2) + "\n";
}

}  // namespace lbwq::io
