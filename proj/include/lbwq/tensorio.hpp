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

// On-disk formats. Everything is UTF-8; readers accept LF or CRLF, writers
// emit LF. Numbers are written in shortest round-trip form.
//
// Quantized tensor JSON:
//   {"bits": 2, "scale_exp": 2,
//    "codes": [{"sign": 1, "level": 0}, {"sign": 0, "level": null}],
//    "l2_error": 1.0, "sparsity": 0.5, "partition": [1]}

#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "lbwq/stats.hpp"
#include "lbwq/toytrain.hpp"
#include "lbwq/types.hpp"

namespace lbwq::io {

struct TensorFile {
  std::string name;
  std::vector<Index> shape;  // row-major
  WeightVector<double> data;
};

/// One decimal literal per line; '#' comment lines and blank lines skipped.
WeightVector<double> parse_text_vector(std::string_view text);
WeightVector<double> read_text_vector(const std::filesystem::path& path);

TensorFile parse_json_tensor(std::string_view text);
std::string json_tensor_string(const TensorFile& t);
TensorFile read_json_tensor(const std::filesystem::path& path);
void write_json_tensor(const TensorFile& t, const std::filesystem::path& path);

/// .json files are read as tensors (flattened), anything else as text vectors.
WeightVector<double> read_weights(const std::filesystem::path& path);

std::string quantized_string(const QuantResult<double>& q);
QuantResult<double> parse_quantized(std::string_view text);
void write_quantized(const QuantResult<double>& q, const std::filesystem::path& path);
QuantResult<double> read_quantized(const std::filesystem::path& path);

std::string stats_report_string(const stats::MagnitudeHistogram& h, const stats::MomentsReport& m);
std::string train_report_string(const toy::TrainReport& r);
std::string sweep_report_string(const std::vector<toy::SweepRow>& rows);

/// Shortest decimal that round-trips to the same double.
std::string format_double(double x);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace lbwq::io
