// Copyright 2026 The Codesign Authors.
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

#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/gp.hpp"

namespace codesign {

// Shortest text that reads back to the identical double (17 significant
// digits at most).
std::string format_double(double value);

struct LossSample {
  std::array<double, kEncodingWidth> encoding{};
  double ce = 0.0;
};

struct PerfSample {
  std::array<double, kEncodingWidth> encoding{};
  HwConfig hw;
  double latency_ms = 0.0;
  double power_w = 0.0;
};

enum class SampleSchema { kLoss, kPerf };

// Header lines of the two sample schemas.
std::string loss_header();
std::string perf_header();

// Reads the header line and reports which schema the file uses.
SampleSchema detect_schema(const std::filesystem::path& path);

void write_loss_samples(const std::filesystem::path& path, const std::vector<LossSample>& rows);
void write_perf_samples(const std::filesystem::path& path, const std::vector<PerfSample>& rows);

// Parse errors name the file, the 1-based line and the column.
std::vector<LossSample> read_loss_samples(const std::filesystem::path& path);
std::vector<PerfSample> read_perf_samples(const std::filesystem::path& path);

gp::Dataset to_dataset(const std::vector<LossSample>& rows);
// `target` is "latency_ms" or "power_w"; inputs are the 19-dim encoding.
gp::Dataset to_dataset(const std::vector<PerfSample>& rows, std::string_view target);

// Writes `contents` to `path`, throwing IoError naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace codesign
