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

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codesign/config.hpp"
#include "codesign/explorer.hpp"
#include "codesign/gp.hpp"
#include "codesign/pareto.hpp"

namespace codesign {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitBadInput = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitSpaceTooLarge = 4;

struct SampleRequest {
  std::int64_t n_loss = 2000;
  std::int64_t n_hw = 4600;
  std::uint64_t seed = 0;
  std::filesystem::path loss_out = "loss_samples.csv";
  std::filesystem::path perf_out = "perf_samples.csv";
  // Learned loss samples to use instead of the synthetic loss.
  std::optional<std::filesystem::path> loss_input;
};

struct SampleSummary {
  std::size_t loss_rows = 0;
  std::size_t perf_rows = 0;
};

SampleSummary cmd_sample(const RunConfig& config, const SampleRequest& request);

// Deterministic shuffled split; the first floor(fraction * n) indices train.
struct Split {
  std::vector<Eigen::Index> train;
  std::vector<Eigen::Index> test;
};
Split train_test_split(Eigen::Index n, double train_fraction, std::uint64_t seed);

struct FitRequest {
  std::filesystem::path samples;
  std::optional<std::string> target;  // defaults to ce for loss files
  std::optional<gp::KernelFamily> family;
  std::uint64_t seed = 0;
  std::filesystem::path model_out = "model.json";
  std::optional<std::filesystem::path> report_out;
};

struct FitReport {
  std::string target;
  gp::KernelFamily family = gp::KernelFamily::kMatern52;
  std::size_t n_train = 0;
  std::size_t n_test = 0;
  double mae = 0.0;
  double baseline_mae = 0.0;
  double test_std = 0.0;
  gp::FitInfo info;
};

FitReport cmd_fit(const RunConfig& config, const FitRequest& request);

struct ExploreRequest {
  bool oracle = false;
  std::optional<std::filesystem::path> ce_model;
  std::optional<std::filesystem::path> latency_model;
  std::optional<std::filesystem::path> power_model;
  std::filesystem::path out = "explore_result.json";
};

struct ExploreSummary {
  GaResult ga;
  Objectives predicted;
  Objectives oracle;
  ResourceReport resources;
  double penalty = 0.0;
  nlohmann::json document;
};

// Runs the GA with config.ga and config.weights and writes the result file.
ExploreSummary cmd_explore(const RunConfig& config, const ExploreRequest& request);

struct ParetoRequest {
  std::filesystem::path frontier_out = "frontier.csv";
  std::filesystem::path plot_out = "plot.dat";
};

struct ParetoSummary {
  std::size_t evaluated = 0;
  std::size_t frontier = 0;
};

ParetoSummary cmd_pareto(const RunConfig& config, const ParetoRequest& request);

// Frontier files: perf-style columns followed by ce, latency_ms, power_w and
// an on_frontier flag.
void write_frontier(const std::filesystem::path& path, const std::vector<ParetoPoint>& points);
std::vector<ParetoPoint> read_frontier(const std::filesystem::path& path,
                                       const BackboneSpec& backbone);

struct ReportRequest {
  std::filesystem::path result;
  std::optional<std::filesystem::path> out;
};

struct ReportSummary {
  Objectives candidate;
  bool on_front = false;
  bool frontier_member = false;
  std::size_t frontier_size = 0;
};

// Checks an explore result against the exhaustive reference frontier.
ReportSummary cmd_report(const RunConfig& config, const ReportRequest& request);

// Parses argv-style arguments (args[0] is the program name), runs the
// selected subcommand and returns its exit code.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace codesign
