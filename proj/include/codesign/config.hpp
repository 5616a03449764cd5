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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "codesign/design_space.hpp"
#include "codesign/explorer.hpp"
#include "codesign/perf_oracle.hpp"

namespace codesign {

struct SamplingSettings {
  std::int64_t n_loss = 2000;
  std::int64_t n_hw = 4600;
  // BW and MEM used for performance samples. Empty means draw from the
  // hardware domain.
  std::vector<std::int64_t> perf_bw;
  std::vector<std::int64_t> perf_mem;
};

struct GpSettings {
  int iters = 50;
  double step_size = 0.05;
  std::uint64_t seed = 0;
  double loss_train_fraction = 0.75;
  double perf_train_fraction = 0.652;
};

struct ParetoSettings {
  std::uint64_t cap = 1'000'000;
  double epsilon = 1e-6;
};

// Everything a command needs. Every field has a default, so an empty
// config file describes the full default space.
struct RunConfig {
  BackboneSpec backbone = default_backbone();
  HwDomain hw_domain = default_hw_domain();
  OracleParams oracle;
  SamplingSettings sampling;
  GpSettings gp;
  GaConfig ga;
  FitnessWeights weights;
  ParetoSettings pareto;
};

// Throws ParseError on unknown keys or wrongly typed values and
// ValidationError when the described backbone or domain is invalid.
RunConfig config_from_json(const nlohmann::json& doc);
nlohmann::json to_json(const RunConfig& config);

RunConfig load_config(const std::filesystem::path& path);

}  // namespace codesign
