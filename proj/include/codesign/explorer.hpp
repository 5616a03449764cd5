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
#include <functional>
#include <memory>
#include <string_view>
#include <vector>

#include "codesign/design_space.hpp"
#include "codesign/gp.hpp"
#include "codesign/perf_oracle.hpp"

namespace codesign {

// Scalarization weights and resource budgets of the co-design objective.
struct FitnessWeights {
  double eta = 1.0;
  double mu = 0.1;
  double lambda = 0.001;
  double gamma = 1000.0;
  std::int64_t dsp_avl = 1518;
  std::int64_t mem_avl = 4 << 20;
};

void validate(const FitnessWeights& weights);

// Named weight sets: A = {1.0, 0.2, 0.001}, B = {1.0, 0.1, 0.001},
// C = {1.0, 0.05, 0.001}. Budgets and gamma keep their defaults.
FitnessWeights preset_weights(std::string_view name);

struct GaConfig {
  int population_size = 50;
  int generations = 100;
  double crossover_rate = 0.9;
  double mutation_rate = 0.1;
  int tournament_size = 3;
  int elitism_count = 2;
  std::uint64_t rng_seed = 0;
};

void validate(const GaConfig& config);

// Objective estimators. Each must be a pure function of the point.
struct Predictors {
  std::function<double(const CodesignPoint&)> ce;
  std::function<double(const CodesignPoint&)> latency;
  std::function<double(const CodesignPoint&)> energy;
};

Predictors oracle_predictors(const BackboneSpec& backbone, const OracleParams& params);

// CE model consumes 16-dim encodings; latency and power models 19-dim ones.
Predictors surrogate_predictors(std::shared_ptr<const gp::GpModel> ce,
                                std::shared_ptr<const gp::GpModel> latency,
                                std::shared_ptr<const gp::GpModel> power);

// gamma when either the DSP or the memory budget is exceeded, else 0.
double resource_penalty(const CodesignPoint& point, const FitnessWeights& weights,
                        const BackboneSpec& backbone);

double fitness(const CodesignPoint& point, const Predictors& predictors,
               const FitnessWeights& weights, const BackboneSpec& backbone);

struct GenerationStats {
  double best = 0.0;
  double mean = 0.0;
};

struct GaResult {
  CodesignPoint best_point;
  double best_fitness = 0.0;
  std::vector<GenerationStats> history;
  std::int64_t evaluations = 0;
  // No evaluated individual satisfied both budgets.
  bool all_penalized = false;
};

GaResult run_ga(const GaConfig& config, const FitnessWeights& weights,
                const Predictors& predictors, const BackboneSpec& backbone,
                const HwDomain& hw_domain);

}  // namespace codesign
