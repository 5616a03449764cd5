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

#include "codesign/explorer.hpp"

#include <algorithm>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "codesign/error.hpp"

namespace codesign {

void validate(const FitnessWeights& weights) {
  if (weights.eta < 0.0 || weights.mu < 0.0 || weights.lambda < 0.0) {
    throw InvalidInput("fitness weights must be non-negative");
  }
  if (weights.eta == 0.0 && weights.mu == 0.0 && weights.lambda == 0.0) {
    throw InvalidInput("at least one of eta, mu, lambda must be positive");
  }
  if (!(weights.gamma > 0.0)) throw InvalidInput("penalty gamma must be positive");
  if (weights.dsp_avl < 0 || weights.mem_avl < 0) {
    throw InvalidInput("resource budgets must be non-negative");
  }
}

FitnessWeights preset_weights(std::string_view name) {
  FitnessWeights weights;
  if (name == "A") {
    weights.mu = 0.2;
  } else if (name == "B") {
    weights.mu = 0.1;
  } else if (name == "C") {
    weights.mu = 0.05;
  } else {
    throw InvalidInput(fmt::format("unknown weight preset '{}' (expected A, B or C)", name));
  }
  return weights;
}

void validate(const GaConfig& config) {
  if (config.population_size < 2) throw InvalidInput("population_size must be at least 2");
  if (config.generations < 1) throw InvalidInput("generations must be at least 1");
  if (config.elitism_count < 0 || config.elitism_count >= config.population_size) {
    throw InvalidInput("elitism_count must be in [0, population_size)");
  }
  if (config.tournament_size < 1) throw InvalidInput("tournament_size must be at least 1");
  auto is_rate = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!is_rate(config.crossover_rate) || !is_rate(config.mutation_rate)) {
    throw InvalidInput("crossover and mutation rates must lie in [0, 1]");
  }
}

Predictors oracle_predictors(const BackboneSpec& backbone, const OracleParams& params) {
  Predictors p;
  p.ce = [backbone](const CodesignPoint& point) { return synthetic_ce(point.arch, backbone); };
  p.latency = [backbone, params](const CodesignPoint& point) {
    const auto layers = arch_to_layers(point.arch, backbone);
    return latency_ms(layers, point.hw, params, backbone.data_width);
  };
  p.energy = [backbone, params](const CodesignPoint& point) {
    const auto layers = arch_to_layers(point.arch, backbone);
    return power_w(layers, point.hw, params, backbone.data_width);
  };
  return p;
}

Predictors surrogate_predictors(std::shared_ptr<const gp::GpModel> ce,
                                std::shared_ptr<const gp::GpModel> latency,
                                std::shared_ptr<const gp::GpModel> power) {
  Predictors p;
  p.ce = [ce](const CodesignPoint& point) { return ce->mean(encode16(point.arch)); };
  p.latency = [latency](const CodesignPoint& point) { return latency->mean(encode19(point)); };
  p.energy = [power](const CodesignPoint& point) { return power->mean(encode19(point)); };
  return p;
}

double resource_penalty(const CodesignPoint& point, const FitnessWeights& weights,
                        const BackboneSpec& backbone) {
  const auto layers = arch_to_layers(point.arch, backbone);
  const ResourceReport resources = mem_usage(layers, point.hw, backbone.data_width);
  const bool within = resources.dsp_used <= weights.dsp_avl && resources.mem_used <= weights.mem_avl;
  return within ? 0.0 : weights.gamma;
}

double fitness(const CodesignPoint& point, const Predictors& predictors,
               const FitnessWeights& weights, const BackboneSpec& backbone) {
  return weights.eta * predictors.ce(point) + weights.mu * predictors.latency(point) +
         weights.lambda * predictors.energy(point) + resource_penalty(point, weights, backbone);
}

namespace {

struct Individual {
  CodesignPoint point;
  double fitness = 0.0;
  bool feasible = false;
};

// Crossover string: one gene per cell, then PF, PC, PV.
void crossover(CodesignPoint& a, CodesignPoint& b, std::size_t cut) {
  const std::size_t cells = a.arch.ratios.size();
  for (std::size_t g = cut; g < cells + 3; ++g) {
    if (g < cells) {
      std::swap(a.arch.ratios[g], b.arch.ratios[g]);
    } else if (g == cells) {
      std::swap(a.hw.pf, b.hw.pf);
    } else if (g == cells + 1) {
      std::swap(a.hw.pc, b.hw.pc);
    } else {
      std::swap(a.hw.pv, b.hw.pv);
    }
  }
}

// Per-gene resampling; BW and MEM mutate but never cross over.
void mutate(CodesignPoint& point, double rate, const HwDomain& domain, Rng& rng) {
  for (double& ratio : point.arch.ratios) {
    if (rng.bernoulli(rate)) ratio = rng.pick(kRatioAlphabet);
  }
  if (rng.bernoulli(rate)) point.hw.pf = rng.pick(domain.pf);
  if (rng.bernoulli(rate)) point.hw.pc = rng.pick(domain.pc);
  if (rng.bernoulli(rate)) point.hw.pv = rng.pick(domain.pv);
  if (rng.bernoulli(rate)) point.hw.bw = rng.pick(domain.bw);
  if (rng.bernoulli(rate)) point.hw.mem = rng.pick(domain.mem);
}

}  // namespace

GaResult run_ga(const GaConfig& config, const FitnessWeights& weights,
                const Predictors& predictors, const BackboneSpec& backbone,
                const HwDomain& hw_domain) {
  validate(config);
  validate(weights);
  validate(backbone);
  if (hw_domain.size() == 0) throw InvalidDomain("hardware domain is empty");

  Rng rng(config.rng_seed);
  GaResult result;
  bool any_feasible = false;

  auto evaluate = [&](Individual& ind) {
    const double penalty = resource_penalty(ind.point, weights, backbone);
    ind.feasible = penalty == 0.0;
    ind.fitness = weights.eta * predictors.ce(ind.point) +
                  weights.mu * predictors.latency(ind.point) +
                  weights.lambda * predictors.energy(ind.point) + penalty;
    any_feasible = any_feasible || ind.feasible;
    ++result.evaluations;
  };

  const auto pop_size = static_cast<std::size_t>(config.population_size);
  std::vector<Individual> population(pop_size);
  for (Individual& ind : population) {
    ind.point.arch = random_arch(rng, backbone);
    ind.point.hw = random_hw(rng, hw_domain);
  }
  for (Individual& ind : population) evaluate(ind);

  const std::size_t genes = static_cast<std::size_t>(backbone.total_cells()) + 3;
  auto tournament = [&]() -> const Individual& {
    std::size_t winner = rng.index(pop_size);
    for (int t = 1; t < config.tournament_size; ++t) {
      const std::size_t challenger = rng.index(pop_size);
      if (population[challenger].fitness < population[winner].fitness ||
          (population[challenger].fitness == population[winner].fitness &&
           challenger < winner)) {
        winner = challenger;
      }
    }
    return population[winner];
  };

  bool have_best = false;
  for (int generation = 0; generation < config.generations; ++generation) {
    std::vector<std::size_t> order(pop_size);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return population[a].fitness < population[b].fitness;
    });

    GenerationStats stats;
    stats.best = population[order.front()].fitness;
    double total = 0.0;
    for (const Individual& ind : population) total += ind.fitness;
    stats.mean = total / static_cast<double>(pop_size);
    result.history.push_back(stats);
    if (!have_best || stats.best < result.best_fitness) {
      result.best_fitness = stats.best;
      result.best_point = population[order.front()].point;
      have_best = true;
    }
    if (generation + 1 == config.generations) break;

    std::vector<Individual> next;
    next.reserve(pop_size);
    for (int e = 0; e < config.elitism_count; ++e) {
      next.push_back(population[order[static_cast<std::size_t>(e)]]);
    }
    const std::size_t first_child = next.size();
    while (next.size() < pop_size) {
      CodesignPoint a = tournament().point;
      CodesignPoint b = tournament().point;
      if (rng.bernoulli(config.crossover_rate)) {
        crossover(a, b, 1 + rng.index(genes - 1));
      }
      mutate(a, config.mutation_rate, hw_domain, rng);
      mutate(b, config.mutation_rate, hw_domain, rng);
      a.arch = canonicalize(a.arch.ratios, backbone);
      b.arch = canonicalize(b.arch.ratios, backbone);
      next.push_back({std::move(a), 0.0, false});
      if (next.size() < pop_size) next.push_back({std::move(b), 0.0, false});
    }
    for (std::size_t i = first_child; i < next.size(); ++i) evaluate(next[i]);
    population = std::move(next);
  }

  result.all_penalized = !any_feasible;
  return result;
}

}  // namespace codesign
