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

#include "codesign/config.hpp"

#include <fstream>
#include <set>

#include <fmt/format.h>

#include "codesign/error.hpp"

namespace codesign {

namespace {

using nlohmann::json;

// Reads optional keys from one JSON object and rejects unknown ones.
class Section {
 public:
  Section(const json& doc, std::string name) : doc_(doc), name_(std::move(name)) {
    if (!doc_.is_object()) throw ParseError(fmt::format("config section '{}' must be an object", name_));
  }

  template <typename T>
  void read(const char* key, T& target) {
    seen_.insert(key);
    auto it = doc_.find(key);
    if (it == doc_.end()) return;
    try {
      target = it->get<T>();
    } catch (const json::exception& e) {
      throw ParseError(fmt::format("config key '{}.{}': {}", name_, key, e.what()));
    }
  }

  const json* child(const char* key) {
    seen_.insert(key);
    auto it = doc_.find(key);
    return it == doc_.end() ? nullptr : &*it;
  }

  void finish() const {
    for (auto it = doc_.begin(); it != doc_.end(); ++it) {
      if (!seen_.count(it.key())) {
        throw ParseError(fmt::format("unknown config key '{}.{}'", name_, it.key()));
      }
    }
  }

 private:
  const json& doc_;
  std::string name_;
  std::set<std::string> seen_;
};

BackboneSpec backbone_from_json(const json& doc) {
  Section s(doc, "backbone");
  std::int64_t input_resolution = 224;
  std::int64_t stem_channels = 64;
  std::int64_t data_width = 1;
  std::int64_t num_classes = 1000;
  s.read("input_resolution", input_resolution);
  s.read("stem_channels", stem_channels);
  s.read("data_width", data_width);
  s.read("num_classes", num_classes);

  BackboneSpec backbone;
  backbone.input_resolution = input_resolution;
  backbone.data_width = data_width;
  backbone.num_classes = num_classes;
  if (stem_channels > 0) backbone.stem_layers = resnet_stem(input_resolution, stem_channels);

  std::int64_t h = backbone.stem_layers.empty() ? input_resolution
                                                : backbone.stem_layers.back().h_out;
  if (const json* blocks = s.child("blocks")) {
    if (!blocks->is_array()) throw ParseError("config key 'backbone.blocks' must be an array");
    for (std::size_t i = 0; i < blocks->size(); ++i) {
      Section b((*blocks)[i], fmt::format("backbone.blocks[{}]", i));
      BlockSpec block;
      b.read("max_units", block.max_units);
      b.read("min_units", block.min_units);
      b.read("out_channels", block.out_channels);
      b.read("stride", block.first_unit_stride);
      b.finish();
      if (block.first_unit_stride < 1) {
        throw ValidationError(fmt::format("block {} stride must be positive", i));
      }
      h = (h + block.first_unit_stride - 1) / block.first_unit_stride;
      block.feature_h = block.feature_w = h;
      backbone.blocks.push_back(block);
    }
  } else {
    backbone.blocks = default_backbone().blocks;
  }
  s.finish();
  validate(backbone);
  return backbone;
}

json backbone_to_json(const BackboneSpec& backbone) {
  json blocks = json::array();
  for (const BlockSpec& b : backbone.blocks) {
    blocks.push_back({{"max_units", b.max_units},
                      {"min_units", b.min_units},
                      {"out_channels", b.out_channels},
                      {"stride", b.first_unit_stride}});
  }
  const std::int64_t stem = backbone.stem_layers.empty() ? 0 : backbone.stem_layers.front().c_out;
  return {{"input_resolution", backbone.input_resolution},
          {"stem_channels", stem},
          {"data_width", backbone.data_width},
          {"num_classes", backbone.num_classes},
          {"blocks", blocks}};
}

}  // namespace

RunConfig config_from_json(const json& doc) {
  RunConfig config;
  Section root(doc, "root");

  if (const json* bb = root.child("backbone")) config.backbone = backbone_from_json(*bb);

  if (const json* hw = root.child("hw_domain")) {
    Section s(*hw, "hw_domain");
    s.read("pf", config.hw_domain.pf);
    s.read("pc", config.hw_domain.pc);
    s.read("pv", config.hw_domain.pv);
    s.read("bw", config.hw_domain.bw);
    s.read("mem", config.hw_domain.mem);
    s.finish();
    enumerate_hw_configs(config.hw_domain);
    for (const HwConfig& c : enumerate_hw_configs(config.hw_domain)) validate(c);
  }

  if (const json* oracle = root.child("oracle")) {
    Section s(*oracle, "oracle");
    s.read("clock_mhz", config.oracle.clock_mhz);
    s.read("p_static_w", config.oracle.p_static_w);
    s.read("p_dsp_w", config.oracle.p_dsp_w);
    s.finish();
    if (!(config.oracle.clock_mhz > 0.0)) throw ValidationError("oracle.clock_mhz must be positive");
  }

  if (const json* sampling = root.child("sampling")) {
    Section s(*sampling, "sampling");
    s.read("n_loss", config.sampling.n_loss);
    s.read("n_hw", config.sampling.n_hw);
    s.read("perf_bw", config.sampling.perf_bw);
    s.read("perf_mem", config.sampling.perf_mem);
    s.finish();
  }

  if (const json* gp = root.child("gp")) {
    Section s(*gp, "gp");
    s.read("iters", config.gp.iters);
    s.read("step_size", config.gp.step_size);
    s.read("seed", config.gp.seed);
    s.read("loss_train_fraction", config.gp.loss_train_fraction);
    s.read("perf_train_fraction", config.gp.perf_train_fraction);
    s.finish();
  }

  if (const json* ga = root.child("ga")) {
    Section s(*ga, "ga");
    s.read("population_size", config.ga.population_size);
    s.read("generations", config.ga.generations);
    s.read("crossover_rate", config.ga.crossover_rate);
    s.read("mutation_rate", config.ga.mutation_rate);
    s.read("tournament_size", config.ga.tournament_size);
    s.read("elitism_count", config.ga.elitism_count);
    s.read("seed", config.ga.rng_seed);
    s.finish();
    validate(config.ga);
  }

  if (const json* w = root.child("weights")) {
    Section s(*w, "weights");
    std::string preset;
    s.read("preset", preset);
    if (!preset.empty()) config.weights = preset_weights(preset);
    s.read("eta", config.weights.eta);
    s.read("mu", config.weights.mu);
    s.read("lambda", config.weights.lambda);
    s.read("gamma", config.weights.gamma);
    s.read("dsp_avl", config.weights.dsp_avl);
    s.read("mem_avl", config.weights.mem_avl);
    s.finish();
    validate(config.weights);
  }

  if (const json* p = root.child("pareto")) {
    Section s(*p, "pareto");
    s.read("cap", config.pareto.cap);
    s.read("epsilon", config.pareto.epsilon);
    s.finish();
  }

  root.finish();
  return config;
}

json to_json(const RunConfig& config) {
  return {
      {"backbone", backbone_to_json(config.backbone)},
      {"hw_domain",
       {{"pf", config.hw_domain.pf},
        {"pc", config.hw_domain.pc},
        {"pv", config.hw_domain.pv},
        {"bw", config.hw_domain.bw},
        {"mem", config.hw_domain.mem}}},
      {"oracle",
       {{"clock_mhz", config.oracle.clock_mhz},
        {"p_static_w", config.oracle.p_static_w},
        {"p_dsp_w", config.oracle.p_dsp_w}}},
      {"sampling",
       {{"n_loss", config.sampling.n_loss},
        {"n_hw", config.sampling.n_hw},
        {"perf_bw", config.sampling.perf_bw},
        {"perf_mem", config.sampling.perf_mem}}},
      {"gp",
       {{"iters", config.gp.iters},
        {"step_size", config.gp.step_size},
        {"seed", config.gp.seed},
        {"loss_train_fraction", config.gp.loss_train_fraction},
        {"perf_train_fraction", config.gp.perf_train_fraction}}},
      {"ga",
       {{"population_size", config.ga.population_size},
        {"generations", config.ga.generations},
        {"crossover_rate", config.ga.crossover_rate},
        {"mutation_rate", config.ga.mutation_rate},
        {"tournament_size", config.ga.tournament_size},
        {"elitism_count", config.ga.elitism_count},
        {"seed", config.ga.rng_seed}}},
      {"weights",
       {{"eta", config.weights.eta},
        {"mu", config.weights.mu},
        {"lambda", config.weights.lambda},
        {"gamma", config.weights.gamma},
        {"dsp_avl", config.weights.dsp_avl},
        {"mem_avl", config.weights.mem_avl}}},
      {"pareto", {{"cap", config.pareto.cap}, {"epsilon", config.pareto.epsilon}}},
  };
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open config file '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("config file '{}': {}", path.string(), e.what()));
  }
  if (doc.is_null()) doc = json::object();
  return config_from_json(doc);
}

}  // namespace codesign
