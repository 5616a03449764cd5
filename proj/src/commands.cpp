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

#include "codesign/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <memory>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "codesign/error.hpp"
#include "codesign/model_io.hpp"
#include "codesign/sample_io.hpp"

namespace codesign {

namespace {

using nlohmann::json;

// Separates the perf-sample stream from the loss-sample stream.
constexpr std::uint64_t kPerfStreamOffset = 0x9E3779B97F4A7C15ull;

json objectives_json(const Objectives& o) {
  return {{"ce", o.ce}, {"latency_ms", o.latency_ms}, {"power_w", o.power_w}};
}

json hw_json(const HwConfig& hw) {
  return {{"pf", hw.pf}, {"pc", hw.pc}, {"pv", hw.pv}, {"bw", hw.bw}, {"mem", hw.mem}};
}

double population_std(const Eigen::VectorXd& v) {
  const double mean = v.mean();
  return std::sqrt((v.array() - mean).square().sum() / static_cast<double>(v.size()));
}

std::string read_text(const std::filesystem::path& path, const char* what) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open {} '{}'", what, path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

SampleSummary cmd_sample(const RunConfig& config, const SampleRequest& request) {
  if (request.n_loss < 1 || request.n_hw < 1) {
    throw InvalidInput("sample counts must be at least 1");
  }
  const BackboneSpec& backbone = config.backbone;

  std::vector<LossSample> loss;
  if (request.loss_input) {
    loss = read_loss_samples(*request.loss_input);
    for (std::size_t i = 0; i < loss.size(); ++i) {
      try {
        decode16(loss[i].encoding, backbone);
      } catch (const ValidationError& e) {
        throw ParseError(fmt::format("{}: line {}: {}", request.loss_input->string(), i + 2,
                                     e.what()));
      }
    }
    if (loss.size() > static_cast<std::size_t>(request.n_loss)) {
      loss.resize(static_cast<std::size_t>(request.n_loss));
    }
  } else {
    Rng rng(request.seed);
    loss.reserve(static_cast<std::size_t>(request.n_loss));
    for (std::int64_t i = 0; i < request.n_loss; ++i) {
      const ArchEncoding arch = random_arch(rng, backbone);
      loss.push_back({encode16(arch), synthetic_ce(arch, backbone)});
    }
  }

  HwDomain perf_domain = config.hw_domain;
  if (!config.sampling.perf_bw.empty()) perf_domain.bw = config.sampling.perf_bw;
  if (!config.sampling.perf_mem.empty()) perf_domain.mem = config.sampling.perf_mem;
  enumerate_hw_configs(perf_domain);

  Rng rng(request.seed + kPerfStreamOffset);
  std::vector<PerfSample> perf;
  perf.reserve(static_cast<std::size_t>(request.n_hw));
  for (std::int64_t i = 0; i < request.n_hw; ++i) {
    CodesignPoint point;
    point.arch = random_arch(rng, backbone);
    point.hw = random_hw(rng, perf_domain);
    const auto layers = arch_to_layers(point.arch, backbone);
    const PerfReport report = latency(layers, point.hw, config.oracle, backbone.data_width);
    perf.push_back({encode16(point.arch), point.hw, report.latency_ms, report.power_w});
  }

  write_loss_samples(request.loss_out, loss);
  write_perf_samples(request.perf_out, perf);
  return {loss.size(), perf.size()};
}

Split train_test_split(Eigen::Index n, double train_fraction, std::uint64_t seed) {
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng rng(seed);
  rng.shuffle(order);
  const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(n)));
  Split split;
  split.train.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  split.test.assign(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  return split;
}

FitReport cmd_fit(const RunConfig& config, const FitRequest& request) {
  const SampleSchema schema = detect_schema(request.samples);
  gp::Dataset data;
  double fraction = 0.0;
  if (schema == SampleSchema::kLoss) {
    if (request.target && *request.target != "ce") {
      throw InvalidInput(fmt::format("loss sample file has no target '{}'", *request.target));
    }
    data = to_dataset(read_loss_samples(request.samples));
    fraction = config.gp.loss_train_fraction;
  } else {
    if (!request.target) {
      throw InvalidInput("perf sample files need --target latency_ms or power_w");
    }
    data = to_dataset(read_perf_samples(request.samples), *request.target);
    fraction = config.gp.perf_train_fraction;
  }

  const Split split = train_test_split(data.size(), fraction, request.seed);
  if (split.train.size() < 2 || split.test.empty()) {
    throw InvalidInput(fmt::format("{} samples are too few for a train/test split",
                                   data.size()));
  }
  const gp::Dataset train = gp::subset(data, split.train);
  const gp::Dataset test = gp::subset(data, split.test);

  FitReport report;
  report.target = data.target_name;
  report.family = request.family.value_or(gp::default_family(data.target_name));
  gp::FitOptions options;
  options.iters = config.gp.iters;
  options.step_size = config.gp.step_size;
  options.seed = request.seed;
  const gp::GpModel model = gp::fit(train, report.family, options);

  report.n_train = split.train.size();
  report.n_test = split.test.size();
  report.mae = gp::evaluate_mae(model, test);
  const double train_mean = train.targets.mean();
  report.baseline_mae = (test.targets.array() - train_mean).abs().mean();
  report.test_std = population_std(test.targets);
  report.info = model.fit_info();

  save_model(request.model_out, model, report.target);
  if (request.report_out) {
    const json doc = {{"target", report.target},
                      {"family", std::string(gp::to_string(report.family))},
                      {"n_train", report.n_train},
                      {"n_test", report.n_test},
                      {"mae", report.mae},
                      {"baseline_mae", report.baseline_mae},
                      {"test_std", report.test_std},
                      {"degenerate", report.info.degenerate},
                      {"best_log_likelihood", report.info.best_log_likelihood}};
    write_text_file(*request.report_out, doc.dump(2) + '\n');
  }
  return report;
}

ExploreSummary cmd_explore(const RunConfig& config, const ExploreRequest& request) {
  const BackboneSpec& backbone = config.backbone;
  Predictors predictors;
  if (request.oracle) {
    predictors = oracle_predictors(backbone, config.oracle);
  } else {
    auto load = [](const std::optional<std::filesystem::path>& path, const char* flag,
                   const char* target) {
      if (!path) throw InvalidInput(fmt::format("{} is required unless --oracle is given", flag));
      StoredModel stored = load_model(*path);
      if (stored.target_name != target) {
        throw InvalidInput(fmt::format("model file '{}' predicts '{}', expected '{}'",
                                       path->string(), stored.target_name, target));
      }
      return std::make_shared<const gp::GpModel>(std::move(stored.model));
    };
    auto ce = load(request.ce_model, "--ce-model", "ce");
    auto latency = load(request.latency_model, "--latency-model", "latency_ms");
    auto power = load(request.power_model, "--power-model", "power_w");
    predictors = surrogate_predictors(std::move(ce), std::move(latency), std::move(power));
  }

  ExploreSummary summary;
  summary.ga = run_ga(config.ga, config.weights, predictors, backbone, config.hw_domain);
  const CodesignPoint& best = summary.ga.best_point;
  summary.predicted = {predictors.ce(best), predictors.latency(best), predictors.energy(best)};
  const OracleEvaluation truth = evaluate_oracle(best, backbone, config.oracle);
  summary.oracle = truth.objectives;
  summary.resources = truth.resources;
  summary.penalty = resource_penalty(best, config.weights, backbone);

  json history = json::array();
  for (const GenerationStats& g : summary.ga.history) {
    history.push_back({{"best", g.best}, {"mean", g.mean}});
  }
  summary.document = {
      {"mode", request.oracle ? "oracle" : "surrogate"},
      {"weights",
       {{"eta", config.weights.eta},
        {"mu", config.weights.mu},
        {"lambda", config.weights.lambda},
        {"gamma", config.weights.gamma},
        {"dsp_avl", config.weights.dsp_avl},
        {"mem_avl", config.weights.mem_avl}}},
      {"ga",
       {{"population_size", config.ga.population_size},
        {"generations", config.ga.generations},
        {"crossover_rate", config.ga.crossover_rate},
        {"mutation_rate", config.ga.mutation_rate},
        {"tournament_size", config.ga.tournament_size},
        {"elitism_count", config.ga.elitism_count},
        {"seed", config.ga.rng_seed}}},
      {"best",
       {{"ratios", best.arch.ratios},
        {"encoding16", encode16(best.arch)},
        {"hw", hw_json(best.hw)}}},
      {"fitness", summary.ga.best_fitness},
      {"predicted", objectives_json(summary.predicted)},
      {"oracle", objectives_json(summary.oracle)},
      {"resources",
       {{"dsp_used", summary.resources.dsp_used},
        {"mem_in", summary.resources.mem_in},
        {"mem_weight", summary.resources.mem_weight},
        {"mem_used", summary.resources.mem_used}}},
      {"penalty", summary.penalty},
      {"all_penalized", summary.ga.all_penalized},
      {"evaluations", summary.ga.evaluations},
      {"history", history},
  };
  write_text_file(request.out, summary.document.dump(2) + '\n');
  return summary;
}

void write_frontier(const std::filesystem::path& path, const std::vector<ParetoPoint>& points) {
  std::string text = perf_header();
  // Replace the perf targets with the three objectives and the flag.
  text = text.substr(0, text.find(",latency_ms")) + ",ce,latency_ms,power_w,on_frontier\n";
  for (const ParetoPoint& p : points) {
    for (double e : encode16(p.point.arch)) {
      text += format_double(e);
      text += ',';
    }
    const HwConfig& hw = p.point.hw;
    text += fmt::format("{},{},{},{},{},", hw.pf, hw.pc, hw.pv, hw.bw, hw.mem);
    text += format_double(p.objectives.ce) + ',' + format_double(p.objectives.latency_ms) + ',' +
            format_double(p.objectives.power_w) + ',' + (p.on_frontier ? "1" : "0") + '\n';
  }
  write_text_file(path, text);
}

std::vector<ParetoPoint> read_frontier(const std::filesystem::path& path,
                                       const BackboneSpec& backbone) {
  const std::string text = read_text(path, "frontier file");
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  std::vector<ParetoPoint> points;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> values;
    std::istringstream fields(line);
    std::string field;
    while (std::getline(fields, field, ',')) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(fmt::format("{}: line {}: cannot parse '{}'", path.string(), line_no,
                                     field));
      }
      values.push_back(v);
    }
    if (values.size() != 25) {
      throw ParseError(fmt::format("{}: line {}: expected 25 columns, found {}", path.string(),
                                   line_no, values.size()));
    }
    ParetoPoint p;
    p.point.arch = decode16(std::span<const double>(values.data(), kEncodingWidth), backbone);
    p.point.hw = {static_cast<std::int64_t>(values[16]), static_cast<std::int64_t>(values[17]),
                  static_cast<std::int64_t>(values[18]), static_cast<std::int64_t>(values[19]),
                  static_cast<std::int64_t>(values[20])};
    p.objectives = {values[21], values[22], values[23]};
    p.on_frontier = values[24] != 0.0;
    points.push_back(std::move(p));
  }
  return points;
}

ParetoSummary cmd_pareto(const RunConfig& config, const ParetoRequest& request) {
  std::vector<ParetoPoint> points =
      exhaustive_eval(config.backbone, config.hw_domain, config.oracle, config.pareto.cap);
  mark_frontier(points);
  const std::vector<ParetoPoint> front = pareto_front(points);
  write_frontier(request.frontier_out, front);

  std::string plot = "# ce latency_ms power_w\n";
  for (const ParetoPoint& p : points) {
    plot += format_double(p.objectives.ce) + ' ' + format_double(p.objectives.latency_ms) + ' ' +
            format_double(p.objectives.power_w) + '\n';
  }
  write_text_file(request.plot_out, plot);
  return {points.size(), front.size()};
}

ReportSummary cmd_report(const RunConfig& config, const ReportRequest& request) {
  json doc;
  try {
    doc = json::parse(read_text(request.result, "result file"));
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("result file '{}': {}", request.result.string(), e.what()));
  }
  CodesignPoint candidate;
  try {
    candidate.arch.ratios = doc.at("best").at("ratios").get<std::vector<double>>();
    const json& hw = doc.at("best").at("hw");
    candidate.hw = {hw.at("pf").get<std::int64_t>(), hw.at("pc").get<std::int64_t>(),
                    hw.at("pv").get<std::int64_t>(), hw.at("bw").get<std::int64_t>(),
                    hw.at("mem").get<std::int64_t>()};
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("result file '{}': {}", request.result.string(), e.what()));
  }
  validate(candidate.arch, config.backbone);

  ReportSummary summary;
  summary.candidate = evaluate_oracle(candidate, config.backbone, config.oracle).objectives;
  const std::vector<ParetoPoint> points =
      exhaustive_eval(config.backbone, config.hw_domain, config.oracle, config.pareto.cap);
  const std::vector<ParetoPoint> front = pareto_front(points);
  summary.frontier_size = front.size();
  summary.on_front = verify_on_front(summary.candidate, front, config.pareto.epsilon);
  summary.frontier_member = std::none_of(points.begin(), points.end(), [&](const ParetoPoint& p) {
    return dominates(p.objectives, summary.candidate);
  });

  if (request.out) {
    const json out = {{"candidate", objectives_json(summary.candidate)},
                      {"on_front", summary.on_front},
                      {"frontier_member", summary.frontier_member},
                      {"frontier_size", summary.frontier_size},
                      {"epsilon", config.pareto.epsilon}};
    write_text_file(*request.out, out.dump(2) + '\n');
  }
  return summary;
}

namespace {

struct GlobalFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string weights;
  std::optional<double> gamma;
  std::optional<std::int64_t> dsp_budget;
  std::optional<std::int64_t> mem_budget;
  bool oracle = false;
  std::string preset;
};

RunConfig resolve_config(const GlobalFlags& flags) {
  RunConfig config = flags.config_path.empty() ? RunConfig{} : load_config(flags.config_path);
  if (!flags.preset.empty()) {
    const FitnessWeights preset = preset_weights(flags.preset);
    config.weights.eta = preset.eta;
    config.weights.mu = preset.mu;
    config.weights.lambda = preset.lambda;
  }
  if (!flags.weights.empty()) {
    std::vector<double> values;
    std::istringstream in(flags.weights);
    std::string part;
    while (std::getline(in, part, ',')) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), v);
      if (ec != std::errc() || ptr != part.data() + part.size()) {
        throw InvalidInput(fmt::format("--weights: cannot parse '{}'", part));
      }
      values.push_back(v);
    }
    if (values.size() != 3) throw InvalidInput("--weights expects three values eta,mu,lambda");
    config.weights.eta = values[0];
    config.weights.mu = values[1];
    config.weights.lambda = values[2];
  }
  if (flags.gamma) config.weights.gamma = *flags.gamma;
  if (flags.dsp_budget) config.weights.dsp_avl = *flags.dsp_budget;
  if (flags.mem_budget) config.weights.mem_avl = *flags.mem_budget;
  if (flags.seed) {
    config.ga.rng_seed = *flags.seed;
    config.gp.seed = *flags.seed;
  }
  validate(config.weights);
  return config;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Joint neural-architecture and accelerator design-space explorer"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Run configuration (JSON)");
  app.add_option("--seed", flags.seed, "Random seed");
  app.add_option("--weights", flags.weights, "Fitness weights eta,mu,lambda");
  app.add_option("--gamma", flags.gamma, "Resource penalty");
  app.add_option("--dsp-budget", flags.dsp_budget, "Available DSPs");
  app.add_option("--mem-budget", flags.mem_budget, "Available on-chip memory in bytes");
  app.add_flag("--oracle", flags.oracle, "Use the analytic oracles instead of GP models");
  app.add_option("--preset", flags.preset, "Weight preset")->check(CLI::IsMember({"A", "B", "C"}));

  std::string out_dir = ".";
  std::optional<std::int64_t> n_loss;
  std::optional<std::int64_t> n_hw;
  std::string loss_out = "loss_samples.csv";
  std::string perf_out = "perf_samples.csv";
  std::string loss_input;
  auto* sample = app.add_subcommand("sample", "Generate loss and performance sample files");
  sample->add_option("--n-loss", n_loss, "Loss samples");
  sample->add_option("--n-hw", n_hw, "Performance samples");
  sample->add_option("--out-dir", out_dir, "Output directory");
  sample->add_option("--loss-out", loss_out, "Loss sample file name");
  sample->add_option("--perf-out", perf_out, "Performance sample file name");
  sample->add_option("--loss-input", loss_input, "Ingest an external loss sample file");

  FitRequest fit_request;
  std::string fit_samples;
  std::string fit_target;
  std::string fit_family;
  std::string fit_out = "model.json";
  std::string fit_report;
  std::optional<int> fit_iters;
  auto* fit = app.add_subcommand("fit", "Fit a GP surrogate to a sample file");
  fit->add_option("--samples", fit_samples, "Sample file")->required();
  fit->add_option("--target", fit_target, "ce, latency_ms or power_w")
      ->check(CLI::IsMember({"ce", "latency_ms", "power_w"}));
  fit->add_option("--family", fit_family, "matern32 or matern52")
      ->check(CLI::IsMember({"matern32", "matern52"}));
  fit->add_option("--iters", fit_iters, "Adam iterations");
  fit->add_option("--out", fit_out, "Model file");
  fit->add_option("--report", fit_report, "MAE report file (JSON)");

  ExploreRequest explore_request;
  std::string ce_model, latency_model, power_model;
  std::string explore_out = "explore_result.json";
  std::optional<int> generations, population;
  auto* explore = app.add_subcommand("explore", "Run the genetic algorithm");
  explore->add_option("--ce-model", ce_model, "CE surrogate model file");
  explore->add_option("--latency-model", latency_model, "Latency surrogate model file");
  explore->add_option("--power-model", power_model, "Power surrogate model file");
  explore->add_option("--out", explore_out, "Result file");
  explore->add_option("--generations", generations, "GA generations");
  explore->add_option("--population", population, "GA population size");

  std::string frontier_out = "frontier.csv";
  std::string plot_out = "plot.dat";
  auto* pareto = app.add_subcommand("pareto", "Exhaustive reference Pareto frontier");
  pareto->add_option("--frontier-out", frontier_out, "Frontier file");
  pareto->add_option("--plot-out", plot_out, "Plot data file");

  std::string report_result;
  std::string report_out;
  auto* report = app.add_subcommand("report", "Check an explore result against the frontier");
  report->add_option("--result", report_result, "Explore result file")->required();
  report->add_option("--out", report_out, "Report file (JSON)");

  std::vector<const char*> argv;
  argv.reserve(args.size());
  for (const std::string& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    RunConfig config = resolve_config(flags);

    if (*sample) {
      SampleRequest request;
      request.n_loss = n_loss.value_or(config.sampling.n_loss);
      request.n_hw = n_hw.value_or(config.sampling.n_hw);
      request.seed = flags.seed.value_or(0);
      request.loss_out = std::filesystem::path(out_dir) / loss_out;
      request.perf_out = std::filesystem::path(out_dir) / perf_out;
      if (!loss_input.empty()) request.loss_input = loss_input;
      const SampleSummary s = cmd_sample(config, request);
      out << fmt::format("wrote {} loss samples to {}\n", s.loss_rows, request.loss_out.string());
      out << fmt::format("wrote {} perf samples to {}\n", s.perf_rows, request.perf_out.string());
    } else if (*fit) {
      fit_request.samples = fit_samples;
      if (!fit_target.empty()) fit_request.target = fit_target;
      if (!fit_family.empty()) fit_request.family = gp::parse_kernel_family(fit_family);
      if (fit_iters) config.gp.iters = *fit_iters;
      fit_request.seed = config.gp.seed;
      fit_request.model_out = fit_out;
      if (!fit_report.empty()) fit_request.report_out = fit_report;
      const FitReport r = cmd_fit(config, fit_request);
      out << fmt::format(
          "target {} family {} train {} test {} mae {} baseline_mae {} test_std {}{}\n", r.target,
          gp::to_string(r.family), r.n_train, r.n_test, format_double(r.mae),
          format_double(r.baseline_mae), format_double(r.test_std),
          r.info.degenerate ? " (degenerate: constant targets)" : "");
    } else if (*explore) {
      explore_request.oracle = flags.oracle;
      if (!ce_model.empty()) explore_request.ce_model = ce_model;
      if (!latency_model.empty()) explore_request.latency_model = latency_model;
      if (!power_model.empty()) explore_request.power_model = power_model;
      explore_request.out = explore_out;
      if (generations) config.ga.generations = *generations;
      if (population) config.ga.population_size = *population;
      const ExploreSummary s = cmd_explore(config, explore_request);
      out << fmt::format("best fitness {} after {} evaluations\n", format_double(s.ga.best_fitness),
                         s.ga.evaluations);
      out << fmt::format("oracle ce {} latency_ms {} power_w {}\n", format_double(s.oracle.ce),
                         format_double(s.oracle.latency_ms), format_double(s.oracle.power_w));
      if (s.ga.all_penalized) {
        err << "no evaluated design satisfied the DSP and memory budgets; "
               "relax --dsp-budget/--mem-budget\n";
        return kExitInfeasible;
      }
    } else if (*pareto) {
      const ParetoSummary s = cmd_pareto(config, {frontier_out, plot_out});
      out << fmt::format("evaluated {} points, {} on the frontier\n", s.evaluated, s.frontier);
    } else if (*report) {
      ReportRequest request{report_result, std::nullopt};
      if (!report_out.empty()) request.out = report_out;
      const ReportSummary s = cmd_report(config, request);
      out << fmt::format("candidate ce {} latency_ms {} power_w {}\n", format_double(s.candidate.ce),
                         format_double(s.candidate.latency_ms), format_double(s.candidate.power_w));
      out << fmt::format("frontier size {} on_front {} frontier_member {}\n", s.frontier_size,
                         s.on_front, s.frontier_member);
    }
    return kExitOk;
  } catch (const SpaceTooLarge& e) {
    err << "error: " << e.what() << '\n';
    return kExitSpaceTooLarge;
  } catch (const CountOverflow& e) {
    err << "error: " << e.what() << '\n';
    return kExitSpaceTooLarge;
  } catch (const FactorizationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitBadInput;
  }
}

}  // namespace codesign
