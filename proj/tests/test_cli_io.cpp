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

#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "codesign/commands.hpp"
#include "codesign/config.hpp"
#include "codesign/error.hpp"
#include "codesign/model_io.hpp"
#include "codesign/sample_io.hpp"

using namespace codesign;
namespace fs = std::filesystem;

namespace {

// Fresh scratch directory per test case, removed afterwards.
struct ScratchDir {
  fs::path path;
  ScratchDir() {
    static int counter = 0;
    path = fs::temp_directory_path() /
           ("codesign_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const { return (path / name).string(); }
};

struct CliRun {
  int code = 0;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "codesign");
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
}

// One block of two cells and a 12-config hardware domain: 108 points.
std::string tiny_config() {
  return R"({
    "backbone": {"blocks": [{"max_units": 2, "min_units": 2, "out_channels": 256, "stride": 1}]},
    "hw_domain": {"pf": [16, 64], "pc": [16, 64], "pv": [4, 8, 16], "bw": [128]},
    "ga": {"population_size": 20, "generations": 20}
  })";
}

}  // namespace

TEST_CASE("format_double round-trips") {
  for (double v : {0.1, 1.0 / 3.0, 2.5e-300, -7.0, 123456789.123456789, 0.0}) {
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("sample files have the documented shape") {
  ScratchDir dir;
  const CliRun r = cli({"sample", "--n-loss", "2000", "--n-hw", "4600", "--out-dir",
                        dir.path.string()});
  REQUIRE(r.code == 0);
  CHECK(line_count(dir / "loss_samples.csv") == 2001);
  CHECK(line_count(dir / "perf_samples.csv") == 4601);
  std::ifstream loss(dir / "loss_samples.csv");
  std::string header;
  std::getline(loss, header);
  CHECK(header == "e0,e1,e2,e3,e4,e5,e6,e7,e8,e9,e10,e11,e12,e13,e14,e15,ce");
  std::ifstream perf(dir / "perf_samples.csv");
  std::getline(perf, header);
  CHECK(header ==
        "e0,e1,e2,e3,e4,e5,e6,e7,e8,e9,e10,e11,e12,e13,e14,e15,pf,pc,pv,bw,mem,latency_ms,power_w");
  CHECK(read_loss_samples(dir / "loss_samples.csv").size() == 2000);
  CHECK(read_perf_samples(dir / "perf_samples.csv").size() == 4600);
}

TEST_CASE("sampling is byte-reproducible per seed") {
  ScratchDir a, b, c;
  for (const ScratchDir* d : {&a, &b}) {
    REQUIRE(cli({"--seed", "5", "sample", "--n-loss", "50", "--n-hw", "80", "--out-dir",
                 d->path.string()})
                .code == 0);
  }
  REQUIRE(cli({"--seed", "6", "sample", "--n-loss", "50", "--n-hw", "80", "--out-dir",
               c.path.string()})
              .code == 0);
  CHECK(slurp(a / "loss_samples.csv") == slurp(b / "loss_samples.csv"));
  CHECK(slurp(a / "perf_samples.csv") == slurp(b / "perf_samples.csv"));
  CHECK(slurp(a / "loss_samples.csv") != slurp(c / "loss_samples.csv"));
}

TEST_CASE("a single loss sample") {
  ScratchDir dir;
  REQUIRE(cli({"sample", "--n-loss", "1", "--n-hw", "1", "--out-dir", dir.path.string()}).code == 0);
  CHECK(line_count(dir / "loss_samples.csv") == 2);
  CHECK(line_count(dir / "perf_samples.csv") == 2);
  CHECK(cli({"sample", "--n-loss", "0", "--out-dir", dir.path.string()}).code == 2);
}

TEST_CASE("samples survive a write and read cycle exactly") {
  ScratchDir dir;
  SampleRequest req;
  req.n_loss = 30;
  req.n_hw = 30;
  req.seed = 3;
  req.loss_out = dir / "l.csv";
  req.perf_out = dir / "p.csv";
  cmd_sample(RunConfig{}, req);
  const auto loss = read_loss_samples(req.loss_out);
  const auto perf = read_perf_samples(req.perf_out);
  write_loss_samples(dir / "l2.csv", loss);
  write_perf_samples(dir / "p2.csv", perf);
  CHECK(slurp(dir / "l2.csv") == slurp(req.loss_out));
  CHECK(slurp(dir / "p2.csv") == slurp(req.perf_out));
  const auto perf2 = read_perf_samples(dir / "p2.csv");
  for (std::size_t i = 0; i < perf.size(); ++i) {
    CHECK(perf[i].latency_ms == perf2[i].latency_ms);
    CHECK(perf[i].power_w == perf2[i].power_w);
    CHECK(perf[i].hw == perf2[i].hw);
  }
  const gp::Dataset d = to_dataset(perf, "power_w");
  CHECK(d.dim() == 19);
  CHECK(d.inputs(0, 16) == static_cast<double>(perf[0].hw.pf));
  CHECK(to_dataset(loss).dim() == 16);
}

TEST_CASE("unwritable output names the path") {
  ScratchDir dir;
  const std::string bad = (dir.path / "missing" / "sub").string();
  const CliRun r = cli({"sample", "--n-loss", "2", "--n-hw", "2", "--out-dir", bad});
  CHECK(r.code == 2);
  CHECK(r.err.find(bad) != std::string::npos);
}

TEST_CASE("malformed sample files report line and column") {
  ScratchDir dir;
  std::string text = loss_header() + "\n";
  text += "1,1,0.5,0,1,1,0,0,1,1,0,0,1,1,0,0,1.5\n";
  text += "1,1,0.5,0,1,1,0,0,1,1,0,0,1,oops,0,0,1.5\n";
  write(dir / "bad.csv", text);
  try {
    read_loss_samples(dir / "bad.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("e13") != std::string::npos);
    CHECK(msg.find("bad.csv") != std::string::npos);
  }

  write(dir / "short.csv", loss_header() + "\n1,2,3\n");
  CHECK_THROWS_AS(read_loss_samples(dir / "short.csv"), ParseError);
  write(dir / "hdr.csv", "a,b,c\n1,2,3\n");
  CHECK_THROWS_AS(detect_schema(dir / "hdr.csv"), ParseError);
  CHECK_THROWS_AS(read_perf_samples(dir / "bad.csv"), ParseError);

  const CliRun r = cli({"fit", "--samples", dir / "bad.csv", "--out", dir / "m.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("line 3") != std::string::npos);
}

TEST_CASE("train/test split sizes") {
  CHECK(train_test_split(2000, 0.75, 0).train.size() == 1500);
  CHECK(train_test_split(2000, 0.75, 0).test.size() == 500);
  CHECK(train_test_split(4600, 0.652, 0).train.size() == 2999);
  CHECK(train_test_split(4600, 3000.0 / 4600.0, 0).train.size() == 3000);
  const Split a = train_test_split(100, 0.5, 7);
  const Split b = train_test_split(100, 0.5, 7);
  CHECK(a.train == b.train);
  std::vector<Eigen::Index> all = a.train;
  all.insert(all.end(), a.test.begin(), a.test.end());
  std::sort(all.begin(), all.end());
  for (Eigen::Index i = 0; i < 100; ++i) CHECK(all[static_cast<std::size_t>(i)] == i);
}

TEST_CASE("fit picks the documented kernel families and reports MAE") {
  ScratchDir dir;
  REQUIRE(cli({"sample", "--n-loss", "120", "--n-hw", "120", "--out-dir", dir.path.string()})
              .code == 0);
  RunConfig cfg;
  cfg.gp.iters = 5;
  FitRequest ce;
  ce.samples = dir / "loss_samples.csv";
  ce.model_out = dir / "ce.json";
  ce.report_out = dir / "ce_report.json";
  const FitReport rc = cmd_fit(cfg, ce);
  CHECK(rc.family == gp::KernelFamily::kMatern32);
  CHECK(rc.target == "ce");
  CHECK(rc.n_train == 90);
  CHECK(rc.n_test == 30);
  CHECK(rc.mae >= 0.0);
  const auto doc = nlohmann::json::parse(slurp(dir / "ce_report.json"));
  CHECK(doc["family"] == "matern32");
  CHECK(doc["mae"].get<double>() == rc.mae);

  FitRequest lat;
  lat.samples = dir / "perf_samples.csv";
  lat.target = "latency_ms";
  lat.model_out = dir / "lat.json";
  const FitReport rl = cmd_fit(cfg, lat);
  CHECK(rl.family == gp::KernelFamily::kMatern52);
  CHECK(rl.n_train == 78);

  lat.target.reset();
  CHECK_THROWS_AS(cmd_fit(cfg, lat), InvalidInput);
  lat.target = "energy";
  CHECK_THROWS_AS(cmd_fit(cfg, lat), InvalidInput);
  ce.target = "latency_ms";
  CHECK_THROWS_AS(cmd_fit(cfg, ce), InvalidInput);

  const CliRun r = cli({"fit", "--samples", dir / "perf_samples.csv", "--target", "power_w",
                        "--family", "matern32", "--iters", "3", "--out", dir / "pw.json"});
  CHECK(r.code == 0);
  CHECK(r.out.find("family matern32") != std::string::npos);
  CHECK(load_model(dir / "pw.json").target_name == "power_w");
}

TEST_CASE("saved models predict exactly like the in-memory model") {
  ScratchDir dir;
  SampleRequest req;
  req.n_loss = 80;
  req.n_hw = 80;
  req.seed = 11;
  req.loss_out = dir / "l.csv";
  req.perf_out = dir / "p.csv";
  cmd_sample(RunConfig{}, req);
  const gp::Dataset data = to_dataset(read_perf_samples(req.perf_out), "latency_ms");
  gp::FitOptions opts;
  opts.iters = 10;
  const gp::GpModel model = gp::fit(data, gp::KernelFamily::kMatern52, opts);
  save_model(dir / "m.json", model, "latency_ms");
  const StoredModel loaded = load_model(dir / "m.json");
  CHECK(loaded.target_name == "latency_ms");
  CHECK(loaded.model.hyperparameters().kernel.lengthscales ==
        model.hyperparameters().kernel.lengthscales);
  CHECK(loaded.model.fit_info().best_log_likelihood == model.fit_info().best_log_likelihood);

  Rng rng(12);
  const BackboneSpec bb = default_backbone();
  for (int i = 0; i < 100; ++i) {
    const CodesignPoint p{random_arch(rng, bb), random_hw(rng, default_hw_domain())};
    const auto x = encode19(p);
    const gp::Prediction a = model.predict(x);
    const gp::Prediction b = loaded.model.predict(x);
    CHECK(std::abs(a.mean - b.mean) <= 1e-12);
    CHECK(std::abs(a.variance - b.variance) <= 1e-12);
  }

  // Saving again gives the same bytes.
  save_model(dir / "m2.json", loaded.model, "latency_ms");
  CHECK(slurp(dir / "m.json") == slurp(dir / "m2.json"));

  write(dir / "junk.json", "{\"format\": \"something-else\"}");
  CHECK_THROWS_AS(load_model(dir / "junk.json"), ParseError);
  CHECK_THROWS_AS(load_model(dir / "absent.json"), IoError);
}

TEST_CASE("explore needs its model files") {
  ScratchDir dir;
  const std::string missing = dir / "nope_ce.json";
  const CliRun r = cli({"explore", "--ce-model", missing, "--latency-model", missing,
                        "--power-model", missing, "--out", dir / "r.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find(missing) != std::string::npos);
  const CliRun none = cli({"explore", "--out", dir / "r.json"});
  CHECK(none.code == 2);
  CHECK(none.err.find("--ce-model") != std::string::npos);
}

TEST_CASE("explore with swapped model files is rejected") {
  ScratchDir dir;
  REQUIRE(cli({"sample", "--n-loss", "40", "--n-hw", "40", "--out-dir", dir.path.string()}).code ==
          0);
  REQUIRE(cli({"fit", "--samples", dir / "loss_samples.csv", "--iters", "2", "--out",
               dir / "ce.json"})
              .code == 0);
  const CliRun r = cli({"explore", "--ce-model", dir / "ce.json", "--latency-model",
                        dir / "ce.json", "--power-model", dir / "ce.json", "--out",
                        dir / "r.json"});
  CHECK(r.code == 2);
  CHECK(r.err.find("expected 'latency_ms'") != std::string::npos);
}

TEST_CASE("impossible budgets exit with the infeasible code") {
  ScratchDir dir;
  write(dir / "cfg.json", tiny_config());
  const CliRun r = cli({"--config", dir / "cfg.json", "--oracle", "--dsp-budget", "1", "explore",
                        "--out", dir / "r.json"});
  CHECK(r.code == 3);
  CHECK(r.err.find("budget") != std::string::npos);
}

TEST_CASE("pareto refuses spaces over the cap") {
  ScratchDir dir;
  const CliRun r = cli({"pareto", "--frontier-out", dir / "f.csv", "--plot-out", dir / "p.dat"});
  CHECK(r.code == 4);
  CHECK(r.err.find("56216616300") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "f.csv"));
}

TEST_CASE("pareto files on a small space") {
  ScratchDir dir;
  write(dir / "cfg.json", R"({
    "backbone": {"blocks": [{"max_units": 2, "min_units": 2, "out_channels": 256, "stride": 1}]},
    "hw_domain": {"pf": [16], "pc": [16], "pv": [8], "bw": [128]}
  })");
  const CliRun r = cli({"--config", dir / "cfg.json", "pareto", "--frontier-out", dir / "f.csv",
                        "--plot-out", dir / "p.dat"});
  REQUIRE(r.code == 0);
  CHECK(line_count(dir / "p.dat") == 1 + 9);
  const RunConfig cfg = load_config(dir / "cfg.json");
  const auto front = read_frontier(dir / "f.csv", cfg.backbone);
  CHECK(front.size() >= 1);
  CHECK(front.size() <= 9);
  for (const auto& p : front) CHECK(p.on_frontier);
  const auto again = pareto_front(front);
  REQUIRE(again.size() == front.size());
  for (std::size_t i = 0; i < front.size(); ++i) {
    CHECK(again[i].point == front[i].point);
    CHECK(again[i].objectives == front[i].objectives);
  }
  write_frontier(dir / "f2.csv", again);
  CHECK(slurp(dir / "f.csv") == slurp(dir / "f2.csv"));
}

TEST_CASE("explore result verifies against the reference frontier") {
  ScratchDir dir;
  write(dir / "cfg.json", tiny_config());
  const CliRun e = cli({"--config", dir / "cfg.json", "--oracle", "--preset", "A", "--seed", "4",
                        "explore", "--out", dir / "r.json"});
  REQUIRE(e.code == 0);
  const auto result = nlohmann::json::parse(slurp(dir / "r.json"));
  CHECK(result["mode"] == "oracle");
  CHECK(result["weights"]["mu"].get<double>() == 0.2);
  CHECK(result["history"].size() == 20);
  CHECK(result["best"]["encoding16"].size() == 16);
  const CliRun rep = cli({"--config", dir / "cfg.json", "report", "--result", dir / "r.json",
                          "--out", dir / "rep.json"});
  REQUIRE(rep.code == 0);
  const auto doc = nlohmann::json::parse(slurp(dir / "rep.json"));
  CHECK(doc["on_front"] == true);
  CHECK(doc["frontier_member"] == true);

  // Byte reproducibility of the whole explore output.
  REQUIRE(cli({"--config", dir / "cfg.json", "--oracle", "--preset", "A", "--seed", "4",
               "explore", "--out", dir / "r2.json"})
              .code == 0);
  CHECK(slurp(dir / "r.json") == slurp(dir / "r2.json"));
}

TEST_CASE("surrogate mode finds the oracle optimum when the surrogates are exact") {
  ScratchDir dir;
  write(dir / "cfg.json", tiny_config());
  const RunConfig cfg = load_config(dir / "cfg.json");
  // Training data covers the whole 108-point space.
  const auto space = exhaustive_eval(cfg.backbone, cfg.hw_domain, cfg.oracle);
  std::vector<LossSample> loss;
  std::vector<PerfSample> perf;
  for (std::size_t i = 0; i < space.size(); i += cfg.hw_domain.size()) {
    loss.push_back({encode16(space[i].point.arch), space[i].objectives.ce});
  }
  for (const auto& p : space) {
    perf.push_back({encode16(p.point.arch), p.point.hw, p.objectives.latency_ms, p.objectives.power_w});
  }
  auto fit_all = [&](const gp::Dataset& d, const std::string& name) {
    gp::FitOptions opts;
    const gp::GpModel m = gp::fit(d, gp::default_family(name), opts);
    CHECK(gp::evaluate_mae(m, d) <= 1e-2 * (d.targets.maxCoeff() - d.targets.minCoeff()));
    save_model(dir / (name + ".json"), m, name);
  };
  fit_all(to_dataset(loss), "ce");
  fit_all(to_dataset(perf, "latency_ms"), "latency_ms");
  fit_all(to_dataset(perf, "power_w"), "power_w");

  const CliRun o = cli({"--config", dir / "cfg.json", "--oracle", "explore", "--out", dir / "o.json"});
  const CliRun g = cli({"--config", dir / "cfg.json", "explore", "--ce-model", dir / "ce.json",
                        "--latency-model", dir / "latency_ms.json", "--power-model",
                        dir / "power_w.json", "--out", dir / "g.json"});
  REQUIRE(o.code == 0);
  REQUIRE(g.code == 0);
  const auto oj = nlohmann::json::parse(slurp(dir / "o.json"));
  const auto gj = nlohmann::json::parse(slurp(dir / "g.json"));
  CHECK(gj["mode"] == "surrogate");
  CHECK(oj["best"] == gj["best"]);
}

TEST_CASE("configuration files") {
  ScratchDir dir;
  const RunConfig defaults = config_from_json(nlohmann::json::object());
  CHECK(defaults.backbone.total_cells() == 16);
  CHECK(defaults.hw_domain.size() == 300);
  CHECK(defaults.ga.population_size == 50);
  const RunConfig round = config_from_json(to_json(defaults));
  CHECK(to_json(round) == to_json(defaults));

  write(dir / "typo.json", R"({"ga": {"populaton_size": 10}})");
  const CliRun r = cli({"--config", dir / "typo.json", "--oracle", "explore"});
  CHECK(r.code == 2);
  CHECK(r.err.find("populaton_size") != std::string::npos);

  write(dir / "notjson.json", "{ nope");
  CHECK(cli({"--config", dir / "notjson.json", "--oracle", "explore"}).code == 2);
  CHECK(cli({"--config", dir / "absent.json", "--oracle", "explore"}).code == 2);

  write(dir / "bad_hw.json", R"({"hw_domain": {"pf": [12]}})");
  CHECK_THROWS(load_config(dir / "bad_hw.json"));

  write(dir / "w.json", R"({"weights": {"preset": "C", "dsp_avl": 900}})");
  const RunConfig w = load_config(dir / "w.json");
  CHECK(w.weights.mu == 0.05);
  CHECK(w.weights.dsp_avl == 900);
}

TEST_CASE("command-line flag handling") {
  CHECK(cli({}).code == 2);
  CHECK(cli({"frobnicate"}).code == 2);
  CHECK(cli({"--preset", "Z", "explore", "--oracle"}).code == 2);
  CHECK(cli({"--weights", "1,2", "--oracle", "explore"}).code == 2);
  CHECK(cli({"--weights", "0,0,0", "--oracle", "explore"}).code == 2);
  CHECK(cli({"fit"}).code == 2);
  CHECK(cli({"--help"}).code == 0);
}

TEST_CASE("external loss files from a smaller backbone feed the fit command") {
  // An eight-cell, two-block file as produced by a toy supernet exporter:
  // columns e8..e15 are zero padding.
  ScratchDir dir;
  BackboneSpec toy = default_backbone();
  toy.blocks.resize(2);
  Rng rng(21);
  std::vector<LossSample> rows;
  for (int i = 0; i < 200; ++i) {
    const ArchEncoding arch = random_arch(rng, toy);
    rows.push_back({encode16(arch), synthetic_ce(arch, toy)});
  }
  write_loss_samples(dir / "toy.csv", rows);
  std::ifstream in(dir / "toy.csv");
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  CHECK(first.find(",0,0,0,0,0,0,0,0,") != std::string::npos);

  RunConfig cfg;
  FitRequest req;
  req.samples = dir / "toy.csv";
  req.model_out = dir / "toy_model.json";
  const FitReport r = cmd_fit(cfg, req);
  CHECK(r.n_train == 150);
  CHECK(r.n_test == 50);
  CHECK(r.mae <= 0.15 * r.test_std);

  // The sample command can also ingest such a file for a matching backbone.
  write(dir / "cfg.json", R"({"backbone": {"blocks": [
      {"max_units": 4, "min_units": 2, "out_channels": 256, "stride": 1},
      {"max_units": 4, "min_units": 2, "out_channels": 512, "stride": 2}]}})");
  const CliRun s = cli({"--config", dir / "cfg.json", "sample", "--n-loss", "200", "--n-hw", "5",
                        "--loss-input", dir / "toy.csv", "--out-dir", dir.path.string(),
                        "--loss-out", "ingested.csv"});
  REQUIRE(s.code == 0);
  CHECK(slurp(dir / "ingested.csv") == slurp(dir / "toy.csv"));

  // Against the 16-cell default backbone the padded rows are invalid.
  const CliRun bad = cli({"sample", "--n-loss", "10", "--n-hw", "5", "--loss-input",
                          dir / "toy.csv", "--out-dir", dir.path.string()});
  CHECK(bad.code == 2);
  CHECK(bad.err.find("line 2") != std::string::npos);
}

TEST_CASE("golden encode16 vectors") {
  // Shared fixture for the eight-cell toy backbone.
  BackboneSpec toy = default_backbone();
  toy.blocks.resize(2);
  std::ifstream in(fs::path(CODESIGN_TEST_DATA_DIR) / "golden_encode16.csv");
  REQUIRE(in);
  std::string line;
  std::getline(in, line);
  int rows = 0;
  while (std::getline(in, line)) {
    std::vector<double> values;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) values.push_back(std::stod(cell));
    REQUIRE(values.size() == 8 + 16);
    const ArchEncoding arch{std::vector<double>(values.begin(), values.begin() + 8)};
    const auto enc = encode16(arch);
    for (int j = 0; j < 16; ++j) CHECK(enc[static_cast<std::size_t>(j)] == values[static_cast<std::size_t>(8 + j)]);
    CHECK(decode16(enc, toy) == arch);
    ++rows;
  }
  CHECK(rows >= 4);
}
