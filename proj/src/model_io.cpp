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

#include "codesign/model_io.hpp"

#include <fstream>
#include <vector>

#include <fmt/format.h>

#include "codesign/error.hpp"
#include "codesign/sample_io.hpp"

namespace codesign {

namespace {

using nlohmann::json;

std::vector<double> to_vector(const Eigen::VectorXd& v) {
  return {v.data(), v.data() + v.size()};
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

}  // namespace

json model_to_json(const gp::GpModel& model, const std::string& target_name) {
  const gp::Hyperparameters& h = model.hyperparameters();
  json inputs = json::array();
  for (Eigen::Index i = 0; i < model.train_inputs().rows(); ++i) {
    inputs.push_back(to_vector(model.train_inputs().row(i).transpose()));
  }
  const gp::FitInfo& info = model.fit_info();
  return {
      {"format", "codesign-gp-model"},
      {"version", 1},
      {"target", target_name},
      {"family", std::string(gp::to_string(h.kernel.family))},
      {"lengthscales", h.kernel.lengthscales},
      {"signal_variance", h.kernel.signal_variance},
      {"noise_variance", h.noise_variance},
      {"constant_mean", h.constant_mean},
      {"input_mean", to_vector(model.standardization().mean)},
      {"input_scale", to_vector(model.standardization().scale)},
      {"train_inputs", inputs},
      {"train_targets", to_vector(model.train_targets())},
      {"fit",
       {{"degenerate", info.degenerate},
        {"iterations", info.iterations},
        {"initial_log_likelihood", info.initial_log_likelihood},
        {"best_log_likelihood", info.best_log_likelihood},
        {"seed", info.seed}}},
  };
}

StoredModel model_from_json(const json& doc) {
  try {
    if (doc.at("format").get<std::string>() != "codesign-gp-model") {
      throw ParseError("not a codesign GP model document");
    }
    gp::Hyperparameters h;
    h.kernel.family = gp::parse_kernel_family(doc.at("family").get<std::string>());
    h.kernel.lengthscales = doc.at("lengthscales").get<std::vector<double>>();
    h.kernel.signal_variance = doc.at("signal_variance").get<double>();
    h.noise_variance = doc.at("noise_variance").get<double>();
    h.constant_mean = doc.at("constant_mean").get<double>();

    gp::Standardization s;
    s.mean = to_eigen(doc.at("input_mean").get<std::vector<double>>());
    s.scale = to_eigen(doc.at("input_scale").get<std::vector<double>>());

    const auto rows = doc.at("train_inputs").get<std::vector<std::vector<double>>>();
    const auto targets = doc.at("train_targets").get<std::vector<double>>();
    const auto d = static_cast<Eigen::Index>(h.kernel.lengthscales.size());
    Eigen::MatrixXd inputs(static_cast<Eigen::Index>(rows.size()), d);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (static_cast<Eigen::Index>(rows[i].size()) != d) {
        throw ParseError(fmt::format("training row {} has {} values, expected {}", i,
                                     rows[i].size(), d));
      }
      for (Eigen::Index j = 0; j < d; ++j) {
        inputs(static_cast<Eigen::Index>(i), j) = rows[i][static_cast<std::size_t>(j)];
      }
    }

    StoredModel out{gp::GpModel::condition(std::move(inputs), to_eigen(targets), h, s),
                    doc.at("target").get<std::string>()};
    const json& fit = doc.at("fit");
    gp::FitInfo info;
    info.degenerate = fit.at("degenerate").get<bool>();
    info.iterations = fit.at("iterations").get<int>();
    info.initial_log_likelihood = fit.at("initial_log_likelihood").get<double>();
    info.best_log_likelihood = fit.at("best_log_likelihood").get<double>();
    info.seed = fit.at("seed").get<std::uint64_t>();
    out.model.set_fit_info(info);
    return out;
  } catch (const json::exception& e) {
    throw ParseError(fmt::format("malformed model document: {}", e.what()));
  }
}

void save_model(const std::filesystem::path& path, const gp::GpModel& model,
                const std::string& target_name) {
  write_text_file(path, model_to_json(model, target_name).dump(1) + '\n');
}

StoredModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("cannot open model file '{}'", path.string()));
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(fmt::format("model file '{}': {}", path.string(), e.what()));
  }
  try {
    return model_from_json(doc);
  } catch (const ParseError& e) {
    throw ParseError(fmt::format("model file '{}': {}", path.string(), e.what()));
  }
}

}  // namespace codesign
