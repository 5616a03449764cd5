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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace codesign::gp {

enum class KernelFamily { kMatern32, kMatern52 };

std::string_view to_string(KernelFamily family);
KernelFamily parse_kernel_family(std::string_view name);

// ARD Matern kernel. Lengthscales act on whatever input space the caller
// evaluates in; GpModel evaluates on standardized inputs.
struct KernelSpec {
  KernelFamily family = KernelFamily::kMatern52;
  std::vector<double> lengthscales;
  double signal_variance = 1.0;
};

// Throws InvalidSpec on non-positive hyperparameters.
void validate(const KernelSpec& spec);

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> x2);

struct Dataset {
  Eigen::MatrixXd inputs;  // n x d, one row per sample
  Eigen::VectorXd targets;
  std::string target_name;

  Eigen::Index size() const { return inputs.rows(); }
  Eigen::Index dim() const { return inputs.cols(); }
};

// Finite values, matching shapes, no duplicate rows with different targets.
void validate(const Dataset& data);

// Rows `indices` of `data`, in the given order.
Dataset subset(const Dataset& data, std::span<const Eigen::Index> indices);

struct Hyperparameters {
  KernelSpec kernel;
  double noise_variance = 1e-2;
  double constant_mean = 0.0;
};

// Per-dimension z-score applied before every kernel evaluation.
struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;

  static Standardization from_inputs(const Eigen::MatrixXd& inputs);
  Eigen::MatrixXd apply(const Eigen::MatrixXd& inputs) const;
};

struct FitInfo {
  bool degenerate = false;
  int iterations = 0;
  double initial_log_likelihood = 0.0;
  double best_log_likelihood = 0.0;
  std::uint64_t seed = 0;
};

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

// Exact GP conditioned on a training set. Immutable once built, so
// concurrent predict() calls are safe.
class GpModel {
 public:
  // Factorizes K + noise*I with jitter escalation from 1e-8 to 1e-4
  // (relative to the mean diagonal). Throws FactorizationError beyond that.
  static GpModel condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                           Hyperparameters hyper);
  static GpModel condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                           Hyperparameters hyper, Standardization standardization);

  Prediction predict(std::span<const double> x) const;
  // Mean only; skips the O(n^2) variance solve.
  double mean(std::span<const double> x) const;
  std::vector<Prediction> predict(const Eigen::MatrixXd& inputs) const;

  const Hyperparameters& hyperparameters() const { return hyper_; }
  const Standardization& standardization() const { return standardization_; }
  const Eigen::MatrixXd& train_inputs() const { return inputs_; }
  const Eigen::VectorXd& train_targets() const { return targets_; }
  // Lower-triangular Cholesky factor of K + (noise + jitter) I.
  const Eigen::MatrixXd& factor() const { return factor_; }
  const Eigen::VectorXd& alpha() const { return alpha_; }
  double jitter() const { return jitter_; }
  Eigen::Index dim() const { return inputs_.cols(); }

  const FitInfo& fit_info() const { return info_; }
  void set_fit_info(FitInfo info) { info_ = info; }

 private:
  GpModel() = default;

  Hyperparameters hyper_;
  Standardization standardization_;
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd standardized_;
  Eigen::VectorXd targets_;
  Eigen::MatrixXd factor_;
  Eigen::VectorXd alpha_;
  double jitter_ = 0.0;
  FitInfo info_;
};

struct LogLikelihood {
  double value = 0.0;
  // d log-lengthscales, log signal variance, log noise variance, mean.
  Eigen::VectorXd gradient;
};

LogLikelihood log_marginal_likelihood(const GpModel& model);

struct FitOptions {
  int iters = 50;
  double step_size = 0.05;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::uint64_t seed = 0;
};

// Adam ascent on the log marginal likelihood over log-hyperparameters and
// the constant mean. Returns the model at the best parameters seen.
GpModel fit(const Dataset& data, KernelFamily family, const FitOptions& options = {});

double evaluate_mae(const GpModel& model, const Dataset& test);

// Kernel family used for each surrogate target.
KernelFamily default_family(std::string_view target_name);

}  // namespace codesign::gp
