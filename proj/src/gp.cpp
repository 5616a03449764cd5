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

#include "codesign/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <utility>

#include <Eigen/Cholesky>
#include <fmt/format.h>
#include <lapacke.h>

#include "codesign/error.hpp"

namespace codesign::gp {

namespace {

// Kernel value k = s2 * f(r) and the factor g with
// dk/dlog(l_d) = s2 * g(r) * (diff_d / l_d)^2.
struct MaternTerms {
  double f;
  double g;
};

MaternTerms matern(KernelFamily family, double r) {
  if (family == KernelFamily::kMatern32) {
    constexpr double a = std::numbers::sqrt3;
    const double e = std::exp(-a * r);
    return {(1.0 + a * r) * e, a * a * e};
  }
  const double a = std::sqrt(5.0);
  const double e = std::exp(-a * r);
  return {(1.0 + a * r + a * a * r * r / 3.0) * e, a * a * (1.0 + a * r) / 3.0 * e};
}

double scaled_distance(const KernelSpec& spec, const double* x, const double* x2,
                       Eigen::Index dim) {
  double r2 = 0.0;
  for (Eigen::Index d = 0; d < dim; ++d) {
    const double s = (x[d] - x2[d]) / spec.lengthscales[static_cast<std::size_t>(d)];
    r2 += s * s;
  }
  return std::sqrt(r2);
}

// Kernel matrix over the rows of `z` (n x d, row-major access through a copy).
Eigen::MatrixXd kernel_matrix(const KernelSpec& spec,
                              const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                                  Eigen::RowMajor>& z) {
  const Eigen::Index n = z.rows();
  const Eigen::Index d = z.cols();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    k(j, j) = spec.signal_variance;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double r = scaled_distance(spec, z.row(i).data(), z.row(j).data(), d);
      const double value = spec.signal_variance * matern(spec.family, r).f;
      k(i, j) = value;
      k(j, i) = value;
    }
  }
  return k;
}

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

void check_lapack(lapack_int info, const char* routine) {
  if (info != 0) {
    throw FactorizationError(fmt::format("{} failed with info {}", routine, info));
  }
}

}  // namespace

std::string_view to_string(KernelFamily family) {
  return family == KernelFamily::kMatern32 ? "matern32" : "matern52";
}

KernelFamily parse_kernel_family(std::string_view name) {
  if (name == "matern32") return KernelFamily::kMatern32;
  if (name == "matern52") return KernelFamily::kMatern52;
  throw InvalidSpec(fmt::format("unknown kernel family '{}'", name));
}

KernelFamily default_family(std::string_view target_name) {
  if (target_name == "ce") return KernelFamily::kMatern32;
  if (target_name == "latency_ms" || target_name == "power_w") return KernelFamily::kMatern52;
  throw InvalidInput(fmt::format("unknown target '{}'", target_name));
}

void validate(const KernelSpec& spec) {
  if (spec.lengthscales.empty()) throw InvalidSpec("kernel needs at least one lengthscale");
  if (!(spec.signal_variance > 0.0) || !std::isfinite(spec.signal_variance)) {
    throw InvalidSpec(fmt::format("signal variance {} must be positive", spec.signal_variance));
  }
  for (double l : spec.lengthscales) {
    if (!(l > 0.0) || !std::isfinite(l)) {
      throw InvalidSpec(fmt::format("lengthscale {} must be positive", l));
    }
  }
}

double kernel_eval(const KernelSpec& spec, std::span<const double> x,
                   std::span<const double> x2) {
  validate(spec);
  if (x.size() != x2.size() || x.size() != spec.lengthscales.size()) {
    throw InvalidInput(fmt::format("kernel inputs of size {} and {} with {} lengthscales",
                                   x.size(), x2.size(), spec.lengthscales.size()));
  }
  const double r =
      scaled_distance(spec, x.data(), x2.data(), static_cast<Eigen::Index>(x.size()));
  return spec.signal_variance * matern(spec.family, r).f;
}

void validate(const Dataset& data) {
  if (data.inputs.rows() != data.targets.size()) {
    throw InvalidInput(fmt::format("dataset has {} input rows and {} targets",
                                   data.inputs.rows(), data.targets.size()));
  }
  if (!data.inputs.allFinite() || !data.targets.allFinite()) {
    throw InvalidInput("dataset contains non-finite values");
  }
  const RowMatrix rows = data.inputs;
  std::vector<Eigen::Index> order(static_cast<std::size_t>(rows.rows()));
  for (Eigen::Index i = 0; i < rows.rows(); ++i) order[static_cast<std::size_t>(i)] = i;
  const auto d = rows.cols();
  auto row_less = [&](Eigen::Index a, Eigen::Index b) {
    return std::lexicographical_compare(rows.row(a).data(), rows.row(a).data() + d,
                                        rows.row(b).data(), rows.row(b).data() + d);
  };
  std::sort(order.begin(), order.end(), row_less);
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto a = order[i - 1];
    const auto b = order[i];
    if (!row_less(a, b) && data.targets(a) != data.targets(b)) {
      throw InvalidInput(
          fmt::format("rows {} and {} have identical inputs but different targets",
                      std::min(a, b), std::max(a, b)));
    }
  }
}

Dataset subset(const Dataset& data, std::span<const Eigen::Index> indices) {
  Dataset out;
  out.target_name = data.target_name;
  out.inputs.resize(static_cast<Eigen::Index>(indices.size()), data.inputs.cols());
  out.targets.resize(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto row = static_cast<Eigen::Index>(i);
    out.inputs.row(row) = data.inputs.row(indices[i]);
    out.targets(row) = data.targets(indices[i]);
  }
  return out;
}

Standardization Standardization::from_inputs(const Eigen::MatrixXd& inputs) {
  Standardization s;
  const double n = static_cast<double>(inputs.rows());
  s.mean = inputs.colwise().mean().transpose();
  s.scale.resize(inputs.cols());
  for (Eigen::Index d = 0; d < inputs.cols(); ++d) {
    const double var = (inputs.col(d).array() - s.mean(d)).square().sum() / n;
    const double sd = std::sqrt(var);
    s.scale(d) = sd > 1e-12 ? sd : 1.0;
  }
  return s;
}

Eigen::MatrixXd Standardization::apply(const Eigen::MatrixXd& inputs) const {
  return (inputs.rowwise() - mean.transpose()).array().rowwise() / scale.transpose().array();
}

GpModel GpModel::condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                           Hyperparameters hyper) {
  Standardization s = Standardization::from_inputs(inputs);
  return condition(std::move(inputs), std::move(targets), std::move(hyper), std::move(s));
}

GpModel GpModel::condition(Eigen::MatrixXd inputs, Eigen::VectorXd targets,
                           Hyperparameters hyper, Standardization standardization) {
  validate(hyper.kernel);
  const Eigen::Index n = inputs.rows();
  const Eigen::Index d = inputs.cols();
  if (n < 1) throw InvalidInput("GP needs at least one training point");
  if (targets.size() != n) throw InvalidInput("GP inputs and targets differ in length");
  if (static_cast<Eigen::Index>(hyper.kernel.lengthscales.size()) != d) {
    throw InvalidSpec(fmt::format("{} lengthscales for {}-dimensional inputs",
                                  hyper.kernel.lengthscales.size(), d));
  }
  if (standardization.mean.size() != d || standardization.scale.size() != d) {
    throw InvalidInput("standardization does not match input dimension");
  }
  if (!(hyper.noise_variance > 0.0) || !std::isfinite(hyper.noise_variance)) {
    throw InvalidSpec(fmt::format("noise variance {} must be positive", hyper.noise_variance));
  }

  GpModel model;
  model.hyper_ = std::move(hyper);
  model.standardization_ = std::move(standardization);
  model.standardized_ = model.standardization_.apply(inputs);
  model.inputs_ = std::move(inputs);
  model.targets_ = std::move(targets);

  const RowMatrix z = model.standardized_;
  const Eigen::MatrixXd k = kernel_matrix(model.hyper_.kernel, z);
  const double base_diag = model.hyper_.kernel.signal_variance + model.hyper_.noise_variance;

  const std::vector<double> jitters{0.0, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4};
  for (double jitter : jitters) {
    Eigen::MatrixXd factor = k;
    factor.diagonal().array() += model.hyper_.noise_variance + jitter * base_diag;
    const lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n),
                                           factor.data(), static_cast<lapack_int>(n));
    if (info == 0) {
      factor.triangularView<Eigen::StrictlyUpper>().setZero();
      model.factor_ = std::move(factor);
      model.jitter_ = jitter * base_diag;
      break;
    }
  }
  if (model.factor_.size() == 0) {
    throw FactorizationError("kernel matrix is not positive definite after jitter 1e-4");
  }

  model.alpha_ = model.targets_.array() - model.hyper_.constant_mean;
  check_lapack(LAPACKE_dpotrs(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n), 1,
                              model.factor_.data(), static_cast<lapack_int>(n),
                              model.alpha_.data(), static_cast<lapack_int>(n)),
               "dpotrs");
  return model;
}

Prediction GpModel::predict(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != dim()) {
    throw InvalidInput(fmt::format("prediction input has {} dimensions, model expects {}",
                                   x.size(), dim()));
  }
  const Eigen::Index n = inputs_.rows();
  const Eigen::Index d = dim();
  Eigen::VectorXd z(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    z(j) = (x[static_cast<std::size_t>(j)] - standardization_.mean(j)) / standardization_.scale(j);
  }
  Eigen::VectorXd kx(n);
  const KernelSpec& spec = hyper_.kernel;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double s = (z(j) - standardized_(i, j)) / spec.lengthscales[static_cast<std::size_t>(j)];
      r2 += s * s;
    }
    kx(i) = spec.signal_variance * matern(spec.family, std::sqrt(r2)).f;
  }
  Prediction p;
  p.mean = hyper_.constant_mean + kx.dot(alpha_);
  const Eigen::VectorXd v = factor_.triangularView<Eigen::Lower>().solve(kx);
  p.variance = std::max(0.0, spec.signal_variance - v.squaredNorm());
  return p;
}

std::vector<Prediction> GpModel::predict(const Eigen::MatrixXd& inputs) const {
  std::vector<Prediction> out;
  out.reserve(static_cast<std::size_t>(inputs.rows()));
  std::vector<double> row(static_cast<std::size_t>(inputs.cols()));
  for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
    for (Eigen::Index j = 0; j < inputs.cols(); ++j) row[static_cast<std::size_t>(j)] = inputs(i, j);
    out.push_back(predict(row));
  }
  return out;
}

double GpModel::mean(std::span<const double> x) const {
  if (static_cast<Eigen::Index>(x.size()) != dim()) {
    throw InvalidInput(fmt::format("prediction input has {} dimensions, model expects {}",
                                   x.size(), dim()));
  }
  const Eigen::Index n = inputs_.rows();
  const Eigen::Index d = dim();
  Eigen::VectorXd z(d);
  for (Eigen::Index j = 0; j < d; ++j) {
    z(j) = (x[static_cast<std::size_t>(j)] - standardization_.mean(j)) / standardization_.scale(j);
  }
  const KernelSpec& spec = hyper_.kernel;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    double r2 = 0.0;
    for (Eigen::Index j = 0; j < d; ++j) {
      const double s = (z(j) - standardized_(i, j)) / spec.lengthscales[static_cast<std::size_t>(j)];
      r2 += s * s;
    }
    acc += spec.signal_variance * matern(spec.family, std::sqrt(r2)).f * alpha_(i);
  }
  return hyper_.constant_mean + acc;
}

LogLikelihood log_marginal_likelihood(const GpModel& model) {
  const Hyperparameters& hyper = model.hyperparameters();
  const KernelSpec& spec = hyper.kernel;
  const Eigen::MatrixXd& factor = model.factor();
  const Eigen::VectorXd& alpha = model.alpha();
  const Eigen::Index n = factor.rows();
  const Eigen::Index d = model.dim();

  const Eigen::VectorXd residual =
      model.train_targets().array() - hyper.constant_mean;
  LogLikelihood out;
  out.value = -0.5 * residual.dot(alpha) - factor.diagonal().array().log().sum() -
              0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);

  Eigen::MatrixXd inverse = factor;
  check_lapack(LAPACKE_dpotri(LAPACK_COL_MAJOR, 'L', static_cast<lapack_int>(n),
                              inverse.data(), static_cast<lapack_int>(n)),
               "dpotri");

  // dL/dtheta = 1/2 tr((alpha alpha^T - K^-1) dK/dtheta), using the lower
  // triangle of the symmetric weight matrix only.
  const RowMatrix z = model.standardization().apply(model.train_inputs());
  Eigen::VectorXd grad_length = Eigen::VectorXd::Zero(d);
  double grad_signal = 0.0;
  double trace_w = 0.0;
  std::vector<double> scaled(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < n; ++j) {
    const double w_diag = alpha(j) * alpha(j) - inverse(j, j);
    trace_w += w_diag;
    grad_signal += 0.5 * w_diag * spec.signal_variance;
    const double* zj = z.row(j).data();
    for (Eigen::Index i = j + 1; i < n; ++i) {
      const double w = alpha(i) * alpha(j) - inverse(i, j);
      const double* zi = z.row(i).data();
      double r2 = 0.0;
      for (Eigen::Index c = 0; c < d; ++c) {
        const double s = (zi[c] - zj[c]) / spec.lengthscales[static_cast<std::size_t>(c)];
        scaled[static_cast<std::size_t>(c)] = s * s;
        r2 += s * s;
      }
      const MaternTerms terms = matern(spec.family, std::sqrt(r2));
      grad_signal += w * spec.signal_variance * terms.f;
      const double wg = w * spec.signal_variance * terms.g;
      for (Eigen::Index c = 0; c < d; ++c) grad_length(c) += wg * scaled[static_cast<std::size_t>(c)];
    }
  }

  out.gradient.resize(d + 3);
  out.gradient.head(d) = grad_length;
  out.gradient(d) = grad_signal;
  out.gradient(d + 1) = 0.5 * hyper.noise_variance * trace_w;
  out.gradient(d + 2) = alpha.sum();
  return out;
}

namespace {

Eigen::VectorXd pack(const Hyperparameters& hyper) {
  const auto d = static_cast<Eigen::Index>(hyper.kernel.lengthscales.size());
  Eigen::VectorXd theta(d + 3);
  for (Eigen::Index i = 0; i < d; ++i) {
    theta(i) = std::log(hyper.kernel.lengthscales[static_cast<std::size_t>(i)]);
  }
  theta(d) = std::log(hyper.kernel.signal_variance);
  theta(d + 1) = std::log(hyper.noise_variance);
  theta(d + 2) = hyper.constant_mean;
  return theta;
}

Hyperparameters unpack(const Eigen::VectorXd& theta, KernelFamily family) {
  const Eigen::Index d = theta.size() - 3;
  Hyperparameters hyper;
  hyper.kernel.family = family;
  hyper.kernel.lengthscales.resize(static_cast<std::size_t>(d));
  for (Eigen::Index i = 0; i < d; ++i) {
    hyper.kernel.lengthscales[static_cast<std::size_t>(i)] = std::exp(theta(i));
  }
  hyper.kernel.signal_variance = std::exp(theta(d));
  hyper.noise_variance = std::exp(theta(d + 1));
  hyper.constant_mean = theta(d + 2);
  return hyper;
}

}  // namespace

GpModel fit(const Dataset& data, KernelFamily family, const FitOptions& options) {
  validate(data);
  if (data.size() < 2) throw InvalidInput("GP fit needs at least two samples");
  if (options.iters < 1) throw InvalidInput("GP fit needs at least one iteration");

  const Eigen::Index d = data.dim();
  const double n = static_cast<double>(data.size());
  const double target_mean = data.targets.mean();
  const double target_var = (data.targets.array() - target_mean).square().sum() / n;
  Standardization standardization = Standardization::from_inputs(data.inputs);

  Hyperparameters init;
  init.kernel.family = family;
  init.kernel.lengthscales.assign(static_cast<std::size_t>(d), 1.0);
  init.constant_mean = target_mean;

  FitInfo info;
  info.seed = options.seed;
  if (target_var <= 1e-12 * std::max(1.0, target_mean * target_mean)) {
    // Constant targets: the mean alone explains the data.
    init.kernel.signal_variance = 1e-10;
    init.noise_variance = 1e-6;
    GpModel model = GpModel::condition(data.inputs, data.targets, init, standardization);
    info.degenerate = true;
    info.initial_log_likelihood = info.best_log_likelihood =
        log_marginal_likelihood(model).value;
    model.set_fit_info(info);
    return model;
  }
  init.kernel.signal_variance = target_var;
  init.noise_variance = 1e-2 * target_var;

  Eigen::VectorXd theta = pack(init);
  Eigen::VectorXd m1 = Eigen::VectorXd::Zero(theta.size());
  Eigen::VectorXd m2 = Eigen::VectorXd::Zero(theta.size());

  GpModel best = GpModel::condition(data.inputs, data.targets, init, standardization);
  LogLikelihood current = log_marginal_likelihood(best);
  info.initial_log_likelihood = info.best_log_likelihood = current.value;

  for (int t = 1; t <= options.iters; ++t) {
    const Eigen::VectorXd& g = current.gradient;
    m1 = options.beta1 * m1 + (1.0 - options.beta1) * g;
    m2 = options.beta2 * m2 + (1.0 - options.beta2) * g.cwiseProduct(g);
    const double c1 = 1.0 - std::pow(options.beta1, t);
    const double c2 = 1.0 - std::pow(options.beta2, t);
    theta += options.step_size *
             ((m1 / c1).array() / ((m2 / c2).array().sqrt() + options.epsilon)).matrix();
    info.iterations = t;

    try {
      GpModel candidate =
          GpModel::condition(data.inputs, data.targets, unpack(theta, family), standardization);
      current = log_marginal_likelihood(candidate);
      if (!std::isfinite(current.value) || !current.gradient.allFinite()) break;
      if (current.value > info.best_log_likelihood) {
        info.best_log_likelihood = current.value;
        best = std::move(candidate);
      }
    } catch (const Error&) {
      break;
    }
  }
  best.set_fit_info(info);
  return best;
}

double evaluate_mae(const GpModel& model, const Dataset& test) {
  if (test.size() == 0) throw InvalidInput("MAE needs a non-empty test set");
  if (test.dim() != model.dim()) {
    throw InvalidInput(fmt::format("test set has {} dimensions, model expects {}", test.dim(),
                                   model.dim()));
  }
  if (test.targets.size() != test.size()) throw InvalidInput("test inputs and targets differ");
  double total = 0.0;
  std::vector<double> row(static_cast<std::size_t>(test.dim()));
  for (Eigen::Index i = 0; i < test.size(); ++i) {
    for (Eigen::Index j = 0; j < test.dim(); ++j) row[static_cast<std::size_t>(j)] = test.inputs(i, j);
    total += std::abs(model.mean(row) - test.targets(i));
  }
  return total / static_cast<double>(test.size());
}

}  // namespace codesign::gp
