/*
 * Copyright 2026 The dgp Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#include "dgp/kernel.hpp"

#include <stdexcept>
#include <string>

namespace dgp {

Hyperparameters::Hyperparameters(double log_sf2, Eigen::VectorXd log_ell, double log_sn)
    : log_signal_variance(log_sf2), log_lengthscales(std::move(log_ell)), log_noise_std(log_sn) {}

Hyperparameters Hyperparameters::from_natural(double signal_variance, double lengthscale,
                                              double noise_std, Index dim) {
  return Hyperparameters(std::log(signal_variance),
                         Eigen::VectorXd::Constant(dim, std::log(lengthscale)),
                         std::log(noise_std));
}

Eigen::VectorXd Hyperparameters::to_vector() const {
  Eigen::VectorXd v(size());
  v(0) = log_signal_variance;
  v.segment(1, dim()) = log_lengthscales;
  v(noise_index()) = log_noise_std;
  return v;
}

Hyperparameters Hyperparameters::from_vector(const Eigen::VectorXd& v) {
  if (v.size() < 3) {
    throw std::invalid_argument("hyperparameter vector needs at least 3 entries");
  }
  const Index d = v.size() - 2;
  return Hyperparameters(v(0), v.segment(1, d), v(d + 1));
}

bool Hyperparameters::all_finite() const {
  return std::isfinite(log_signal_variance) && std::isfinite(log_noise_std) &&
         log_lengthscales.allFinite();
}

bool Hyperparameters::operator==(const Hyperparameters& other) const {
  return log_signal_variance == other.log_signal_variance &&
         log_noise_std == other.log_noise_std && log_lengthscales == other.log_lengthscales;
}

void to_json(nlohmann::json& j, const Hyperparameters& hp) {
  j = nlohmann::json{{"log_signal_variance", hp.log_signal_variance},
                     {"log_lengthscales", std::vector<double>(hp.log_lengthscales.begin(),
                                                              hp.log_lengthscales.end())},
                     {"log_noise_std", hp.log_noise_std}};
}

void from_json(const nlohmann::json& j, Hyperparameters& hp) {
  const auto ell = j.at("log_lengthscales").get<std::vector<double>>();
  hp.log_signal_variance = j.at("log_signal_variance").get<double>();
  hp.log_lengthscales = Eigen::Map<const Eigen::VectorXd>(ell.data(), static_cast<Index>(ell.size()));
  hp.log_noise_std = j.at("log_noise_std").get<double>();
  if (hp.dim() == 0 || !hp.all_finite()) {
    throw std::invalid_argument("hyperparameters: need finite values and at least one lengthscale");
  }
}

namespace detail {

Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                  DistanceMethod method) {
  if (method == DistanceMethod::kAuto) {
    method = (a.rows() > kExpandedDistanceThreshold || b.rows() > kExpandedDistanceThreshold)
                 ? DistanceMethod::kExpanded
                 : DistanceMethod::kPairwise;
  }
  const Index n = a.rows();
  const Index m = b.rows();
  if (method == DistanceMethod::kExpanded) {
    Eigen::MatrixXd r2 = -2.0 * (a * b.transpose());
    r2.colwise() += a.rowwise().squaredNorm();
    r2.rowwise() += b.rowwise().squaredNorm().transpose();
    return r2.cwiseMax(0.0);
  }
  Eigen::MatrixXd r2 = Eigen::MatrixXd::Zero(n, m);
  for (Index d = 0; d < a.cols(); ++d) {
    for (Index j = 0; j < m; ++j) {
      const double bj = b(j, d);
      for (Index i = 0; i < n; ++i) {
        const double diff = a(i, d) - bj;
        r2(i, j) += diff * diff;
      }
    }
  }
  return r2;
}

}  // namespace detail

namespace {

void check_dims(const Eigen::MatrixXd& x, const Hyperparameters& hp, const char* what) {
  if (x.cols() != hp.dim()) {
    throw std::invalid_argument(std::string(what) + ": input has " + std::to_string(x.cols()) +
                                " columns, hyperparameters have " + std::to_string(hp.dim()) +
                                " lengthscales");
  }
}

Eigen::MatrixXd scale_inputs(const Eigen::MatrixXd& x, const Hyperparameters& hp) {
  return x.array().rowwise() / hp.lengthscales().transpose().array();
}

}  // namespace

Eigen::MatrixXd kernel_matrix(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                              const Hyperparameters& hp) {
  check_dims(a, hp, "kernel_matrix");
  check_dims(b, hp, "kernel_matrix");
  Eigen::MatrixXd k = detail::squared_distances(scale_inputs(a, hp), scale_inputs(b, hp));
  k = (hp.signal_variance() * (-0.5 * k.array()).exp()).matrix();
  return k;
}

Eigen::MatrixXd kernel_matrix_grad(const Eigen::MatrixXd& a, const Hyperparameters& hp,
                                   Index param_index) {
  check_dims(a, hp, "kernel_matrix_grad");
  if (param_index < 0 || param_index > hp.dim()) {
    throw std::out_of_range("kernel_matrix_grad: parameter index " + std::to_string(param_index) +
                            " outside [0, " + std::to_string(hp.dim()) + "]");
  }
  Eigen::MatrixXd k = kernel_matrix(a, a, hp);
  if (param_index == 0) return k;
  const Index d = param_index - 1;
  const Eigen::VectorXd col = a.col(d) / hp.lengthscale(d);
  for (Index j = 0; j < k.cols(); ++j) {
    for (Index i = 0; i < k.rows(); ++i) {
      const double diff = col(i) - col(j);
      k(i, j) *= diff * diff;
    }
  }
  return k;
}

}  // namespace dgp
