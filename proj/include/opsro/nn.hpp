// Copyright 2026 The opsro Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef OPSRO_NN_HPP_
#define OPSRO_NN_HPP_

#include <Eigen/Core>

#include <functional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "opsro/common.hpp"

namespace opsro::nn {

using Matrix = Eigen::MatrixXf;  // features x batch
using Vector = Eigen::VectorXf;

struct MlpShape {
  int input = 0;
  int width = 0;
  int depth = 0;  // number of hidden layers
  int output = 0;
  bool operator==(const MlpShape&) const = default;
};

// Fully connected network: ReLU hidden layers, linear output head.
class Mlp {
 public:
  Mlp() = default;
  Mlp(const MlpShape& shape, Rng& rng);

  const MlpShape& shape() const { return shape_; }
  Matrix forward(const Matrix& inputs) const;
  Vector forward(std::span<const double> input) const;

  std::vector<Matrix>& weights() { return weights_; }
  std::vector<Vector>& biases() { return biases_; }
  const std::vector<Matrix>& weights() const { return weights_; }
  const std::vector<Vector>& biases() const { return biases_; }

  nlohmann::json to_json() const;
  static Mlp from_json(const nlohmann::json& j);

  bool operator==(const Mlp& other) const;

 private:
  MlpShape shape_;
  std::vector<Matrix> weights_;
  std::vector<Vector> biases_;
};

enum class OptimizerKind { kSgd, kAdam };

OptimizerKind parse_optimizer(const std::string& name);
std::string optimizer_name(OptimizerKind kind);

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::kAdam;
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Fills `grad` (same shape as `outputs`) with dLoss/dOutputs and returns the
// loss value.
using LossFn = std::function<float(const Matrix& outputs, Matrix& grad)>;

// Owns optimizer state for one network.
class Trainer {
 public:
  Trainer(Mlp& net, const OptimizerConfig& cfg);

  float step(const Matrix& inputs, const LossFn& loss);

 private:
  Mlp& net_;
  OptimizerConfig cfg_;
  long long t_ = 0;
  std::vector<Matrix> mw_, vw_;
  std::vector<Vector> mb_, vb_;
};

// Mean over elements of squared error.
float mse_loss(const Matrix& outputs, const Matrix& targets, Matrix& grad);

Matrix to_matrix(const std::vector<std::vector<double>>& columns);

}  // namespace opsro::nn

#endif  // OPSRO_NN_HPP_
