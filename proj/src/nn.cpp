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

#include "opsro/nn.hpp"

#include <cmath>
#include <stdexcept>

namespace opsro::nn {

Mlp::Mlp(const MlpShape& shape, Rng& rng) : shape_(shape) {
  if (shape.input < 1 || shape.output < 1 || shape.depth < 0 ||
      (shape.depth > 0 && shape.width < 1))
    throw std::invalid_argument("Mlp: bad shape");
  int fan_in = shape.input;
  for (int layer = 0; layer <= shape.depth; ++layer) {
    const int fan_out = layer == shape.depth ? shape.output : shape.width;
    const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
    std::uniform_real_distribution<float> init(-bound, bound);
    Matrix w(fan_out, fan_in);
    for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = init(rng);
    Vector b(fan_out);
    for (Eigen::Index k = 0; k < b.size(); ++k) b[k] = init(rng);
    weights_.push_back(std::move(w));
    biases_.push_back(std::move(b));
    fan_in = fan_out;
  }
}

Matrix Mlp::forward(const Matrix& inputs) const {
  Matrix h = inputs;
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    Matrix z = weights_[l] * h;
    z.colwise() += biases_[l];
    if (l + 1 < weights_.size()) z = z.cwiseMax(0.0f);
    h = std::move(z);
  }
  return h;
}

Vector Mlp::forward(std::span<const double> input) const {
  Matrix x(input.size(), 1);
  for (std::size_t d = 0; d < input.size(); ++d)
    x(d, 0) = static_cast<float>(input[d]);
  return forward(x).col(0);
}

bool Mlp::operator==(const Mlp& other) const {
  if (!(shape_ == other.shape_) || weights_.size() != other.weights_.size())
    return false;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    if (weights_[l] != other.weights_[l] || biases_[l] != other.biases_[l])
      return false;
  return true;
}

nlohmann::json Mlp::to_json() const {
  nlohmann::json layers = nlohmann::json::array();
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    std::vector<float> w(weights_[l].data(),
                         weights_[l].data() + weights_[l].size());
    std::vector<float> b(biases_[l].data(),
                         biases_[l].data() + biases_[l].size());
    layers.push_back({{"rows", weights_[l].rows()},
                      {"cols", weights_[l].cols()},
                      {"w", w},
                      {"b", b}});
  }
  return {{"input", shape_.input},
          {"width", shape_.width},
          {"depth", shape_.depth},
          {"output", shape_.output},
          {"layers", layers}};
}

Mlp Mlp::from_json(const nlohmann::json& j) {
  Mlp net;
  net.shape_ = {j.at("input").get<int>(), j.at("width").get<int>(),
                j.at("depth").get<int>(), j.at("output").get<int>()};
  for (const auto& layer : j.at("layers")) {
    const auto rows = layer.at("rows").get<Eigen::Index>();
    const auto cols = layer.at("cols").get<Eigen::Index>();
    const auto w = layer.at("w").get<std::vector<float>>();
    const auto b = layer.at("b").get<std::vector<float>>();
    if (static_cast<Eigen::Index>(w.size()) != rows * cols ||
        static_cast<Eigen::Index>(b.size()) != rows)
      throw ArtifactError("Mlp: layer size mismatch");
    net.weights_.emplace_back(Eigen::Map<const Matrix>(w.data(), rows, cols));
    net.biases_.emplace_back(Eigen::Map<const Vector>(b.data(), rows));
  }
  if (static_cast<int>(net.weights_.size()) != net.shape_.depth + 1)
    throw ArtifactError("Mlp: layer count mismatch");
  return net;
}

OptimizerKind parse_optimizer(const std::string& name) {
  if (name == "sgd") return OptimizerKind::kSgd;
  if (name == "adam") return OptimizerKind::kAdam;
  throw std::invalid_argument("unknown optimizer '" + name + "'");
}

std::string optimizer_name(OptimizerKind kind) {
  return kind == OptimizerKind::kSgd ? "sgd" : "adam";
}

Trainer::Trainer(Mlp& net, const OptimizerConfig& cfg) : net_(net), cfg_(cfg) {
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    const auto& w = net.weights()[l];
    mw_.push_back(Matrix::Zero(w.rows(), w.cols()));
    vw_.push_back(Matrix::Zero(w.rows(), w.cols()));
    mb_.push_back(Vector::Zero(w.rows()));
    vb_.push_back(Vector::Zero(w.rows()));
  }
}

float Trainer::step(const Matrix& inputs, const LossFn& loss) {
  auto& weights = net_.weights();
  auto& biases = net_.biases();
  const std::size_t layers = weights.size();

  std::vector<Matrix> activations;  // input to each layer
  activations.reserve(layers + 1);
  activations.push_back(inputs);
  for (std::size_t l = 0; l < layers; ++l) {
    Matrix z = weights[l] * activations.back();
    z.colwise() += biases[l];
    if (l + 1 < layers) z = z.cwiseMax(0.0f);
    activations.push_back(std::move(z));
  }

  Matrix delta(activations.back().rows(), activations.back().cols());
  const float value = loss(activations.back(), delta);

  ++t_;
  const float lr = static_cast<float>(cfg_.learning_rate);
  const float b1 = static_cast<float>(cfg_.beta1);
  const float b2 = static_cast<float>(cfg_.beta2);
  const float eps = static_cast<float>(cfg_.epsilon);
  const float c1 = 1.0f - std::pow(b1, static_cast<float>(t_));
  const float c2 = 1.0f - std::pow(b2, static_cast<float>(t_));

  for (std::size_t l = layers; l-- > 0;) {
    const Matrix grad_w = delta * activations[l].transpose();
    const Vector grad_b = delta.rowwise().sum();
    if (l > 0) {
      Matrix back = weights[l].transpose() * delta;
      // ReLU derivative: activations[l] holds post-ReLU values.
      delta = back.cwiseProduct(
          (activations[l].array() > 0.0f).cast<float>().matrix());
    }
    if (cfg_.kind == OptimizerKind::kSgd) {
      weights[l] -= lr * grad_w;
      biases[l] -= lr * grad_b;
    } else {
      mw_[l] = b1 * mw_[l] + (1.0f - b1) * grad_w;
      vw_[l] = b2 * vw_[l] + (1.0f - b2) * grad_w.cwiseAbs2();
      mb_[l] = b1 * mb_[l] + (1.0f - b1) * grad_b;
      vb_[l] = b2 * vb_[l] + (1.0f - b2) * grad_b.cwiseAbs2();
      weights[l].array() -= lr * (mw_[l].array() / c1) /
                            ((vw_[l].array() / c2).sqrt() + eps);
      biases[l].array() -= lr * (mb_[l].array() / c1) /
                           ((vb_[l].array() / c2).sqrt() + eps);
    }
  }
  return value;
}

float mse_loss(const Matrix& outputs, const Matrix& targets, Matrix& grad) {
  const float count = static_cast<float>(outputs.size());
  grad = (outputs - targets) * (2.0f / count);
  return (outputs - targets).squaredNorm() / count;
}

Matrix to_matrix(const std::vector<std::vector<double>>& columns) {
  if (columns.empty()) return Matrix(0, 0);
  Matrix m(columns[0].size(), columns.size());
  for (std::size_t c = 0; c < columns.size(); ++c)
    for (std::size_t r = 0; r < columns[c].size(); ++r)
      m(r, c) = static_cast<float>(columns[c][r]);
  return m;
}

}  // namespace opsro::nn
