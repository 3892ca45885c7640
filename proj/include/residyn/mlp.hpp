// Copyright 2026 The residyn Authors
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

#ifndef RESIDYN_MLP_HPP_
#define RESIDYN_MLP_HPP_

#include <string>
#include <vector>

#include "residyn/common.hpp"

namespace residyn {

struct TrainConfig {
  double learning_rate = 1e-4;
  int batch_size = 1024;
  int epochs = 100;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::uint64_t seed = 0;

  void validate() const;
};

// Fully connected net with rectified-linear hidden layers and identity
// output. Inputs are standardized with constants frozen from the training
// split (identity until train() fills them in).
class Mlp {
 public:
  // sizes = {input, hidden..., output}
  explicit Mlp(std::vector<int> sizes, std::uint64_t init_seed = 0);

  const std::vector<int>& sizes() const { return sizes_; }
  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(weights_.size()); }

  Mat forward(const Eigen::Ref<const Mat>& X) const;

  std::vector<Mat>& weights() { return weights_; }
  std::vector<Vec>& biases() { return biases_; }
  const std::vector<Mat>& weights() const { return weights_; }
  const std::vector<Vec>& biases() const { return biases_; }

  void set_standardization(const Vec& mean, const Vec& std);
  const Vec& input_mean() const { return input_mean_; }
  const Vec& input_std() const { return input_std_; }

  // Mean-squared-error loss and parameter gradients on a batch; when
  // `residual_base` is non-null the loss is evaluated on base + f(x).
  struct Gradients {
    std::vector<Mat> weight;
    std::vector<Vec> bias;
    double loss = 0.0;
  };
  Gradients backprop(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const Mat>& Y,
                     const Mat* residual_base = nullptr) const;

  double loss(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const Mat>& Y,
              const Mat* residual_base = nullptr) const;

 private:
  std::vector<int> sizes_;
  std::vector<Mat> weights_;  // layer l: out x in
  std::vector<Vec> biases_;
  Vec input_mean_;
  Vec input_std_;
};

struct TrainResult {
  Mlp net;
  std::vector<double> loss_curve;  // epochs + 1 entries, [0] before training
};

// Minibatch Adam on the MSE loss; in residual mode (residual_base != nullptr)
// the network learns the correction added on top of the base prediction.
// Standardization constants are computed from X here and frozen in the net.
TrainResult train(const Mlp& net, const Eigen::Ref<const Mat>& X,
                  const Eigen::Ref<const Mat>& Y, const TrainConfig& cfg,
                  const Mat* residual_base = nullptr);

// Backprop vs central finite differences (h = 1e-5); returns the maximum
// symmetric relative deviation over all parameters.
double gradient_check(const Mlp& net, const Eigen::Ref<const Mat>& X,
                      const Eigen::Ref<const Mat>& Y);

std::string mlp_to_json(const Mlp& net);
Mlp mlp_from_json(const std::string& text);

}  // namespace residyn

#endif  // RESIDYN_MLP_HPP_
