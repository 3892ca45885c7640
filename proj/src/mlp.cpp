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

#include "residyn/mlp.hpp"

#include <numeric>

#include <json.hpp>

namespace residyn {

using json = nlohmann::ordered_json;

void TrainConfig::validate() const {
  if (!(learning_rate > 0)) throw ConfigError("train: learning_rate must be > 0");
  if (batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (epochs < 0) throw ConfigError("train: epochs must be >= 0");
  if (!(beta1 >= 0 && beta1 < 1) || !(beta2 >= 0 && beta2 < 1))
    throw ConfigError("train: adam betas must lie in [0, 1)");
  if (!(eps_adam > 0)) throw ConfigError("train: eps_adam must be > 0");
}

Mlp::Mlp(std::vector<int> sizes, std::uint64_t init_seed) : sizes_(std::move(sizes)) {
  if (sizes_.size() < 2) throw ConfigError("mlp: need at least input and output sizes");
  for (int s : sizes_)
    if (s < 1) throw ConfigError("mlp: layer sizes must be >= 1");

  Rng rng(derive_seed(init_seed, "mlp-init", 0));
  for (size_t l = 0; l + 1 < sizes_.size(); ++l) {
    const int fan_in = sizes_[l];
    const int fan_out = sizes_[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    Mat W(fan_out, fan_in);
    for (int i = 0; i < fan_out; ++i)
      for (int j = 0; j < fan_in; ++j) W(i, j) = rng.uniform(-scale, scale);
    weights_.push_back(std::move(W));
    biases_.push_back(Vec::Zero(fan_out));
  }
  input_mean_ = Vec::Zero(sizes_.front());
  input_std_ = Vec::Ones(sizes_.front());
}

void Mlp::set_standardization(const Vec& mean, const Vec& std) {
  if (mean.size() != sizes_.front() || std.size() != sizes_.front())
    throw ConfigError("mlp: standardization dimension mismatch");
  if (std.minCoeff() <= 0) throw ConfigError("mlp: standardization std must be > 0");
  input_mean_ = mean;
  input_std_ = std;
}

Mat Mlp::forward(const Eigen::Ref<const Mat>& X) const {
  if (X.cols() != sizes_.front())
    throw ConfigError("mlp: expected input width " + std::to_string(sizes_.front()) +
                      ", got " + std::to_string(X.cols()));
  Mat h = (X.rowwise() - input_mean_.transpose()).array().rowwise() /
          input_std_.transpose().array();
  for (size_t l = 0; l < weights_.size(); ++l) {
    h = (h * weights_[l].transpose()).rowwise() + biases_[l].transpose();
    if (l + 1 < weights_.size()) h = h.cwiseMax(0.0);
  }
  return h;
}

Mlp::Gradients Mlp::backprop(const Eigen::Ref<const Mat>& X,
                             const Eigen::Ref<const Mat>& Y,
                             const Mat* residual_base) const {
  const Eigen::Index B = X.rows();
  if (Y.rows() != B) throw ConfigError("mlp: X/Y row mismatch");
  if (Y.cols() != sizes_.back()) throw ConfigError("mlp: Y width mismatch");
  if (residual_base && (residual_base->rows() != B || residual_base->cols() != Y.cols()))
    throw ConfigError("mlp: residual base shape mismatch");

  // Forward pass, keeping the post-activation of every layer.
  std::vector<Mat> activations;
  activations.reserve(weights_.size() + 1);
  activations.push_back((X.rowwise() - input_mean_.transpose()).array().rowwise() /
                        input_std_.transpose().array());
  for (size_t l = 0; l < weights_.size(); ++l) {
    Mat z = (activations.back() * weights_[l].transpose()).rowwise() +
            biases_[l].transpose();
    if (l + 1 < weights_.size()) z = z.cwiseMax(0.0);
    activations.push_back(std::move(z));
  }

  Mat error = activations.back() - Y;
  if (residual_base) error += *residual_base;

  Gradients g;
  g.weight.resize(weights_.size());
  g.bias.resize(weights_.size());
  const double scale =
      1.0 / (static_cast<double>(B) * static_cast<double>(sizes_.back()));
  g.loss = scale * error.squaredNorm();

  Mat delta = 2.0 * scale * error;
  for (size_t l = weights_.size(); l-- > 0;) {
    g.weight[l] = delta.transpose() * activations[l];
    g.bias[l] = delta.colwise().sum().transpose();
    if (l > 0) {
      delta = delta * weights_[l];
      // Rectifier gate: the stored activation is zero exactly where the unit
      // was clamped.
      delta = delta.cwiseProduct(
          (activations[l].array() > 0.0).cast<double>().matrix());
    }
  }
  return g;
}

double Mlp::loss(const Eigen::Ref<const Mat>& X, const Eigen::Ref<const Mat>& Y,
                 const Mat* residual_base) const {
  Mat error = forward(X) - Y;
  if (residual_base) error += *residual_base;
  return error.squaredNorm() /
         (static_cast<double>(X.rows()) * static_cast<double>(sizes_.back()));
}

TrainResult train(const Mlp& net, const Eigen::Ref<const Mat>& X,
                  const Eigen::Ref<const Mat>& Y, const TrainConfig& cfg,
                  const Mat* residual_base) {
  cfg.validate();
  if (!X.allFinite() || !Y.allFinite()) throw NumericError("train: non-finite data");
  const Eigen::Index N = X.rows();
  if (N < 1) throw ConfigError("train: empty data");

  TrainResult result{net, {}};
  Mlp& model = result.net;

  // Standardization from this training split, frozen into the model.
  Vec mean = X.colwise().mean();
  Vec std(X.cols());
  for (Eigen::Index j = 0; j < X.cols(); ++j) {
    const double var =
        (X.col(j).array() - mean[j]).square().sum() / static_cast<double>(N);
    std[j] = std::max(std::sqrt(var), 1e-8);
  }
  model.set_standardization(mean, std);

  result.loss_curve.push_back(model.loss(X, Y, residual_base));

  // Adam state.
  std::vector<Mat> mW, vW;
  std::vector<Vec> mB, vB;
  for (int l = 0; l < model.layer_count(); ++l) {
    mW.push_back(Mat::Zero(model.weights()[static_cast<size_t>(l)].rows(),
                           model.weights()[static_cast<size_t>(l)].cols()));
    vW.push_back(mW.back());
    mB.push_back(Vec::Zero(model.biases()[static_cast<size_t>(l)].size()));
    vB.push_back(mB.back());
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(N));
  std::iota(order.begin(), order.end(), 0);
  Rng rng(derive_seed(cfg.seed, "train-shuffle", 0));

  long step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    // Fisher-Yates with the config seed.
    for (Eigen::Index i = N - 1; i > 0; --i) {
      const auto j = static_cast<Eigen::Index>(
          rng.uniform_index(static_cast<std::uint64_t>(i + 1)));
      std::swap(order[static_cast<size_t>(i)], order[static_cast<size_t>(j)]);
    }

    for (Eigen::Index start = 0; start < N; start += cfg.batch_size) {
      const Eigen::Index len = std::min<Eigen::Index>(cfg.batch_size, N - start);
      Mat Xb(len, X.cols()), Yb(len, Y.cols());
      Mat base;
      if (residual_base) base.resize(len, Y.cols());
      for (Eigen::Index r = 0; r < len; ++r) {
        const Eigen::Index src = order[static_cast<size_t>(start + r)];
        Xb.row(r) = X.row(src);
        Yb.row(r) = Y.row(src);
        if (residual_base) base.row(r) = residual_base->row(src);
      }

      Mlp::Gradients g = model.backprop(Xb, Yb, residual_base ? &base : nullptr);
      if (!std::isfinite(g.loss))
        throw NumericError("train: non-finite loss at epoch " + std::to_string(epoch));

      ++step;
      const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step));
      const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step));
      for (int l = 0; l < model.layer_count(); ++l) {
        const size_t k = static_cast<size_t>(l);
        mW[k] = cfg.beta1 * mW[k] + (1 - cfg.beta1) * g.weight[k];
        vW[k] = cfg.beta2 * vW[k].array().matrix() +
                (1 - cfg.beta2) * g.weight[k].cwiseProduct(g.weight[k]);
        mB[k] = cfg.beta1 * mB[k] + (1 - cfg.beta1) * g.bias[k];
        vB[k] = cfg.beta2 * vB[k] + (1 - cfg.beta2) * g.bias[k].cwiseProduct(g.bias[k]);

        model.weights()[k].array() -=
            cfg.learning_rate * (mW[k] / bc1).array() /
            ((vW[k] / bc2).array().sqrt() + cfg.eps_adam);
        model.biases()[k].array() -=
            cfg.learning_rate * (mB[k] / bc1).array() /
            ((vB[k] / bc2).array().sqrt() + cfg.eps_adam);
      }
    }
    result.loss_curve.push_back(model.loss(X, Y, residual_base));
  }
  return result;
}

double gradient_check(const Mlp& net, const Eigen::Ref<const Mat>& X,
                      const Eigen::Ref<const Mat>& Y) {
  Mlp model = net;
  const Mlp::Gradients g = model.backprop(X, Y);
  const double h = 1e-5;
  double worst = 0.0;

  const auto probe = [&](double* param, double analytic) {
    const double saved = *param;
    *param = saved + h;
    const double up = model.loss(X, Y);
    *param = saved - h;
    const double down = model.loss(X, Y);
    *param = saved;
    const double fd = (up - down) / (2 * h);
    const double denom = std::abs(analytic) + std::abs(fd) + 1e-10;
    worst = std::max(worst, std::abs(analytic - fd) / denom);
  };

  for (int l = 0; l < model.layer_count(); ++l) {
    const size_t k = static_cast<size_t>(l);
    Mat& W = model.weights()[k];
    for (Eigen::Index i = 0; i < W.rows(); ++i)
      for (Eigen::Index j = 0; j < W.cols(); ++j)
        probe(&W(i, j), g.weight[k](i, j));
    Vec& b = model.biases()[k];
    for (Eigen::Index i = 0; i < b.size(); ++i) probe(&b[i], g.bias[k][i]);
  }
  return worst;
}

std::string mlp_to_json(const Mlp& net) {
  json doc;
  doc["type"] = "mlp";
  doc["sizes"] = net.sizes();
  json layers = json::array();
  for (int l = 0; l < net.layer_count(); ++l) {
    const Mat& W = net.weights()[static_cast<size_t>(l)];
    const Vec& b = net.biases()[static_cast<size_t>(l)];
    json layer;
    layer["weights"] = std::vector<double>(W.data(), W.data() + W.size());
    layer["bias"] = std::vector<double>(b.data(), b.data() + b.size());
    layers.push_back(layer);
  }
  doc["layers"] = layers;
  doc["input_mean"] = std::vector<double>(net.input_mean().data(),
                                          net.input_mean().data() + net.input_mean().size());
  doc["input_std"] = std::vector<double>(net.input_std().data(),
                                         net.input_std().data() + net.input_std().size());
  return doc.dump();
}

Mlp mlp_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw DataError(std::string("mlp: invalid JSON: ") + e.what());
  }
  if (doc.value("type", "") != "mlp") throw DataError("mlp: wrong type tag");
  Mlp net(doc["sizes"].get<std::vector<int>>());
  const auto& layers = doc["layers"];
  if (static_cast<int>(layers.size()) != net.layer_count())
    throw DataError("mlp: layer count mismatch");
  for (int l = 0; l < net.layer_count(); ++l) {
    const size_t k = static_cast<size_t>(l);
    const auto w = layers[k]["weights"].get<std::vector<double>>();
    const auto b = layers[k]["bias"].get<std::vector<double>>();
    Mat& W = net.weights()[k];
    Vec& bias = net.biases()[k];
    if (static_cast<Eigen::Index>(w.size()) != W.size() ||
        static_cast<Eigen::Index>(b.size()) != bias.size())
      throw DataError("mlp: parameter size mismatch");
    std::copy(w.begin(), w.end(), W.data());
    std::copy(b.begin(), b.end(), bias.data());
  }
  const auto mean = doc["input_mean"].get<std::vector<double>>();
  const auto std = doc["input_std"].get<std::vector<double>>();
  net.set_standardization(
      Eigen::Map<const Vec>(mean.data(), static_cast<Eigen::Index>(mean.size())),
      Eigen::Map<const Vec>(std.data(), static_cast<Eigen::Index>(std.size())));
  return net;
}

}  // namespace residyn
