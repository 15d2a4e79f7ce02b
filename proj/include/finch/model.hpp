// Copyright 2026 The Finch Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Hot-byte prediction model.
//
// A one-hidden-layer network (rectifier hidden layer, logistic outputs) maps
// padded input bytes to the normalized branch distances of the just-missed
// objectives. Its input gradients rank bytes by how strongly they move those
// distances.

#ifndef FINCH_MODEL_HPP_
#define FINCH_MODEL_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

#include "finch/common.hpp"
#include "finch/distance.hpp"

namespace finch {

inline constexpr double kProbabilityClamp = 1e-7;

struct TrainingExample {
  std::vector<double> x;  // bytes / 255, zero-padded
  std::vector<double> y;  // normalized distances; 1.0 is masked
};

struct ModelConfig {
  std::size_t hidden = 512;
  std::size_t epochs = 200;
  double learning_rate = 1e-2;
  double momentum = 0.9;
  std::size_t batch_size = 256;  // full batch below this many examples
  std::uint64_t rng_seed = 0;
};

// Binary cross-entropy averaged over all n outputs; labels equal to 1.0 mark
// unvisited sites and contribute nothing.
inline double masked_bce(std::span<const double> y, std::span<const double> yhat) {
  if (y.size() != yhat.size()) {
    throw std::invalid_argument("masked_bce: size mismatch");
  }
  if (y.empty()) return 0.0;
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) continue;
    const double p = std::clamp(yhat[i], kProbabilityClamp, 1.0 - kProbabilityClamp);
    sum += y[i] * std::log(p) + (1.0 - y[i]) * std::log(1.0 - p);
  }
  return -sum / static_cast<double>(y.size());
}

class Model {
 public:
  Model(std::size_t in_dim, std::size_t hidden, std::size_t out_dim)
      : in_(in_dim), hidden_(hidden), out_(out_dim),
        params_(in_dim * hidden + hidden + hidden * out_dim + out_dim, 0.0) {}

  // He-uniform hidden weights, Glorot-uniform output weights, zero biases.
  static Model random(std::size_t in_dim, std::size_t hidden,
                      std::size_t out_dim, std::uint64_t seed) {
    Model m(in_dim, hidden, out_dim);
    std::mt19937_64 rng(seed);
    const double a1 = std::sqrt(6.0 / static_cast<double>(std::max<std::size_t>(in_dim, 1)));
    const double a2 = std::sqrt(6.0 / static_cast<double>(hidden + out_dim));
    std::uniform_real_distribution<double> u1(-a1, a1), u2(-a2, a2);
    for (double& w : m.w1()) w = u1(rng);
    for (double& w : m.w2()) w = u2(rng);
    return m;
  }

  std::size_t in_dim() const { return in_; }
  std::size_t hidden() const { return hidden_; }
  std::size_t out_dim() const { return out_; }

  // Flat parameter vector: W1 [in x hidden], b1, W2 [hidden x out], b2.
  std::span<double> parameters() { return params_; }
  std::span<const double> parameters() const { return params_; }

  std::span<double> w1() { return {params_.data(), in_ * hidden_}; }
  std::span<double> b1() { return {params_.data() + off_b1(), hidden_}; }
  std::span<double> w2() { return {params_.data() + off_w2(), hidden_ * out_}; }
  std::span<double> b2() { return {params_.data() + off_b2(), out_}; }

  bool finite() const {
    return std::all_of(params_.begin(), params_.end(),
                       [](double v) { return std::isfinite(v); });
  }

  std::vector<double> forward(std::span<const double> x) const {
    std::vector<double> pre, act, out;
    forward_into(x, pre, act, out);
    return out;
  }

  // Adds d(loss)/d(params) for one example into `grad` (same layout as
  // parameters()) and returns the example loss.
  double accumulate_gradients(std::span<const double> x,
                              std::span<const double> y,
                              std::span<double> grad) const {
    check_shapes(x, y);
    std::vector<double> pre, act, yhat;
    forward_into(x, pre, act, yhat);
    const double loss = masked_bce(y, yhat);
    // d(loss)/d(logit) = (yhat - y) / n for unmasked outputs.
    std::vector<double> dz2(out_, 0.0);
    const double inv_n = 1.0 / static_cast<double>(out_);
    for (std::size_t o = 0; o < out_; ++o) {
      if (y[o] != 1.0) dz2[o] = (yhat[o] - y[o]) * inv_n;
    }
    backprop(x, pre, act, dz2, grad);
    return loss;
  }

  // d(sum of outputs in `subset`)/dx. An empty subset means all outputs.
  std::vector<double> input_gradients(std::span<const double> x,
                                      std::span<const std::size_t> subset) const {
    std::vector<double> pre, act, yhat;
    forward_into(x, pre, act, yhat);
    std::vector<double> dz2(out_, 0.0);
    auto add = [&](std::size_t o) {
      if (o < out_) dz2[o] = yhat[o] * (1.0 - yhat[o]);
    };
    if (subset.empty()) {
      for (std::size_t o = 0; o < out_; ++o) add(o);
    } else {
      for (std::size_t o : subset) add(o);
    }
    std::vector<double> dz1 = hidden_delta(pre, dz2);
    std::vector<double> g(in_, 0.0);
    const double* w1p = params_.data();
    for (std::size_t i = 0; i < in_; ++i) {
      const double* row = w1p + i * hidden_;
      double s = 0.0;
      for (std::size_t h = 0; h < hidden_; ++h) s += row[h] * dz1[h];
      g[i] = s;
    }
    return g;
  }

 private:
  std::size_t off_b1() const { return in_ * hidden_; }
  std::size_t off_w2() const { return off_b1() + hidden_; }
  std::size_t off_b2() const { return off_w2() + hidden_ * out_; }

  void check_shapes(std::span<const double> x, std::span<const double> y) const {
    if (x.size() != in_ || y.size() != out_) {
      throw std::invalid_argument("model: example shape mismatch");
    }
  }

  void forward_into(std::span<const double> x, std::vector<double>& pre,
                    std::vector<double>& act, std::vector<double>& out) const {
    if (x.size() != in_) throw std::invalid_argument("model: input size mismatch");
    const double* p = params_.data();
    pre.assign(p + off_b1(), p + off_b1() + hidden_);
    for (std::size_t i = 0; i < in_; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      const double* row = p + i * hidden_;
      for (std::size_t h = 0; h < hidden_; ++h) pre[h] += xi * row[h];
    }
    act.resize(hidden_);
    for (std::size_t h = 0; h < hidden_; ++h) act[h] = pre[h] > 0.0 ? pre[h] : 0.0;
    out.assign(p + off_b2(), p + off_b2() + out_);
    for (std::size_t h = 0; h < hidden_; ++h) {
      const double a = act[h];
      if (a == 0.0) continue;
      const double* row = p + off_w2() + h * out_;
      for (std::size_t o = 0; o < out_; ++o) out[o] += a * row[o];
    }
    for (double& v : out) v = 1.0 / (1.0 + std::exp(-v));
  }

  std::vector<double> hidden_delta(const std::vector<double>& pre,
                                   const std::vector<double>& dz2) const {
    std::vector<double> dz1(hidden_, 0.0);
    const double* w2p = params_.data() + off_w2();
    for (std::size_t h = 0; h < hidden_; ++h) {
      if (pre[h] <= 0.0) continue;
      const double* row = w2p + h * out_;
      double s = 0.0;
      for (std::size_t o = 0; o < out_; ++o) s += row[o] * dz2[o];
      dz1[h] = s;
    }
    return dz1;
  }

  void backprop(std::span<const double> x, const std::vector<double>& pre,
                const std::vector<double>& act, const std::vector<double>& dz2,
                std::span<double> grad) const {
    double* gw2 = grad.data() + off_w2();
    double* gb2 = grad.data() + off_b2();
    for (std::size_t o = 0; o < out_; ++o) gb2[o] += dz2[o];
    for (std::size_t h = 0; h < hidden_; ++h) {
      const double a = act[h];
      if (a == 0.0) continue;
      double* row = gw2 + h * out_;
      for (std::size_t o = 0; o < out_; ++o) row[o] += a * dz2[o];
    }
    const std::vector<double> dz1 = hidden_delta(pre, dz2);
    double* gb1 = grad.data() + off_b1();
    for (std::size_t h = 0; h < hidden_; ++h) gb1[h] += dz1[h];
    for (std::size_t i = 0; i < in_; ++i) {
      const double xi = x[i];
      if (xi == 0.0) continue;
      double* row = grad.data() + i * hidden_;
      for (std::size_t h = 0; h < hidden_; ++h) row[h] += xi * dz1[h];
    }
  }

  std::size_t in_, hidden_, out_;
  std::vector<double> params_;
};

// Mean masked loss over a data set.
inline double dataset_loss(const Model& m, std::span<const TrainingExample> data) {
  if (data.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& ex : data) sum += masked_bce(ex.y, m.forward(ex.x));
  return sum / static_cast<double>(data.size());
}

struct TrainResult {
  Model model;
  double first_loss = 0.0;  // loss measured during the first epoch
  double final_loss = 0.0;  // loss measured during the last completed epoch
  std::size_t epochs_run = 0;
  bool diverged = false;    // a non-finite loss stopped training early
  std::uint64_t multiply_adds = 0;
};

// One example per seed: x = bytes/255 padded to the longest seed,
// y = normalized distances over `objectives`. Returns an empty set when
// there is nothing to learn.
template <class SeedRange>
std::vector<TrainingExample> build_training_set(
    const SeedRange& seeds, std::span<const SiteId> objectives,
    NormMode norm = NormMode::Linear) {
  std::vector<TrainingExample> out;
  if (objectives.empty()) return out;
  std::size_t width = 0;
  for (const auto& [bytes, bitmap] : seeds) width = std::max(width, bytes.size());
  for (const auto& [bytes, bitmap] : seeds) {
    TrainingExample ex;
    ex.x.assign(width, 0.0);
    for (std::size_t i = 0; i < bytes.size(); ++i) ex.x[i] = bytes[i] / 255.0;
    ex.y = normalize(bitmap, objectives, norm);
    out.push_back(std::move(ex));
  }
  return out;
}

inline std::vector<double> scale_bytes(const Bytes& bytes, std::size_t width) {
  std::vector<double> x(width, 0.0);
  for (std::size_t i = 0; i < std::min(width, bytes.size()); ++i) {
    x[i] = bytes[i] / 255.0;
  }
  return x;
}

// Gradient descent with momentum on the masked loss. Deterministic for a
// given config. If the loss becomes non-finite the parameters from the last
// finite epoch are returned and `diverged` is set.
inline TrainResult train(std::span<const TrainingExample> data,
                         const ModelConfig& cfg) {
  if (data.empty()) throw std::invalid_argument("train: empty data set");
  const std::size_t in_dim = data.front().x.size();
  const std::size_t out_dim = data.front().y.size();
  for (const auto& ex : data) {
    if (ex.x.size() != in_dim || ex.y.size() != out_dim) {
      throw std::invalid_argument("train: inconsistent example shapes");
    }
  }
  TrainResult r{Model::random(in_dim, cfg.hidden, out_dim, cfg.rng_seed)};
  Model& m = r.model;
  std::vector<double> velocity(m.parameters().size(), 0.0);
  std::vector<double> grad(m.parameters().size(), 0.0);
  std::vector<double> checkpoint(m.parameters().begin(), m.parameters().end());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 shuffle_rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ull);
  const std::size_t batch =
      data.size() < cfg.batch_size ? data.size() : std::max<std::size_t>(cfg.batch_size, 1);
  const std::uint64_t macs_per_example =
      3ull * (in_dim * cfg.hidden + cfg.hidden * out_dim);

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (batch < data.size()) std::shuffle(order.begin(), order.end(), shuffle_rng);
    double epoch_loss = 0.0;
    for (std::size_t start = 0; start < data.size(); start += batch) {
      const std::size_t end = std::min(start + batch, data.size());
      std::fill(grad.begin(), grad.end(), 0.0);
      for (std::size_t k = start; k < end; ++k) {
        const auto& ex = data[order[k]];
        epoch_loss += m.accumulate_gradients(ex.x, ex.y, grad);
      }
      const double scale = 1.0 / static_cast<double>(end - start);
      auto params = m.parameters();
      for (std::size_t p = 0; p < params.size(); ++p) {
        velocity[p] = cfg.momentum * velocity[p] - cfg.learning_rate * grad[p] * scale;
        params[p] += velocity[p];
      }
      r.multiply_adds += macs_per_example * (end - start);
    }
    epoch_loss /= static_cast<double>(data.size());
    if (!std::isfinite(epoch_loss) || !m.finite()) {
      std::copy(checkpoint.begin(), checkpoint.end(), m.parameters().begin());
      r.diverged = true;
      break;
    }
    std::copy(m.parameters().begin(), m.parameters().end(), checkpoint.begin());
    if (epoch == 0) r.first_loss = epoch_loss;
    r.final_loss = epoch_loss;
    r.epochs_run = epoch + 1;
  }
  return r;
}

}  // namespace finch

#endif  // FINCH_MODEL_HPP_
