#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/digit/raster.hpp"
#include "illumine/util/base64.hpp"
#include "illumine/util/rng.hpp"

namespace illumine::sut {

inline constexpr std::size_t kInputs = 784;
inline constexpr std::size_t kClasses = 10;

using Confidences = std::array<double, kClasses>;

struct TrainingInfo {
  int epochs = 0;
  double learning_rate = 0.0;
  int batch_size = 0;
  std::uint64_t seed = 0;
  double test_accuracy = 0.0;
};

/// Feed-forward classifier 784 -> H (ReLU) -> 10 (softmax).
///
/// Inputs are pixel values scaled to [0, 1]. Scalar is float for the shipped
/// model and double for gradient checking.
template <typename Scalar>
class Mlp {
public:
  struct Gradients {
    std::vector<Scalar> w1, b1, w2, b2;
  };

  explicit Mlp(std::size_t hidden = 32) : hidden_(hidden), w1_(hidden * kInputs), b1_(hidden), w2_(kClasses * hidden), b2_(kClasses) {}

  /// He-normal weights, zero biases.
  void initialise(Rng& rng) {
    const double s1 = std::sqrt(2.0 / kInputs), s2 = std::sqrt(2.0 / static_cast<double>(hidden_));
    for (auto& w : w1_) w = static_cast<Scalar>(rng.normal() * s1);
    for (auto& w : w2_) w = static_cast<Scalar>(rng.normal() * s2);
    std::fill(b1_.begin(), b1_.end(), Scalar(0));
    std::fill(b2_.begin(), b2_.end(), Scalar(0));
  }

  std::size_t hidden() const { return hidden_; }

  /// Softmax output; accumulated in double so it sums to 1 within rounding.
  Confidences predict(std::span<const Scalar> x) const {
    std::vector<Scalar> h(hidden_);
    Confidences logits{};
    forward(x, h, logits);
    return softmax(logits);
  }

  Confidences predict(const digit::RasterDigit& r) const {
    std::array<Scalar, kInputs> x;
    for (std::size_t i = 0; i < kInputs; ++i) x[i] = static_cast<Scalar>(r.pixels[i] / 255.0);
    return predict(std::span<const Scalar>(x));
  }

  int classify(const digit::RasterDigit& r) const {
    const Confidences c = predict(r);
    return static_cast<int>(std::max_element(c.begin(), c.end()) - c.begin());
  }

  /// Mean cross-entropy over a batch and, optionally, its gradient.
  double loss(std::span<const Scalar* const> inputs, std::span<const int> labels, Gradients* grad = nullptr) const {
    if (grad) {
      grad->w1.assign(w1_.size(), Scalar(0));
      grad->b1.assign(b1_.size(), Scalar(0));
      grad->w2.assign(w2_.size(), Scalar(0));
      grad->b2.assign(b2_.size(), Scalar(0));
    }
    const double inv = 1.0 / static_cast<double>(inputs.size());
    double total = 0.0;
    std::vector<Scalar> h(hidden_), dh(hidden_);
    for (std::size_t n = 0; n < inputs.size(); ++n) {
      std::span<const Scalar> x(inputs[n], kInputs);
      Confidences logits{};
      forward(x, h, logits);
      const Confidences p = softmax(logits);
      const auto y = static_cast<std::size_t>(labels[n]);
      total -= std::log(std::max(p[y], 1e-300));
      if (!grad) continue;
      // dL/dlogit = p - onehot
      std::fill(dh.begin(), dh.end(), Scalar(0));
      for (std::size_t k = 0; k < kClasses; ++k) {
        const Scalar g = static_cast<Scalar>((p[k] - (k == y ? 1.0 : 0.0)) * inv);
        grad->b2[k] += g;
        Scalar* gw = &grad->w2[k * hidden_];
        const Scalar* w = &w2_[k * hidden_];
        for (std::size_t j = 0; j < hidden_; ++j) {
          gw[j] += g * h[j];
          dh[j] += g * w[j];
        }
      }
      for (std::size_t j = 0; j < hidden_; ++j) {
        if (h[j] <= Scalar(0)) continue;
        grad->b1[j] += dh[j];
        Scalar* gw = &grad->w1[j * kInputs];
        for (std::size_t i = 0; i < kInputs; ++i) gw[i] += dh[j] * x[i];
      }
    }
    return total * inv;
  }

  void apply(const Gradients& g, Scalar lr) {
    auto step = [lr](std::vector<Scalar>& w, const std::vector<Scalar>& d) {
      for (std::size_t i = 0; i < w.size(); ++i) w[i] -= lr * d[i];
    };
    step(w1_, g.w1);
    step(b1_, g.b1);
    step(w2_, g.w2);
    step(b2_, g.b2);
  }

  std::vector<Scalar>& w1() { return w1_; }
  std::vector<Scalar>& b1() { return b1_; }
  std::vector<Scalar>& w2() { return w2_; }
  std::vector<Scalar>& b2() { return b2_; }
  const std::vector<Scalar>& w1() const { return w1_; }
  const std::vector<Scalar>& b1() const { return b1_; }
  const std::vector<Scalar>& w2() const { return w2_; }
  const std::vector<Scalar>& b2() const { return b2_; }

  bool all_finite() const {
    for (const auto* v : {&w1_, &b1_, &w2_, &b2_})
      for (Scalar w : *v)
        if (!std::isfinite(w)) return false;
    return true;
  }

  static Confidences softmax(const Confidences& logits) {
    const double top = *std::max_element(logits.begin(), logits.end());
    Confidences p{};
    double sum = 0.0;
    for (std::size_t k = 0; k < kClasses; ++k) sum += p[k] = std::exp(logits[k] - top);
    for (double& v : p) v /= sum;
    return p;
  }

private:
  void forward(std::span<const Scalar> x, std::vector<Scalar>& h, Confidences& logits) const {
    for (std::size_t j = 0; j < hidden_; ++j) {
      const Scalar* w = &w1_[j * kInputs];
      Scalar acc = b1_[j];
      for (std::size_t i = 0; i < kInputs; ++i) acc += w[i] * x[i];
      h[j] = acc > Scalar(0) ? acc : Scalar(0);
    }
    for (std::size_t k = 0; k < kClasses; ++k) {
      const Scalar* w = &w2_[k * hidden_];
      Scalar acc = b2_[k];
      for (std::size_t j = 0; j < hidden_; ++j) acc += w[j] * h[j];
      logits[k] = static_cast<double>(acc);
    }
  }

  std::size_t hidden_;
  std::vector<Scalar> w1_, b1_, w2_, b2_;
};

/// The shipped classifier: float weights plus how they were trained.
struct ClassifierModel {
  Mlp<float> net;
  TrainingInfo info;
};

struct TrainOptions {
  int epochs = 5;
  double learning_rate = 0.1;
  int batch_size = 32;
  std::size_t hidden = 32;
  std::uint64_t seed = 1;
};

inline double accuracy(const Mlp<float>& net, std::span<const digit::RasterDigit> images,
                       std::span<const std::uint8_t> labels) {
  if (images.empty()) return 0.0;
  std::size_t ok = 0;
  for (std::size_t i = 0; i < images.size(); ++i) ok += net.classify(images[i]) == labels[i];
  return static_cast<double>(ok) / static_cast<double>(images.size());
}

/// Mini-batch SGD on cross-entropy. Deterministic for a fixed seed.
inline ClassifierModel train_classifier(std::span<const digit::RasterDigit> train_images,
                                        std::span<const std::uint8_t> train_labels,
                                        std::span<const digit::RasterDigit> test_images,
                                        std::span<const std::uint8_t> test_labels, const TrainOptions& opt) {
  if (train_images.size() != train_labels.size() || test_images.size() != test_labels.size())
    throw std::invalid_argument("train_classifier: image and label counts differ");
  if (opt.batch_size < 1 || opt.epochs < 0) throw std::invalid_argument("train_classifier: bad options");
  for (auto l : train_labels)
    if (l >= kClasses) throw std::invalid_argument("train_classifier: label outside 0-9");

  Rng rng(opt.seed);
  ClassifierModel model{Mlp<float>(opt.hidden), {opt.epochs, opt.learning_rate, opt.batch_size, opt.seed, 0.0}};
  model.net.initialise(rng);

  std::vector<float> data(train_images.size() * kInputs);
  for (std::size_t n = 0; n < train_images.size(); ++n)
    for (std::size_t i = 0; i < kInputs; ++i) data[n * kInputs + i] = static_cast<float>(train_images[n].pixels[i] / 255.0);

  std::vector<std::size_t> order(train_images.size());
  std::iota(order.begin(), order.end(), 0);
  Mlp<float>::Gradients grad;
  std::vector<const float*> batch;
  std::vector<int> batch_labels;
  for (int epoch = 0; epoch < opt.epochs; ++epoch) {
    for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(opt.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(opt.batch_size));
      batch.clear();
      batch_labels.clear();
      for (std::size_t k = start; k < end; ++k) {
        batch.push_back(&data[order[k] * kInputs]);
        batch_labels.push_back(train_labels[order[k]]);
      }
      model.net.loss(batch, batch_labels, &grad);
      model.net.apply(grad, static_cast<float>(opt.learning_rate));
    }
  }
  model.info.test_accuracy = accuracy(model.net, test_images, test_labels);
  return model;
}

namespace model_io {

inline std::string pack(const std::vector<float>& v) {
  std::vector<std::uint8_t> bytes(v.size() * 4);
  for (std::size_t i = 0; i < v.size(); ++i) {
    std::uint32_t bits;
    std::memcpy(&bits, &v[i], 4);
    for (int b = 0; b < 4; ++b) bytes[i * 4 + static_cast<std::size_t>(b)] = static_cast<std::uint8_t>(bits >> (8 * b));
  }
  return base64::encode(bytes);
}

inline std::vector<float> unpack(const std::string& s, std::size_t expected) {
  const auto bytes = base64::decode(s);
  if (bytes.size() != expected * 4) throw std::runtime_error("model file: array has the wrong length");
  std::vector<float> v(expected);
  for (std::size_t i = 0; i < expected; ++i) {
    std::uint32_t bits = 0;
    for (int b = 0; b < 4; ++b) bits |= std::uint32_t{bytes[i * 4 + static_cast<std::size_t>(b)]} << (8 * b);
    std::memcpy(&v[i], &bits, 4);
  }
  return v;
}

} // namespace model_io

/// JSON document: shapes and training metadata, weights as base64 of
/// little-endian float32.
inline nlohmann::json model_to_json(const ClassifierModel& m) {
  const auto h = m.net.hidden();
  return {
      {"format", "illumine-mlp-v1"},
      {"shapes", {{"w1", {h, kInputs}}, {"b1", {h}}, {"w2", {kClasses, h}}, {"b2", {kClasses}}}},
      {"epochs", m.info.epochs},
      {"learning_rate", m.info.learning_rate},
      {"batch_size", m.info.batch_size},
      {"seed", m.info.seed},
      {"test_accuracy", m.info.test_accuracy},
      {"weights",
       {{"w1", model_io::pack(m.net.w1())},
        {"b1", model_io::pack(m.net.b1())},
        {"w2", model_io::pack(m.net.w2())},
        {"b2", model_io::pack(m.net.b2())}}},
  };
}

inline ClassifierModel model_from_json(const nlohmann::json& j) {
  if (j.value("format", "") != "illumine-mlp-v1") throw std::runtime_error("model file: unknown format");
  const auto hidden = j.at("shapes").at("b1").at(0).get<std::size_t>();
  ClassifierModel m{Mlp<float>(hidden), {}};
  m.info.epochs = j.at("epochs").get<int>();
  m.info.learning_rate = j.at("learning_rate").get<double>();
  m.info.batch_size = j.at("batch_size").get<int>();
  m.info.seed = j.at("seed").get<std::uint64_t>();
  m.info.test_accuracy = j.at("test_accuracy").get<double>();
  const auto& w = j.at("weights");
  m.net.w1() = model_io::unpack(w.at("w1").get<std::string>(), hidden * kInputs);
  m.net.b1() = model_io::unpack(w.at("b1").get<std::string>(), hidden);
  m.net.w2() = model_io::unpack(w.at("w2").get<std::string>(), kClasses * hidden);
  m.net.b2() = model_io::unpack(w.at("b2").get<std::string>(), kClasses);
  if (!m.net.all_finite()) throw std::runtime_error("model file: non-finite weight");
  return m;
}

} // namespace illumine::sut
