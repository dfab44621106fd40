#pragma once

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "illumine/core/individual.hpp"
#include "illumine/digit/features.hpp"
#include "illumine/digit/mutate.hpp"
#include "illumine/digit/raster.hpp"
#include "illumine/digit/trace.hpp"
#include "illumine/sut/classifier.hpp"
#include "illumine/sut/fitness.hpp"
#include "illumine/util/error.hpp"
#include "illumine/util/rng.hpp"

namespace illumine::digit {

inline const std::vector<std::string>& feature_names() {
  static const std::vector<std::string> names{"Lum", "Mov", "Or"};
  return names;
}

/// Grid scale factor used when a configuration does not name one.
inline double default_scale(const std::string& feature) {
  static const std::map<std::string, double> alpha{{"Lum", 0.2}, {"Mov", 1.0}, {"Or", 10.0}};
  const auto it = alpha.find(feature);
  if (it == alpha.end()) throw ConfigError("unknown digit feature '" + feature + "'");
  return it->second;
}

inline double compute_feature(const std::string& name, const DigitGenome& g, const RasterDigit& r) {
  if (name == "Lum") return feat_luminosity(r);
  if (name == "Mov") return feat_moves(g);
  if (name == "Or") return feat_orientation(r);
  throw ConfigError("unknown digit feature '" + name + "'");
}

/// Classifier callback: confidences for one raster, on the given worker.
using ClassifyFn = std::function<sut::Confidences(const RasterDigit&, std::size_t worker)>;

/// Search domain over traced MNIST digits of one class.
class DigitDomain {
public:
  using genome_type = DigitGenome;

  DigitDomain(std::vector<std::string> features, std::vector<RasterDigit> seed_images, int label,
              ClassifyFn classify)
      : features_(std::move(features)), images_(std::move(seed_images)), label_(label),
        classify_(std::move(classify)) {
    for (const auto& f : features_) default_scale(f);
    if (label_ < 0 || label_ > 9) throw ConfigError("digit label must be 0-9");
  }

  /// Traces `n` pool images drawn without replacement; blank images are skipped.
  std::vector<DigitGenome> generate_seeds(std::size_t n, Rng& rng) {
    if (images_.size() < n)
      throw std::runtime_error("seed pool holds " + std::to_string(images_.size()) + " images, " +
                               std::to_string(n) + " requested");
    std::vector<std::size_t> order(images_.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    for (std::size_t i = 0; i < n; ++i) std::swap(order[i], order[i + rng.below(order.size() - i)]);
    order.resize(n);
    std::sort(order.begin(), order.end());
    std::vector<DigitGenome> seeds;
    seeds.reserve(n);
    for (std::size_t i : order) {
      try {
        seeds.push_back(trace_bitmap(images_[i], label_));
      } catch (const std::invalid_argument&) {
      }
    }
    return seeds;
  }

  DigitGenome mutate(const DigitGenome& g, double lb, double ub, Rng& rng) { return mutate_digit(g, lb, ub, rng); }

  Evaluation evaluate(const DigitGenome& g, std::size_t worker) {
    const RasterDigit r = rasterize(g);
    Evaluation ev;
    ev.features.reserve(features_.size());
    for (const auto& f : features_) ev.features.push_back(compute_feature(f, g, r));
    const sut::Confidences conf = classify_(r, worker);
    try {
      ev.fitness = sut::fitness_classification(conf, g.expected_label);
    } catch (const std::invalid_argument& e) {
      throw SutError(e.what());
    }
    ev.input_digest = digest(r);
    return ev;
  }

  const std::vector<std::string>& features() const { return features_; }
  int label() const { return label_; }

private:
  std::vector<std::string> features_;
  std::vector<RasterDigit> images_;
  int label_;
  ClassifyFn classify_;
};

inline ClassifyFn builtin_classifier(const sut::Mlp<float>& net) {
  return [&net](const RasterDigit& r, std::size_t) { return net.predict(r); };
}

/// Writes the rasterized input as 784 raw bytes, row-major.
inline void write_raster(const DigitGenome& g, const std::filesystem::path& stem) {
  const RasterDigit r = rasterize(g);
  auto path = stem;
  path += ".bin";
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
}

inline RasterDigit read_raster(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  RasterDigit r;
  in.read(reinterpret_cast<char*>(r.pixels.data()), static_cast<std::streamsize>(r.pixels.size()));
  if (in.gcount() != static_cast<std::streamsize>(r.pixels.size()) || in.peek() != std::char_traits<char>::eof())
    throw std::runtime_error(path.string() + ": expected exactly 784 bytes");
  return r;
}

} // namespace illumine::digit
