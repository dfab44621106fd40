#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "illumine/digit/raster.hpp"

namespace illumine::digit {

inline constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

namespace idx_detail {

inline std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) throw std::runtime_error(what + ": truncated header");
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | b[3];
}

} // namespace idx_detail

inline std::vector<RasterDigit> read_idx_images(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string what = path.string();
  if (idx_detail::read_be32(in, what) != kIdxImagesMagic) throw std::runtime_error(what + ": not an IDX image file");
  const std::uint32_t count = idx_detail::read_be32(in, what);
  const std::uint32_t rows = idx_detail::read_be32(in, what);
  const std::uint32_t cols = idx_detail::read_be32(in, what);
  if (rows != kSide || cols != kSide) throw std::runtime_error(what + ": images are not 28x28");
  std::vector<RasterDigit> out(count);
  for (auto& img : out)
    if (!in.read(reinterpret_cast<char*>(img.pixels.data()), img.pixels.size()))
      throw std::runtime_error(what + ": truncated pixel data");
  return out;
}

inline std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const std::string what = path.string();
  if (idx_detail::read_be32(in, what) != kIdxLabelsMagic) throw std::runtime_error(what + ": not an IDX label file");
  const std::uint32_t count = idx_detail::read_be32(in, what);
  std::vector<std::uint8_t> out(count);
  if (!in.read(reinterpret_cast<char*>(out.data()), count)) throw std::runtime_error(what + ": truncated labels");
  return out;
}

struct MnistSplit {
  std::vector<RasterDigit> images;
  std::vector<std::uint8_t> labels;
};

struct Mnist {
  MnistSplit train;
  MnistSplit test;
};

/// Loads the four standard files (train-/t10k- images and labels) from `dir`.
inline Mnist load_mnist(const std::filesystem::path& dir) {
  Mnist m;
  m.train.images = read_idx_images(dir / "train-images-idx3-ubyte");
  m.train.labels = read_idx_labels(dir / "train-labels-idx1-ubyte");
  m.test.images = read_idx_images(dir / "t10k-images-idx3-ubyte");
  m.test.labels = read_idx_labels(dir / "t10k-labels-idx1-ubyte");
  if (m.train.images.size() != m.train.labels.size() || m.test.images.size() != m.test.labels.size())
    throw std::runtime_error("MNIST image/label counts differ");
  return m;
}

inline bool mnist_available(const std::filesystem::path& dir) {
  for (const char* f : {"train-images-idx3-ubyte", "train-labels-idx1-ubyte", "t10k-images-idx3-ubyte",
                        "t10k-labels-idx1-ubyte"})
    if (!std::filesystem::exists(dir / f)) return false;
  return true;
}

} // namespace illumine::digit
