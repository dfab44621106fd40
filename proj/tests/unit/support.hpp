#pragma once

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>

#include <unistd.h>

namespace support {

/// Directory under the system temp dir, removed with its contents on scope exit.
class TempDir {
public:
  explicit TempDir(const std::string& tag) {
    std::string pattern = (std::filesystem::temp_directory_path() / ("illumine-" + tag + "-XXXXXX")).string();
    if (!::mkdtemp(pattern.data())) throw std::runtime_error("mkdtemp failed");
    path_ = pattern;
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
  std::filesystem::path path_;
};

inline std::filesystem::path mnist_dir() {
  if (const char* env = std::getenv("ILLUMINE_MNIST_DIR"); env && *env) return env;
#ifdef ILLUMINE_TEST_MNIST_DIR
  return ILLUMINE_TEST_MNIST_DIR;
#else
  return {};
#endif
}

inline std::string stub_sut() {
#ifdef ILLUMINE_STUB_SUT
  return ILLUMINE_STUB_SUT;
#else
  return "stub_sut";
#endif
}

inline std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace support
