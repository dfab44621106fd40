#pragma once

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "illumine/digit/raster.hpp"
#include "illumine/road/genome.hpp"
#include "illumine/sut/classifier.hpp"
#include "illumine/sut/driver.hpp"
#include "illumine/util/error.hpp"

namespace illumine::sut {

namespace external_detail {

class Fd {
public:
  Fd() = default;
  explicit Fd(int fd) : fd_(fd) {}
  Fd(Fd&& o) noexcept : fd_(o.release()) {}
  Fd& operator=(Fd&& o) noexcept {
    if (this != &o) reset(o.release());
    return *this;
  }
  Fd(const Fd&) = delete;
  Fd& operator=(const Fd&) = delete;
  ~Fd() { reset(); }

  int get() const { return fd_; }
  explicit operator bool() const { return fd_ >= 0; }
  int release() { return std::exchange(fd_, -1); }
  void reset(int fd = -1) {
    if (fd_ >= 0) ::close(fd_);
    fd_ = fd;
  }

private:
  int fd_ = -1;
};

inline std::pair<Fd, Fd> make_pipe() {
  int fds[2];
  if (::pipe2(fds, O_CLOEXEC) != 0) throw SutError(std::string("pipe: ") + std::strerror(errno));
  return {Fd(fds[0]), Fd(fds[1])};
}

} // namespace external_detail

/// A system under test running as a child process, speaking line-delimited
/// JSON over its standard streams. Each request carries an "id"; a response
/// that echoes a different id is rejected as out of order.
class ExternalSut {
public:
  ExternalSut(std::string command, std::chrono::milliseconds timeout = std::chrono::seconds(60))
      : command_(std::move(command)), timeout_(timeout) {
    launch();
  }

  ExternalSut(const ExternalSut&) = delete;
  ExternalSut& operator=(const ExternalSut&) = delete;

  ~ExternalSut() { shutdown(); }

  const std::string& command() const { return command_; }

  /// Sends one request and waits for its response. After any protocol
  /// failure the process is restarted before the next request.
  nlohmann::json call(nlohmann::json request) {
    if (broken_) {
      shutdown();
      launch();
    }
    try {
      return exchange(std::move(request));
    } catch (const SutError&) {
      broken_ = true;
      throw;
    }
  }

  Confidences classify(const digit::RasterDigit& image) {
    nlohmann::json req = {{"type", "classify"}, {"image", image.pixels}};
    return parse_confidences(call(std::move(req)));
  }

  SimulationTrace drive(const road::RoadGenome& road) {
    nlohmann::json req = {{"type", "drive"}, {"road", road::to_json(road)}};
    return parse_trace(call(std::move(req)));
  }

  static Confidences parse_confidences(const nlohmann::json& r) {
    const auto it = r.find("confidences");
    if (it == r.end() || !it->is_array()) throw SutError("response lacks a confidences array");
    if (it->size() != kClasses)
      throw SutError("expected 10 confidences, got " + std::to_string(it->size()));
    Confidences c{};
    for (std::size_t i = 0; i < kClasses; ++i) {
      if (!(*it)[i].is_number()) throw SutError("non-numeric confidence");
      c[i] = (*it)[i].get<double>();
      if (!std::isfinite(c[i])) throw SutError("non-finite confidence");
    }
    return c;
  }

  static SimulationTrace parse_trace(const nlohmann::json& r) {
    auto reals = [&](const char* key) {
      const auto it = r.find(key);
      if (it == r.end() || !it->is_array()) throw SutError(std::string("response lacks array '") + key + "'");
      std::vector<double> v;
      v.reserve(it->size());
      for (const auto& x : *it) {
        if (!x.is_number()) throw SutError(std::string("non-numeric entry in '") + key + "'");
        v.push_back(x.get<double>());
        if (!std::isfinite(v.back())) throw SutError(std::string("non-finite entry in '") + key + "'");
      }
      return v;
    };
    SimulationTrace t;
    t.steering_angles = reals("steering");
    t.lateral_distances = reals("lateral");
    if (t.steering_angles.size() != t.lateral_distances.size())
      throw SutError("steering and lateral sequences differ in length");
    if (t.steering_angles.empty()) throw SutError("empty simulation trace");
    if (!r.contains("dt") || !r["dt"].is_number()) throw SutError("response lacks dt");
    if (!r.contains("completed") || !r["completed"].is_boolean()) throw SutError("response lacks completed flag");
    t.dt = r["dt"].get<double>();
    t.completed = r["completed"].get<bool>();
    return t;
  }

private:
  void launch() {
    using external_detail::make_pipe;
    // a dead child must surface as an error from write(), not kill the search
    ::signal(SIGPIPE, SIG_IGN);
    auto [to_child_r, to_child_w] = make_pipe();
    auto [from_child_r, from_child_w] = make_pipe();
    auto [err_r, err_w] = make_pipe();

    pid_ = ::fork();
    if (pid_ < 0) throw SutError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      ::dup2(to_child_r.get(), STDIN_FILENO);
      ::dup2(from_child_w.get(), STDOUT_FILENO);
      ::execl("/bin/sh", "sh", "-c", command_.c_str(), static_cast<char*>(nullptr));
      const int e = errno;
      [[maybe_unused]] auto n = ::write(err_w.get(), &e, sizeof e);
      ::_exit(127);
    }
    err_w.reset();
    int child_errno = 0;
    if (::read(err_r.get(), &child_errno, sizeof child_errno) == sizeof child_errno) {
      ::waitpid(pid_, nullptr, 0);
      pid_ = -1;
      throw SutError("cannot launch '" + command_ + "': " + std::strerror(child_errno));
    }
    in_ = std::move(to_child_w);
    out_ = std::move(from_child_r);
    buffer_.clear();
    broken_ = false;
  }

  void shutdown() {
    in_.reset();
    out_.reset();
    if (pid_ > 0) {
      bool reaped = false;
      for (int i = 0; i < 50 && !reaped; ++i) {
        reaped = ::waitpid(pid_, nullptr, WNOHANG) == pid_;
        if (!reaped) ::usleep(10000);
      }
      if (!reaped) {
        ::kill(pid_, SIGKILL);
        ::waitpid(pid_, nullptr, 0);
      }
    }
    pid_ = -1;
  }

  nlohmann::json exchange(nlohmann::json request) {
    const std::uint64_t id = next_id_++;
    request["id"] = id;
    send_line(request.dump());
    nlohmann::json response;
    const std::string line = read_line();
    try {
      response = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
      throw SutError("malformed response: " + line.substr(0, 200));
    }
    if (!response.is_object()) throw SutError("response is not a JSON object");
    if (response.contains("id") && response["id"] != id)
      throw SutError("response out of order: expected id " + std::to_string(id) + ", got " + response["id"].dump());
    return response;
  }

  void send_line(const std::string& text) {
    std::string line = text + "\n";
    std::size_t done = 0;
    while (done < line.size()) {
      const auto n = ::write(in_.get(), line.data() + done, line.size() - done);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SutError("SUT process '" + command_ + "' is not accepting input: " + std::strerror(errno));
      }
      done += static_cast<std::size_t>(n);
    }
  }

  std::string read_line() {
    const auto deadline = std::chrono::steady_clock::now() + timeout_;
    for (;;) {
      if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
        std::string line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) throw SutError("SUT timed out after " + std::to_string(timeout_.count()) + " ms");
      pollfd p{out_.get(), POLLIN, 0};
      const int ready = ::poll(&p, 1, static_cast<int>(left.count()));
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw SutError(std::string("poll: ") + std::strerror(errno));
      }
      if (ready == 0) continue;
      char chunk[4096];
      const auto n = ::read(out_.get(), chunk, sizeof chunk);
      if (n < 0) {
        if (errno == EINTR) continue;
        throw SutError(std::string("read: ") + std::strerror(errno));
      }
      if (n == 0) throw SutError("SUT process '" + command_ + "' exited");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  std::string command_;
  std::chrono::milliseconds timeout_;
  pid_t pid_ = -1;
  external_detail::Fd in_, out_;
  std::string buffer_;
  std::uint64_t next_id_ = 0;
  bool broken_ = false;
};

/// One subprocess per worker, all launched up front.
class ExternalSutPool {
public:
  ExternalSutPool(const std::string& command, std::size_t workers,
                  std::chrono::milliseconds timeout = std::chrono::seconds(60)) {
    for (std::size_t w = 0; w < std::max<std::size_t>(1, workers); ++w)
      procs_.push_back(std::make_unique<ExternalSut>(command, timeout));
  }

  ExternalSut& at(std::size_t worker) { return *procs_.at(worker); }
  std::size_t size() const { return procs_.size(); }

private:
  std::vector<std::unique_ptr<ExternalSut>> procs_;
};

} // namespace illumine::sut
