//
// Project retroplan - Copyright 2026 retroplan authors.
// SPDX-License-Identifier: Apache-2.0
//

#include <cerrno>
#include <chrono>
#include <csignal>
#include <algorithm>
#include <cstring>
#include <mutex>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "json.hpp"
#include "retro/predictor.h"

extern char **environ;

namespace retro {
namespace {

using Clock = std::chrono::steady_clock;

void ignore_sigpipe() {
  static std::once_flag once;
  std::call_once(once, [] { std::signal(SIGPIPE, SIG_IGN); });
}

void close_fd(int &fd) {
  if (fd >= 0) {
    ::close(fd);
    fd = -1;
  }
}

} // namespace

std::unique_ptr<ExternalPredictor>
ExternalPredictor::spawn(const std::string &command, double timeout_s) {
  ignore_sigpipe();

  int in_pipe[2];  // parent writes -> child stdin
  int out_pipe[2]; // child stdout -> parent reads
  if (::pipe2(in_pipe, O_CLOEXEC) != 0)
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw TransportError(std::string("pipe: ") + std::strerror(errno));
  }

  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

  std::string cmd = command;
  char sh[] = "/bin/sh";
  char dash_c[] = "-c";
  char *argv[] = { sh, dash_c, cmd.data(), nullptr };
  // A process group of its own lets us kill the shell and whatever it
  // started in one go.
  posix_spawnattr_t attr;
  posix_spawnattr_init(&attr);
  posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
  posix_spawnattr_setpgroup(&attr, 0);
  pid_t pid = -1;
  const int rc = ::posix_spawn(&pid, "/bin/sh", &actions, &attr, argv,
                               environ);
  posix_spawnattr_destroy(&attr);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  if (rc != 0) {
    ::close(in_pipe[1]);
    ::close(out_pipe[0]);
    throw TransportError(std::string("spawn failed: ") + std::strerror(rc));
  }

  std::unique_ptr<ExternalPredictor> handle(
      new ExternalPredictor(pid, in_pipe[1], out_pipe[0], timeout_s));
  nlohmann::json hello;
  try {
    hello = nlohmann::json::parse(handle->read_line(timeout_s));
  } catch (const nlohmann::json::exception &e) {
    handle->fail(std::string("malformed hello: ") + e.what());
  }
  const bool valid = hello.is_object() && hello.contains("type")
                     && hello["type"] == "hello" && hello.contains("version")
                     && hello["version"] == 1 && hello.contains("max_top_k")
                     && hello["max_top_k"].is_number_integer()
                     && hello["max_top_k"].get<long>() >= 1;
  if (!valid)
    handle->fail("protocol violation: bad hello " + hello.dump());
  handle->max_top_k_ = static_cast<int>(
      std::min<long>(hello["max_top_k"].get<long>(), 1 << 20));
  return handle;
}

ExternalPredictor::ExternalPredictor(int pid, int to_child, int from_child,
                                     double timeout_s)
    : pid_(pid), to_child_(to_child), from_child_(from_child),
      timeout_s_(timeout_s) { }

ExternalPredictor::~ExternalPredictor() {
  shutdown();
}

void ExternalPredictor::shutdown() {
  close_fd(to_child_);
  close_fd(from_child_);
  if (pid_ <= 0)
    return;
  // Closing stdin asks a well-behaved adapter to exit; give it a moment.
  for (int i = 0; i < 50; ++i) {
    int status;
    pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || r < 0) {
      ::kill(-pid_, SIGKILL); // stragglers the shell left behind
      pid_ = -1;
      return;
    }
    ::usleep(2000);
  }
  ::kill(-pid_, SIGKILL);
  int status;
  ::waitpid(pid_, &status, 0);
  pid_ = -1;
}

void ExternalPredictor::fail(const std::string &why) {
  failed_ = true;
  if (pid_ > 0)
    ::kill(-pid_, SIGKILL);
  shutdown();
  throw TransportError(why);
}

std::string ExternalPredictor::read_line(double timeout_s) {
  const auto deadline =
      Clock::now()
      + std::chrono::duration_cast<Clock::duration>(
          std::chrono::duration<double>(timeout_s));
  while (true) {
    std::size_t nl = buffer_.find('\n');
    if (nl != std::string::npos) {
      std::string line = buffer_.substr(0, nl);
      buffer_.erase(0, nl + 1);
      return line;
    }
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
        deadline - Clock::now());
    if (left.count() <= 0)
      fail("timeout waiting for predictor");
    pollfd pfd { from_child_, POLLIN, 0 };
    const int ready = ::poll(&pfd, 1, static_cast<int>(std::min<long long>(
                                          left.count(), 1 << 30)));
    if (ready < 0) {
      if (errno == EINTR)
        continue;
      fail(std::string("poll: ") + std::strerror(errno));
    }
    if (ready == 0)
      continue;
    char chunk[4096];
    const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
    if (n < 0) {
      if (errno == EINTR || errno == EAGAIN)
        continue;
      fail(std::string("read: ") + std::strerror(errno));
    }
    if (n == 0)
      fail("predictor process closed its output");
    buffer_.append(chunk, static_cast<std::size_t>(n));
  }
}

void ExternalPredictor::write_line(const std::string &line) {
  std::string data = line + "\n";
  std::size_t off = 0;
  while (off < data.size()) {
    const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
    if (n < 0) {
      if (errno == EINTR)
        continue;
      fail(std::string("write: ") + std::strerror(errno));
    }
    off += static_cast<std::size_t>(n);
  }
}

std::vector<Prediction> ExternalPredictor::predict(const CanonicalKey &product,
                                                   int top_k) {
  if (failed_)
    throw TransportError("predictor handle has failed");
  if (top_k < 1)
    throw std::invalid_argument("top_k must be >= 1");
  const int k = std::min(top_k, max_top_k_);
  const long id = next_id_++;

  nlohmann::json request = { { "type", "predict" },
                             { "id", id },
                             { "smiles", product.str() },
                             { "top_k", k } };
  write_line(request.dump());

  nlohmann::json reply;
  try {
    reply = nlohmann::json::parse(read_line(timeout_s_));
  } catch (const nlohmann::json::exception &e) {
    fail(std::string("malformed reply: ") + e.what());
  }
  if (!reply.is_object() || !reply.contains("type") || !reply.contains("id")
      || !reply["id"].is_number_integer() || reply["id"].get<long>() != id)
    fail("protocol violation: reply does not match request id "
         + std::to_string(id));

  const std::string type = reply["type"].is_string()
                               ? reply["type"].get<std::string>()
                               : std::string();
  if (type == "error") {
    const bool has_message =
        reply.contains("message") && reply["message"].is_string();
    throw TransportError(
        "predictor error: "
        + (has_message ? reply["message"].get<std::string>() : "unknown"));
  }
  if (type != "predictions" || !reply.contains("results")
      || !reply["results"].is_array())
    fail("protocol violation: unexpected reply " + reply.dump());

  std::vector<RawPrediction> raw;
  for (const nlohmann::json &r: reply["results"]) {
    if (!r.is_object() || !r.contains("reactants") || !r.contains("prob")
        || !r["reactants"].is_array() || !r["prob"].is_number())
      fail("protocol violation: malformed result entry");
    RawPrediction p;
    for (const nlohmann::json &s: r["reactants"]) {
      if (!s.is_string())
        fail("protocol violation: reactant is not a string");
      p.reactants.push_back(s.get<std::string>());
    }
    p.prior = r["prob"].get<double>();
    raw.push_back(std::move(p));
  }

  std::vector<Prediction> preds = normalize_predictions(product, raw, &stats_);
  if (preds.size() > static_cast<std::size_t>(k))
    preds.resize(k);
  return preds;
}

} // namespace retro
