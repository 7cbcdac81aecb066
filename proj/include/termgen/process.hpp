#pragma once

// Subprocess helpers shared by the live session backends. Everything the
// child needs (argv, envp) is prepared before fork so the child only makes
// async-signal-safe calls.

#include <fcntl.h>
#include <poll.h>
#include <pty.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "termgen/error.hpp"

extern char** environ;

namespace termgen::process {

struct Result {
  int exit_code = 0;  // 128+signal when killed, 127 when exec failed
  std::string output;  // stdout and stderr interleaved
  bool timed_out = false;
};

// Serializes fork with the FD_CLOEXEC fix-up that follows it, so descriptors
// created by one thread never leak into a child forked by another.
inline std::mutex& fork_mutex() {
  static std::mutex m;
  return m;
}

class CStrings {
 public:
  explicit CStrings(const std::vector<std::string>& items) : storage_(items) {
    for (auto& s : storage_) pointers_.push_back(s.data());
    pointers_.push_back(nullptr);
  }
  char** data() { return pointers_.data(); }

 private:
  std::vector<std::string> storage_;
  std::vector<char*> pointers_;
};

// Current environment with `overrides` applied.
inline std::vector<std::string> build_env(const std::map<std::string, std::string>& overrides) {
  std::map<std::string, std::string> merged;
  for (char** e = environ; e && *e; ++e) {
    std::string entry(*e);
    auto eq = entry.find('=');
    if (eq == std::string::npos) continue;
    merged[entry.substr(0, eq)] = entry.substr(eq + 1);
  }
  for (const auto& [k, v] : overrides) merged[k] = v;
  std::vector<std::string> out;
  out.reserve(merged.size());
  for (const auto& [k, v] : merged) out.push_back(k + "=" + v);
  return out;
}

inline int decode_status(int status) {
  if (WIFEXITED(status)) return WEXITSTATUS(status);
  if (WIFSIGNALED(status)) return 128 + WTERMSIG(status);
  return -1;
}

// Runs argv to completion with merged stdout/stderr, an optional stdin
// payload, and a wall-clock timeout (<= 0 means none). The child leads its
// own process group so a timeout kills the whole tree.
inline Result run(const std::vector<std::string>& argv, const std::string& cwd = {}, double timeout_seconds = 0,
                  const std::map<std::string, std::string>& env = {}, const std::string& stdin_data = {}) {
  if (argv.empty()) throw Error(Errc::InvalidArgument, "empty argv");
  CStrings args(argv);
  CStrings envp(build_env(env));
  const char* dir = cwd.empty() ? nullptr : cwd.c_str();

  int out_pipe[2];
  int in_pipe[2];
  pid_t pid;
  {
    std::lock_guard lock(fork_mutex());
    if (pipe2(out_pipe, O_CLOEXEC) != 0) throw Error(Errc::IoFailure, std::strerror(errno));
    if (pipe2(in_pipe, O_CLOEXEC) != 0) {
      ::close(out_pipe[0]);
      ::close(out_pipe[1]);
      throw Error(Errc::IoFailure, std::strerror(errno));
    }
    pid = fork();
    if (pid == 0) {
      setpgid(0, 0);
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      dup2(out_pipe[1], STDERR_FILENO);
      if (dir && chdir(dir) != 0) _exit(127);
      execvpe(args.data()[0], args.data(), envp.data());
      _exit(127);
    }
  }
  ::close(out_pipe[1]);
  ::close(in_pipe[0]);
  if (pid < 0) {
    ::close(out_pipe[0]);
    ::close(in_pipe[1]);
    throw Error(Errc::IoFailure, std::string("fork failed: ") + std::strerror(errno));
  }
  if (!stdin_data.empty()) {
    signal(SIGPIPE, SIG_IGN);
    std::size_t written = 0;
    while (written < stdin_data.size()) {
      auto n = ::write(in_pipe[1], stdin_data.data() + written, stdin_data.size() - written);
      if (n <= 0) break;
      written += static_cast<std::size_t>(n);
    }
  }
  ::close(in_pipe[1]);

  Result result;
  const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_seconds);
  char buf[4096];
  while (true) {
    int wait_ms = -1;
    if (timeout_seconds > 0) {
      auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
      if (left.count() <= 0) {
        result.timed_out = true;
        kill(-pid, SIGKILL);
        break;
      }
      wait_ms = static_cast<int>(left.count());
    }
    pollfd pfd{out_pipe[0], POLLIN, 0};
    int rc = poll(&pfd, 1, wait_ms);
    if (rc < 0 && errno == EINTR) continue;
    if (rc == 0) continue;
    auto n = ::read(out_pipe[0], buf, sizeof buf);
    if (n > 0) {
      result.output.append(buf, static_cast<std::size_t>(n));
    } else if (n == 0 || errno != EINTR) {
      break;
    }
  }
  ::close(out_pipe[0]);
  int status = 0;
  while (waitpid(pid, &status, 0) < 0 && errno == EINTR) {
  }
  result.exit_code = decode_status(status);
  return result;
}

// Child process attached to a pseudo-terminal. The master descriptor is
// non-blocking and close-on-exec.
struct PtyChild {
  pid_t pid = -1;
  int master = -1;
};

inline PtyChild spawn_pty(const std::vector<std::string>& argv, const std::string& cwd,
                          const std::map<std::string, std::string>& env, unsigned short cols = 200,
                          unsigned short rows = 50) {
  if (argv.empty()) throw Error(Errc::InvalidArgument, "empty argv");
  CStrings args(argv);
  CStrings envp(build_env(env));
  winsize size{};
  size.ws_col = cols;
  size.ws_row = rows;
  PtyChild child;
  {
    std::lock_guard lock(fork_mutex());
    child.pid = forkpty(&child.master, nullptr, nullptr, &size);
    if (child.pid == 0) {
      if (!cwd.empty() && chdir(cwd.c_str()) != 0) _exit(127);
      execvpe(args.data()[0], args.data(), envp.data());
      _exit(127);
    }
    if (child.pid > 0) {
      fcntl(child.master, F_SETFD, FD_CLOEXEC);
      fcntl(child.master, F_SETFL, fcntl(child.master, F_GETFL) | O_NONBLOCK);
    }
  }
  if (child.pid < 0) throw Error(Errc::BackendUnavailable, std::string("forkpty failed: ") + std::strerror(errno));
  return child;
}

}  // namespace termgen::process
