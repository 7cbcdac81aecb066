#pragma once

// Interactive terminal sessions the agent acts upon. Three backends:
//   scripted   deterministic replay (virtual clock), no processes
//   local_pty  a shell on a pseudo-terminal in a materialized temp directory
//   container  a shell inside a container driven through the runtime CLI
//
// A Session is owned through std::unique_ptr; it is never shared.

#include <stdlib.h>

#include <atomic>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"
#include "termgen/error.hpp"
#include "termgen/process.hpp"
#include "termgen/task_model.hpp"
#include "termgen/util.hpp"

namespace termgen {

struct TerminalState {
  std::string text;
  bool truncated = false;
  double captured_at = 0;  // seconds since session start

  friend bool operator==(const TerminalState&, const TerminalState&) = default;
};

enum class Backend { Scripted, LocalPty, Container };

[[nodiscard]] inline std::string_view to_string(Backend b) noexcept {
  switch (b) {
    case Backend::Scripted: return "scripted";
    case Backend::LocalPty: return "local_pty";
    case Backend::Container: return "container";
  }
  return "unknown";
}

[[nodiscard]] inline Backend backend_from_string(std::string_view s) {
  if (s == "scripted") return Backend::Scripted;
  if (s == "local_pty") return Backend::LocalPty;
  if (s == "container") return Backend::Container;
  throw Error(Errc::InvalidArgument, "unknown session backend '" + std::string(s) + "'");
}

// Runtime CLI argument templates. Placeholders: {image} {container} {root}
// {src} {dst} {cmd}.
struct ContainerTemplate {
  std::vector<std::string> inspect{"image", "inspect", "{image}"};
  std::vector<std::string> create{"run", "-d", "--rm", "-w", "{root}", "{image}", "sleep", "infinity"};
  std::vector<std::string> copy{"cp", "{src}", "{container}:{dst}"};
  std::vector<std::string> shell{"exec", "-it", "-w", "{root}", "{container}", "bash", "--noprofile", "--norc", "-i"};
  std::vector<std::string> exec{"exec", "-w", "{root}", "{container}", "sh", "-c", "{cmd}"};
  std::vector<std::string> remove{"rm", "-f", "{container}"};
};

struct SessionConfig {
  Backend backend = Backend::Scripted;
  std::string workdir_template = "/tmp/termgen-XXXXXX";
  std::optional<std::string> image_ref;  // overrides the task's image_ref
  std::size_t capture_window = 20'000;
  double command_timeout = 600;  // seconds, for exec()
  std::string root = "/app";     // working root inside a container
  std::string shell = "/bin/bash";
  // scripted: a JSONL transcript, or a directory holding <task_id>.jsonl
  std::optional<std::string> script_path;
  std::string scripted_prompt = "root@sandbox:/app# ";
  // container
  std::string runtime = "docker";
  ContainerTemplate runtime_args;
  bool keep_workdir = false;
};

// Throws InvalidArgument when an invariant does not hold.
inline void validate(const SessionConfig& config) {
  if (config.capture_window == 0) throw Error(Errc::InvalidArgument, "capture_window must be > 0");
  if (!(config.command_timeout > 0)) throw Error(Errc::InvalidArgument, "command_timeout must be > 0");
}

struct ExecResult {
  int exit_code = 0;
  std::string output;
  bool timed_out = false;
};

// Rolling tail of raw output bounded to `window` bytes. Cuts never split a
// UTF-8 sequence, so the kept text may be slightly shorter than the window.
class TailBuffer {
 public:
  explicit TailBuffer(std::size_t window) : window_(window) {}

  void append(std::string_view bytes) {
    text_.append(bytes);
    if (text_.size() > window_) {
      std::size_t cut = text_.size() - window_;
      while (cut < text_.size() && (static_cast<unsigned char>(text_[cut]) & 0xC0) == 0x80) ++cut;
      text_.erase(0, cut);
      truncated_ = true;
    }
  }

  void assign(std::string_view bytes) {
    text_.clear();
    truncated_ = false;
    append(bytes);
  }

  [[nodiscard]] const std::string& text() const noexcept { return text_; }
  [[nodiscard]] bool truncated() const noexcept { return truncated_; }

 private:
  std::size_t window_;
  std::string text_;
  bool truncated_ = false;
};

class Session {
 public:
  virtual ~Session() = default;
  Session() = default;
  Session(const Session&) = delete;
  Session& operator=(const Session&) = delete;

  void send(std::string_view bytes) {
    check_alive();
    do_send(bytes);
  }
  // Blocks for `seconds` of real time (virtual time on the scripted backend).
  void wait(double seconds) {
    check_alive();
    if (seconds > 0) do_wait(seconds);
  }
  [[nodiscard]] TerminalState snapshot() {
    check_alive();
    return do_snapshot();
  }
  // Non-interactive command in the session's environment, cwd = root().
  ExecResult exec(const std::string& command, double timeout_seconds) {
    check_alive();
    return do_exec(command, timeout_seconds);
  }
  // Writes a file relative to root().
  void put_file(const std::string& relative_path, std::string_view content, bool executable = false) {
    check_alive();
    if (!is_safe_relative_path(relative_path)) throw Error(Errc::PathEscape, relative_path);
    do_put_file(relative_path, content, executable);
  }
  // Idempotent; releases every resource.
  void stop() {
    if (stopped_.exchange(true)) return;
    do_stop();
  }

  [[nodiscard]] bool alive() const noexcept { return !stopped_; }
  [[nodiscard]] virtual std::string root() const = 0;
  // Seconds since the session started (virtual on the scripted backend).
  [[nodiscard]] virtual double now() const = 0;

 protected:
  virtual void do_send(std::string_view bytes) = 0;
  virtual void do_wait(double seconds) = 0;
  virtual TerminalState do_snapshot() = 0;
  virtual ExecResult do_exec(const std::string& command, double timeout_seconds) = 0;
  virtual void do_put_file(const std::string& path, std::string_view content, bool executable) = 0;
  virtual void do_stop() = 0;

 private:
  void check_alive() const {
    if (stopped_) throw Error(Errc::SessionDead, "session used after stop");
  }

  std::atomic<bool> stopped_{false};
};

// ---------------------------------------------------------------------------
// Scripted backend

struct ScriptFrame {
  std::size_t after_send_index = 0;
  std::string text;
};

struct Script {
  std::vector<ScriptFrame> frames;  // sorted by after_send_index
  std::vector<ExecResult> execs;    // consumed in order by exec()
};

// Transcript JSONL. Frame lines: {"after_send_index": N, "text": "..."}.
// Exec lines: {"exec": {"exit_code": 0, "output": "..."}}.
[[nodiscard]] inline Script parse_script(std::string_view jsonl) {
  Script script;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start < jsonl.size()) {
    auto end = jsonl.find('\n', start);
    if (end == std::string_view::npos) end = jsonl.size();
    auto line = trim(jsonl.substr(start, end - start));
    start = end + 1;
    ++line_no;
    if (line.empty()) continue;
    try {
      auto doc = nlohmann::json::parse(line);
      if (doc.contains("exec")) {
        const auto& e = doc.at("exec");
        script.execs.push_back({e.value("exit_code", 0), e.value("output", std::string()), e.value("timed_out", false)});
      } else {
        script.frames.push_back({doc.at("after_send_index").get<std::size_t>(), doc.at("text").get<std::string>()});
      }
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, "script line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  std::stable_sort(script.frames.begin(), script.frames.end(),
                   [](const ScriptFrame& a, const ScriptFrame& b) { return a.after_send_index < b.after_send_index; });
  return script;
}

// With frames, the snapshot after N sends is the last frame whose
// after_send_index <= N. Without frames the backend is a loopback terminal:
// a prompt followed by an echo of everything sent.
class ScriptedSession final : public Session {
 public:
  ScriptedSession(Script script, const SessionConfig& config)
      : script_(std::move(script)),
        prompt_(config.scripted_prompt),
        window_(config.capture_window),
        buffer_(config.capture_window) {
    if (script_.frames.empty()) buffer_.append(prompt_);
  }

  [[nodiscard]] std::string root() const override { return "/app"; }
  [[nodiscard]] double now() const override { return clock_; }
  [[nodiscard]] std::size_t sends() const noexcept { return sends_; }
  [[nodiscard]] const std::map<std::string, std::string>& files() const noexcept { return files_; }

 protected:
  void do_send(std::string_view bytes) override {
    ++sends_;
    if (!script_.frames.empty()) return;
    for (char c : bytes) {
      if (c == '\x03') {
        buffer_.append("^C\n");
        buffer_.append(prompt_);
      } else if (c == '\x04') {
        buffer_.append("^D\n");
      } else {
        buffer_.append(std::string_view(&c, 1));
        if (c == '\n') buffer_.append(prompt_);
      }
    }
  }

  void do_wait(double seconds) override { clock_ += seconds; }

  TerminalState do_snapshot() override {
    if (script_.frames.empty()) return {buffer_.text(), buffer_.truncated(), clock_};
    const ScriptFrame* current = nullptr;
    for (const auto& f : script_.frames) {
      if (f.after_send_index <= sends_) current = &f;
    }
    TailBuffer view(window_);
    if (current) view.append(current->text);
    return {view.text(), view.truncated(), clock_};
  }

  ExecResult do_exec(const std::string&, double) override {
    if (next_exec_ < script_.execs.size()) return script_.execs[next_exec_++];
    return {};
  }

  void do_put_file(const std::string& path, std::string_view content, bool) override {
    files_[path] = std::string(content);
  }

  void do_stop() override {}

 private:
  Script script_;
  std::string prompt_;
  std::size_t window_;
  TailBuffer buffer_;
  std::size_t sends_ = 0;
  std::size_t next_exec_ = 0;
  double clock_ = 0;
  std::map<std::string, std::string> files_;
};

// ---------------------------------------------------------------------------
// Live backends

namespace detail {

inline std::string make_workdir(const std::string& tmpl) {
  std::string buf = tmpl;
  if (!ends_with(buf, "XXXXXX")) buf += "XXXXXX";
  std::error_code ec;
  fs::path parent = fs::path(buf).parent_path();
  if (!parent.empty()) fs::create_directories(parent, ec);
  if (mkdtemp(buf.data()) == nullptr) {
    throw Error(Errc::MaterializationFailure, "mkdtemp(" + tmpl + ") failed: " + std::strerror(errno));
  }
  return buf;
}

// Environment files land at their declared paths under dir. The top-level
// Dockerfile describes the image and is not copied.
inline void materialize_environment(const TaskSpec& task, const fs::path& dir) {
  try {
    FileSet files;
    for (const auto& f : task.environment) {
      if (f.path != "Dockerfile") files.insert(f);
    }
    detail::write_file_tree(dir, files);
  } catch (const Error& e) {
    throw Error(Errc::MaterializationFailure, e.what());
  }
}

}  // namespace detail

// Shell (or any argv) attached to a pseudo-terminal; a reader thread drains
// output into the capture window.
class PtyTerminal {
 public:
  PtyTerminal(const std::vector<std::string>& argv, const std::string& cwd,
              const std::map<std::string, std::string>& env, std::size_t window)
      : buffer_(window) {
    child_ = process::spawn_pty(argv, cwd, env);
    reader_ = std::thread([this] { drain(); });
  }

  ~PtyTerminal() { close(); }

  void write(std::string_view bytes) {
    std::size_t done = 0;
    while (done < bytes.size()) {
      auto n = ::write(child_.master, bytes.data() + done, bytes.size() - done);
      if (n > 0) {
        done += static_cast<std::size_t>(n);
      } else if (n < 0 && (errno == EAGAIN || errno == EINTR)) {
        std::this_thread::sleep_for(std::chrono::milliseconds(1));
      } else {
        throw Error(Errc::SessionDead, "terminal write failed");
      }
    }
  }

  std::pair<std::string, bool> tail() const {
    std::lock_guard lock(mutex_);
    return {buffer_.text(), buffer_.truncated()};
  }

  void close() {
    if (child_.pid <= 0) return;
    done_ = true;
    kill(-child_.pid, SIGHUP);
    kill(-child_.pid, SIGKILL);
    if (reader_.joinable()) reader_.join();
    int status = 0;
    while (waitpid(child_.pid, &status, 0) < 0 && errno == EINTR) {
    }
    ::close(child_.master);
    child_.pid = -1;
  }

 private:
  void drain() {
    char buf[4096];
    while (!done_) {
      pollfd pfd{child_.master, POLLIN, 0};
      int rc = poll(&pfd, 1, 20);
      if (rc <= 0) continue;
      auto n = ::read(child_.master, buf, sizeof buf);
      if (n > 0) {
        std::lock_guard lock(mutex_);
        buffer_.append(std::string_view(buf, static_cast<std::size_t>(n)));
      } else if (n == 0 || (errno != EAGAIN && errno != EINTR)) {
        break;
      }
    }
  }

  process::PtyChild child_;
  mutable std::mutex mutex_;
  TailBuffer buffer_;
  std::atomic<bool> done_{false};
  std::thread reader_;
};

class LocalPtySession final : public Session {
 public:
  LocalPtySession(const TaskSpec& task, const SessionConfig& config)
      : keep_(config.keep_workdir), started_(std::chrono::steady_clock::now()) {
    workdir_ = detail::make_workdir(config.workdir_template);
    try {
      detail::materialize_environment(task, workdir_);
      std::map<std::string, std::string> env{
          {"PS1", "$ "}, {"TERM", "dumb"}, {"TERMGEN_ROOT", workdir_}, {"HISTFILE", "/dev/null"}};
      std::vector<std::string> argv{config.shell};
      if (ends_with(config.shell, "bash")) argv.insert(argv.end(), {"--noprofile", "--norc", "-i"});
      else argv.push_back("-i");
      terminal_ = std::make_unique<PtyTerminal>(argv, workdir_, env, config.capture_window);
    } catch (...) {
      cleanup();
      throw;
    }
  }

  ~LocalPtySession() override { stop(); }

  [[nodiscard]] std::string root() const override { return workdir_; }
  [[nodiscard]] double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  }

 protected:
  void do_send(std::string_view bytes) override { terminal_->write(bytes); }
  void do_wait(double seconds) override { std::this_thread::sleep_for(std::chrono::duration<double>(seconds)); }
  TerminalState do_snapshot() override {
    auto [text, truncated] = terminal_->tail();
    return {std::move(text), truncated, now()};
  }
  ExecResult do_exec(const std::string& command, double timeout) override {
    auto r = process::run({"/bin/sh", "-c", command}, workdir_, timeout, {{"TERMGEN_ROOT", workdir_}});
    return {r.exit_code, std::move(r.output), r.timed_out};
  }
  void do_put_file(const std::string& path, std::string_view content, bool executable) override {
    FileSet one;
    one.insert({path, std::string(content), executable});
    detail::write_file_tree(workdir_, one);
  }
  void do_stop() override {
    if (terminal_) terminal_->close();
    cleanup();
  }

 private:
  void cleanup() {
    if (!keep_ && !workdir_.empty()) {
      std::error_code ec;
      fs::remove_all(workdir_, ec);
    }
  }

  bool keep_;
  std::chrono::steady_clock::time_point started_;
  std::string workdir_;
  std::unique_ptr<PtyTerminal> terminal_;
};

class ContainerSession final : public Session {
 public:
  ContainerSession(const TaskSpec& task, const SessionConfig& config)
      : config_(config), started_(std::chrono::steady_clock::now()) {
    image_ = config.image_ref ? *config.image_ref : task.image_ref.value_or("");
    if (image_.empty()) throw Error(Errc::BackendUnavailable, "container backend needs an image_ref");
    auto inspect = runtime(config_.runtime_args.inspect, {}, 120);
    if (inspect.exit_code == 127) throw Error(Errc::BackendUnavailable, "runtime '" + config_.runtime + "' not found");
    if (inspect.exit_code != 0) throw Error(Errc::BackendUnavailable, "unknown image '" + image_ + "'");

    auto created = runtime(config_.runtime_args.create, {}, 300);
    if (created.exit_code != 0) throw Error(Errc::BackendUnavailable, "container create failed: " + created.output);
    container_ = std::string(trim(created.output));
    if (auto nl = container_.find_last_of('\n'); nl != std::string::npos) container_ = container_.substr(nl + 1);

    try {
      staging_ = detail::make_workdir(config.workdir_template);
      detail::materialize_environment(task, staging_);
      auto copied = runtime(config_.runtime_args.copy, {{"{src}", staging_ + "/."}, {"{dst}", config_.root}}, 300);
      if (copied.exit_code != 0) throw Error(Errc::MaterializationFailure, "copy into container failed: " + copied.output);
      terminal_ = std::make_unique<PtyTerminal>(expand(config_.runtime_args.shell, {}), "", std::map<std::string, std::string>{},
                                                config.capture_window);
    } catch (...) {
      release();
      throw;
    }
  }

  ~ContainerSession() override { stop(); }

  [[nodiscard]] std::string root() const override { return config_.root; }
  [[nodiscard]] double now() const override {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - started_).count();
  }
  [[nodiscard]] const std::string& container_id() const noexcept { return container_; }

 protected:
  void do_send(std::string_view bytes) override { terminal_->write(bytes); }
  void do_wait(double seconds) override { std::this_thread::sleep_for(std::chrono::duration<double>(seconds)); }
  TerminalState do_snapshot() override {
    auto [text, truncated] = terminal_->tail();
    return {std::move(text), truncated, now()};
  }
  ExecResult do_exec(const std::string& command, double timeout) override {
    auto r = runtime(config_.runtime_args.exec, {{"{cmd}", command}}, timeout);
    return {r.exit_code, std::move(r.output), r.timed_out};
  }
  void do_put_file(const std::string& path, std::string_view content, bool executable) override {
    fs::path local = fs::path(staging_) / "put" / path;
    FileSet one;
    one.insert({path, std::string(content), executable});
    detail::write_file_tree(fs::path(staging_) / "put", one);
    std::string dst = config_.root + "/" + path;
    auto parent = fs::path(dst).parent_path().string();
    runtime(config_.runtime_args.exec, {{"{cmd}", "mkdir -p '" + parent + "'"}}, 60);
    auto r = runtime(config_.runtime_args.copy, {{"{src}", local.string()}, {"{dst}", dst}}, 120);
    if (r.exit_code != 0) throw Error(Errc::IoFailure, "copy into container failed: " + r.output);
  }
  void do_stop() override { release(); }

 private:
  std::vector<std::string> expand(const std::vector<std::string>& args,
                                  const std::map<std::string, std::string>& extra) const {
    std::map<std::string, std::string> vars = extra;
    vars["{image}"] = image_;
    vars["{container}"] = container_;
    vars["{root}"] = config_.root;
    std::vector<std::string> out{config_.runtime};
    for (const auto& a : args) {
      std::string s = a;
      for (const auto& [key, value] : vars) {
        for (auto pos = s.find(key); pos != std::string::npos; pos = s.find(key, pos + value.size())) {
          s.replace(pos, key.size(), value);
        }
      }
      out.push_back(std::move(s));
    }
    return out;
  }

  process::Result runtime(const std::vector<std::string>& args, const std::map<std::string, std::string>& extra,
                          double timeout) const {
    return process::run(expand(args, extra), "", timeout);
  }

  void release() {
    if (terminal_) terminal_->close();
    if (!container_.empty()) {
      runtime(config_.runtime_args.remove, {}, 120);
      container_.clear();
    }
    if (!staging_.empty() && !config_.keep_workdir) {
      std::error_code ec;
      fs::remove_all(staging_, ec);
      staging_.clear();
    }
  }

  SessionConfig config_;
  std::chrono::steady_clock::time_point started_;
  std::string image_;
  std::string container_;
  std::string staging_;
  std::unique_ptr<PtyTerminal> terminal_;
};

// ---------------------------------------------------------------------------
// Factory

[[nodiscard]] inline Script load_script_for(const TaskSpec& task, const SessionConfig& config) {
  if (!config.script_path) return {};
  fs::path path = *config.script_path;
  if (fs::is_directory(path)) {
    path /= task.id + ".jsonl";
    if (!fs::exists(path)) return {};
  }
  return parse_script(read_file(path));
}

// Raises BackendUnavailable or MaterializationFailure.
[[nodiscard]] inline std::unique_ptr<Session> start_session(const TaskSpec& task, const SessionConfig& config) {
  validate(config);
  switch (config.backend) {
    case Backend::Scripted: return std::make_unique<ScriptedSession>(load_script_for(task, config), config);
    case Backend::LocalPty: return std::make_unique<LocalPtySession>(task, config);
    case Backend::Container: return std::make_unique<ContainerSession>(task, config);
  }
  throw Error(Errc::BackendUnavailable, "unknown backend");
}

using SessionFactory = std::function<std::unique_ptr<Session>(const TaskSpec&, const SessionConfig&)>;

}  // namespace termgen
