#pragma once

// Session factory wrapper that counts sessions alive at once.

#include <algorithm>
#include <memory>
#include <mutex>

#include "termgen/session.hpp"

namespace termgen::testing {

class LiveTracker {
 public:
  void enter() {
    std::lock_guard lock(m_);
    peak_ = std::max(peak_, ++live_);
  }
  void leave() {
    std::lock_guard lock(m_);
    --live_;
  }
  [[nodiscard]] std::size_t peak() const {
    std::lock_guard lock(m_);
    return peak_;
  }
  [[nodiscard]] std::size_t live() const {
    std::lock_guard lock(m_);
    return live_;
  }

 private:
  mutable std::mutex m_;
  std::size_t live_ = 0;
  std::size_t peak_ = 0;
};

class TrackedSession final : public Session {
 public:
  TrackedSession(std::unique_ptr<Session> inner, LiveTracker& tracker) : inner_(std::move(inner)), tracker_(tracker) {
    tracker_.enter();
  }
  ~TrackedSession() override { stop(); }

  [[nodiscard]] std::string root() const override { return inner_->root(); }
  [[nodiscard]] double now() const override { return inner_->now(); }

 protected:
  void do_send(std::string_view bytes) override { inner_->send(bytes); }
  void do_wait(double seconds) override { inner_->wait(seconds); }
  TerminalState do_snapshot() override { return inner_->snapshot(); }
  ExecResult do_exec(const std::string& command, double timeout) override { return inner_->exec(command, timeout); }
  void do_put_file(const std::string& path, std::string_view content, bool executable) override {
    inner_->put_file(path, content, executable);
  }
  void do_stop() override {
    inner_->stop();
    tracker_.leave();
  }

 private:
  std::unique_ptr<Session> inner_;
  LiveTracker& tracker_;
};

inline SessionFactory tracked_factory(LiveTracker& tracker, SessionFactory inner = &start_session) {
  return [&tracker, inner](const TaskSpec& task, const SessionConfig& config) -> std::unique_ptr<Session> {
    return std::make_unique<TrackedSession>(inner(task, config), tracker);
  };
}

}  // namespace termgen::testing
