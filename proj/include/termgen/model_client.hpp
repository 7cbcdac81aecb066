#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "termgen/error.hpp"
#include "termgen/util.hpp"

#ifdef TERMGEN_WITH_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif
#include "httplib.h"

namespace termgen {

struct ChatMessage {
  std::string role;  // system | user | assistant
  std::string content;

  friend bool operator==(const ChatMessage&, const ChatMessage&) = default;
};

struct CompletionRequest {
  std::vector<ChatMessage> messages;
  std::string task_id;
  std::size_t turn = 0;
};

// Implementations must be safe for concurrent calls. Failures raise
// Error(ModelFailure).
class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual std::string complete(const CompletionRequest& request) = 0;
};

// Replays canned responses from a JSONL script. Lines look like
//   {"turn": 0, "text": "..."}
//   {"task_id": "t1", "turn": 2, "error": "simulated outage"}
//   {"turn": "*", "text": "..."}            (any turn)
// Lookup order: (task, turn), (any, turn), (task, any), (any, any).
class MockModelClient final : public ModelClient {
 public:
  struct Entry {
    std::optional<std::string> text;
    std::optional<std::string> error;
  };

  MockModelClient() = default;

  static MockModelClient from_jsonl(std::string_view jsonl) {
    MockModelClient client;
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
        std::string task = doc.value("task_id", std::string(kAny));
        std::string turn = doc.at("turn").is_string() ? doc.at("turn").get<std::string>()
                                                      : std::to_string(doc.at("turn").get<std::size_t>());
        Entry entry;
        if (doc.contains("text")) entry.text = doc.at("text").get<std::string>();
        if (doc.contains("error")) entry.error = doc.at("error").get<std::string>();
        if (!entry.text && !entry.error) throw Error(Errc::InvalidArgument, "entry needs 'text' or 'error'");
        client.entries_[{task, turn}] = std::move(entry);
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, "mock script line " + std::to_string(line_no) + ": " + e.what());
      }
    }
    return client;
  }

  static MockModelClient from_file(const fs::path& path) { return from_jsonl(read_file(path)); }

  void set(const std::string& task_id, std::optional<std::size_t> turn, Entry entry) {
    entries_[{task_id.empty() ? std::string(kAny) : task_id, turn ? std::to_string(*turn) : std::string(kAny)}] =
        std::move(entry);
  }

  std::string complete(const CompletionRequest& request) override {
    const std::string turn = std::to_string(request.turn);
    for (const auto& key : {std::pair{request.task_id, turn}, std::pair{std::string(kAny), turn},
                            std::pair{request.task_id, std::string(kAny)},
                            std::pair{std::string(kAny), std::string(kAny)}}) {
      auto it = entries_.find(key);
      if (it == entries_.end()) continue;
      if (it->second.error) throw Error(Errc::ModelFailure, *it->second.error);
      return *it->second.text;
    }
    throw Error(Errc::ModelFailure, "mock script has no response for task '" + request.task_id + "' turn " + turn);
  }

 private:
  static constexpr std::string_view kAny = "*";
  std::map<std::pair<std::string, std::string>, Entry> entries_;
};

struct RetryPolicy {
  int attempts = 3;
  double initial_backoff_seconds = 1.0;
  double multiplier = 2.0;
};

[[nodiscard]] inline bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

struct HttpModelConfig {
  std::string endpoint = "http://localhost:8000/v1/chat/completions";
  std::string model;
  std::optional<std::string> api_key;  // sent as "Authorization: Bearer <key>"
  std::string auth_header = "Authorization";
  double timeout_seconds = 600;
  RetryPolicy retry;
  nlohmann::json extra_body = nlohmann::json::object();  // merged into the request (temperature, ...)
};

// OpenAI-style chat completion over HTTP:
//   POST {model, messages:[{role, content}], ...extra} -> choices[0].message.content
// Transport errors and 429/5xx are retried with exponential backoff; other
// statuses fail at once.
class HttpModelClient final : public ModelClient {
 public:
  explicit HttpModelClient(HttpModelConfig config) : config_(std::move(config)) {
    auto scheme = config_.endpoint.find("://");
    if (scheme == std::string::npos) throw Error(Errc::InvalidArgument, "endpoint needs a scheme: " + config_.endpoint);
    auto slash = config_.endpoint.find('/', scheme + 3);
    origin_ = config_.endpoint.substr(0, slash);
    path_ = slash == std::string::npos ? "/" : config_.endpoint.substr(slash);
  }

  [[nodiscard]] nlohmann::json request_body(const CompletionRequest& request) const {
    nlohmann::json body = config_.extra_body.is_object() ? config_.extra_body : nlohmann::json::object();
    body["model"] = config_.model;
    body["messages"] = nlohmann::json::array();
    for (const auto& m : request.messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});
    return body;
  }

  std::string complete(const CompletionRequest& request) override {
    const std::string payload = request_body(request).dump();
    httplib::Headers headers;
    if (config_.api_key) {
      headers.emplace(config_.auth_header,
                      config_.auth_header == "Authorization" ? "Bearer " + *config_.api_key : *config_.api_key);
    }
    double backoff = config_.retry.initial_backoff_seconds;
    std::string last_error;
    for (int attempt = 1; attempt <= std::max(1, config_.retry.attempts); ++attempt) {
      httplib::Client client(origin_);
      auto secs = static_cast<time_t>(config_.timeout_seconds);
      client.set_connection_timeout(std::min<time_t>(secs, 30), 0);
      client.set_read_timeout(secs, 0);
      client.set_write_timeout(secs, 0);
      auto res = client.Post(path_, headers, payload, "application/json");
      bool retry = false;
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        retry = true;
      } else if (res->status == 200) {
        return extract_content(res->body);
      } else {
        last_error = "HTTP " + std::to_string(res->status) + ": " + res->body.substr(0, 500);
        retry = is_retryable_status(res->status);
      }
      if (!retry) break;
      ++attempts_made_;
      if (attempt < config_.retry.attempts) {
        std::this_thread::sleep_for(std::chrono::duration<double>(backoff));
        backoff *= config_.retry.multiplier;
      }
    }
    throw Error(Errc::ModelFailure, last_error);
  }

  [[nodiscard]] int retries_observed() const noexcept { return attempts_made_; }

 private:
  static std::string extract_content(const std::string& body) {
    try {
      auto doc = nlohmann::json::parse(body);
      return doc.at("choices").at(0).at("message").at("content").get<std::string>();
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::ModelFailure, std::string("malformed completion response: ") + e.what());
    }
  }

  HttpModelConfig config_;
  std::string origin_;
  std::string path_;
  std::atomic<int> attempts_made_{0};
};

}  // namespace termgen
