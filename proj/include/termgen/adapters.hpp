#pragma once

// Wraps existing math / code / SWE prompts into terminal tasks by appending a
// fixed instruction suffix. No model is involved.

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "termgen/error.hpp"
#include "termgen/task_model.hpp"
#include "termgen/util.hpp"

namespace termgen {

enum class PromptKind { Math, Code, Swe };

[[nodiscard]] constexpr std::string_view to_string(PromptKind k) noexcept {
  switch (k) {
    case PromptKind::Math: return "math";
    case PromptKind::Code: return "code";
    case PromptKind::Swe: return "swe";
  }
  return "unknown";
}

[[nodiscard]] inline PromptKind prompt_kind_from_string(std::string_view s) {
  if (s == "math") return PromptKind::Math;
  if (s == "code") return PromptKind::Code;
  if (s == "swe") return PromptKind::Swe;
  throw Error(Errc::InvalidArgument, "unknown prompt kind '" + std::string(s) + "'");
}

inline constexpr std::string_view kMathSuffix = "Please place your final answer in a file named `/app/solution.txt`.";
inline constexpr std::string_view kCodeSuffix =
    "Write Python code to solve the problem. Please place the solution code in a file named `/app/solution.py`.";
inline constexpr std::string_view kSweSuffix =
    "Please first localize the bug based on the issue statement, generate *SEARCH/REPLACE* edits to fix the issue, "
    "and save the diff to a file named `/app/solution.patch`.";

[[nodiscard]] constexpr std::string_view adapter_suffix(PromptKind kind) noexcept {
  switch (kind) {
    case PromptKind::Math: return kMathSuffix;
    case PromptKind::Code: return kCodeSuffix;
    case PromptKind::Swe: return kSweSuffix;
  }
  return {};
}

struct PromptRecord {
  std::string id;
  PromptKind kind = PromptKind::Math;
  std::string prompt;
  std::optional<std::map<std::string, std::string>> files;  // SWE only

  friend bool operator==(const PromptRecord&, const PromptRecord&) = default;
};

// JSONL record: {"id": ..., "kind": "math|code|swe", "prompt": ..., "files": {path: content}}
[[nodiscard]] inline PromptRecord prompt_record_from_json(const nlohmann::json& j) {
  try {
    PromptRecord r;
    r.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    r.kind = prompt_kind_from_string(j.at("kind").get<std::string>());
    r.prompt = j.at("prompt").get<std::string>();
    if (j.contains("files") && !j.at("files").is_null()) r.files = j.at("files").get<std::map<std::string, std::string>>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed prompt record: ") + e.what());
  }
}

// Lowercases and replaces anything outside [a-z0-9_-] with '-'.
[[nodiscard]] inline std::string sanitize_task_id(std::string_view raw) {
  std::string out;
  for (char c : raw) {
    char l = (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
    bool ok = (l >= 'a' && l <= 'z') || (l >= '0' && l <= '9') || l == '_' || l == '-';
    out += ok ? l : '-';
  }
  return out.empty() ? std::string("task") : out;
}

struct AdapterOptions {
  std::string dockerfile = "FROM python:3.11-slim\nWORKDIR /app\n";
};

// Raises FilesOnNonSwe, PathEscape, or InvalidArgument (empty prompt).
[[nodiscard]] inline TaskSpec adapt_record(const PromptRecord& record, const AdapterOptions& options = {}) {
  if (record.prompt.empty()) throw Error(Errc::InvalidArgument, "record '" + record.id + "' has an empty prompt");
  if (record.files && record.kind != PromptKind::Swe) {
    throw Error(Errc::FilesOnNonSwe, "record '" + record.id + "' carries files but is " + std::string(to_string(record.kind)));
  }
  TaskSpec task;
  task.id = sanitize_task_id(record.id);
  task.instruction = record.prompt + "\n\n" + std::string(adapter_suffix(record.kind));
  task.metadata["origin"] = MetaValue::string("adapter/" + std::string(to_string(record.kind)));
  if (task.id != record.id) task.metadata["source_id"] = MetaValue::string(record.id);
  task.environment.insert({"Dockerfile", options.dockerfile, false});
  if (record.files) {
    for (const auto& [path, content] : *record.files) {
      if (path == "Dockerfile") throw Error(Errc::PathEscape, "SWE file would shadow the Dockerfile");
      task.environment.insert({path, content, false});
    }
  }
  return task;
}

struct AdaptSummary {
  std::map<std::string, std::size_t> per_kind;  // newly written
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, std::string>> failures;  // (record id, reason)

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["written"] = written;
    j["skipped"] = skipped;
    j["per_kind"] = nlohmann::ordered_json::object();
    for (const auto& [k, n] : per_kind) j["per_kind"][k] = n;
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& [id, why] : failures) j["failures"].push_back({{"id", id}, {"reason", why}});
    return j;
  }
};

// One task directory per record under out_dir. Existing task directories are
// skipped, so re-runs are idempotent. Each task is written to a temp sibling
// and renamed into place.
inline AdaptSummary adapt_corpus(const std::vector<PromptRecord>& records, const fs::path& out_dir,
                                 const AdapterOptions& options = {}) {
  AdaptSummary summary;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  for (const auto& record : records) {
    try {
      TaskSpec task = adapt_record(record, options);
      fs::path final_dir = out_dir / task.id;
      if (fs::exists(final_dir)) {
        ++summary.skipped;
        continue;
      }
      fs::path tmp = out_dir / ("." + task.id + ".tmp");
      fs::remove_all(tmp, ec);
      write_task_dir(task, tmp);
      fs::rename(tmp, final_dir, ec);
      if (ec) throw Error(Errc::IoFailure, "rename " + tmp.string() + ": " + ec.message());
      ++summary.written;
      ++summary.per_kind[std::string(to_string(record.kind))];
    } catch (const Error& e) {
      summary.failures.emplace_back(record.id, e.what());
    }
  }
  return summary;
}

// Reads prompt records from JSONL; malformed lines are reported as failures
// keyed by "line N".
inline std::vector<PromptRecord> read_prompt_records(const fs::path& path,
                                                     std::vector<std::pair<std::string, std::string>>* failures = nullptr) {
  std::vector<PromptRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(prompt_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      if (!failures) throw Error(Errc::InvalidArgument, "line " + std::to_string(line_no) + ": " + e.what());
      failures->emplace_back("line " + std::to_string(line_no), e.what());
    }
  }
  return out;
}

}  // namespace termgen
