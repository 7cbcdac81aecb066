#pragma once

// Agent wire protocol: system-prompt rendering, tolerant extraction of the
// JSON reply, and keystroke encoding.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "termgen/error.hpp"
#include "termgen/prompt_assets.hpp"

namespace termgen {

inline constexpr std::string_view kInstructionPlaceholder = "{instruction}";
inline constexpr std::string_view kTerminalStatePlaceholder = "{terminal_state}";

namespace detail {

inline std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos; pos = haystack.find(needle, pos + 1)) ++n;
  return n;
}

}  // namespace detail

class PromptTemplate {
 public:
  // Throws PlaceholderMissing unless both placeholders occur exactly once.
  explicit PromptTemplate(std::string body) : body_(std::move(body)) {
    for (auto placeholder : {kInstructionPlaceholder, kTerminalStatePlaceholder}) {
      auto n = detail::count_occurrences(body_, placeholder);
      if (n != 1) {
        throw Error(Errc::PlaceholderMissing, std::string(placeholder) + " occurs " + std::to_string(n) +
                                                  " times (expected exactly once)");
      }
    }
  }

  static PromptTemplate terminus() { return PromptTemplate(std::string(assets::kTerminusSystemPrompt)); }

  [[nodiscard]] const std::string& body() const noexcept { return body_; }

  friend bool operator==(const PromptTemplate&, const PromptTemplate&) = default;

 private:
  std::string body_;
};

// Single-pass substitution: placeholder positions are located in the template
// body only, so placeholder-like text inside the arguments is left untouched.
[[nodiscard]] inline std::string render_prompt(const PromptTemplate& tmpl, std::string_view instruction,
                                               std::string_view terminal_state) {
  const std::string& body = tmpl.body();
  std::pair<std::size_t, std::string_view> slots[] = {
      {body.find(kInstructionPlaceholder), kInstructionPlaceholder},
      {body.find(kTerminalStatePlaceholder), kTerminalStatePlaceholder},
  };
  std::sort(std::begin(slots), std::end(slots));
  std::string out;
  out.reserve(body.size() + instruction.size() + terminal_state.size());
  std::size_t cursor = 0;
  for (const auto& [pos, placeholder] : slots) {
    out.append(body, cursor, pos - cursor);
    out += placeholder == kInstructionPlaceholder ? instruction : terminal_state;
    cursor = pos + placeholder.size();
  }
  out.append(body, cursor, std::string::npos);
  return out;
}

// ---------------------------------------------------------------------------
// Response

inline constexpr double kDefaultDuration = 1.0;

struct Command {
  std::string keystrokes;
  double duration = kDefaultDuration;  // seconds

  friend bool operator==(const Command&, const Command&) = default;
};

struct AgentResponse {
  std::string analysis;
  std::string plan;
  std::vector<Command> commands;
  bool task_complete = false;

  friend bool operator==(const AgentResponse&, const AgentResponse&) = default;
};

enum class Warning { SurroundingText, UnknownField, NegativeDuration };

[[nodiscard]] constexpr std::string_view to_string(Warning w) noexcept {
  switch (w) {
    case Warning::SurroundingText: return "SurroundingText";
    case Warning::UnknownField: return "UnknownField";
    case Warning::NegativeDuration: return "NegativeDuration";
  }
  return "Unknown";
}

[[nodiscard]] inline std::optional<Warning> warning_from_string(std::string_view s) {
  for (auto w : {Warning::SurroundingText, Warning::UnknownField, Warning::NegativeDuration}) {
    if (to_string(w) == s) return w;
  }
  return std::nullopt;
}

struct ParseOutcome {
  AgentResponse response;
  std::vector<Warning> warnings;  // deduplicated, first-occurrence order

  friend bool operator==(const ParseOutcome&, const ParseOutcome&) = default;
};

namespace detail {

// Returns [begin, end) of the first balanced top-level object. Candidates
// start at each '{'; string literals and escapes inside the candidate are
// respected. A candidate that never closes is skipped.
inline std::optional<std::pair<std::size_t, std::size_t>> find_json_object(std::string_view raw) {
  for (std::size_t start = raw.find('{'); start != std::string_view::npos; start = raw.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    bool escaped = false;
    for (std::size_t i = start; i < raw.size(); ++i) {
      char c = raw[i];
      if (in_string) {
        if (escaped) escaped = false;
        else if (c == '\\') escaped = true;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        if (--depth == 0) return std::make_pair(start, i + 1);
      }
    }
  }
  return std::nullopt;
}

inline void add_warning(std::vector<Warning>& warnings, Warning w) {
  if (std::find(warnings.begin(), warnings.end(), w) == warnings.end()) warnings.push_back(w);
}

inline bool only_whitespace(std::string_view s) {
  return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

}  // namespace detail

// Raises NoJsonObject, InvalidJson or SchemaViolation.
[[nodiscard]] inline ParseOutcome parse_agent_response(std::string_view raw) {
  auto span = detail::find_json_object(raw);
  if (!span) throw Error(Errc::NoJsonObject, "no balanced JSON object in response");

  ParseOutcome outcome;
  if (!detail::only_whitespace(raw.substr(0, span->first)) || !detail::only_whitespace(raw.substr(span->second))) {
    detail::add_warning(outcome.warnings, Warning::SurroundingText);
  }

  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(raw.substr(span->first, span->second - span->first));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidJson, e.what());
  }

  auto require_string = [&](const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) throw Error(Errc::SchemaViolation, std::string("missing required field '") + key + "'");
    if (!it->is_string()) throw Error(Errc::SchemaViolation, std::string("field '") + key + "' must be a string");
    return it->get<std::string>();
  };

  AgentResponse& response = outcome.response;
  response.analysis = require_string("analysis");
  response.plan = require_string("plan");

  auto commands = doc.find("commands");
  if (commands == doc.end()) throw Error(Errc::SchemaViolation, "missing required field 'commands'");
  if (!commands->is_array()) throw Error(Errc::SchemaViolation, "field 'commands' must be an array");
  for (std::size_t i = 0; i < commands->size(); ++i) {
    const auto& item = (*commands)[i];
    const std::string where = "commands[" + std::to_string(i) + "]";
    if (!item.is_object()) throw Error(Errc::SchemaViolation, where + " must be an object");
    Command cmd;
    auto keys = item.find("keystrokes");
    if (keys == item.end()) throw Error(Errc::SchemaViolation, where + " missing 'keystrokes'");
    if (!keys->is_string()) throw Error(Errc::SchemaViolation, where + ".keystrokes must be a string");
    cmd.keystrokes = keys->get<std::string>();
    if (auto d = item.find("duration"); d != item.end()) {
      if (!d->is_number()) throw Error(Errc::SchemaViolation, where + ".duration must be a number");
      cmd.duration = d->get<double>();
      if (!std::isfinite(cmd.duration)) throw Error(Errc::SchemaViolation, where + ".duration must be finite");
      if (cmd.duration < 0) {
        cmd.duration = 0;
        detail::add_warning(outcome.warnings, Warning::NegativeDuration);
      }
    }
    for (const auto& [key, _] : item.items()) {
      if (key != "keystrokes" && key != "duration") detail::add_warning(outcome.warnings, Warning::UnknownField);
    }
    response.commands.push_back(std::move(cmd));
  }

  if (auto done = doc.find("task_complete"); done != doc.end()) {
    if (!done->is_boolean()) throw Error(Errc::SchemaViolation, "field 'task_complete' must be a boolean");
    response.task_complete = done->get<bool>();
  }

  for (const auto& [key, _] : doc.items()) {
    if (key != "analysis" && key != "plan" && key != "commands" && key != "task_complete") {
      detail::add_warning(outcome.warnings, Warning::UnknownField);
    }
  }
  return outcome;
}

// Canonical serialization in the field order the prompt documents.
[[nodiscard]] inline nlohmann::ordered_json to_json(const AgentResponse& response) {
  nlohmann::ordered_json doc;
  doc["analysis"] = response.analysis;
  doc["plan"] = response.plan;
  doc["commands"] = nlohmann::ordered_json::array();
  for (const auto& c : response.commands) {
    nlohmann::ordered_json cmd;
    cmd["keystrokes"] = c.keystrokes;
    cmd["duration"] = c.duration;
    doc["commands"].push_back(std::move(cmd));
  }
  doc["task_complete"] = response.task_complete;
  return doc;
}

// ---------------------------------------------------------------------------
// Keystrokes

// Maps whole-string tmux-style tokens to control bytes. A token is only
// recognized when it is the entire keystrokes string.
class KeystrokeEncoder {
 public:
  KeystrokeEncoder() : tokens_{{"C-c", std::string(1, '\x03')}, {"C-d", std::string(1, '\x04')}} {}

  void add_token(std::string token, std::string bytes) { tokens_[std::move(token)] = std::move(bytes); }

  [[nodiscard]] bool is_token(std::string_view keystrokes) const {
    return tokens_.find(std::string(keystrokes)) != tokens_.end();
  }

  [[nodiscard]] std::string encode(std::string_view keystrokes) const {
    if (auto it = tokens_.find(std::string(keystrokes)); it != tokens_.end()) return it->second;
    return std::string(keystrokes);
  }

 private:
  std::map<std::string, std::string> tokens_;
};

[[nodiscard]] inline std::string encode_keystrokes(std::string_view keystrokes) {
  static const KeystrokeEncoder encoder;
  return encoder.encode(keystrokes);
}

}  // namespace termgen
