#pragma once

// Hand-labeled agent-response cases shared by the unit tests and the
// acceptance runner.

#include <optional>
#include <string>
#include <vector>

#include "termgen/agent_protocol.hpp"

namespace termgen::testing {

inline constexpr const char* kReferencePayload = R"({
  "analysis": "...",
  "plan": "...",
  "commands": [
    {
      "keystrokes": "ls -la\n",
      "duration": 0.1
    },
    {
      "keystrokes": "cd project\n",
      "duration": 0.1
    }
  ],
  "task_complete": true
})";

struct ProtocolCase {
  std::string name;
  std::string raw;
  std::optional<AgentResponse> expected;  // nullopt when an error is expected
  std::optional<Errc> error;
  std::vector<Warning> warnings;
};

inline std::vector<ProtocolCase> protocol_cases() {
  using W = Warning;
  const AgentResponse reference{"...", "...", {{"ls -la\n", 0.1}, {"cd project\n", 0.1}}, true};
  const AgentResponse one{"a", "p", {{"pwd\n", 1.0}}, false};
  return {
      {"reference_payload", kReferencePayload, reference, {}, {}},
      {"duration_default", R"({"analysis":"a","plan":"p","commands":[{"keystrokes":"pwd\n"}]})", one, {}, {}},
      {"task_complete_default", R"({"analysis":"a","plan":"p","commands":[{"keystrokes":"pwd\n","duration":1.0}]})",
       one, {}, {}},
      {"both_defaults_integer_duration",
       R"({"analysis":"a","plan":"p","commands":[{"keystrokes":"sleep 5\n","duration":5}]})",
       AgentResponse{"a", "p", {{"sleep 5\n", 5.0}}, false}, {}, {}},
      {"empty_commands", R"({"analysis":"done","plan":"","commands":[],"task_complete":true})",
       AgentResponse{"done", "", {}, true}, {}, {}},
      {"leading_prose", "Here is my answer:\n" + std::string(kReferencePayload), reference, {}, {W::SurroundingText}},
      {"markdown_fence", "```json\n" + std::string(kReferencePayload) + "\n```", reference, {}, {W::SurroundingText}},
      {"trailing_prose", std::string(kReferencePayload) + "\nLet me know.", reference, {}, {W::SurroundingText}},
      {"braces_in_strings",
       R"({"analysis":"a { b } c","plan":"}{","commands":[{"keystrokes":"echo '{}'\n","duration":0.5}]})",
       AgentResponse{"a { b } c", "}{", {{"echo '{}'\n", 0.5}}, false}, {}, {}},
      {"unknown_top_field", R"({"analysis":"a","plan":"p","commands":[],"confidence":0.9})",
       AgentResponse{"a", "p", {}, false}, {}, {W::UnknownField}},
      {"unknown_command_field", R"({"analysis":"a","plan":"p","commands":[{"keystrokes":"x","wait":true}]})",
       AgentResponse{"a", "p", {{"x", 1.0}}, false}, {}, {W::UnknownField}},
      {"negative_duration", R"({"analysis":"a","plan":"p","commands":[{"keystrokes":"x","duration":-2}]})",
       AgentResponse{"a", "p", {{"x", 0.0}}, false}, {}, {W::NegativeDuration}},
      {"control_token", R"({"analysis":"a","plan":"p","commands":[{"keystrokes":"C-c","duration":0.1}]})",
       AgentResponse{"a", "p", {{"C-c", 0.1}}, false}, {}, {}},
      {"no_object", "I will run ls now.", std::nullopt, Errc::NoJsonObject, {}},
      {"unterminated_object", R"({"analysis":"a","plan":"p")", std::nullopt, Errc::NoJsonObject, {}},
      {"invalid_json", R"({"analysis":"a",,"plan":"p","commands":[]})", std::nullopt, Errc::InvalidJson, {}},
      {"missing_analysis", R"({"plan":"p","commands":[]})", std::nullopt, Errc::SchemaViolation, {}},
      {"missing_commands", R"({"analysis":"a","plan":"p"})", std::nullopt, Errc::SchemaViolation, {}},
      {"commands_not_array", R"({"analysis":"a","plan":"p","commands":"ls"})", std::nullopt, Errc::SchemaViolation,
       {}},
      {"task_complete_string", R"({"analysis":"a","plan":"p","commands":[],"task_complete":"yes"})", std::nullopt,
       Errc::SchemaViolation, {}},
  };
}

struct ProtocolCheck {
  bool ok = false;
  std::string detail;
};

inline ProtocolCheck check_protocol_case(const ProtocolCase& c) {
  try {
    ParseOutcome got = parse_agent_response(c.raw);
    if (!c.expected) return {false, "expected " + std::string(to_string(*c.error)) + ", parsed successfully"};
    if (!(got.response == *c.expected)) return {false, "response mismatch: " + to_json(got.response).dump()};
    if (got.warnings != c.warnings) return {false, "warning mismatch"};
    return {true, {}};
  } catch (const Error& e) {
    if (c.error && e.code() == *c.error) return {true, {}};
    return {false, std::string("unexpected error ") + e.what()};
  }
}

}  // namespace termgen::testing
