#pragma once

// One agent episode: snapshot -> render prompt -> model -> parse -> execute,
// until task_complete or a limit; plus verification and weighted scoring.

#include <algorithm>
#include <map>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "termgen/agent_protocol.hpp"
#include "termgen/error.hpp"
#include "termgen/model_client.hpp"
#include "termgen/rational.hpp"
#include "termgen/session.hpp"
#include "termgen/task_model.hpp"

namespace termgen {

struct EpisodeLimits {
  int max_turns = 50;
  double max_wall_seconds = 1800;
  double per_wait_cap_seconds = 60;
};

inline void validate(const EpisodeLimits& limits) {
  if (limits.max_turns <= 0) throw Error(Errc::InvalidArgument, "max_turns must be positive");
  if (!(limits.max_wall_seconds > 0)) throw Error(Errc::InvalidArgument, "max_wall_seconds must be positive");
  if (!(limits.per_wait_cap_seconds > 0)) throw Error(Errc::InvalidArgument, "per_wait_cap_seconds must be positive");
  if (limits.per_wait_cap_seconds > limits.max_wall_seconds) {
    throw Error(Errc::InvalidArgument, "per_wait_cap_seconds exceeds max_wall_seconds");
  }
}

// fresh: every turn is a single user message holding the full rendered prompt.
// chat: the rendered prompt opens the conversation, later turns append the
// assistant reply and a user message with the new terminal state.
enum class HistoryMode { Fresh, Chat };

[[nodiscard]] inline std::string_view to_string(HistoryMode m) noexcept {
  return m == HistoryMode::Fresh ? "fresh" : "chat";
}

[[nodiscard]] inline HistoryMode history_mode_from_string(std::string_view s) {
  if (s == "fresh") return HistoryMode::Fresh;
  if (s == "chat") return HistoryMode::Chat;
  throw Error(Errc::InvalidArgument, "unknown history_mode '" + std::string(s) + "'");
}

struct TurnError {
  Errc code;
  std::string message;

  friend bool operator==(const TurnError&, const TurnError&) = default;
};

struct ExecutedCommand {
  Command command;
  double actual_wait = 0;

  friend bool operator==(const ExecutedCommand&, const ExecutedCommand&) = default;
};

struct Turn {
  std::size_t index = 0;
  TerminalState terminal_state_before;
  std::string prompt_state;  // {terminal_state} as presented, including notices
  std::string raw_model_text;
  std::variant<ParseOutcome, TurnError> parse;
  std::vector<ExecutedCommand> executed;

  [[nodiscard]] const ParseOutcome* outcome() const { return std::get_if<ParseOutcome>(&parse); }

  friend bool operator==(const Turn&, const Turn&) = default;
};

enum class Status { Completed, Incomplete, Error };

[[nodiscard]] inline std::string_view to_string(Status s) noexcept {
  switch (s) {
    case Status::Completed: return "completed";
    case Status::Incomplete: return "incomplete";
    case Status::Error: return "error";
  }
  return "unknown";
}

[[nodiscard]] inline Status status_from_string(std::string_view s) {
  if (s == "completed") return Status::Completed;
  if (s == "incomplete") return Status::Incomplete;
  if (s == "error") return Status::Error;
  throw Error(Errc::InvalidArgument, "unknown status '" + std::string(s) + "'");
}

struct Origin {
  std::string kind;  // adapter | seed | skill (empty when unknown)
  std::optional<std::string> domain;

  friend bool operator==(const Origin&, const Origin&) = default;
};

struct Trajectory {
  std::string task_id;
  int trial = 0;
  std::string instruction;
  HistoryMode history_mode = HistoryMode::Fresh;
  std::vector<Turn> turns;
  Status status = Status::Incomplete;
  std::size_t total_model_chars = 0;
  double started_at = 0;
  double ended_at = 0;
  Origin origin;
  std::string note;  // why the episode ended

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

[[nodiscard]] inline Origin origin_of(const TaskSpec& task) {
  Origin origin;
  if (auto it = task.metadata.find("origin"); it != task.metadata.end()) {
    origin.kind = it->second.text;
    if (auto slash = origin.kind.find('/'); slash != std::string::npos) {
      origin.domain = origin.kind.substr(slash + 1);
      origin.kind.resize(slash);
    }
  }
  if (task.domain) origin.domain = task.domain;
  return origin;
}

// ---------------------------------------------------------------------------
// Episode

struct EpisodeOptions {
  HistoryMode history_mode = HistoryMode::Fresh;
  int error_budget = 3;  // consecutive model/parse failures before status=error
  int trial = 0;
  KeystrokeEncoder encoder;
};

namespace detail {

inline std::string error_notice(const TurnError& e) {
  return "Previous response had parsing errors:\nERROR: " + std::string(to_string(e.code)) + ": " + e.message +
         "\n\nPlease fix these issues and provide a proper JSON response.";
}

inline std::string warning_notice(const std::vector<Warning>& warnings) {
  std::string out = "Previous response had warnings:\nWARNINGS:";
  for (auto w : warnings) {
    switch (w) {
      case Warning::SurroundingText: out += "\n- Extra text detected before or after the JSON object"; break;
      case Warning::UnknownField: out += "\n- Unknown fields were ignored"; break;
      case Warning::NegativeDuration: out += "\n- Negative duration clamped to 0"; break;
    }
  }
  return out;
}

}  // namespace detail

// Runs an episode against an already started session. Never throws for
// model or parse failures; those are recorded in the turns and the status.
[[nodiscard]] inline Trajectory run_episode_in(Session& session, const TaskSpec& task, ModelClient& model,
                                               const EpisodeLimits& limits, const PromptTemplate& tmpl,
                                               const EpisodeOptions& options = {}) {
  validate(limits);
  Trajectory traj;
  traj.task_id = task.id;
  traj.trial = options.trial;
  traj.instruction = task.instruction;
  traj.history_mode = options.history_mode;
  traj.origin = origin_of(task);
  traj.started_at = session.now();
  traj.status = Status::Incomplete;
  traj.note = "max_turns";

  std::vector<ChatMessage> history;
  std::string notice;
  int consecutive_errors = 0;

  for (int i = 0; i < limits.max_turns; ++i) {
    if (session.now() - traj.started_at >= limits.max_wall_seconds) {
      traj.note = "max_wall_seconds";
      break;
    }
    Turn turn;
    turn.index = static_cast<std::size_t>(i);
    turn.terminal_state_before = session.snapshot();
    turn.prompt_state = notice.empty() ? turn.terminal_state_before.text
                                       : notice + "\n\n" + turn.terminal_state_before.text;
    notice.clear();

    CompletionRequest request;
    request.task_id = task.id;
    request.turn = turn.index;
    if (options.history_mode == HistoryMode::Fresh || history.empty()) {
      history.clear();
      history.push_back({"user", render_prompt(tmpl, task.instruction, turn.prompt_state)});
    } else {
      history.push_back({"user", turn.prompt_state});
    }
    request.messages = history;

    std::optional<TurnError> failure;
    try {
      turn.raw_model_text = model.complete(request);
    } catch (const Error& e) {
      failure = TurnError{e.code(), e.what()};
    } catch (const std::exception& e) {
      failure = TurnError{Errc::ModelFailure, e.what()};
    }
    traj.total_model_chars += turn.raw_model_text.size();
    if (options.history_mode == HistoryMode::Chat) history.push_back({"assistant", turn.raw_model_text});

    if (!failure) {
      try {
        turn.parse = parse_agent_response(turn.raw_model_text);
      } catch (const Error& e) {
        failure = TurnError{e.code(), e.what()};
      }
    }

    if (failure) {
      turn.parse = *failure;
      notice = detail::error_notice(*failure);
      traj.turns.push_back(std::move(turn));
      if (++consecutive_errors >= options.error_budget) {
        traj.status = Status::Error;
        traj.note = "error_budget";
        break;
      }
      continue;
    }
    consecutive_errors = 0;

    const ParseOutcome& outcome = std::get<ParseOutcome>(turn.parse);
    for (const auto& cmd : outcome.response.commands) {
      session.send(options.encoder.encode(cmd.keystrokes));
      double wait = std::min(cmd.duration, limits.per_wait_cap_seconds);
      session.wait(wait);
      turn.executed.push_back({cmd, wait});
    }
    if (!outcome.warnings.empty()) notice = detail::warning_notice(outcome.warnings);
    bool done = outcome.response.task_complete;
    traj.turns.push_back(std::move(turn));
    if (done) {
      traj.status = Status::Completed;
      traj.note = "task_complete";
      break;
    }
  }
  traj.ended_at = session.now();
  return traj;
}

// Starts a session, runs the episode, stops the session. Session start
// failures are recorded as status=error.
[[nodiscard]] inline Trajectory run_episode(const TaskSpec& task, ModelClient& model, const SessionConfig& session_config,
                                            const EpisodeLimits& limits, const PromptTemplate& tmpl,
                                            const EpisodeOptions& options = {}) {
  std::unique_ptr<Session> session;
  try {
    session = start_session(task, session_config);
  } catch (const Error& e) {
    Trajectory traj;
    traj.task_id = task.id;
    traj.trial = options.trial;
    traj.instruction = task.instruction;
    traj.history_mode = options.history_mode;
    traj.origin = origin_of(task);
    traj.status = Status::Error;
    traj.note = e.what();
    return traj;
  }
  Trajectory traj = run_episode_in(*session, task, model, limits, tmpl, options);
  session->stop();
  return traj;
}

// ---------------------------------------------------------------------------
// Trajectory JSON

[[nodiscard]] inline nlohmann::ordered_json to_json(const TerminalState& s) {
  nlohmann::ordered_json j;
  j["text"] = s.text;
  j["truncated"] = s.truncated;
  j["captured_at"] = s.captured_at;
  return j;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const Turn& t) {
  nlohmann::ordered_json j;
  j["index"] = t.index;
  j["terminal_state_before"] = to_json(t.terminal_state_before);
  j["prompt_state"] = t.prompt_state;
  j["raw_model_text"] = t.raw_model_text;
  nlohmann::ordered_json parse;
  if (const auto* ok = std::get_if<ParseOutcome>(&t.parse)) {
    parse["ok"] = true;
    parse["response"] = to_json(ok->response);
    parse["warnings"] = nlohmann::ordered_json::array();
    for (auto w : ok->warnings) parse["warnings"].push_back(std::string(to_string(w)));
  } else {
    const auto& err = std::get<TurnError>(t.parse);
    parse["ok"] = false;
    parse["error"] = {{"code", std::string(to_string(err.code))}, {"message", err.message}};
  }
  j["parse"] = std::move(parse);
  j["executed"] = nlohmann::ordered_json::array();
  for (const auto& e : t.executed) {
    j["executed"].push_back(
        {{"keystrokes", e.command.keystrokes}, {"duration", e.command.duration}, {"actual_wait", e.actual_wait}});
  }
  return j;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const Trajectory& t) {
  nlohmann::ordered_json j;
  j["v"] = 1;
  j["task_id"] = t.task_id;
  j["trial"] = t.trial;
  j["status"] = std::string(to_string(t.status));
  j["note"] = t.note;
  j["history_mode"] = std::string(to_string(t.history_mode));
  j["origin"] = {{"kind", t.origin.kind}};
  if (t.origin.domain) j["origin"]["domain"] = *t.origin.domain;
  j["instruction"] = t.instruction;
  j["total_model_chars"] = t.total_model_chars;
  j["started_at"] = t.started_at;
  j["ended_at"] = t.ended_at;
  j["turns"] = nlohmann::ordered_json::array();
  for (const auto& turn : t.turns) j["turns"].push_back(to_json(turn));
  return j;
}

[[nodiscard]] inline std::optional<Errc> errc_from_string(std::string_view s) {
  for (int i = 0; i <= static_cast<int>(Errc::InvalidArgument); ++i) {
    if (to_string(static_cast<Errc>(i)) == s) return static_cast<Errc>(i);
  }
  return std::nullopt;
}

// Raises InvalidArgument on schema errors.
[[nodiscard]] inline Trajectory trajectory_from_json(const nlohmann::json& j) {
  try {
    Trajectory t;
    t.task_id = j.at("task_id").get<std::string>();
    t.trial = j.value("trial", 0);
    t.status = status_from_string(j.at("status").get<std::string>());
    t.note = j.value("note", std::string());
    t.history_mode = history_mode_from_string(j.value("history_mode", std::string("fresh")));
    if (j.contains("origin")) {
      t.origin.kind = j.at("origin").value("kind", std::string());
      if (j.at("origin").contains("domain")) t.origin.domain = j.at("origin").at("domain").get<std::string>();
    }
    t.instruction = j.value("instruction", std::string());
    t.total_model_chars = j.value("total_model_chars", std::size_t{0});
    t.started_at = j.value("started_at", 0.0);
    t.ended_at = j.value("ended_at", 0.0);
    for (const auto& tj : j.at("turns")) {
      Turn turn;
      turn.index = tj.at("index").get<std::size_t>();
      const auto& s = tj.at("terminal_state_before");
      turn.terminal_state_before = {s.at("text").get<std::string>(), s.value("truncated", false),
                                    s.value("captured_at", 0.0)};
      turn.prompt_state = tj.value("prompt_state", turn.terminal_state_before.text);
      turn.raw_model_text = tj.at("raw_model_text").get<std::string>();
      const auto& p = tj.at("parse");
      if (p.at("ok").get<bool>()) {
        ParseOutcome outcome;
        const auto& r = p.at("response");
        outcome.response.analysis = r.at("analysis").get<std::string>();
        outcome.response.plan = r.at("plan").get<std::string>();
        outcome.response.task_complete = r.value("task_complete", false);
        for (const auto& c : r.at("commands")) {
          outcome.response.commands.push_back({c.at("keystrokes").get<std::string>(), c.value("duration", kDefaultDuration)});
        }
        for (const auto& w : p.value("warnings", nlohmann::json::array())) {
          if (auto parsed = warning_from_string(w.get<std::string>())) outcome.warnings.push_back(*parsed);
        }
        turn.parse = std::move(outcome);
      } else {
        const auto& e = p.at("error");
        auto code = errc_from_string(e.at("code").get<std::string>());
        turn.parse = TurnError{code.value_or(Errc::ModelFailure), e.at("message").get<std::string>()};
      }
      for (const auto& ej : tj.at("executed")) {
        turn.executed.push_back(
            {{ej.at("keystrokes").get<std::string>(), ej.at("duration").get<double>()}, ej.at("actual_wait").get<double>()});
      }
      t.turns.push_back(std::move(turn));
    }
    return t;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed trajectory: ") + e.what());
  }
}

[[nodiscard]] inline std::string serialize(const Trajectory& t) { return to_json(t).dump(2) + "\n"; }

[[nodiscard]] inline Trajectory load_trajectory(const fs::path& path) {
  try {
    return trajectory_from_json(nlohmann::json::parse(read_file(path)));
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Verification

struct TestReport {
  std::map<std::string, bool> per_test;  // name -> passed
  Rational weighted_score;
  std::string raw_output;
  int exit_code = 0;

  friend bool operator==(const TestReport&, const TestReport&) = default;
};

// sum(w_i * pass_i) / sum(w_i). A weighted test absent from the report counts
// as failed unless parametrized variants "name[...]" exist, in which case it
// passes iff every variant passed. Without weights each reported test weighs 1.
[[nodiscard]] inline Rational weighted_score(const std::optional<Weights>& weights,
                                             const std::map<std::string, bool>& per_test) {
  std::vector<std::string> names;
  for (const auto& [name, _] : per_test) names.push_back(name);
  Weights w = effective_weights(weights, names);
  Rational total;
  Rational earned;
  for (const auto& [name, weight] : w) {
    total += weight;
    bool passed = false;
    if (auto it = per_test.find(name); it != per_test.end()) {
      passed = it->second;
    } else {
      bool any = false;
      bool all = true;
      for (auto v = per_test.lower_bound(name + "["); v != per_test.end() && starts_with(v->first, name + "["); ++v) {
        any = true;
        all = all && v->second;
      }
      passed = any && all;
    }
    if (passed) earned += weight;
  }
  if (total <= Rational(0)) return Rational(0);
  return earned / total;
}

// Lines "name PASS" / "name FAIL". Returns an empty map when none are found.
[[nodiscard]] inline std::map<std::string, bool> parse_runner_report(std::string_view text) {
  static const std::regex line_re(R"(^(\S+) (PASS|FAIL)\s*$)");
  std::map<std::string, bool> out;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    std::smatch m;
    if (std::regex_match(line, m, line_re)) {
      bool passed = m[2] == "PASS";
      auto [it, inserted] = out.emplace(m[1], passed);
      if (!inserted) it->second = it->second && passed;
    }
  }
  return out;
}

inline constexpr std::string_view kReportMarker = "===TERMGEN-REPORT===";
inline constexpr std::string_view kReportPath = ".termgen/report.txt";

// pytest plugin that writes one "name PASS|FAIL" line per test to
// $TERMGEN_REPORT.
inline constexpr std::string_view kPytestShim = R"PY(import os

_results = {}


def _name(nodeid):
    return nodeid.split("::")[-1].replace(" ", "_")


def pytest_runtest_logreport(report):
    name = _name(report.nodeid)
    if report.when == "call":
        _results[name] = _results.get(name, True) and report.passed
    elif report.failed or report.skipped:
        _results[name] = False


def pytest_sessionfinish(session, exitstatus):
    path = os.environ.get("TERMGEN_REPORT")
    if not path:
        return
    with open(path, "w") as fh:
        for name in sorted(_results):
            fh.write("%s %s\n" % (name, "PASS" if _results[name] else "FAIL"))
)PY";

struct TestRunOptions {
  // Used when the task has no tests/test.sh. Runs from the session root with
  // TERMGEN_REPORT exported.
  std::string runner_command =
      "PYTHONPATH=.termgen${PYTHONPATH:+:$PYTHONPATH} python3 -m pytest -p termgen_report -q -p no:cacheprovider tests";
  double timeout_seconds = 900;
};

[[nodiscard]] inline std::vector<std::string> test_requirements_of(const TaskSpec& task) {
  std::vector<std::string> out;
  auto it = task.metadata.find("test_requirements");
  if (it == task.metadata.end()) return out;
  try {
    auto doc = nlohmann::json::parse(it->second.text);
    for (const auto& item : doc) out.push_back(item.get<std::string>());
  } catch (const nlohmann::json::exception&) {
    throw Error(Errc::MalformedMetadata, "test_requirements must be an array of strings");
  }
  return out;
}

[[nodiscard]] inline std::string shell_quote(std::string_view s) {
  std::string out = "'";
  for (char c : s) {
    if (c == '\'') out += "'\\''";
    else out += c;
  }
  return out + "'";
}

// Runs the task's tests inside an existing session. Raises NoTests or
// RunnerFailure.
[[nodiscard]] inline TestReport run_tests_in(Session& session, const TaskSpec& task, const TestRunOptions& options = {}) {
  if (task.tests.empty()) throw Error(Errc::NoTests, "task '" + task.id + "' has no tests");
  for (const auto& f : task.tests) session.put_file("tests/" + f.path, f.content, f.executable);
  session.put_file(".termgen/termgen_report.py", kPytestShim);

  std::string command = "mkdir -p .termgen && rm -f " + std::string(kReportPath) +
                        " && export TERMGEN_REPORT=\"$PWD/" + std::string(kReportPath) + "\"; ";
  auto reqs = test_requirements_of(task);
  if (!reqs.empty()) {
    command += "python3 -m pip install -q";
    for (const auto& r : reqs) command += " " + shell_quote(r);
    command += " >/dev/null 2>&1; ";
  }
  command += task.tests.find("test.sh") ? std::string("bash tests/test.sh") : options.runner_command;
  command += "; status=$?; echo; echo '" + std::string(kReportMarker) + "'; cat " + std::string(kReportPath) +
             " 2>/dev/null; exit $status";

  ExecResult result = session.exec(command, options.timeout_seconds);
  std::string_view out = result.output;
  auto marker = out.rfind(kReportMarker);
  auto per_test = parse_runner_report(marker == std::string_view::npos ? out : out.substr(marker));
  if (per_test.empty() && marker != std::string_view::npos) per_test = parse_runner_report(out.substr(0, marker));
  if (per_test.empty()) {
    throw Error(Errc::RunnerFailure, "runner produced no test results (exit " + std::to_string(result.exit_code) +
                                         (result.timed_out ? ", timed out" : "") + "): " +
                                         std::string(out.substr(0, 2000)));
  }
  TestReport report;
  report.per_test = std::move(per_test);
  report.weighted_score = weighted_score(task.weights, report.per_test);
  report.raw_output = std::move(result.output);
  report.exit_code = result.exit_code;
  return report;
}

[[nodiscard]] inline TestReport run_tests(const TaskSpec& task, const SessionConfig& session_config,
                                          const TestRunOptions& options = {}) {
  if (task.tests.empty()) throw Error(Errc::NoTests, "task '" + task.id + "' has no tests");
  auto session = start_session(task, session_config);
  TestReport report = run_tests_in(*session, task, options);
  session->stop();
  return report;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const TestReport& r) {
  nlohmann::ordered_json j;
  j["per_test"] = nlohmann::ordered_json::object();
  for (const auto& [name, passed] : r.per_test) j["per_test"][name] = {{"passed", passed}};
  j["weighted_score"] = r.weighted_score.to_double();
  j["weighted_score_exact"] = r.weighted_score.num() == 0 ? "0" : std::to_string(r.weighted_score.num()) + "/" +
                                                                   std::to_string(r.weighted_score.den());
  j["exit_code"] = r.exit_code;
  j["raw_output"] = r.raw_output;
  return j;
}

[[nodiscard]] inline TestReport test_report_from_json(const nlohmann::json& j) {
  try {
    TestReport r;
    for (const auto& [name, v] : j.at("per_test").items()) r.per_test[name] = v.at("passed").get<bool>();
    if (j.contains("weighted_score_exact")) {
      r.weighted_score = Rational::parse(j.at("weighted_score_exact").get<std::string>());
    } else {
      r.weighted_score = Rational::parse(j.at("weighted_score").dump());
    }
    r.exit_code = j.value("exit_code", 0);
    r.raw_output = j.value("raw_output", std::string());
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed test report: ") + e.what());
  }
}

}  // namespace termgen
