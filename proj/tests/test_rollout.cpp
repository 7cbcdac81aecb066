#include <gtest/gtest.h>

#include <cstdlib>
#include <mutex>

#include "golden.hpp"
#include "support.hpp"
#include "termgen/rollout.hpp"

using namespace termgen;
using termgen::testing::fixture;
using termgen::testing::make_task;
using termgen::testing::TempDir;

namespace {

// Replays fixed replies in order and records every request.
class RecordingModel final : public ModelClient {
 public:
  explicit RecordingModel(std::vector<std::string> replies) : replies_(std::move(replies)) {}
  std::string complete(const CompletionRequest& r) override {
    std::lock_guard lock(mu_);
    requests.push_back(r);
    if (r.turn >= replies_.size()) throw Error(Errc::ModelFailure, "out of replies");
    return replies_[r.turn];
  }
  std::vector<CompletionRequest> requests;

 private:
  std::mutex mu_;
  std::vector<std::string> replies_;
};

std::string reply(const std::string& keys, double duration, bool done) {
  AgentResponse r{"a", "p", {}, done};
  if (!keys.empty()) r.commands.push_back({keys, duration});
  return to_json(r).dump();
}

const PromptTemplate kTmpl("INSTR<{instruction}>\nSTATE<{terminal_state}>");

}  // namespace

TEST(Episode, StopsOnTaskComplete) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({reply("ls\n", 0.5, false), reply("", 0, true), reply("never\n", 1, false)});
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl);
  EXPECT_EQ(t.status, Status::Completed);
  EXPECT_EQ(t.turns.size(), 2u);
  EXPECT_EQ(m.requests.size(), 2u);
  EXPECT_EQ(s.sends(), 1u);
  EXPECT_DOUBLE_EQ(t.ended_at, 0.5);
  EXPECT_EQ(t.origin.kind, "skill");
  EXPECT_EQ(t.origin.domain, "file operations");
}

TEST(Episode, PerWaitCapApplies) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({reply("make\n", 120, true)});
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl);
  ASSERT_EQ(t.turns[0].executed.size(), 1u);
  EXPECT_DOUBLE_EQ(t.turns[0].executed[0].command.duration, 120);
  EXPECT_DOUBLE_EQ(t.turns[0].executed[0].actual_wait, 60);
}

TEST(Episode, MaxTurnsLeavesIncomplete) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m(std::vector<std::string>(10, reply("x\n", 0.1, false)));
  EpisodeLimits limits;
  limits.max_turns = 3;
  auto t = run_episode_in(s, make_task("t"), m, limits, kTmpl);
  EXPECT_EQ(t.status, Status::Incomplete);
  EXPECT_EQ(t.note, "max_turns");
  EXPECT_EQ(t.turns.size(), 3u);
}

TEST(Episode, WallClockLimit) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m(std::vector<std::string>(10, reply("sleep\n", 30, false)));
  EpisodeLimits limits;
  limits.max_wall_seconds = 70;
  auto t = run_episode_in(s, make_task("t"), m, limits, kTmpl);
  EXPECT_EQ(t.note, "max_wall_seconds");
  EXPECT_EQ(t.turns.size(), 3u);
}

TEST(Episode, ErrorBudgetCountsConsecutiveFailures) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({"garbage", "more garbage", reply("ls\n", 0.1, false), "x", "y", "z", reply("", 0, true)});
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl);
  EXPECT_EQ(t.status, Status::Error);
  EXPECT_EQ(t.note, "error_budget");
  EXPECT_EQ(t.turns.size(), 6u);
  ASSERT_TRUE(std::holds_alternative<TurnError>(t.turns[0].parse));
  EXPECT_EQ(std::get<TurnError>(t.turns[0].parse).code, Errc::NoJsonObject);
  EXPECT_EQ(t.turns[1].prompt_state.rfind("Previous response had parsing errors:", 0), 0u);
}

TEST(Episode, ModelFailuresAreRecorded) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({});
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl);
  EXPECT_EQ(t.status, Status::Error);
  EXPECT_EQ(std::get<TurnError>(t.turns[0].parse).code, Errc::ModelFailure);
  EXPECT_TRUE(t.turns[0].raw_model_text.empty());
}

TEST(Episode, FreshModeRendersFullPromptEachTurn) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({reply("ls\n", 0.1, false), reply("", 0, true)});
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl);
  ASSERT_EQ(m.requests.size(), 2u);
  for (std::size_t i = 0; i < 2; ++i) {
    ASSERT_EQ(m.requests[i].messages.size(), 1u);
    EXPECT_EQ(m.requests[i].messages[0].content,
              render_prompt(kTmpl, t.instruction, t.turns[i].terminal_state_before.text));
  }
}

TEST(Episode, ChatModeAccumulatesHistory) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({reply("ls\n", 0.1, false), "oops", reply("", 0, true)});
  EpisodeOptions opts;
  opts.history_mode = HistoryMode::Chat;
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl, opts);
  ASSERT_EQ(m.requests.size(), 3u);
  const auto& last = m.requests[2].messages;
  ASSERT_EQ(last.size(), 5u);
  EXPECT_EQ(last[1].content, reply("ls\n", 0.1, false));
  EXPECT_EQ(last[3].content, "oops");
  EXPECT_EQ(last[4].content, t.turns[2].prompt_state);
  EXPECT_NE(last[4].content.find("ERROR: NoJsonObject"), std::string::npos);
}

TEST(Episode, WarningsBecomeNotice) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({"ok: " + reply("ls\n", 0.1, false), reply("", 0, true)});
  auto t = run_episode_in(s, make_task("t"), m, {}, kTmpl);
  EXPECT_EQ(t.status, Status::Completed);
  EXPECT_EQ(t.turns[1].prompt_state.rfind("Previous response had warnings:", 0), 0u);
}

TEST(Episode, ControlTokensAreEncoded) {
  ScriptedSession s({}, SessionConfig{});
  RecordingModel m({reply("C-c", 0.1, true)});
  (void)run_episode_in(s, make_task("t"), m, {}, kTmpl);
  EXPECT_NE(s.snapshot().text.find("^C"), std::string::npos);
}

TEST(Episode, SessionStartFailureIsError) {
  SessionConfig cfg;
  cfg.backend = Backend::Container;
  cfg.runtime = "/nonexistent/runtime";
  RecordingModel m({});
  auto t = run_episode(make_task("t"), m, cfg, {}, kTmpl);
  EXPECT_EQ(t.status, Status::Error);
  EXPECT_TRUE(t.turns.empty());
}

TEST(TrajectoryJson, RoundTripsExactly) {
  auto files = termgen::testing::run_golden(fixture("golden"));
  for (const auto& [name, bytes] : files) {
    if (name.rfind("trajs/", 0) != 0) continue;
    Trajectory t = trajectory_from_json(nlohmann::json::parse(bytes));
    EXPECT_EQ(serialize(t), bytes) << name;
  }
}

TEST(Golden, StableAcrossRunsAndMatchesCommittedOutputs) {
  const fs::path expected_dir = fixture("golden/expected");
  auto first = termgen::testing::run_golden(fixture("golden"));
  for (int i = 0; i < 2; ++i) EXPECT_EQ(termgen::testing::run_golden(fixture("golden")), first);
  if (std::getenv("TERMGEN_UPDATE_GOLDEN")) termgen::testing::write_golden_expected(expected_dir, first);
  EXPECT_EQ(termgen::testing::load_golden_expected(expected_dir), first);
}

TEST(Golden, EpisodeOutcomes) {
  auto files = termgen::testing::run_golden(fixture("golden"));
  auto traj = [&](const std::string& id) {
    return trajectory_from_json(nlohmann::json::parse(files.at("trajs/" + id + ".json")));
  };
  EXPECT_EQ(traj("csv-total").status, Status::Completed);
  EXPECT_EQ(traj("list-project").turns.size(), 1u);
  auto fix = traj("fix-script");
  EXPECT_TRUE(std::holds_alternative<TurnError>(fix.turns[0].parse));
  EXPECT_EQ(fix.status, Status::Completed);
  auto build = traj("long-build");
  EXPECT_EQ(build.status, Status::Incomplete);
  EXPECT_EQ(build.turns.size(), 4u);
  auto stuck = traj("stuck-process");
  const auto& outcome = std::get<ParseOutcome>(stuck.turns[0].parse);
  EXPECT_EQ(outcome.response.commands[0].keystrokes, "C-c");
  EXPECT_EQ(outcome.warnings, (std::vector<Warning>{Warning::SurroundingText, Warning::UnknownField}));
}

// ---------------------------------------------------------------------------
// Scoring

TEST(Scoring, MatchesHandLabeledFixtures) {
  auto cases = nlohmann::json::parse(read_file(fixture("scoring/cases.json")));
  ASSERT_EQ(cases.size(), 10u);
  for (const auto& c : cases) {
    std::optional<Weights> weights;
    if (!c.at("weights").is_null()) weights = parse_weights_json(c.at("weights").dump());
    std::map<std::string, bool> passed = c.at("passed").get<std::map<std::string, bool>>();
    EXPECT_EQ(weighted_score(weights, passed), Rational::parse(c.at("expected").get<std::string>())) << c.dump();
  }
}

TEST(Scoring, ParametrizedVariantsAggregate) {
  Weights w{{"test_a", Rational(1)}, {"test_b", Rational(1)}};
  EXPECT_EQ(weighted_score(w, {{"test_a[1]", true}, {"test_a[2]", true}, {"test_b[x]", false}}), Rational(1, 2));
}

TEST(Scoring, RunnerReportParsing) {
  auto r = parse_runner_report("noise\ntest_a PASS\ntest_b FAIL\ntest_a FAIL\nnot a line PASS\n");
  EXPECT_EQ(r, (std::map<std::string, bool>{{"test_a", false}, {"test_b", false}}));
}

TEST(RunTests, ScriptedReport) {
  TaskSpec task = make_task("t");
  task.weights = Weights{{"test_out", Rational(2)}, {"test_other", Rational(1)}};
  ScriptedSession s(parse_script("{\"exec\": {\"exit_code\": 1, \"output\": \"log\\n===TERMGEN-REPORT===\\n"
                                 "test_out PASS\\ntest_other FAIL\\n\"}}"),
                    SessionConfig{});
  TestReport r = run_tests_in(s, task);
  EXPECT_EQ(r.weighted_score, Rational(2, 3));
  EXPECT_EQ(r.exit_code, 1);
  EXPECT_EQ(s.files().count("tests/test_outputs.py"), 1u);
  EXPECT_EQ(test_report_from_json(to_json(r)), r);
}

TEST(RunTests, ErrorsAreTyped) {
  ScriptedSession s({}, SessionConfig{});
  TaskSpec no_tests = make_task("t");
  no_tests.tests = FileSet{};
  try {
    (void)run_tests_in(s, no_tests);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::NoTests);
  }
  try {
    (void)run_tests_in(s, make_task("t"));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::RunnerFailure);
  }
}

TEST(RunTests, RealPytestOnLocalBackend) {
  if (std::system("python3 -c 'import pytest' >/dev/null 2>&1") != 0) GTEST_SKIP() << "pytest unavailable";
  TaskSpec task = make_task("local");
  task.tests = FileSet{{"test_outputs.py",
                        "import os\n\nROOT = os.environ['TERMGEN_ROOT']\n\n\n"
                        "def test_exists():\n    assert os.path.exists(os.path.join(ROOT, 'total.txt'))\n\n\n"
                        "def test_total():\n    assert open(os.path.join(ROOT, 'total.txt')).read().strip() == '42'\n",
                        false}};
  task.weights = Weights{{"test_exists", Rational(1)}, {"test_total", Rational(2)}};
  SessionConfig cfg;
  cfg.backend = Backend::LocalPty;
  cfg.shell = "/bin/sh";
  std::unique_ptr<Session> s;
  try {
    s = start_session(task, cfg);
  } catch (const Error& e) {
    GTEST_SKIP() << e.what();
  }
  EXPECT_EQ(run_tests_in(*s, task).weighted_score, Rational(0));
  ASSERT_EQ(s->exec("echo 41 > total.txt", 10).exit_code, 0);
  EXPECT_EQ(run_tests_in(*s, task).weighted_score, Rational(1, 3));
  ASSERT_EQ(s->exec("echo 42 > total.txt", 10).exit_code, 0);
  TestReport done = run_tests_in(*s, task);
  EXPECT_EQ(done.weighted_score, Rational(1)) << done.raw_output;
  s->stop();
}
