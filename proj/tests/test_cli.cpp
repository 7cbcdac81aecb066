#include <gtest/gtest.h>

#include "support.hpp"
#include "termgen/filters.hpp"
#include "termgen/orchestrator.hpp"
#include "termgen/process.hpp"
#include "termgen/sft_export.hpp"

using namespace termgen;
using termgen::testing::fixture;
using termgen::testing::TempDir;

namespace {

process::Result termgen_cli(std::vector<std::string> args) {
  args.insert(args.begin(), TERMGEN_CLI_PATH);
  return process::run(args, {}, 120);
}

nlohmann::json json_of(const process::Result& r) {
  auto start = r.output.find('{');
  return nlohmann::json::parse(r.output.substr(start == std::string::npos ? 0 : start));
}

// A rollout over the golden tasks into dir/run.
void golden_rollout(const TempDir& dir) {
  auto r = termgen_cli({"rollout", "--tasks", fixture("golden/tasks").string(), "--out", (dir / "run").string(),
                        "--mock-script", fixture("golden/model.jsonl").string(), "--backend", "scripted", "--script",
                        fixture("golden/terminal").string(), "--workers", "2", "--verify"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
}

}  // namespace

TEST(Cli, UsageErrors) {
  EXPECT_EQ(termgen_cli({}).exit_code, 2);
  EXPECT_EQ(termgen_cli({"frobnicate"}).exit_code, 2);
  EXPECT_EQ(termgen_cli({"rollout", "--workers", "0"}).exit_code, 2);
  EXPECT_EQ(termgen_cli({"rollout"}).exit_code, 2);
  EXPECT_EQ(termgen_cli({"export", "--out", "/tmp/x.jsonl"}).exit_code, 2);
  auto help = termgen_cli({"--help"});
  EXPECT_EQ(help.exit_code, 0);
  EXPECT_NE(help.output.find("rollout"), std::string::npos);
}

TEST(Cli, Validate) {
  EXPECT_EQ(termgen_cli({"validate", fixture("tasks/sample-task").string()}).exit_code, 0);
  auto golden = termgen_cli({"validate", fixture("golden/tasks").string()});
  EXPECT_EQ(golden.exit_code, 0);
  EXPECT_NE(golden.output.find("ok csv-total"), std::string::npos);
  TempDir dir;
  fs::create_directories(dir / "t");
  write_file(dir / "t/task.toml", "a = 1\n");
  auto bad = termgen_cli({"validate", (dir / "t").string()});
  EXPECT_EQ(bad.exit_code, 1);
  EXPECT_NE(bad.output.find("invalid"), std::string::npos);
}

TEST(Cli, Adapt) {
  TempDir dir;
  write_file(dir / "in.jsonl",
             "{\"id\": \"m1\", \"kind\": \"math\", \"prompt\": \"What is 2+2?\"}\n"
             "{\"id\": \"c1\", \"kind\": \"code\", \"prompt\": \"Write fizzbuzz.\"}\n"
             "not json\n");
  auto r = termgen_cli({"adapt", "--input", (dir / "in.jsonl").string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(termgen_cli({"validate", (dir / "out").string()}).exit_code, 0);
  auto tasks = fs::directory_iterator(dir / "out");
  EXPECT_EQ(std::distance(tasks, fs::directory_iterator{}), 2);
}

TEST(Cli, GenerateSkillAndSeed) {
  TempDir dir;
  auto raw = nlohmann::json::parse(read_lines(fixture("generation/corpus.jsonl")).at(0)).at("raw");
  write_file(dir / "mock.jsonl", nlohmann::json{{"turn", "*"}, {"text", raw}}.dump() + "\n");
  auto skill = termgen_cli({"generate", "--out", (dir / "skill").string(), "--mock-script",
                            (dir / "mock.jsonl").string(), "skill", "--count", "3", "--seed", "5"});
  ASSERT_EQ(skill.exit_code, 0) << skill.output;
  EXPECT_EQ(json_of(skill).at("written"), 3);
  write_file(dir / "seeds.jsonl", "{\"id\": \"s1\", \"problem\": \"Count lines in a log.\"}\n");
  auto seed = termgen_cli({"generate", "--out", (dir / "seed").string(), "--mock-script",
                           (dir / "mock.jsonl").string(), "seed", "--seeds", (dir / "seeds.jsonl").string()});
  ASSERT_EQ(seed.exit_code, 0) << seed.output;
  EXPECT_TRUE(fs::is_directory(dir / "seed/seed-s1"));
  EXPECT_EQ(termgen_cli({"generate", "skill", "--count", "1"}).exit_code, 2);
}

TEST(Cli, RolloutFilterStatsExportEval) {
  TempDir dir;
  golden_rollout(dir);
  auto report = nlohmann::json::parse(read_file(dir / "run/campaign_report.json"));
  EXPECT_EQ(report.at("executed"), 5);
  EXPECT_EQ(report.at("verified"), 5);

  auto filtered = termgen_cli({"filter", "--trajs", (dir / "run").string(), "--out", (dir / "kept").string()});
  ASSERT_EQ(filtered.exit_code, 0) << filtered.output;
  auto counts = json_of(filtered);
  EXPECT_EQ(counts.at("input"), 5);
  // Direct library pass over the same episodes.
  std::vector<Trajectory> trajs;
  std::map<std::string, TestReport> reports;
  for (const auto& ep : load_episodes(dir / "run")) {
    trajs.push_back(ep.trajectory);
    if (ep.report) reports[report_key(ep.trajectory.task_id, ep.trajectory.trial)] = *ep.report;
  }
  std::vector<Trajectory> quality;
  for (const auto& t : trajs) {
    if (quality_filter(t).keep) quality.push_back(t);
  }
  auto expected = success_only(complete_only(quality), reports);
  EXPECT_EQ(counts.at("success"), expected.size());
  EXPECT_EQ(load_episodes(dir / "kept").size(), expected.size());

  auto stats = termgen_cli({"stats", "--trajs", (dir / "run").string(), "--out-dir", (dir / "stats").string()});
  ASSERT_EQ(stats.exit_code, 0) << stats.output;
  EXPECT_TRUE(fs::exists(dir / "stats/tokens.csv"));
  EXPECT_EQ(read_lines(dir / "stats/turns.csv").at(0), "bin_start,count");

  auto exported = termgen_cli({"export", "--trajs", (dir / "run").string(), "--out", (dir / "sft.jsonl").string()});
  ASSERT_EQ(exported.exit_code, 0) << exported.output;
  EXPECT_EQ(read_file(dir / "sft.jsonl"), read_file(fixture("golden/expected/sft.jsonl")));

  write_file(dir / "mix.json", R"({"strategy": "mixed", "parts": [{"path": "sft.jsonl", "weight": 2}]})");
  auto mixed = termgen_cli({"export", "--mixture", (dir / "mix.json").string(), "--out", (dir / "mix.jsonl").string(),
                            "--seed", "4"});
  ASSERT_EQ(mixed.exit_code, 0) << mixed.output;
  EXPECT_EQ(read_samples(dir / "mix.jsonl").size(), 5u);

  auto eval = termgen_cli({"eval", "--trajs", (dir / "run").string()});
  ASSERT_EQ(eval.exit_code, 0) << eval.output;
  EXPECT_NEAR(json_of(eval).at("overall_mean").get<double>(), 100.0 * (1 + 1 + 2.0 / 3 + 0 + 1) / 5, 1e-9);
  EXPECT_EQ(termgen_cli({"eval"}).exit_code, 2);
  EXPECT_EQ(termgen_cli({"eval", "--reports", (dir / "missing.jsonl").string()}).exit_code, 1);
}

TEST(Cli, ConfigFileDrivesRollout) {
  TempDir dir;
  write_file(dir / "c.json", nlohmann::json{{"tasks_dir", fixture("golden/tasks").string()},
                                            {"out_dir", "run"},
                                            {"limits", {{"max_turns", 4}}},
                                            {"model", {{"kind", "mock"}, {"script", fixture("golden/model.jsonl").string()}}},
                                            {"session", {{"backend", "scripted"}, {"script", fixture("golden/terminal").string()}}}}
                                 .dump());
  auto r = termgen_cli({"rollout", "--config", (dir / "c.json").string(), "--max-episodes", "2"});
  ASSERT_EQ(r.exit_code, 0) << r.output;
  EXPECT_EQ(json_of(r).at("executed"), 2);
  EXPECT_EQ(load_episodes(dir / "run").size(), 2u);
}

TEST(Cli, VerifyAndDecontaminate) {
  TempDir dir;
  auto v = termgen_cli({"verify", "--tasks", fixture("golden/tasks").string(), "--out", (dir / "v").string(),
                        "--backend", "scripted", "--script", fixture("golden/terminal").string()});
  ASSERT_EQ(v.exit_code, 0) << v.output;
  EXPECT_EQ(json_of(v).at("scores").size(), 5u);

  std::string bench;
  for (int i = 0; i < 20; ++i) bench += "w" + std::to_string(i) + " ";
  write_file(dir / "bench.jsonl", nlohmann::json{{"text", bench}}.dump() + "\n");
  write_file(dir / "prompts.jsonl", nlohmann::json{{"id", "dirty"}, {"text", "pre " + bench}}.dump() + "\n" +
                                        nlohmann::json{{"id", "clean"}, {"text", "nothing shared"}}.dump() + "\n");
  auto d = termgen_cli({"decontaminate", "--benchmark", (dir / "bench.jsonl").string(), "--prompts",
                        (dir / "prompts.jsonl").string(), "--report", (dir / "removed.jsonl").string(), "--kept",
                        (dir / "kept.txt").string()});
  ASSERT_EQ(d.exit_code, 0) << d.output;
  EXPECT_EQ(json_of(d).at("removed"), 1);
  EXPECT_EQ(read_file(dir / "kept.txt"), "clean\n");
  EXPECT_EQ(nlohmann::json::parse(read_lines(dir / "removed.jsonl").at(0)).at("id"), "dirty");
}
