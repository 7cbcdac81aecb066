#include <gtest/gtest.h>

#include <set>

#include "generation_cases.hpp"
#include "support.hpp"
#include "termgen/taskgen.hpp"

using namespace termgen;
using termgen::testing::data_file;
using termgen::testing::fixture;
using termgen::testing::TempDir;

namespace {

SkillDomain small_domain(std::size_t n) {
  SkillDomain d;
  d.name = "toy";
  d.module_text = "**Domain Focus:** toys";
  for (std::size_t i = 0; i < n; ++i) d.skills.push_back("skill" + std::to_string(i));
  return d;
}

GeneratedTask sample_task() {
  GeneratedTask g;
  g.prompt = "Summarize /app/data/log.txt into /app/summary.json.";
  g.tests = "import json\n\n\ndef test_summary():\n    assert json.load(open('/app/summary.json'))['lines'] == 3";
  g.weights = {{"test_summary", Rational(1)}};
  g.info = "difficulty: easy";
  g.files = {{"data/log.txt", "a\nb\nc\n"}};
  g.test_requirements = {"pytest"};
  return g;
}

}  // namespace

TEST(Registry, BuiltinDomains) {
  DomainRegistry reg = builtin_domains();
  EXPECT_EQ(reg.all().size(), 10u);
  EXPECT_EQ(reg.active().size(), 9u);
  std::set<std::string> names;
  for (const auto* d : reg.active()) {
    names.insert(d->name);
    EXPECT_GE(d->skills.size(), 3u) << d->name;
    EXPECT_FALSE(d->module_text.empty());
    EXPECT_FALSE(d->image_ref.empty());
  }
  EXPECT_EQ(names, (std::set<std::string>{"data processing", "data querying", "data science", "debugging",
                                          "dependency management", "file operations", "scientific computing",
                                          "security", "software engineering"}));
  EXPECT_FALSE(reg.at("system administration").active);
}

TEST(Registry, DataFileMatchesBuiltin) {
  EXPECT_EQ(load_domain_registry(data_file("domains.json")).all(), builtin_domains().all());
}

TEST(Registry, ActivationAndValidation) {
  DomainRegistry reg = builtin_domains();
  reg.set_active({"security", "system administration"});
  EXPECT_EQ(reg.active().size(), 2u);
  EXPECT_THROW(reg.set_active({"cooking"}), Error);
}

TEST(Registry, AddRejectsDuplicatesAndEmpty) {
  DomainRegistry reg;
  reg.add(small_domain(3));
  EXPECT_THROW(reg.add(small_domain(4)), Error);
  SkillDomain empty = small_domain(0);
  empty.name = "empty";
  EXPECT_THROW(reg.add(empty), Error);
}

TEST(SampleSkills, PropertiesHold) {
  for (std::size_t n : {3u, 4u, 5u, 6u, 11u}) {
    SkillDomain d = small_domain(n);
    std::map<std::size_t, int> k_hist;
    for (std::uint64_t seed = 0; seed < 600; ++seed) {
      auto picked = sample_skills(d, seed);
      EXPECT_EQ(picked, sample_skills(d, seed));
      EXPECT_GE(picked.size(), 3u);
      EXPECT_LE(picked.size(), std::min<std::size_t>(5, n));
      std::set<std::string> uniq(picked.begin(), picked.end());
      EXPECT_EQ(uniq.size(), picked.size());
      for (const auto& s : picked) EXPECT_NE(std::find(d.skills.begin(), d.skills.end(), s), d.skills.end());
      ++k_hist[picked.size()];
    }
    const std::size_t range = std::min<std::size_t>(5, n) - 2;
    EXPECT_EQ(k_hist.size(), range);
    for (const auto& [k, count] : k_hist) EXPECT_NEAR(count, 600.0 / static_cast<double>(range), 60.0) << n;
  }
}

TEST(SampleSkills, InsufficientSkills) {
  try {
    (void)sample_skills(small_domain(2), 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::InsufficientSkills);
  }
}

TEST(SampleSkills, TaskSeedIsXor) {
  EXPECT_EQ(task_seed(0xF0, 0x0F), 0xFFu);
  EXPECT_EQ(task_seed(42, 0), 42u);
}

TEST(SkillPrompt, Structure) {
  const DomainRegistry reg = builtin_domains();
  const SkillDomain& d = reg.at("security");
  auto p = build_skill_prompt(d, {"a", "b", "c"}, "FROM ubuntu:22.04");
  EXPECT_EQ(p.system.rfind("You are an expert at creating security tasks for AI agent training.\n\n", 0), 0u);
  EXPECT_NE(p.system.find(d.module_text), std::string::npos);
  for (const char* tag : {"<prompt>", "<tests>", "<weights>", "<info>", "<files>", "<test_requirements>"}) {
    EXPECT_NE(p.system.find(tag), std::string::npos) << tag;
  }
  EXPECT_NE(p.user.find("Category: security\n"), std::string::npos);
  EXPECT_NE(p.user.find("- a\n- b\n- c\n"), std::string::npos);
  EXPECT_NE(p.user.find("```dockerfile\nFROM ubuntu:22.04\n```\n"), std::string::npos);
}

TEST(SeedPrompt, OptionalSections) {
  SeedRecord bare{"s1", "Count primes below n.", std::nullopt, std::nullopt};
  auto p = build_seed_prompt(bare);
  EXPECT_EQ(p.user.find("Domain:"), std::string::npos);
  EXPECT_EQ(p.user.find("<ground_truth>"), std::string::npos);
  EXPECT_NE(p.user.find("Count primes below n.\n"), std::string::npos);

  SeedRecord full{"s2", "Sort it.", "algorithms", "print(sorted(x))"};
  auto q = build_seed_prompt(full);
  EXPECT_NE(q.user.find("Domain: algorithms\n"), std::string::npos);
  EXPECT_NE(q.user.find("<ground_truth>\nprint(sorted(x))\n</ground_truth>\n"), std::string::npos);
}

TEST(SeedPrompt, RecordParsing) {
  auto s = seed_record_from_json(nlohmann::json::parse(R"({"id": 7, "problem": "p", "reference_solution": null})"));
  EXPECT_EQ(s.id, "7");
  EXPECT_FALSE(s.reference_solution.has_value());
  EXPECT_THROW((void)seed_record_from_json(nlohmann::json::parse(R"({"problem": "  "})")), Error);
}

// ---------------------------------------------------------------------------
// Parsing

TEST(GenerationParse, LabeledCorpus) {
  auto lines = read_lines(fixture("generation/corpus.jsonl"));
  std::size_t rows = 0;
  std::size_t defective = 0;
  for (const auto& line : lines) {
    if (trim(line).empty()) continue;
    auto row = nlohmann::json::parse(line);
    ++rows;
    if (row.at("expect") != "ok") ++defective;
    auto check = termgen::testing::check_generation_case(row);
    EXPECT_TRUE(check.ok) << rows << ": " << check.detail;
    if (check.task) {
      TaskSpec t = materialize_task(*check.task, builtin_domains().at("data processing"), "gen-" + std::to_string(rows));
      EXPECT_FALSE(t.solution.has_value());
      EXPECT_TRUE(validate_task(t).empty());
    }
  }
  EXPECT_EQ(rows, 30u);
  EXPECT_EQ(defective, 10u);
}

TEST(GenerationParse, FirstOpenToLastClose) {
  auto g = parse_generation_output("<prompt> a </prompt> noise </prompt>\n<tests>t</tests>");
  EXPECT_EQ(g.prompt, "a </prompt> noise");
}

TEST(GenerationParse, FilesBlockRules) {
  auto g = parse_generation_output(
      "<prompt>p</prompt><tests>t</tests><files>\n--- path: a.txt\nline\n\n--- path: dir/b.txt\nx\n</files>");
  EXPECT_EQ(g.files.at("a.txt"), "line\n");
  EXPECT_EQ(g.files.at("dir/b.txt"), "x");
  for (const char* bad : {"<files>\nstray\n--- path: a\nx\n</files>", "<files>\n--- path: ../a\nx\n</files>",
                          "<files>\n--- path: a\nx\n--- path: a\ny\n</files>"}) {
    try {
      (void)parse_generation_output(std::string("<prompt>p</prompt><tests>t</tests>") + bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedFiles) << bad;
    }
  }
}

TEST(GenerationParse, WeightsAndRequirements) {
  auto g = parse_generation_output(
      "<prompt>p</prompt><tests>t</tests><weights>\n```json\n{\"a\": 0.5}\n```\n</weights>"
      "<test_requirements>- numpy\n- pandas, scipy</test_requirements>");
  EXPECT_EQ(g.weights.at("a"), Rational(1, 2));
  EXPECT_EQ(g.test_requirements, (std::vector<std::string>{"numpy", "pandas", "scipy"}));
  auto j = parse_generation_output("<prompt>p</prompt><tests>t</tests><test_requirements>[\"a\", \"b\"]</test_requirements>");
  EXPECT_EQ(j.test_requirements, (std::vector<std::string>{"a", "b"}));
  try {
    (void)parse_generation_output("<prompt>p</prompt><tests>t</tests><weights>{\"a\": -1}</weights>");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MalformedWeights);
  }
}

TEST(GenerationParse, EmitParseRoundTrip) {
  GeneratedTask g = sample_task();
  GeneratedTask back = parse_generation_output(emit_generation_output(g));
  EXPECT_EQ(back.prompt, g.prompt);
  EXPECT_EQ(back.tests, g.tests);
  EXPECT_EQ(back.weights, g.weights);
  EXPECT_EQ(back.info, g.info);
  EXPECT_EQ(back.files, g.files);
  EXPECT_EQ(back.test_requirements, g.test_requirements);
}

// ---------------------------------------------------------------------------
// Leakage and materialization

TEST(Leakage, LongTestLineInPrompt) {
  GeneratedTask g = sample_task();
  EXPECT_TRUE(leakage_check(g).empty());
  g.prompt += "\nHint: assert json.load(open('/app/summary.json'))['lines'] == 3";
  auto findings = leakage_check(g);
  ASSERT_EQ(findings.size(), 1u);
  EXPECT_EQ(findings[0].kind, LeakageFinding::Kind::TestLineInPrompt);
  try {
    (void)materialize_task(g, builtin_domains().at("security"), "leaky");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::LeakageDetected);
  }
}

TEST(Leakage, ShortLinesIgnored) {
  GeneratedTask g = sample_task();
  g.tests = "import json";
  g.prompt = "Use import json to do it.";
  EXPECT_TRUE(leakage_check(g).empty());
}

TEST(Leakage, ReferenceSolution) {
  GeneratedTask g = sample_task();
  g.prompt += " Use: print(sorted(x))";
  SeedRecord seed{"s", "Sort.", std::nullopt, "print(sorted(x))"};
  EXPECT_EQ(leakage_check(g, seed.reference_solution).at(0).kind, LeakageFinding::Kind::ReferenceSolutionInPrompt);
  EXPECT_THROW((void)materialize_seed_task(g, seed, "seed-s"), Error);
}

TEST(Materialize, ShapeAndRoundTrip) {
  TaskSpec t = materialize_task(sample_task(), builtin_domains().at("data processing"), "skill-x");
  EXPECT_FALSE(t.solution.has_value());
  EXPECT_EQ(t.tests.find("test_outputs.py")->content, sample_task().tests + "\n");
  EXPECT_EQ(t.metadata.at("origin").text, "skill/data processing");
  EXPECT_EQ(t.metadata.at("test_requirements"), MetaValue::raw("[\"pytest\"]"));
  EXPECT_EQ(t.domain, "data processing");
  EXPECT_EQ(t.environment.find("data/log.txt")->content, "a\nb\nc\n");
  TempDir dir;
  write_task_dir(t, dir / t.id);
  EXPECT_EQ(parse_task_dir(dir / t.id), t);

  TaskSpec s = materialize_seed_task(sample_task(), {"s", "p", "math", std::nullopt}, "seed-s", "img:1");
  EXPECT_EQ(s.metadata.at("origin").text, "seed");
  EXPECT_EQ(s.image_ref, "img:1");
}
