#include <gtest/gtest.h>

#include "support.hpp"
#include "termgen/random.hpp"
#include "termgen/rational.hpp"
#include "termgen/task_model.hpp"

using namespace termgen;
using termgen::testing::fixture;
using termgen::testing::make_task;
using termgen::testing::snapshot_tree;
using termgen::testing::TempDir;

TEST(Rational, ParsesDecimalsAndFractions) {
  EXPECT_EQ(Rational::parse("0.25"), Rational(1, 4));
  EXPECT_EQ(Rational::parse("2/3"), Rational(2, 3));
  EXPECT_EQ(Rational::parse("-2"), Rational(-2));
  EXPECT_EQ(Rational::parse("1e-3"), Rational(1, 1000));
  EXPECT_EQ(Rational::parse("1.5E2"), Rational(150));
  EXPECT_THROW((void)Rational::parse("abc"), Error);
  EXPECT_THROW((void)Rational::parse("1/0"), Error);
}

TEST(Rational, ArithmeticIsExact) {
  Rational a(1, 3);
  Rational b(1, 6);
  EXPECT_EQ(a + b, Rational(1, 2));
  EXPECT_EQ(a - b, Rational(1, 6));
  EXPECT_EQ(a * b, Rational(1, 18));
  EXPECT_EQ(a / b, Rational(2));
  EXPECT_EQ(Rational(4, -6), Rational(-2, 3));
  EXPECT_EQ(Rational(2, 3).to_string(), "2/3");
  EXPECT_EQ(Rational(1, 4).to_string(), "0.25");
}

TEST(SafePath, RejectsEscapes) {
  EXPECT_TRUE(is_safe_relative_path("a/b.txt"));
  for (const char* bad : {"", "/etc/passwd", "../x", "a/../b", "a//b", "./a", "a\\b"}) {
    EXPECT_FALSE(is_safe_relative_path(bad)) << bad;
  }
}

TEST(FileSet, SortedAndUnique) {
  FileSet files;
  files.insert({"b", "2", false});
  files.insert({"a", "1", false});
  ASSERT_EQ(files.size(), 2u);
  EXPECT_EQ(files.begin()->path, "a");
  EXPECT_THROW(files.insert({"a", "x", false}), Error);
  try {
    files.insert({"../evil", "x", false});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PathEscape);
  }
}

TEST(Toml, RoundTripsStringsAndRawValues) {
  Metadata m = parse_toml_metadata(
      "id = \"t1\"\nretries = 3\nflag = true\nname = 'lit'\nesc = \"a\\\"b\\n\"\n[limits]\ntimeout_sec = 600\n");
  EXPECT_EQ(m.at("id"), MetaValue::string("t1"));
  EXPECT_EQ(m.at("retries"), MetaValue::raw("3"));
  EXPECT_EQ(m.at("flag"), MetaValue::raw("true"));
  EXPECT_EQ(m.at("name"), MetaValue::string("lit"));
  EXPECT_EQ(m.at("esc"), MetaValue::string("a\"b\n"));
  EXPECT_EQ(m.at("limits.timeout_sec"), MetaValue::raw("600"));
  EXPECT_EQ(parse_toml_metadata(write_toml_metadata(m)), m);
}

TEST(Toml, MalformedRaises) {
  for (const char* bad : {"id = ", "= 3", "x = \"unterminated\n", "[unclosed\n"}) {
    try {
      (void)parse_toml_metadata(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::MalformedMetadata) << bad;
    }
  }
}

TEST(Weights, ParseAndWrite) {
  Weights w = parse_weights_json("{\"a\": 2, \"b\": 0.5}");
  EXPECT_EQ(w.at("a"), Rational(2));
  EXPECT_EQ(w.at("b"), Rational(1, 2));
  EXPECT_EQ(parse_weights_json(write_weights_json(w)), w);
  EXPECT_THROW((void)parse_weights_json("[1]"), Error);
  EXPECT_THROW((void)parse_weights_json("{\"a\": \"x\"}"), Error);
}

TEST(TaskDir, ParsesFixture) {
  TaskSpec t = parse_task_dir(fixture("tasks/sample-task"));
  EXPECT_EQ(t.id, "sample-task");
  EXPECT_EQ(t.domain, "data processing");
  ASSERT_TRUE(t.weights.has_value());
  EXPECT_EQ(t.weights->at("test_total"), Rational(2));
  EXPECT_EQ(t.tests.find("weights.json"), nullptr);
  ASSERT_TRUE(t.solution.has_value());
  const FileEntry* solve = t.solution->find("solve.sh");
  ASSERT_NE(solve, nullptr);
  EXPECT_TRUE(solve->executable);
  EXPECT_NE(t.environment.find("Dockerfile"), nullptr);
  EXPECT_TRUE(validate_task(t).empty());
}

TEST(TaskDir, MissingInstruction) {
  TempDir dir;
  write_file(dir / "task.toml", "id = \"x\"\n");
  try {
    (void)parse_task_dir(dir.path());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::MissingInstruction);
  }
}

TEST(TaskDir, SymlinkEscapeRejected) {
  TempDir outside;
  write_file(outside / "secret", "s");
  TempDir dir;
  write_task_dir(make_task("esc"), dir / "esc");
  fs::create_symlink(outside / "secret", dir / "esc/environment/link");
  try {
    (void)parse_task_dir(dir / "esc");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::PathEscape);
  }
}

TEST(TaskDir, WriteParseIdentity) {
  TempDir dir;
  TaskSpec t = make_task("round-trip");
  t.domain = "file operations";
  t.metadata["retries"] = MetaValue::raw("3");
  t.solution = FileSet{{"solve.sh", "#!/bin/sh\necho hello > /app/out.txt\n", true}};
  t.weights = Weights{{"test_out", Rational(3, 4)}};
  t.environment.insert({"data/nested/in.bin", std::string("\x00\x01\xff", 3), false});
  write_task_dir(t, dir / "a");
  TaskSpec back = parse_task_dir(dir / "a");
  EXPECT_EQ(back, t);
  write_task_dir(back, dir / "b");
  EXPECT_EQ(snapshot_tree(dir / "a"), snapshot_tree(dir / "b"));
}

TEST(TaskDir, RandomizedRoundTripProperty) {
  PortableRng rng(7);
  TempDir dir;
  for (int i = 0; i < 25; ++i) {
    TaskSpec t = make_task("prop-" + std::to_string(i));
    std::string text;
    for (std::uint64_t k = 0, n = rng.below(200); k < n; ++k) text += static_cast<char>(32 + rng.below(95));
    t.instruction = text + "\n";
    if (rng.below(2)) t.weights = Weights{{"test_out", Rational(static_cast<std::int64_t>(rng.below(9) + 1))}};
    for (std::uint64_t f = 0, n = rng.below(4); f < n; ++f) {
      t.environment.insert({"f" + std::to_string(f) + ".txt", text.substr(0, f * 10), rng.below(2) == 1});
    }
    fs::path p = dir / t.id;
    write_task_dir(t, p);
    EXPECT_EQ(parse_task_dir(p), t);
  }
}

TEST(Validate, ReportsEachRule) {
  TaskSpec t = make_task("Bad Id");
  t.instruction = "";
  t.environment.insert_unchecked({"../x", "", false});
  t.weights = Weights{{"a", Rational(-1)}};
  t.tests = FileSet{};
  auto v = validate_task(t);
  auto has = [&](Rule r) {
    return std::any_of(v.begin(), v.end(), [&](const Violation& x) { return x.rule == r; });
  };
  EXPECT_TRUE(has(Rule::IdInvalid));
  EXPECT_TRUE(has(Rule::InstructionEmpty));
  EXPECT_TRUE(has(Rule::UnsafePath));
  EXPECT_TRUE(has(Rule::WeightNegative));
  EXPECT_TRUE(has(Rule::WeightsSumNonpositive));
  EXPECT_TRUE(has(Rule::TestsEmpty));

  TaskSpec adapted = make_task("adapted");
  adapted.tests = FileSet{};
  adapted.metadata["origin"] = MetaValue::string("adapter/math");
  EXPECT_TRUE(validate_task(adapted).empty());

  TaskSpec bad_utf8 = make_task("utf");
  bad_utf8.instruction = "\xff\xfe";
  EXPECT_EQ(validate_task(bad_utf8), (std::vector<Violation>{{"instruction", Rule::InstructionNotUtf8}}));
}

TEST(Weights, EffectiveDefaultsToUniform) {
  Weights w = effective_weights(std::nullopt, {"a", "b"});
  EXPECT_EQ(w.at("a"), Rational(1));
  EXPECT_EQ(w.size(), 2u);
}
