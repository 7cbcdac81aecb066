#include <gtest/gtest.h>

#include "protocol_cases.hpp"
#include "support.hpp"
#include "termgen/agent_protocol.hpp"
#include "termgen/random.hpp"

using namespace termgen;
using termgen::testing::data_file;

class ProtocolSuite : public ::testing::TestWithParam<termgen::testing::ProtocolCase> {};

TEST_P(ProtocolSuite, MatchesLabel) {
  auto check = termgen::testing::check_protocol_case(GetParam());
  EXPECT_TRUE(check.ok) << check.detail;
}

INSTANTIATE_TEST_SUITE_P(Cases, ProtocolSuite, ::testing::ValuesIn(termgen::testing::protocol_cases()),
                         [](const auto& info) { return info.param.name; });

TEST(Protocol, SuiteHasTwentyCases) { EXPECT_EQ(termgen::testing::protocol_cases().size(), 20u); }

TEST(Protocol, CanonicalJsonRoundTrips) {
  PortableRng rng(11);
  for (int i = 0; i < 200; ++i) {
    AgentResponse r;
    r.analysis = "analysis " + std::to_string(rng.below(1000)) + " {\"quoted\"}";
    r.plan = std::string(rng.below(5), '}');
    for (std::uint64_t k = 0, n = rng.below(4); k < n; ++k) {
      r.commands.push_back({"echo " + std::to_string(k) + "\n", static_cast<double>(rng.below(100)) / 8.0});
    }
    r.task_complete = rng.below(2) == 1;
    ParseOutcome back = parse_agent_response(to_json(r).dump(2));
    EXPECT_EQ(back.response, r);
    EXPECT_TRUE(back.warnings.empty());
  }
}

TEST(Protocol, FirstBalancedObjectWins) {
  auto out = parse_agent_response(R"(x {"analysis":"1","plan":"","commands":[]} {"analysis":"2"})");
  EXPECT_EQ(out.response.analysis, "1");
}

TEST(Template, RequiresEachPlaceholderOnce) {
  EXPECT_NO_THROW(PromptTemplate("I: {instruction} T: {terminal_state}"));
  for (const char* bad : {"{instruction}", "{terminal_state}", "{instruction}{instruction}{terminal_state}"}) {
    try {
      PromptTemplate t(bad);
      ADD_FAILURE() << bad;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::PlaceholderMissing);
    }
  }
}

TEST(Template, RenderIsSinglePass) {
  PromptTemplate t("[{terminal_state}] <{instruction}>");
  EXPECT_EQ(render_prompt(t, "do {terminal_state}", "$ {instruction}"), "[$ {instruction}] <do {terminal_state}>");
}

TEST(Template, TerminusAssetMatchesDataFile) {
  PromptTemplate t = PromptTemplate::terminus();
  EXPECT_EQ(t.body(), read_file(data_file("terminus_system_prompt.txt")));
  std::string rendered = render_prompt(t, "INSTR", "STATE");
  EXPECT_NE(rendered.find("INSTR"), std::string::npos);
  EXPECT_NE(rendered.find("STATE"), std::string::npos);
  EXPECT_EQ(rendered.find("{instruction}"), std::string::npos);
}

TEST(Keystrokes, TokensOnlyWhenWholeString) {
  EXPECT_EQ(encode_keystrokes("C-c"), "\x03");
  EXPECT_EQ(encode_keystrokes("C-d"), "\x04");
  EXPECT_EQ(encode_keystrokes("C-c\n"), "C-c\n");
  EXPECT_EQ(encode_keystrokes("echo C-c\n"), "echo C-c\n");
  KeystrokeEncoder enc;
  enc.add_token("Escape", "\x1b");
  EXPECT_TRUE(enc.is_token("Escape"));
  EXPECT_EQ(enc.encode("Escape"), "\x1b");
}
