#pragma once

// The hand-labeled 100-trajectory selection fixture.

#include <map>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "termgen/filters.hpp"

namespace termgen::testing {

struct FilterFixture {
  std::vector<Trajectory> trajs;
  std::map<std::string, TestReport> reports;
  std::set<std::string> expect_complete;  // report keys
  std::set<std::string> expect_success;
};

inline FilterFixture load_filter_fixture(const fs::path& path) {
  FilterFixture f;
  for (const auto& line : read_lines(path)) {
    if (trim(line).empty()) continue;
    auto row = nlohmann::json::parse(line);
    Trajectory t;
    t.task_id = row.at("task_id").get<std::string>();
    t.trial = row.at("trial").get<int>();
    t.status = status_from_string(row.at("status").get<std::string>());
    t.instruction = "Task " + t.task_id;
    const std::string key = report_key(t.task_id, t.trial);
    TestReport r;
    r.weighted_score = Rational::parse(row.at("score").get<std::string>());
    f.reports[key] = r;
    if (row.at("expect_complete").get<bool>()) f.expect_complete.insert(key);
    if (row.at("expect_success").get<bool>()) f.expect_success.insert(key);
    f.trajs.push_back(std::move(t));
  }
  return f;
}

inline std::set<std::string> keys_of(const std::vector<Trajectory>& trajs) {
  std::set<std::string> out;
  for (const auto& t : trajs) out.insert(report_key(t.task_id, t.trial));
  return out;
}

// Order-preserving subsequence check.
inline bool is_subsequence(const std::vector<Trajectory>& sub, const std::vector<Trajectory>& full) {
  std::size_t j = 0;
  for (const auto& t : full) {
    if (j < sub.size() && sub[j] == t) ++j;
  }
  return j == sub.size();
}

}  // namespace termgen::testing
