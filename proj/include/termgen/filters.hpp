#pragma once

// Corpus hygiene: n-gram decontamination against benchmark text, quality
// filters over model output, trajectory selection, and length statistics.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <regex>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "json.hpp"
#include "termgen/error.hpp"
#include "termgen/rational.hpp"
#include "termgen/rollout.hpp"
#include "termgen/task_model.hpp"
#include "termgen/util.hpp"

namespace termgen {

// ---------------------------------------------------------------------------
// Decontamination

struct DecontamConfig {
  std::size_t n = 14;
  bool lowercase = true;
  bool collapse_whitespace = true;
};

inline void validate(const DecontamConfig& config) {
  if (config.n < 1) throw Error(Errc::InvalidArgument, "n-gram size must be at least 1");
}

// ASCII lowercasing; other bytes pass through. With collapse_whitespace off,
// every single whitespace byte separates tokens, so runs yield empty tokens.
[[nodiscard]] inline std::vector<std::string> ngram_tokens(std::string_view text, const DecontamConfig& config) {
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; };
  std::vector<std::string> out;
  std::string cur;
  bool have = false;
  for (char c : text) {
    if (is_ws(c)) {
      if (have || !config.collapse_whitespace) out.push_back(cur);
      cur.clear();
      have = false;
      continue;
    }
    if (config.lowercase && c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    cur += c;
    have = true;
  }
  if (have) out.push_back(cur);
  return out;
}

namespace detail {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline std::uint64_t fnv1a(std::uint64_t h, std::string_view bytes) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Token boundaries are hashed as a 0x1f byte so ("ab","c") != ("a","bc").
inline std::uint64_t window_hash(const std::vector<std::string>& tokens, std::size_t begin, std::size_t n) {
  std::uint64_t h = kFnvOffset;
  for (std::size_t i = begin; i < begin + n; ++i) {
    h = fnv1a(h, tokens[i]);
    h = fnv1a(h, "\x1f");
  }
  return h;
}

inline std::string window_text(const std::vector<std::string>& tokens, std::size_t begin, std::size_t n) {
  std::string out;
  for (std::size_t i = begin; i < begin + n; ++i) {
    if (i > begin) out += ' ';
    out += tokens[i];
  }
  return out;
}

}  // namespace detail

class NGramIndex {
 public:
  NGramIndex() = default;
  explicit NGramIndex(DecontamConfig config) : config_(config) { validate(config_); }

  void add(std::string_view text) {
    auto tokens = ngram_tokens(text, config_);
    if (tokens.size() < config_.n) return;
    for (std::size_t i = 0; i + config_.n <= tokens.size(); ++i) hashes_.insert(detail::window_hash(tokens, i, config_.n));
  }

  // First window of `text` present in the index.
  [[nodiscard]] std::optional<std::string> find_witness(std::string_view text) const {
    auto tokens = ngram_tokens(text, config_);
    if (tokens.size() < config_.n) return std::nullopt;
    for (std::size_t i = 0; i + config_.n <= tokens.size(); ++i) {
      if (hashes_.count(detail::window_hash(tokens, i, config_.n))) return detail::window_text(tokens, i, config_.n);
    }
    return std::nullopt;
  }

  [[nodiscard]] std::size_t size() const noexcept { return hashes_.size(); }
  [[nodiscard]] const DecontamConfig& config() const noexcept { return config_; }

 private:
  DecontamConfig config_;
  std::unordered_set<std::uint64_t> hashes_;
};

[[nodiscard]] inline NGramIndex ngram_index(const std::vector<std::string>& benchmark_texts,
                                            const DecontamConfig& config = {}) {
  NGramIndex index(config);
  for (const auto& t : benchmark_texts) index.add(t);
  return index;
}

// Which parts of a benchmark task count as its text.
struct BenchmarkFields {
  bool instruction = true;
  bool tests = true;
  bool solution = true;
};

[[nodiscard]] inline std::vector<std::string> benchmark_texts(const TaskSpec& task, const BenchmarkFields& fields = {}) {
  std::vector<std::string> out;
  if (fields.instruction) out.push_back(task.instruction);
  if (fields.tests) {
    for (const auto& f : task.tests) out.push_back(f.content);
  }
  if (fields.solution && task.solution) {
    for (const auto& f : *task.solution) out.push_back(f.content);
  }
  return out;
}

struct TextItem {
  std::string id;
  std::string text;
};

struct DecontamResult {
  std::vector<std::string> kept;
  struct Removal {
    std::string id;
    std::string witness_window;
  };
  std::vector<Removal> removed;

  // One JSON object per line: {"id", "witness_window"}.
  [[nodiscard]] std::string report_jsonl() const {
    std::string out;
    for (const auto& r : removed) {
      nlohmann::ordered_json j;
      j["id"] = r.id;
      j["witness_window"] = r.witness_window;
      out += j.dump() + "\n";
    }
    return out;
  }
};

[[nodiscard]] inline DecontamResult decontaminate(const std::vector<TextItem>& prompts, const NGramIndex& index) {
  DecontamResult result;
  for (const auto& p : prompts) {
    if (auto witness = index.find_witness(p.text)) {
      result.removed.push_back({p.id, *witness});
    } else {
      result.kept.push_back(p.id);
    }
  }
  return result;
}

// ---------------------------------------------------------------------------
// Quality filters

enum class FilterReason { CjkContent, IdentityLeak };

[[nodiscard]] constexpr std::string_view to_string(FilterReason r) noexcept {
  switch (r) {
    case FilterReason::CjkContent: return "CjkContent";
    case FilterReason::IdentityLeak: return "IdentityLeak";
  }
  return "Unknown";
}

struct FilterDecision {
  bool keep = true;
  std::vector<FilterReason> reasons;

  friend bool operator==(const FilterDecision&, const FilterDecision&) = default;
};

// CJK Unified Ideographs and its extensions A through I.
[[nodiscard]] constexpr bool is_cjk_ideograph(std::int32_t cp) noexcept {
  return (cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0x20000 && cp <= 0x2A6DF) ||
         (cp >= 0x2A700 && cp <= 0x2EBEF) || (cp >= 0x2EBF0 && cp <= 0x2EE5F) || (cp >= 0x30000 && cp <= 0x323AF);
}

[[nodiscard]] inline bool contains_cjk(std::string_view text) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    if (is_cjk_ideograph(next_code_point(text, pos))) return true;
  }
  return false;
}

inline const std::vector<std::string>& default_identity_patterns() {
  static const std::vector<std::string> patterns = {
      R"(\bI am (ChatGPT|GPT-[0-9][a-z0-9.-]*|Claude|Gemini|Qwen|DeepSeek|Llama|Kimi|GLM|Mistral|Grok)\b)",
      R"(\bI'm (ChatGPT|GPT-[0-9][a-z0-9.-]*|Claude|Gemini|Qwen|DeepSeek|Llama|Kimi|GLM|Mistral|Grok)\b)",
      R"(\b(developed|created|trained|built|made) by (OpenAI|Anthropic|Google|DeepMind|Alibaba|DeepSeek|Meta|Moonshot|Zhipu|Mistral|xAI)\b)",
      R"(\bmy name is (ChatGPT|Claude|Gemini|Qwen|DeepSeek|Llama|Kimi|GLM|Mistral|Grok)\b)",
  };
  return patterns;
}

class QualityRules {
 public:
  QualityRules() : QualityRules(default_identity_patterns()) {}
  explicit QualityRules(std::vector<std::string> identity_patterns, bool reject_cjk = true)
      : reject_cjk_(reject_cjk), sources_(std::move(identity_patterns)) {
    for (const auto& p : sources_) {
      try {
        compiled_.emplace_back(p, std::regex::ECMAScript | std::regex::icase);
      } catch (const std::regex_error& e) {
        throw Error(Errc::InvalidArgument, "bad identity pattern '" + p + "': " + e.what());
      }
    }
  }

  // One regex per line; blank lines and lines starting with '#' are ignored.
  static QualityRules from_pattern_file(const fs::path& path, bool reject_cjk = true) {
    std::vector<std::string> patterns;
    for (const auto& line : read_lines(path)) {
      auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      patterns.emplace_back(t);
    }
    return QualityRules(std::move(patterns), reject_cjk);
  }

  [[nodiscard]] bool reject_cjk() const noexcept { return reject_cjk_; }
  [[nodiscard]] const std::vector<std::string>& patterns() const noexcept { return sources_; }

  [[nodiscard]] bool identity_leak(const std::string& text) const {
    for (const auto& re : compiled_) {
      if (std::regex_search(text, re)) return true;
    }
    return false;
  }

 private:
  bool reject_cjk_ = true;
  std::vector<std::string> sources_;
  std::vector<std::regex> compiled_;
};

[[nodiscard]] inline FilterDecision quality_filter(const Trajectory& traj, const QualityRules& rules = {}) {
  bool cjk = false;
  bool leak = false;
  for (const auto& turn : traj.turns) {
    if (rules.reject_cjk() && !cjk && contains_cjk(turn.raw_model_text)) cjk = true;
    if (!leak && rules.identity_leak(turn.raw_model_text)) leak = true;
  }
  FilterDecision d;
  if (cjk) d.reasons.push_back(FilterReason::CjkContent);
  if (leak) d.reasons.push_back(FilterReason::IdentityLeak);
  d.keep = d.reasons.empty();
  return d;
}

// ---------------------------------------------------------------------------
// Trajectory selection

[[nodiscard]] inline std::vector<Trajectory> complete_only(const std::vector<Trajectory>& trajs) {
  std::vector<Trajectory> out;
  std::copy_if(trajs.begin(), trajs.end(), std::back_inserter(out),
               [](const Trajectory& t) { return t.status == Status::Completed; });
  return out;
}

// Reports are looked up as "<task_id>/<trial>" first, then "<task_id>".
[[nodiscard]] inline std::string report_key(const std::string& task_id, int trial) {
  return task_id + "/" + std::to_string(trial);
}

[[nodiscard]] inline std::vector<Trajectory> success_only(const std::vector<Trajectory>& trajs,
                                                          const std::map<std::string, TestReport>& reports,
                                                          Rational threshold = Rational(1)) {
  std::vector<Trajectory> out;
  for (const auto& t : trajs) {
    auto it = reports.find(report_key(t.task_id, t.trial));
    if (it == reports.end()) it = reports.find(t.task_id);
    if (it == reports.end()) throw Error(Errc::MissingReport, "no test report for task '" + t.task_id + "'");
    if (it->second.weighted_score >= threshold) out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Statistics

// Tokens of a trajectory: instruction plus every prompt_state and model reply.
[[nodiscard]] inline std::size_t trajectory_tokens(const Trajectory& t, const TokenEstimator& estimate) {
  std::size_t total = estimate(t.instruction);
  for (const auto& turn : t.turns) total += estimate(turn.prompt_state) + estimate(turn.raw_model_text);
  return total;
}

struct Distribution {
  std::size_t bin_width = 1;
  std::map<std::size_t, std::size_t> bins;  // bin_start -> count, contiguous from min to max bin
  std::size_t count = 0;
  Rational mean;
  Rational median;
  std::size_t p95 = 0;  // nearest rank
  std::size_t max = 0;

  // Fixed column order: bin_start,count
  [[nodiscard]] std::string table() const {
    std::string out = "bin_start,count\n";
    for (const auto& [start, n] : bins) out += std::to_string(start) + "," + std::to_string(n) + "\n";
    return out;
  }

  [[nodiscard]] nlohmann::ordered_json summary_json() const {
    nlohmann::ordered_json j;
    j["count"] = count;
    j["mean"] = mean.to_double();
    j["median"] = median.to_double();
    j["p95"] = p95;
    j["max"] = max;
    return j;
  }
};

[[nodiscard]] inline Distribution distribution(std::vector<std::size_t> values, std::size_t bin_width = 1) {
  if (bin_width == 0) throw Error(Errc::InvalidArgument, "bin width must be positive");
  Distribution d;
  d.bin_width = bin_width;
  d.count = values.size();
  if (values.empty()) {
    d.bins[0] = 0;
    return d;
  }
  std::sort(values.begin(), values.end());
  Rational sum;
  for (auto v : values) sum += Rational(static_cast<std::int64_t>(v));
  d.mean = sum / Rational(static_cast<std::int64_t>(values.size()));
  const std::size_t n = values.size();
  if (n % 2 == 1) {
    d.median = Rational(static_cast<std::int64_t>(values[n / 2]));
  } else {
    d.median = (Rational(static_cast<std::int64_t>(values[n / 2 - 1])) + Rational(static_cast<std::int64_t>(values[n / 2]))) /
               Rational(2);
  }
  std::size_t rank = (95 * n + 99) / 100;  // ceil(0.95 n)
  d.p95 = values[std::max<std::size_t>(rank, 1) - 1];
  d.max = values.back();
  const std::size_t lo = values.front() / bin_width * bin_width;
  for (std::size_t b = lo; b <= d.max; b += bin_width) d.bins[b] = 0;
  for (auto v : values) ++d.bins[v / bin_width * bin_width];
  return d;
}

struct CorpusStats {
  Distribution tokens;
  Distribution turns;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["tokens"] = tokens.summary_json();
    j["turns"] = turns.summary_json();
    return j;
  }
};

[[nodiscard]] inline CorpusStats corpus_stats(const std::vector<Trajectory>& trajs,
                                              const TokenEstimator& estimate = default_token_estimator(),
                                              std::size_t token_bin_width = 1024) {
  std::vector<std::size_t> tokens;
  std::vector<std::size_t> turns;
  for (const auto& t : trajs) {
    tokens.push_back(trajectory_tokens(t, estimate));
    turns.push_back(t.turns.size());
  }
  return {distribution(std::move(tokens), token_bin_width), distribution(std::move(turns), 1)};
}

}  // namespace termgen
