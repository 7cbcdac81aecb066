#pragma once

// Trajectories to supervised fine-tuning samples, length policy, and dataset
// mixtures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "termgen/agent_protocol.hpp"
#include "termgen/error.hpp"
#include "termgen/model_client.hpp"
#include "termgen/random.hpp"
#include "termgen/rollout.hpp"
#include "termgen/util.hpp"

namespace termgen {

inline constexpr int kSampleSchemaVersion = 1;

struct SampleMeta {
  std::string task_id;
  std::string origin;
  std::size_t turns = 0;  // assistant messages
  std::size_t est_tokens = 0;

  friend bool operator==(const SampleMeta&, const SampleMeta&) = default;
};

struct SftSample {
  std::vector<ChatMessage> messages;
  SampleMeta meta;

  friend bool operator==(const SftSample&, const SftSample&) = default;
};

[[nodiscard]] inline std::string origin_label(const Origin& o) {
  if (o.kind.empty()) return "unknown";
  return o.domain ? o.kind + "/" + *o.domain : o.kind;
}

inline void refresh_meta(SftSample& sample, const TokenEstimator& estimate) {
  sample.meta.turns = static_cast<std::size_t>(std::count_if(
      sample.messages.begin(), sample.messages.end(), [](const ChatMessage& m) { return m.role == "assistant"; }));
  std::size_t total = 0;
  for (const auto& m : sample.messages) total += estimate(m.content);
  sample.meta.est_tokens = total;
}

// Turns whose model call failed carry no text and are skipped. In fresh mode
// every user message is the full rendered prompt; in chat mode only the first
// is, later ones carry the terminal state (with any notices).
[[nodiscard]] inline SftSample trajectory_to_sample(const Trajectory& traj, const PromptTemplate& tmpl,
                                                    std::optional<HistoryMode> history_mode = std::nullopt,
                                                    const TokenEstimator& estimate = default_token_estimator()) {
  const HistoryMode mode = history_mode.value_or(traj.history_mode);
  SftSample sample;
  sample.meta.task_id = traj.task_id;
  sample.meta.origin = origin_label(traj.origin);
  for (const auto& turn : traj.turns) {
    if (turn.raw_model_text.empty()) continue;
    if (mode == HistoryMode::Fresh || sample.messages.empty()) {
      sample.messages.push_back({"user", render_prompt(tmpl, traj.instruction, turn.prompt_state)});
    } else {
      sample.messages.push_back({"user", turn.prompt_state});
    }
    sample.messages.push_back({"assistant", turn.raw_model_text});
  }
  if (sample.messages.empty()) {
    throw Error(Errc::EmptyTrajectory, "trajectory '" + traj.task_id + "' has no model output");
  }
  refresh_meta(sample, estimate);
  return sample;
}

[[nodiscard]] inline nlohmann::ordered_json to_json(const SftSample& s) {
  nlohmann::ordered_json j;
  j["messages"] = nlohmann::ordered_json::array();
  for (const auto& m : s.messages) j["messages"].push_back({{"role", m.role}, {"content", m.content}});
  j["meta"] = {{"task_id", s.meta.task_id},
               {"origin", s.meta.origin},
               {"turns", s.meta.turns},
               {"est_tokens", s.meta.est_tokens},
               {"v", kSampleSchemaVersion}};
  return j;
}

[[nodiscard]] inline std::string to_jsonl_line(const SftSample& s) { return to_json(s).dump() + "\n"; }

// Raises SchemaViolation on a wrong version, unknown role, or an assistant
// message in first position.
[[nodiscard]] inline SftSample sample_from_json(const nlohmann::json& j) {
  try {
    const auto& meta = j.at("meta");
    if (meta.at("v").get<int>() != kSampleSchemaVersion) {
      throw Error(Errc::SchemaViolation, "unsupported sample version " + meta.at("v").dump());
    }
    SftSample s;
    for (const auto& m : j.at("messages")) {
      ChatMessage msg{m.at("role").get<std::string>(), m.at("content").get<std::string>()};
      if (msg.role != "system" && msg.role != "user" && msg.role != "assistant") {
        throw Error(Errc::SchemaViolation, "unknown role '" + msg.role + "'");
      }
      s.messages.push_back(std::move(msg));
    }
    if (s.messages.empty() || s.messages.front().role == "assistant") {
      throw Error(Errc::SchemaViolation, "sample must not start with an assistant message");
    }
    s.meta.task_id = meta.at("task_id").get<std::string>();
    s.meta.origin = meta.at("origin").get<std::string>();
    s.meta.turns = meta.at("turns").get<std::size_t>();
    s.meta.est_tokens = meta.at("est_tokens").get<std::size_t>();
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::SchemaViolation, std::string("malformed sample: ") + e.what());
  }
}

[[nodiscard]] inline std::vector<SftSample> read_samples(const fs::path& path) {
  std::vector<SftSample> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::SchemaViolation, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(e.code(), path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

inline void write_samples(const fs::path& path, const std::vector<SftSample>& samples) {
  std::string out;
  for (const auto& s : samples) out += to_jsonl_line(s);
  write_file_atomic(path, out);
}

// ---------------------------------------------------------------------------
// Length policy

enum class LengthPolicy { Drop, TruncateTail };

[[nodiscard]] inline LengthPolicy length_policy_from_string(std::string_view s) {
  if (s == "drop") return LengthPolicy::Drop;
  if (s == "truncate_tail") return LengthPolicy::TruncateTail;
  throw Error(Errc::InvalidArgument, "unknown length policy '" + std::string(s) + "'");
}

inline constexpr std::size_t kDefaultMaxTokens = 32768;

// truncate_tail removes trailing messages until the sample fits and ends on
// an assistant message; samples that cannot fit with one assistant message
// are dropped.
[[nodiscard]] inline std::vector<SftSample> apply_length_policy(std::vector<SftSample> samples,
                                                                std::size_t max_tokens = kDefaultMaxTokens,
                                                                LengthPolicy policy = LengthPolicy::Drop,
                                                                const TokenEstimator& estimate = default_token_estimator()) {
  std::vector<SftSample> out;
  for (auto& s : samples) {
    if (s.meta.est_tokens <= max_tokens) {
      out.push_back(std::move(s));
      continue;
    }
    if (policy == LengthPolicy::Drop) continue;
    std::vector<std::size_t> cost;
    std::size_t total = 0;
    for (const auto& m : s.messages) {
      cost.push_back(estimate(m.content));
      total += cost.back();
    }
    std::size_t keep = s.messages.size();
    while (keep > 0 && (total > max_tokens || s.messages[keep - 1].role != "assistant")) {
      total -= cost[keep - 1];
      --keep;
    }
    if (keep == 0) continue;
    s.messages.resize(keep);
    refresh_meta(s, estimate);
    out.push_back(std::move(s));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixtures

enum class MixtureStrategy { Mixed, Curriculum };

[[nodiscard]] inline MixtureStrategy mixture_strategy_from_string(std::string_view s) {
  if (s == "mixed") return MixtureStrategy::Mixed;
  if (s == "curriculum") return MixtureStrategy::Curriculum;
  throw Error(Errc::InvalidArgument, "unknown mixture strategy '" + std::string(s) + "'");
}

struct MixturePart {
  fs::path path;
  std::optional<double> weight;  // mixed; defaults to 1
  std::optional<int> stage;      // curriculum
};

struct MixtureSpec {
  std::vector<MixturePart> parts;
  MixtureStrategy strategy = MixtureStrategy::Mixed;
};

// {"strategy": "mixed"|"curriculum", "parts": [{"path", "weight"?, "stage"?}]}
// Relative part paths resolve against `base`.
[[nodiscard]] inline MixtureSpec mixture_spec_from_json(const nlohmann::json& j, const fs::path& base = {}) {
  try {
    MixtureSpec spec;
    spec.strategy = mixture_strategy_from_string(j.value("strategy", std::string("mixed")));
    for (const auto& p : j.at("parts")) {
      MixturePart part;
      part.path = p.at("path").get<std::string>();
      if (part.path.is_relative() && !base.empty()) part.path = base / part.path;
      if (p.contains("weight")) part.weight = p.at("weight").get<double>();
      if (p.contains("stage")) part.stage = p.at("stage").get<int>();
      spec.parts.push_back(std::move(part));
    }
    return spec;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed mixture spec: ") + e.what());
  }
}

struct LoadedPart {
  std::vector<SftSample> samples;
  std::optional<double> weight;
  std::optional<int> stage;
};

// Mixed: one weighted shuffle (Efraimidis-Spirakis keys u^(1/w), largest
// first); weight-0 parts contribute nothing. Curriculum: stages ascending,
// shuffled within each stage.
[[nodiscard]] inline std::vector<SftSample> mix_samples(std::vector<LoadedPart> parts, MixtureStrategy strategy,
                                                        std::uint64_t seed) {
  PortableRng rng(seed);
  std::vector<SftSample> out;
  if (strategy == MixtureStrategy::Curriculum) {
    std::map<int, std::vector<SftSample>> stages;
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (!parts[i].stage) throw Error(Errc::StageMissing, "curriculum part " + std::to_string(i) + " has no stage");
    }
    for (auto& p : parts) {
      auto& bucket = stages[*p.stage];
      for (auto& s : p.samples) bucket.push_back(std::move(s));
    }
    for (auto& [stage, bucket] : stages) {
      rng.shuffle(bucket);
      for (auto& s : bucket) out.push_back(std::move(s));
    }
    return out;
  }
  std::vector<std::pair<double, SftSample>> keyed;
  for (auto& p : parts) {
    double w = p.weight.value_or(1.0);
    if (!(w >= 0) || !std::isfinite(w)) throw Error(Errc::InvalidArgument, "mixture weights must be finite and >= 0");
    if (w == 0) continue;
    for (auto& s : p.samples) keyed.emplace_back(std::log(rng.unit_open()) / w, std::move(s));
  }
  std::stable_sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
  out.reserve(keyed.size());
  for (auto& [key, s] : keyed) out.push_back(std::move(s));
  return out;
}

[[nodiscard]] inline std::vector<SftSample> build_mixture(const MixtureSpec& spec, std::uint64_t seed) {
  if (spec.strategy == MixtureStrategy::Curriculum) {
    for (std::size_t i = 0; i < spec.parts.size(); ++i) {
      if (!spec.parts[i].stage) {
        throw Error(Errc::StageMissing, "curriculum part " + spec.parts[i].path.string() + " has no stage");
      }
    }
  }
  std::vector<LoadedPart> parts;
  for (const auto& p : spec.parts) parts.push_back({read_samples(p.path), p.weight, p.stage});
  return mix_samples(std::move(parts), spec.strategy, seed);
}

}  // namespace termgen
