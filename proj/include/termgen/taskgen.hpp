#pragma once

// Synthetic task generation: prompt assembly for skill-based and seed-based
// generation, parsing of the model's tagged output, and materialization into
// task directories.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "termgen/domain_assets.hpp"
#include "termgen/error.hpp"
#include "termgen/random.hpp"
#include "termgen/task_model.hpp"
#include "termgen/util.hpp"

namespace termgen {

struct SkillDomain {
  std::string name;
  std::string module_text;
  std::vector<std::string> skills;
  std::string image_ref;
  bool active = true;

  friend bool operator==(const SkillDomain&, const SkillDomain&) = default;
};

class DomainRegistry {
 public:
  DomainRegistry() = default;
  explicit DomainRegistry(std::vector<SkillDomain> domains) {
    for (auto& d : domains) add(std::move(d));
  }

  void add(SkillDomain domain) {
    if (domain.name.empty()) throw Error(Errc::InvalidArgument, "domain without a name");
    if (domain.skills.empty()) throw Error(Errc::InvalidArgument, "domain '" + domain.name + "' has no skills");
    if (find(domain.name)) throw Error(Errc::InvalidArgument, "duplicate domain '" + domain.name + "'");
    domains_.push_back(std::move(domain));
  }

  [[nodiscard]] const SkillDomain* find(std::string_view name) const {
    for (const auto& d : domains_) {
      if (d.name == name) return &d;
    }
    return nullptr;
  }

  [[nodiscard]] const SkillDomain& at(std::string_view name) const {
    if (const auto* d = find(name)) return *d;
    throw Error(Errc::InvalidArgument, "unknown domain '" + std::string(name) + "'");
  }

  [[nodiscard]] const std::vector<SkillDomain>& all() const noexcept { return domains_; }

  [[nodiscard]] std::vector<const SkillDomain*> active() const {
    std::vector<const SkillDomain*> out;
    for (const auto& d : domains_) {
      if (d.active) out.push_back(&d);
    }
    return out;
  }

  // Replaces the active set with exactly `names`.
  void set_active(const std::vector<std::string>& names) {
    for (const auto& n : names) (void)at(n);
    for (auto& d : domains_) d.active = std::find(names.begin(), names.end(), d.name) != names.end();
  }

 private:
  std::vector<SkillDomain> domains_;
};

[[nodiscard]] inline DomainRegistry builtin_domains() {
  DomainRegistry reg;
  for (const auto& a : assets::kDomains) {
    SkillDomain d;
    d.name = std::string(a.name);
    d.module_text = std::string(a.module_text);
    d.image_ref = std::string(a.image_ref);
    d.active = a.active;
    for (std::size_t i = 0; i < a.skill_count; ++i) d.skills.emplace_back(a.skills[i]);
    reg.add(std::move(d));
  }
  return reg;
}

// {"domains": [{"name", "module_path" | "module_text", "skills", "image_ref", "active"}]}
// module_path is resolved relative to the registry file.
[[nodiscard]] inline DomainRegistry load_domain_registry(const fs::path& path) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(read_file(path));
    DomainRegistry reg;
    for (const auto& item : doc.at("domains")) {
      SkillDomain d;
      d.name = item.at("name").get<std::string>();
      if (item.contains("module_text")) {
        d.module_text = item.at("module_text").get<std::string>();
      } else {
        std::string text = read_file(path.parent_path() / item.at("module_path").get<std::string>());
        while (!text.empty() && text.back() == '\n') text.pop_back();
        d.module_text = std::move(text);
      }
      d.skills = item.at("skills").get<std::vector<std::string>>();
      d.image_ref = item.value("image_ref", std::string());
      d.active = item.value("active", true);
      reg.add(std::move(d));
    }
    return reg;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, "domain registry " + path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// Skill sampling

// k is uniform over {3, 4, 5} clipped to the number of skills available.
[[nodiscard]] inline std::vector<std::string> sample_skills(const SkillDomain& domain, std::uint64_t seed) {
  const std::size_t n = domain.skills.size();
  if (n < 3) {
    throw Error(Errc::InsufficientSkills,
                "domain '" + domain.name + "' has " + std::to_string(n) + " skills, need at least 3");
  }
  PortableRng rng(seed);
  const auto hi = static_cast<std::int64_t>(std::min<std::size_t>(5, n));
  const auto k = static_cast<std::size_t>(rng.between(3, hi));
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) {
    std::size_t j = i + static_cast<std::size_t>(rng.below(n - i));
    std::swap(idx[i], idx[j]);
    out.push_back(domain.skills[idx[i]]);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Prompt assembly

struct GenerationPrompt {
  std::string system;
  std::string user;
};

namespace detail {

inline constexpr std::string_view kUniversalRequirements =
    "## Universal Task Requirements\n"
    "- **Challenging to solve:** Requires domain knowledge, analytical thinking, and efficient implementation.\n"
    "- **Easy to verify:** Success must be determinable by programmatically checking outputs, exit codes, or "
    "system state.\n"
    "- **Self-contained:** All necessary information must be in the prompt.\n"
    "- **Realistic:** The problem should resemble tasks professionals face in this domain.\n";

inline constexpr std::string_view kOutputFormat =
    "## Output Format\n"
    "You MUST output using these XML tags:\n"
    "- <prompt>: The task description with explicit requirements.\n"
    "- <tests>: Pytest functions to verify the solution.\n"
    "- <weights>: Test scoring distribution.\n"
    "- <info>: Task metadata.\n"
    "- <files>: Input data or initial file structure.\n"
    "- <test_requirements>: Python packages required for testing.\n"
    "\n"
    "Encoding inside the tags:\n"
    "- <weights> holds a JSON object mapping each test function name to a non-negative number.\n"
    "- <files> holds one block per file: a line `--- path: <relative path>` followed by the file content.\n"
    "- <test_requirements> lists one package per line.\n";

inline constexpr std::string_view kCriticalRules =
    "## Critical Rules\n"
    "- **No Leakage:** Never include code that solves the task in the prompt.\n"
    "- **Verification:** Prioritize tasks with clear, programmatic verification.\n"
    "- **Originality:** Tasks should require thought, not just copying standard tutorials.\n"
    "- **Complete Specification:** Include all information needed to complete the task (file paths, formats, "
    "constraints).\n";

}  // namespace detail

[[nodiscard]] inline GenerationPrompt build_skill_prompt(const SkillDomain& domain,
                                                         const std::vector<std::string>& skills,
                                                         std::string_view dockerfile_text) {
  GenerationPrompt p;
  p.system = "You are an expert at creating " + domain.name + " tasks for AI agent training.\n\n";
  p.system += domain.module_text;
  p.system += "\n\n";
  p.system += detail::kUniversalRequirements;
  p.system += "\n";
  p.system += detail::kOutputFormat;
  p.system += "\n";
  p.system += detail::kCriticalRules;

  p.user = "# Task Generation Request\nCategory: " + domain.name + "\n\n## Primitive Skills (Building Blocks)\n";
  for (const auto& s : skills) p.user += "- " + s + "\n";
  p.user += "\n## Pre-designed Docker Environment\nTasks will run in this pre-designed Docker environment:\n";
  p.user += "```dockerfile\n";
  p.user += dockerfile_text;
  if (!dockerfile_text.empty() && dockerfile_text.back() != '\n') p.user += '\n';
  p.user += "```\n";
  p.user += "If additional packages are needed for testing, list them in <test_requirements>.\n\n";
  p.user +=
      "## Instructions\n"
      "CREATE A NOVEL TASK that:\n"
      "1. Combines 3-5 primitives in a creative, unexpected way\n"
      "2. Is NOT a recreation of common coding challenges\n"
      "3. Is challenging to solve but easy to verify\n"
      "4. Has clear, unambiguous specifications\n"
      "\n"
      "Think of an original scenario or application - don't just combine primitives mechanically.\n";
  return p;
}

struct SeedRecord {
  std::string id;  // optional; used for naming generated tasks
  std::string problem;
  std::optional<std::string> domain;
  std::optional<std::string> reference_solution;

  friend bool operator==(const SeedRecord&, const SeedRecord&) = default;
};

[[nodiscard]] inline SeedRecord seed_record_from_json(const nlohmann::json& j) {
  try {
    SeedRecord s;
    if (j.contains("id")) s.id = j.at("id").is_string() ? j.at("id").get<std::string>() : j.at("id").dump();
    s.problem = j.at("problem").get<std::string>();
    if (j.contains("domain") && !j.at("domain").is_null()) s.domain = j.at("domain").get<std::string>();
    if (j.contains("reference_solution") && !j.at("reference_solution").is_null()) {
      s.reference_solution = j.at("reference_solution").get<std::string>();
    }
    if (trim(s.problem).empty()) throw Error(Errc::InvalidArgument, "seed problem is empty");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("malformed seed record: ") + e.what());
  }
}

inline constexpr std::string_view kGroundTruthOpen = "<ground_truth>";
inline constexpr std::string_view kGroundTruthClose = "</ground_truth>";

[[nodiscard]] inline GenerationPrompt build_seed_prompt(const SeedRecord& seed) {
  GenerationPrompt p;
  p.system =
      "You are a task adapter. You turn a problem statement into a self-contained task that an AI agent solves "
      "inside a Linux terminal.\n\n"
      "## Adaptation Steps\n"
      "1. Restate the problem as concrete engineering work: the agent must install any packages it needs, read "
      "input from the file paths you specify, implement the solution, and write results to the output locations "
      "you specify.\n"
      "2. Create realistic input data files that instantiate the problem, including edge cases and boundary "
      "conditions.\n"
      "3. Write pytest tests that check output file existence, format compliance, numerical accuracy (with "
      "tolerances for floating-point results), and edge-case handling.\n\n";
  p.system += detail::kOutputFormat;
  p.system += "\n";
  p.system += detail::kCriticalRules;
  p.system +=
      "- **Ground Truth:** If a reference solution is supplied, use it only to derive the expected values in the "
      "tests. Never reveal it, or code derived from it, in <prompt> or <files>.\n";

  p.user = "# Task Conversion Request\n";
  if (seed.domain) p.user += "Domain: " + *seed.domain + "\n";
  p.user += "\n## Seed Problem\n";
  p.user += seed.problem;
  if (seed.problem.empty() || seed.problem.back() != '\n') p.user += '\n';
  if (seed.reference_solution) {
    p.user += "\n## Reference Solution\nGround truth for test expectations only; the agent never sees it.\n";
    p.user += kGroundTruthOpen;
    p.user += '\n';
    p.user += *seed.reference_solution;
    if (seed.reference_solution->empty() || seed.reference_solution->back() != '\n') p.user += '\n';
    p.user += kGroundTruthClose;
    p.user += '\n';
  }
  p.user += "\n## Instructions\nConvert the seed problem into a novel, self-contained terminal task using the tags "
            "described above.\n";
  return p;
}

// ---------------------------------------------------------------------------
// Tagged output

struct GeneratedTask {
  std::string prompt;
  std::string tests;
  Weights weights;  // empty means uniform
  std::string info;
  std::map<std::string, std::string> files;
  std::vector<std::string> test_requirements;

  friend bool operator==(const GeneratedTask&, const GeneratedTask&) = default;
};

inline constexpr std::string_view kFileMarker = "--- path:";

namespace detail {

// Content between the first <tag> and the last </tag> after it.
inline std::optional<std::string> extract_tag(std::string_view raw, std::string_view tag) {
  const std::string open = "<" + std::string(tag) + ">";
  const std::string close = "</" + std::string(tag) + ">";
  auto start = raw.find(open);
  if (start == std::string_view::npos) return std::nullopt;
  start += open.size();
  auto end = raw.rfind(close);
  if (end == std::string_view::npos || end < start) return std::nullopt;
  return std::string(raw.substr(start, end - start));
}

inline std::string trimmed(std::string_view s) { return std::string(trim(s)); }

inline std::map<std::string, std::string> parse_files_block(std::string_view body) {
  std::map<std::string, std::string> out;
  std::optional<std::string> current;
  std::string content;
  auto flush = [&] {
    if (!current) return;
    if (!content.empty() && content.back() == '\n') content.pop_back();
    if (!out.emplace(*current, content).second) throw Error(Errc::MalformedFiles, "duplicate file '" + *current + "'");
    content.clear();
  };
  std::size_t pos = 0;
  while (pos < body.size()) {
    auto nl = body.find('\n', pos);
    auto line_end = nl == std::string_view::npos ? body.size() : nl + 1;
    std::string_view line = body.substr(pos, line_end - pos);
    pos = line_end;
    std::string_view bare = line;
    if (!bare.empty() && bare.back() == '\n') bare.remove_suffix(1);
    if (!bare.empty() && bare.back() == '\r') bare.remove_suffix(1);
    if (starts_with(bare, kFileMarker)) {
      flush();
      std::string path(trim(bare.substr(kFileMarker.size())));
      if (!is_safe_relative_path(path)) throw Error(Errc::MalformedFiles, "unsafe file path '" + path + "'");
      current = path;
      continue;
    }
    if (!current) {
      if (!trim(line).empty()) throw Error(Errc::MalformedFiles, "content before the first '--- path:' marker");
      continue;
    }
    content.append(line);
  }
  flush();
  return out;
}

inline std::vector<std::string> parse_requirements(std::string_view body) {
  std::vector<std::string> out;
  auto t = trim(body);
  if (starts_with(t, "[")) {
    try {
      return nlohmann::json::parse(t).get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      // fall through to line splitting
    }
  }
  std::string normalized(body);
  std::replace(normalized.begin(), normalized.end(), ',', '\n');
  for (const auto& piece : split(normalized, '\n')) {
    auto item = trim(piece);
    if (starts_with(item, "- ")) item = trim(item.substr(2));
    if (!item.empty() && !starts_with(item, "#")) out.emplace_back(item);
  }
  return out;
}

}  // namespace detail

[[nodiscard]] inline GeneratedTask parse_generation_output(std::string_view raw) {
  GeneratedTask g;
  auto prompt = detail::extract_tag(raw, "prompt");
  if (!prompt || trim(*prompt).empty()) throw Error(Errc::MissingRequiredTag, "prompt");
  auto tests = detail::extract_tag(raw, "tests");
  if (!tests || trim(*tests).empty()) throw Error(Errc::MissingRequiredTag, "tests");
  g.prompt = detail::trimmed(*prompt);
  g.tests = detail::trimmed(*tests);

  if (auto w = detail::extract_tag(raw, "weights"); w && !trim(*w).empty()) {
    std::string text = detail::trimmed(*w);
    // Tolerate a fenced code block around the JSON.
    if (starts_with(text, "```")) {
      auto first_nl = text.find('\n');
      auto last_fence = text.rfind("```");
      if (first_nl != std::string::npos && last_fence > first_nl) text = text.substr(first_nl + 1, last_fence - first_nl - 1);
    }
    g.weights = parse_weights_json(text);
    for (const auto& [name, value] : g.weights) {
      if (value < Rational(0)) throw Error(Errc::MalformedWeights, "negative weight for '" + name + "'");
    }
  }
  if (auto info = detail::extract_tag(raw, "info")) g.info = detail::trimmed(*info);
  if (auto files = detail::extract_tag(raw, "files")) g.files = detail::parse_files_block(*files);
  if (auto req = detail::extract_tag(raw, "test_requirements")) g.test_requirements = detail::parse_requirements(*req);
  return g;
}

// Canonical form; parse_generation_output inverts it for tasks whose text
// fields carry no leading or trailing whitespace.
[[nodiscard]] inline std::string emit_generation_output(const GeneratedTask& g) {
  std::string out;
  out += "<prompt>\n" + g.prompt + "\n</prompt>\n\n";
  out += "<tests>\n" + g.tests + "\n</tests>\n\n";
  out += "<weights>\n";
  if (!g.weights.empty()) out += write_weights_json(g.weights);
  out += "</weights>\n\n";
  out += "<info>\n" + g.info + "\n</info>\n\n";
  out += "<files>\n";
  for (const auto& [path, content] : g.files) out += std::string(kFileMarker) + " " + path + "\n" + content + "\n";
  out += "</files>\n\n";
  out += "<test_requirements>\n";
  for (const auto& r : g.test_requirements) out += r + "\n";
  out += "</test_requirements>\n";
  return out;
}

// ---------------------------------------------------------------------------
// Leakage

inline constexpr std::size_t kLeakageMinChars = 40;

struct LeakageFinding {
  enum class Kind { TestLineInPrompt, ReferenceSolutionInPrompt };
  Kind kind;
  std::string excerpt;

  friend bool operator==(const LeakageFinding&, const LeakageFinding&) = default;
};

[[nodiscard]] inline std::vector<LeakageFinding> leakage_check(
    const GeneratedTask& gen, const std::optional<std::string>& reference_solution = std::nullopt) {
  std::vector<LeakageFinding> out;
  for (const auto& raw_line : split(gen.tests, '\n')) {
    auto line = trim(raw_line);
    auto visible = static_cast<std::size_t>(
        std::count_if(line.begin(), line.end(), [](unsigned char c) { return !std::isspace(c); }));
    if (visible < kLeakageMinChars) continue;
    if (gen.prompt.find(line) != std::string::npos) {
      out.push_back({LeakageFinding::Kind::TestLineInPrompt, std::string(line)});
    }
  }
  if (reference_solution) {
    auto sol = trim(*reference_solution);
    if (!sol.empty() && gen.prompt.find(sol) != std::string::npos) {
      out.push_back({LeakageFinding::Kind::ReferenceSolutionInPrompt, std::string(sol.substr(0, 80))});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Materialization

inline constexpr std::string_view kGeneratedTestFile = "test_outputs.py";

struct MaterializeContext {
  std::string origin;  // "skill/<domain>" or "seed"
  std::optional<std::string> domain;
  std::optional<std::string> image_ref;
  std::optional<std::string> reference_solution;  // only used for the leakage check
};

// Never attaches a solution. Raises LeakageDetected or InvalidArgument.
[[nodiscard]] inline TaskSpec materialize_task(const GeneratedTask& gen, const MaterializeContext& ctx,
                                               const std::string& id) {
  auto findings = leakage_check(gen, ctx.reference_solution);
  if (!findings.empty()) {
    throw Error(Errc::LeakageDetected, "task '" + id + "': " + std::to_string(findings.size()) +
                                           " finding(s), first: " + findings.front().excerpt);
  }
  TaskSpec task;
  task.id = id;
  task.instruction = gen.prompt;
  task.tests.insert({std::string(kGeneratedTestFile), gen.tests + "\n", false});
  if (!gen.weights.empty()) task.weights = gen.weights;
  for (const auto& [path, content] : gen.files) {
    try {
      task.environment.insert({path, content, false});
    } catch (const Error& e) {
      throw Error(Errc::InvalidArgument, "task '" + id + "': " + e.what());
    }
  }
  task.domain = ctx.domain;
  task.image_ref = ctx.image_ref;
  task.metadata["origin"] = MetaValue::string(ctx.origin);
  if (!gen.info.empty()) task.metadata["info"] = MetaValue::string(gen.info);
  if (!gen.test_requirements.empty()) {
    task.metadata["test_requirements"] = MetaValue::raw(nlohmann::json(gen.test_requirements).dump());
  }
  auto violations = validate_task(task);
  if (!violations.empty()) {
    throw Error(Errc::InvalidArgument, "task '" + id + "' fails validation at " + violations.front().field + " (" +
                                           std::string(to_string(violations.front().rule)) + ")");
  }
  return task;
}

[[nodiscard]] inline TaskSpec materialize_task(const GeneratedTask& gen, const SkillDomain& domain,
                                               const std::string& id) {
  return materialize_task(gen, MaterializeContext{"skill/" + domain.name, domain.name, domain.image_ref, std::nullopt},
                          id);
}

[[nodiscard]] inline TaskSpec materialize_seed_task(const GeneratedTask& gen, const SeedRecord& seed,
                                                    const std::string& id,
                                                    const std::optional<std::string>& image_ref = std::nullopt) {
  return materialize_task(gen, MaterializeContext{"seed", seed.domain, image_ref, seed.reference_solution}, id);
}

// Per-task generation seed for campaign parallelism.
[[nodiscard]] constexpr std::uint64_t task_seed(std::uint64_t campaign_seed, std::uint64_t task_index) noexcept {
  return campaign_seed ^ task_index;
}

}  // namespace termgen
