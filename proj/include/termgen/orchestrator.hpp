#pragma once

// Campaign engine: configuration, a bounded worker pool over task x trial
// episodes with resumable on-disk persistence, batch generation, and score
// aggregation.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "json.hpp"
#include "termgen/adapters.hpp"
#include "termgen/agent_protocol.hpp"
#include "termgen/error.hpp"
#include "termgen/model_client.hpp"
#include "termgen/rollout.hpp"
#include "termgen/session.hpp"
#include "termgen/taskgen.hpp"
#include "termgen/task_model.hpp"
#include "termgen/util.hpp"

namespace termgen {

// ---------------------------------------------------------------------------
// Config

// Replaces ${NAME} in every string value with the environment variable.
// Unset variables raise InvalidArgument.
inline void interpolate_env(nlohmann::json& j) {
  static const std::regex var(R"(\$\{([A-Za-z_][A-Za-z0-9_]*)\})");
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    std::string out;
    auto begin = std::sregex_iterator(s.begin(), s.end(), var);
    std::size_t last = 0;
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const auto& m = *it;
      out.append(s, last, static_cast<std::size_t>(m.position(0)) - last);
      const char* value = std::getenv(m[1].str().c_str());
      if (!value) throw Error(Errc::InvalidArgument, "environment variable " + m[1].str() + " is not set");
      out += value;
      last = static_cast<std::size_t>(m.position(0) + m.length(0));
    }
    out.append(s, last, std::string::npos);
    j = out;
  } else if (j.is_object() || j.is_array()) {
    for (auto& child : j) interpolate_env(child);
  }
}

struct ModelConfig {
  std::string kind = "mock";  // mock | http
  std::optional<fs::path> mock_script;
  HttpModelConfig http;
  std::optional<std::string> api_key_env;
};

struct CampaignConfig {
  fs::path tasks_dir;
  fs::path out_dir;
  ModelConfig model;
  SessionConfig session;
  EpisodeLimits limits;
  int workers = 1;
  int trials_per_task = 1;
  std::uint64_t seed = 0;
  HistoryMode history_mode = HistoryMode::Fresh;
  int error_budget = 3;
  std::optional<fs::path> template_path;
  bool verify = false;
  TestRunOptions test_runner;
  std::optional<std::size_t> max_episodes;  // stop after this many executions
};

inline void validate(const CampaignConfig& c) {
  if (c.workers < 1) throw Error(Errc::InvalidArgument, "workers must be >= 1");
  if (c.trials_per_task < 1) throw Error(Errc::InvalidArgument, "trials_per_task must be >= 1");
  validate(c.limits);
  validate(c.session);
}

// A parsed config document plus the directory its relative paths resolve
// against.
struct ConfigDoc {
  nlohmann::json doc = nlohmann::json::object();
  fs::path base = fs::current_path();

  static ConfigDoc load(const fs::path& path) {
    ConfigDoc c;
    try {
      c.doc = nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, "config " + path.string() + ": " + e.what());
    }
    if (!c.doc.is_object()) throw Error(Errc::InvalidArgument, "config " + path.string() + " must be a JSON object");
    interpolate_env(c.doc);
    c.base = fs::absolute(path).parent_path();
    return c;
  }

  [[nodiscard]] fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_relative() ? base / path : path;
  }

  [[nodiscard]] const nlohmann::json& section(const std::string& name) const {
    static const nlohmann::json empty = nlohmann::json::object();
    auto it = doc.find(name);
    return it == doc.end() ? empty : *it;
  }
};

[[nodiscard]] inline SessionConfig session_config_from_json(const nlohmann::json& j, const ConfigDoc& doc) {
  SessionConfig s;
  s.backend = backend_from_string(j.value("backend", std::string("scripted")));
  if (j.contains("script")) s.script_path = doc.resolve(j.at("script").get<std::string>()).string();
  if (j.contains("image_ref")) s.image_ref = j.at("image_ref").get<std::string>();
  s.capture_window = j.value("capture_window", s.capture_window);
  s.command_timeout = j.value("command_timeout", s.command_timeout);
  s.root = j.value("root", s.root);
  s.shell = j.value("shell", s.shell);
  s.workdir_template = j.value("workdir_template", s.workdir_template);
  s.scripted_prompt = j.value("scripted_prompt", s.scripted_prompt);
  s.runtime = j.value("runtime", s.runtime);
  s.keep_workdir = j.value("keep_workdir", s.keep_workdir);
  if (j.contains("runtime_args")) {
    const auto& a = j.at("runtime_args");
    auto take = [&](const char* key, std::vector<std::string>& dst) {
      if (a.contains(key)) dst = a.at(key).get<std::vector<std::string>>();
    };
    take("inspect", s.runtime_args.inspect);
    take("create", s.runtime_args.create);
    take("copy", s.runtime_args.copy);
    take("shell", s.runtime_args.shell);
    take("exec", s.runtime_args.exec);
    take("remove", s.runtime_args.remove);
  }
  return s;
}

[[nodiscard]] inline ModelConfig model_config_from_json(const nlohmann::json& j, const ConfigDoc& doc) {
  ModelConfig m;
  m.kind = j.value("kind", std::string("mock"));
  if (m.kind != "mock" && m.kind != "http") throw Error(Errc::InvalidArgument, "unknown model kind '" + m.kind + "'");
  if (j.contains("script")) m.mock_script = doc.resolve(j.at("script").get<std::string>());
  m.http.endpoint = j.value("endpoint", m.http.endpoint);
  m.http.model = j.value("model", m.http.model);
  m.http.timeout_seconds = j.value("timeout_seconds", m.http.timeout_seconds);
  m.http.auth_header = j.value("auth_header", m.http.auth_header);
  if (j.contains("api_key")) m.http.api_key = j.at("api_key").get<std::string>();
  if (j.contains("api_key_env")) m.api_key_env = j.at("api_key_env").get<std::string>();
  if (j.contains("extra_body")) m.http.extra_body = j.at("extra_body");
  if (j.contains("retry")) {
    const auto& r = j.at("retry");
    m.http.retry.attempts = r.value("attempts", m.http.retry.attempts);
    m.http.retry.initial_backoff_seconds = r.value("initial_backoff_seconds", m.http.retry.initial_backoff_seconds);
    m.http.retry.multiplier = r.value("multiplier", m.http.retry.multiplier);
  }
  return m;
}

[[nodiscard]] inline CampaignConfig campaign_config_from_json(const ConfigDoc& doc) {
  const auto& j = doc.doc;
  try {
    CampaignConfig c;
    if (j.contains("tasks_dir")) c.tasks_dir = doc.resolve(j.at("tasks_dir").get<std::string>());
    if (j.contains("out_dir")) c.out_dir = doc.resolve(j.at("out_dir").get<std::string>());
    c.model = model_config_from_json(doc.section("model"), doc);
    c.session = session_config_from_json(doc.section("session"), doc);
    const auto& lim = doc.section("limits");
    c.limits.max_turns = lim.value("max_turns", c.limits.max_turns);
    c.limits.max_wall_seconds = lim.value("max_wall_seconds", c.limits.max_wall_seconds);
    c.limits.per_wait_cap_seconds = lim.value("per_wait_cap_seconds", c.limits.per_wait_cap_seconds);
    c.workers = j.value("workers", c.workers);
    c.trials_per_task = j.value("trials_per_task", c.trials_per_task);
    c.seed = j.value("seed", c.seed);
    c.history_mode = history_mode_from_string(j.value("history_mode", std::string("fresh")));
    c.error_budget = j.value("error_budget", c.error_budget);
    if (j.contains("template")) c.template_path = doc.resolve(j.at("template").get<std::string>());
    c.verify = j.value("verify", c.verify);
    const auto& tr = doc.section("test_runner");
    c.test_runner.runner_command = tr.value("command", c.test_runner.runner_command);
    c.test_runner.timeout_seconds = tr.value("timeout_seconds", c.test_runner.timeout_seconds);
    if (j.contains("max_episodes")) c.max_episodes = j.at("max_episodes").get<std::size_t>();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::InvalidArgument, std::string("config: ") + e.what());
  }
}

[[nodiscard]] inline std::shared_ptr<ModelClient> make_model_client(const ModelConfig& m) {
  if (m.kind == "mock") {
    if (!m.mock_script) throw Error(Errc::InvalidArgument, "mock model needs 'script'");
    return std::make_shared<MockModelClient>(MockModelClient::from_file(*m.mock_script));
  }
  HttpModelConfig http = m.http;
  if (m.api_key_env) {
    const char* key = std::getenv(m.api_key_env->c_str());
    if (!key) throw Error(Errc::InvalidArgument, "environment variable " + *m.api_key_env + " is not set");
    http.api_key = key;
  }
  return std::make_shared<HttpModelClient>(std::move(http));
}

[[nodiscard]] inline PromptTemplate load_template(const std::optional<fs::path>& path) {
  return path ? PromptTemplate(read_file(*path)) : PromptTemplate::terminus();
}

// ---------------------------------------------------------------------------
// Task discovery

struct LoadedTasks {
  std::vector<TaskSpec> tasks;  // sorted by id
  std::vector<std::pair<std::string, std::string>> failures;
};

// Accepts a single task directory or a directory of task directories.
[[nodiscard]] inline LoadedTasks load_tasks(const fs::path& dir) {
  LoadedTasks out;
  if (!fs::is_directory(dir)) throw Error(Errc::IoFailure, "not a directory: " + dir.string());
  std::vector<fs::path> candidates;
  if (fs::exists(dir / "instruction.md") || fs::exists(dir / "task.toml")) {
    candidates.push_back(dir);
  } else {
    for (const auto& e : fs::directory_iterator(dir)) {
      if (e.is_directory() && e.path().filename().string().front() != '.') candidates.push_back(e.path());
    }
  }
  std::sort(candidates.begin(), candidates.end());
  for (const auto& p : candidates) {
    try {
      TaskSpec task = parse_task_dir(p);
      auto violations = validate_task(task);
      if (!violations.empty()) {
        out.failures.emplace_back(p.filename().string(), violations.front().field + ": " +
                                                             std::string(to_string(violations.front().rule)));
        continue;
      }
      out.tasks.push_back(std::move(task));
    } catch (const Error& e) {
      out.failures.emplace_back(p.filename().string(), e.what());
    }
  }
  std::sort(out.tasks.begin(), out.tasks.end(), [](const TaskSpec& a, const TaskSpec& b) { return a.id < b.id; });
  return out;
}

// ---------------------------------------------------------------------------
// Episode persistence
//   <out>/trajs/<task>/<trial>.json         trajectory
//   <out>/trajs/<task>/<trial>.report.json  test report (when verified)
//   <out>/trajs/<task>/<trial>.done         status marker, written last

struct EpisodePaths {
  fs::path trajectory;
  fs::path report;
  fs::path marker;
};

[[nodiscard]] inline EpisodePaths episode_paths(const fs::path& out_dir, const std::string& task_id, int trial) {
  fs::path dir = out_dir / "trajs" / task_id;
  std::string stem = std::to_string(trial);
  return {dir / (stem + ".json"), dir / (stem + ".report.json"), dir / (stem + ".done")};
}

struct StoredEpisode {
  Trajectory trajectory;
  std::optional<TestReport> report;
};

// Trajectories under <dir>/trajs (or <dir> itself) that have a status
// marker, sorted by (task, trial).
[[nodiscard]] inline std::vector<StoredEpisode> load_episodes(const fs::path& dir) {
  fs::path root = fs::is_directory(dir / "trajs") ? dir / "trajs" : dir;
  std::vector<fs::path> files;
  if (fs::is_directory(root)) {
    for (const auto& e : fs::recursive_directory_iterator(root)) {
      if (!e.is_regular_file()) continue;
      const auto name = e.path().filename().string();
      if (ends_with(name, ".json") && !ends_with(name, ".report.json")) files.push_back(e.path());
    }
  }
  std::vector<StoredEpisode> out;
  for (const auto& f : files) {
    fs::path marker = f;
    marker.replace_extension(".done");
    if (!fs::exists(marker)) continue;
    StoredEpisode ep{load_trajectory(f), std::nullopt};
    fs::path report = f;
    report.replace_extension(".report.json");
    if (fs::exists(report)) {
      try {
        ep.report = test_report_from_json(nlohmann::json::parse(read_file(report)));
      } catch (const nlohmann::json::exception& e) {
        throw Error(Errc::InvalidArgument, report.string() + ": " + e.what());
      }
    }
    out.push_back(std::move(ep));
  }
  std::sort(out.begin(), out.end(), [](const StoredEpisode& a, const StoredEpisode& b) {
    return std::tie(a.trajectory.task_id, a.trajectory.trial) < std::tie(b.trajectory.task_id, b.trajectory.trial);
  });
  return out;
}

inline void write_episode(const fs::path& out_dir, const Trajectory& traj, const std::optional<TestReport>& report,
                          const std::optional<std::string>& verify_error = std::nullopt) {
  auto paths = episode_paths(out_dir, traj.task_id, traj.trial);
  write_file_atomic(paths.trajectory, serialize(traj));
  if (report) write_file_atomic(paths.report, to_json(*report).dump(2) + "\n");
  std::string marker = std::string(to_string(traj.status)) + "\n";
  if (verify_error) marker += "verify_error: " + *verify_error + "\n";
  write_file_atomic(paths.marker, marker);
}

// ---------------------------------------------------------------------------
// Campaign

struct CampaignHooks {
  SessionFactory session_factory;                            // default: start_session
  std::function<std::shared_ptr<ModelClient>()> model_factory;  // called once per worker
};

struct CampaignReport {
  std::size_t planned = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;  // already had a status marker
  std::size_t completed = 0;
  std::size_t incomplete = 0;
  std::size_t error = 0;
  std::size_t verified = 0;
  std::size_t verify_failures = 0;
  std::size_t peak_live_sessions = 0;
  int workers = 1;
  std::vector<std::pair<std::string, std::string>> task_load_failures;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["planned"] = planned;
    j["executed"] = executed;
    j["skipped"] = skipped;
    j["completed"] = completed;
    j["incomplete"] = incomplete;
    j["error"] = error;
    j["verified"] = verified;
    j["verify_failures"] = verify_failures;
    j["peak_live_sessions"] = peak_live_sessions;
    j["workers"] = workers;
    j["task_load_failures"] = nlohmann::ordered_json::array();
    for (const auto& [id, why] : task_load_failures) j["task_load_failures"].push_back({{"task", id}, {"reason", why}});
    return j;
  }
};

namespace detail {

class LiveCounter {
 public:
  void enter() {
    std::size_t now = ++live_;
    std::size_t prev = peak_.load();
    while (now > prev && !peak_.compare_exchange_weak(prev, now)) {
    }
  }
  void leave() { --live_; }
  [[nodiscard]] std::size_t peak() const { return peak_.load(); }

 private:
  std::atomic<std::size_t> live_{0};
  std::atomic<std::size_t> peak_{0};
};

}  // namespace detail

[[nodiscard]] inline CampaignReport run_campaign(const CampaignConfig& config, const CampaignHooks& hooks = {}) {
  validate(config);
  LoadedTasks loaded = load_tasks(config.tasks_dir);
  if (loaded.tasks.empty()) throw Error(Errc::EmptyInput, "no valid tasks under " + config.tasks_dir.string());
  const PromptTemplate tmpl = load_template(config.template_path);
  SessionFactory factory = hooks.session_factory ? hooks.session_factory : SessionFactory(&start_session);
  auto model_factory = hooks.model_factory;
  if (!model_factory) {
    auto shared = config.model.kind == "mock" ? make_model_client(config.model) : nullptr;
    model_factory = [shared, &config] { return shared ? shared : make_model_client(config.model); };
  }

  CampaignReport report;
  report.workers = config.workers;
  report.task_load_failures = loaded.failures;

  struct Job {
    const TaskSpec* task;
    int trial;
  };
  std::vector<Job> jobs;
  for (const auto& t : loaded.tasks) {
    for (int trial = 0; trial < config.trials_per_task; ++trial) {
      ++report.planned;
      if (fs::exists(episode_paths(config.out_dir, t.id, trial).marker)) {
        ++report.skipped;
        continue;
      }
      jobs.push_back({&t, trial});
    }
  }

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> budget{config.max_episodes.value_or(SIZE_MAX)};
  std::mutex tally_mutex;
  detail::LiveCounter live;
  std::vector<std::string> worker_errors;

  auto worker = [&] {
    std::shared_ptr<ModelClient> model;
    try {
      model = model_factory();
    } catch (const Error& e) {
      std::lock_guard lock(tally_mutex);
      worker_errors.emplace_back(e.what());
      return;
    }
    while (true) {
      std::size_t i = next++;
      if (i >= jobs.size()) return;
      std::size_t left = budget.load();
      do {
        if (left == 0) return;
      } while (!budget.compare_exchange_weak(left, left - 1));
      const Job& job = jobs[i];
      EpisodeOptions options;
      options.history_mode = config.history_mode;
      options.error_budget = config.error_budget;
      options.trial = job.trial;

      Trajectory traj;
      std::optional<TestReport> test_report;
      std::optional<std::string> verify_error;
      std::unique_ptr<Session> session;
      try {
        session = factory(*job.task, config.session);
      } catch (const Error& e) {
        traj.task_id = job.task->id;
        traj.trial = job.trial;
        traj.instruction = job.task->instruction;
        traj.history_mode = config.history_mode;
        traj.origin = origin_of(*job.task);
        traj.status = Status::Error;
        traj.note = e.what();
      }
      if (session) {
        live.enter();
        traj = run_episode_in(*session, *job.task, *model, config.limits, tmpl, options);
        if (config.verify && !job.task->tests.empty()) {
          try {
            test_report = run_tests_in(*session, *job.task, config.test_runner);
          } catch (const Error& e) {
            verify_error = e.what();
          }
        }
        session->stop();
        live.leave();
      }
      write_episode(config.out_dir, traj, test_report, verify_error);

      std::lock_guard lock(tally_mutex);
      ++report.executed;
      switch (traj.status) {
        case Status::Completed: ++report.completed; break;
        case Status::Incomplete: ++report.incomplete; break;
        case Status::Error: ++report.error; break;
      }
      if (test_report) ++report.verified;
      if (verify_error) ++report.verify_failures;
    }
  };

  const int n_workers = std::max(1, std::min<int>(config.workers, static_cast<int>(std::max<std::size_t>(jobs.size(), 1))));
  std::vector<std::thread> pool;
  for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (!worker_errors.empty()) throw Error(Errc::ModelFailure, "model client setup failed: " + worker_errors.front());
  report.peak_live_sessions = live.peak();
  return report;
}

// ---------------------------------------------------------------------------
// Evaluation

struct EvalRecord {
  std::string task_id;
  int trial = 0;
  double score = 0;  // in [0, 1]; a pass flag is 0 or 1
};

struct EvalSummary {
  std::map<std::string, double> per_task;  // mean over trials, in [0, 1]
  double overall_mean = 0;                 // percent
  double stderr_pct = 0;                   // percent
  std::size_t n_reports = 0;
  bool single_task = false;  // stderr undefined; reported as 0

  [[nodiscard]] std::string headline() const {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.1f \xC2\xB1 %.1f", overall_mean, stderr_pct);
    return buf;
  }

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["overall_mean"] = overall_mean;
    j["stderr"] = stderr_pct;
    j["n_tasks"] = per_task.size();
    j["n_reports"] = n_reports;
    j["single_task"] = single_task;
    j["headline"] = headline();
    j["per_task"] = nlohmann::ordered_json::object();
    for (const auto& [id, m] : per_task) j["per_task"][id] = m;
    return j;
  }
};

// Mean of per-task means, with the standard error of those means (sample
// standard deviation over sqrt(#tasks)), both scaled to percent.
[[nodiscard]] inline EvalSummary aggregate_eval(const std::vector<EvalRecord>& records) {
  if (records.empty()) throw Error(Errc::EmptyInput, "no evaluation reports");
  std::map<std::string, std::pair<double, std::size_t>> sums;
  for (const auto& r : records) {
    auto& [sum, n] = sums[r.task_id];
    sum += r.score;
    ++n;
  }
  EvalSummary s;
  s.n_reports = records.size();
  for (const auto& [id, acc] : sums) s.per_task[id] = acc.first / static_cast<double>(acc.second);
  const auto k = static_cast<double>(s.per_task.size());
  double mean = 0;
  for (const auto& [id, m] : s.per_task) mean += m;
  mean /= k;
  s.overall_mean = mean * 100.0;
  if (s.per_task.size() < 2) {
    s.single_task = true;
    s.stderr_pct = 0;
    return s;
  }
  double ss = 0;
  for (const auto& [id, m] : s.per_task) ss += (m - mean) * (m - mean);
  const double sd = std::sqrt(ss / (k - 1));
  s.stderr_pct = sd / std::sqrt(k) * 100.0;
  return s;
}

[[nodiscard]] inline std::vector<EvalRecord> eval_records_from_episodes(const std::vector<StoredEpisode>& episodes) {
  std::vector<EvalRecord> out;
  for (const auto& ep : episodes) {
    if (ep.report) out.push_back({ep.trajectory.task_id, ep.trajectory.trial, ep.report->weighted_score.to_double()});
  }
  return out;
}

// JSONL lines {"task_id", "trial"?, "score" | "passed"}.
[[nodiscard]] inline std::vector<EvalRecord> read_eval_records(const fs::path& path) {
  std::vector<EvalRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = nlohmann::json::parse(line);
      EvalRecord r;
      r.task_id = j.at("task_id").get<std::string>();
      r.trial = j.value("trial", 0);
      if (j.contains("score")) {
        r.score = j.at("score").get<double>();
      } else {
        r.score = j.at("passed").get<bool>() ? 1.0 : 0.0;
      }
      if (!(r.score >= 0 && r.score <= 1)) throw Error(Errc::InvalidArgument, "score outside [0, 1]");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation campaigns

struct GenerationSummary {
  std::size_t requested = 0;
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::vector<std::pair<std::string, std::string>> failures;  // (task id, "Errc: message")
  std::map<std::string, std::size_t> failure_codes;

  [[nodiscard]] nlohmann::ordered_json to_json() const {
    nlohmann::ordered_json j;
    j["requested"] = requested;
    j["written"] = written;
    j["skipped"] = skipped;
    j["failure_codes"] = nlohmann::ordered_json::object();
    for (const auto& [code, n] : failure_codes) j["failure_codes"][code] = n;
    j["failures"] = nlohmann::ordered_json::array();
    for (const auto& [id, why] : failures) j["failures"].push_back({{"task", id}, {"reason", why}});
    return j;
  }
};

namespace detail {

inline std::string slug(std::string_view s) {
  std::string out = sanitize_task_id(s);
  return out;
}

inline void write_task_atomically(const TaskSpec& task, const fs::path& out_dir) {
  fs::path tmp = out_dir / ("." + task.id + ".tmp");
  std::error_code ec;
  fs::remove_all(tmp, ec);
  write_task_dir(task, tmp);
  fs::rename(tmp, out_dir / task.id, ec);
  if (ec) throw Error(Errc::IoFailure, "rename into " + (out_dir / task.id).string() + ": " + ec.message());
}

// Runs `make(i)` for i in [0, count) on a bounded pool; `make` returns the
// task id it would write and a callable producing the task.
template <typename Make>
GenerationSummary run_generation_pool(std::size_t count, int workers, const fs::path& out_dir, Make make) {
  GenerationSummary summary;
  summary.requested = count;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  std::atomic<std::size_t> next{0};
  std::mutex m;
  auto worker = [&] {
    while (true) {
      std::size_t i = next++;
      if (i >= count) return;
      auto [id, produce] = make(i);
      if (fs::exists(out_dir / id)) {
        std::lock_guard lock(m);
        ++summary.skipped;
        continue;
      }
      try {
        TaskSpec task = produce();
        write_task_atomically(task, out_dir);
        std::lock_guard lock(m);
        ++summary.written;
      } catch (const Error& e) {
        std::lock_guard lock(m);
        summary.failures.emplace_back(id, std::string(to_string(e.code())) + ": " + e.what());
        ++summary.failure_codes[std::string(to_string(e.code()))];
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < std::max(1, workers); ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  std::sort(summary.failures.begin(), summary.failures.end());
  return summary;
}

}  // namespace detail

struct SkillGenerationConfig {
  std::size_t count = 0;
  std::uint64_t seed = 0;
  int workers = 1;
  std::string dockerfile;  // shown to the generator; empty allowed
  fs::path out_dir;
};

// Task i uses the i-th active domain round-robin and seed campaign ^ i.
[[nodiscard]] inline GenerationSummary generate_skill_tasks(const DomainRegistry& registry, ModelClient& model,
                                                            const SkillGenerationConfig& config) {
  auto domains = registry.active();
  if (domains.empty()) throw Error(Errc::EmptyInput, "no active domains");
  return detail::run_generation_pool(config.count, config.workers, config.out_dir, [&](std::size_t i) {
    const SkillDomain& domain = *domains[i % domains.size()];
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "-%05zu", i);
    std::string id = "skill-" + detail::slug(domain.name) + suffix;
    auto produce = [&, i, id] {
      auto skills = sample_skills(domain, task_seed(config.seed, i));
      auto prompt = build_skill_prompt(domain, skills, config.dockerfile);
      CompletionRequest req{{{"system", prompt.system}, {"user", prompt.user}}, id, 0};
      std::string raw = model.complete(req);
      TaskSpec task = materialize_task(parse_generation_output(raw), domain, id);
      task.metadata["skills"] = MetaValue::raw(nlohmann::json(skills).dump());
      return task;
    };
    return std::pair<std::string, std::function<TaskSpec()>>(id, produce);
  });
}

struct SeedGenerationConfig {
  int workers = 1;
  fs::path out_dir;
  std::optional<std::string> image_ref;
};

[[nodiscard]] inline std::vector<SeedRecord> read_seed_records(const fs::path& path) {
  std::vector<SeedRecord> out;
  std::size_t line_no = 0;
  for (const auto& line : read_lines(path)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(seed_record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw Error(Errc::InvalidArgument, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

[[nodiscard]] inline GenerationSummary generate_seed_tasks(const std::vector<SeedRecord>& seeds, ModelClient& model,
                                                           const SeedGenerationConfig& config) {
  return detail::run_generation_pool(seeds.size(), config.workers, config.out_dir, [&](std::size_t i) {
    const SeedRecord& seed = seeds[i];
    char suffix[16];
    std::snprintf(suffix, sizeof suffix, "%05zu", i);
    std::string id = "seed-" + (seed.id.empty() ? std::string(suffix) : detail::slug(seed.id));
    auto produce = [&, id] {
      auto prompt = build_seed_prompt(seed);
      CompletionRequest req{{{"system", prompt.system}, {"user", prompt.user}}, id, 0};
      std::string raw = model.complete(req);
      return materialize_seed_task(parse_generation_output(raw), seed, id, config.image_ref);
    };
    return std::pair<std::string, std::function<TaskSpec()>>(id, produce);
  });
}

}  // namespace termgen
