#pragma once

// The termgen command line. Every subcommand accepts --config <file.json>;
// explicit flags override config values. Exit codes: 0 success, 1 fatal
// error, 2 usage error.

#include <iostream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "termgen/adapters.hpp"
#include "termgen/error.hpp"
#include "termgen/filters.hpp"
#include "termgen/orchestrator.hpp"
#include "termgen/rollout.hpp"
#include "termgen/sft_export.hpp"
#include "termgen/taskgen.hpp"
#include "termgen/util.hpp"

namespace termgen {

namespace cli_detail {

struct Common {
  std::string config;

  [[nodiscard]] ConfigDoc doc() const { return config.empty() ? ConfigDoc{} : ConfigDoc::load(config); }
};

template <typename T>
T pick(const CLI::Option* flag, const T& flag_value, const nlohmann::json& section, const char* key, const T& fallback) {
  if (flag && flag->count() > 0) return flag_value;
  if (section.contains(key)) return section.at(key).get<T>();
  return fallback;
}

inline fs::path pick_path(const CLI::Option* flag, const std::string& flag_value, const ConfigDoc& doc,
                          const nlohmann::json& section, const char* key) {
  if (flag && flag->count() > 0) return fs::path(flag_value);
  if (section.contains(key)) return doc.resolve(section.at(key).get<std::string>());
  return {};
}

inline void require(const fs::path& p, const char* what) {
  if (p.empty()) throw CLI::RequiredError(what);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  for (const auto& piece : split(s, ',')) {
    auto t = trim(piece);
    if (!t.empty()) out.emplace_back(t);
  }
  return out;
}

inline void print_json(std::ostream& out, const nlohmann::ordered_json& j) { out << j.dump(2) << "\n"; }

}  // namespace cli_detail

inline int cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  using namespace cli_detail;
  CLI::App app{"termgen: terminal-agent task synthesis, rollout, filtering, and SFT export"};
  app.name("termgen");
  app.require_subcommand(1, 1);

  std::function<void()> action;

  // validate ---------------------------------------------------------------
  auto* validate_cmd = app.add_subcommand("validate", "Check task directories");
  Common validate_common;
  std::vector<std::string> validate_paths;
  validate_cmd->add_option("--config", validate_common.config, "Config file");
  validate_cmd->add_option("paths", validate_paths, "Task directories or directories of tasks")->required();
  validate_cmd->callback([&] {
    action = [&] {
      bool all_ok = true;
      for (const auto& p : validate_paths) {
        auto loaded = load_tasks(p);
        for (const auto& t : loaded.tasks) out << "ok " << t.id << "\n";
        for (const auto& [id, why] : loaded.failures) {
          out << "invalid " << id << ": " << why << "\n";
          all_ok = false;
        }
        if (loaded.tasks.empty() && loaded.failures.empty()) {
          out << "invalid " << p << ": no tasks found\n";
          all_ok = false;
        }
      }
      if (!all_ok) throw Error(Errc::InvalidArgument, "validation failed");
    };
  });

  // adapt ------------------------------------------------------------------
  auto* adapt_cmd = app.add_subcommand("adapt", "Wrap math/code/SWE prompt records into tasks");
  Common adapt_common;
  std::string adapt_input, adapt_out, adapt_dockerfile;
  adapt_cmd->add_option("--config", adapt_common.config, "Config file");
  auto* adapt_input_opt = adapt_cmd->add_option("--input", adapt_input, "Prompt records (JSONL)");
  auto* adapt_out_opt = adapt_cmd->add_option("--out", adapt_out, "Output tasks directory");
  auto* adapt_docker_opt = adapt_cmd->add_option("--dockerfile", adapt_dockerfile, "Dockerfile for adapted tasks");
  adapt_cmd->callback([&] {
    action = [&] {
      auto doc = adapt_common.doc();
      const auto& sec = doc.section("adapt");
      fs::path input = pick_path(adapt_input_opt, adapt_input, doc, sec, "input");
      fs::path outdir = pick_path(adapt_out_opt, adapt_out, doc, sec, "out_dir");
      require(input, "--input");
      require(outdir, "--out");
      AdapterOptions options;
      fs::path dockerfile = pick_path(adapt_docker_opt, adapt_dockerfile, doc, sec, "dockerfile");
      if (!dockerfile.empty()) options.dockerfile = read_file(dockerfile);
      std::vector<std::pair<std::string, std::string>> read_failures;
      auto records = read_prompt_records(input, &read_failures);
      auto summary = adapt_corpus(records, outdir, options);
      for (auto& f : read_failures) summary.failures.push_back(std::move(f));
      print_json(out, summary.to_json());
    };
  });

  // generate ---------------------------------------------------------------
  auto* gen_cmd = app.add_subcommand("generate", "Synthesize tasks with a generator model");
  gen_cmd->require_subcommand(1, 1);
  Common gen_common;
  std::string gen_out, gen_mock;
  int gen_workers = 1;
  gen_cmd->add_option("--config", gen_common.config, "Config file");
  auto* gen_out_opt = gen_cmd->add_option("--out", gen_out, "Output tasks directory");
  auto* gen_workers_opt = gen_cmd->add_option("--workers", gen_workers, "Parallel generations")->check(CLI::PositiveNumber);
  auto* gen_mock_opt = gen_cmd->add_option("--mock-script", gen_mock, "Use a scripted mock model");

  auto gen_model = [&](const ConfigDoc& doc) {
    ModelConfig m = model_config_from_json(doc.section("model"), doc);
    if (gen_mock_opt->count() > 0) {
      m.kind = "mock";
      m.mock_script = gen_mock;
    }
    return make_model_client(m);
  };

  auto* skill_cmd = gen_cmd->add_subcommand("skill", "Skill-based generation");
  std::size_t skill_count = 0;
  std::uint64_t skill_seed = 0;
  std::string skill_registry, skill_domains, skill_dockerfile;
  auto* skill_count_opt = skill_cmd->add_option("--count", skill_count, "Number of tasks");
  auto* skill_seed_opt = skill_cmd->add_option("--seed", skill_seed, "Campaign seed");
  auto* skill_registry_opt = skill_cmd->add_option("--registry", skill_registry, "Domain registry JSON");
  auto* skill_domains_opt = skill_cmd->add_option("--domains", skill_domains, "Comma-separated active domains");
  auto* skill_docker_opt = skill_cmd->add_option("--dockerfile", skill_dockerfile, "Dockerfile shown to the generator");
  skill_cmd->callback([&] {
    action = [&] {
      auto doc = gen_common.doc();
      const auto& sec = doc.section("generate");
      fs::path registry_path = pick_path(skill_registry_opt, skill_registry, doc, sec, "registry");
      DomainRegistry registry = registry_path.empty() ? builtin_domains() : load_domain_registry(registry_path);
      std::string domains = pick<std::string>(skill_domains_opt, skill_domains, sec, "domains", "");
      if (!domains.empty()) registry.set_active(split_list(domains));
      SkillGenerationConfig c;
      c.count = pick<std::size_t>(skill_count_opt, skill_count, sec, "count", 0);
      c.seed = pick<std::uint64_t>(skill_seed_opt, skill_seed, sec, "seed", 0);
      c.workers = pick<int>(gen_workers_opt, gen_workers, sec, "workers", 1);
      c.out_dir = pick_path(gen_out_opt, gen_out, doc, sec, "out_dir");
      require(c.out_dir, "--out");
      fs::path dockerfile = pick_path(skill_docker_opt, skill_dockerfile, doc, sec, "dockerfile");
      if (!dockerfile.empty()) c.dockerfile = read_file(dockerfile);
      auto model = gen_model(doc);
      print_json(out, generate_skill_tasks(registry, *model, c).to_json());
    };
  });

  auto* seed_cmd = gen_cmd->add_subcommand("seed", "Seed-based generation");
  std::string seed_file, seed_image;
  auto* seed_file_opt = seed_cmd->add_option("--seeds", seed_file, "Seed records (JSONL)");
  auto* seed_image_opt = seed_cmd->add_option("--image-ref", seed_image, "Image reference for generated tasks");
  seed_cmd->callback([&] {
    action = [&] {
      auto doc = gen_common.doc();
      const auto& sec = doc.section("generate");
      fs::path seeds = pick_path(seed_file_opt, seed_file, doc, sec, "seeds");
      require(seeds, "--seeds");
      SeedGenerationConfig c;
      c.workers = pick<int>(gen_workers_opt, gen_workers, sec, "workers", 1);
      c.out_dir = pick_path(gen_out_opt, gen_out, doc, sec, "out_dir");
      require(c.out_dir, "--out");
      std::string image = pick<std::string>(seed_image_opt, seed_image, sec, "image_ref", "");
      if (!image.empty()) c.image_ref = image;
      auto model = gen_model(doc);
      print_json(out, generate_seed_tasks(read_seed_records(seeds), *model, c).to_json());
    };
  });

  // rollout ----------------------------------------------------------------
  auto* rollout_cmd = app.add_subcommand("rollout", "Collect trajectories over a task directory");
  Common rollout_common;
  std::string ro_tasks, ro_out, ro_mock, ro_backend, ro_script, ro_history;
  int ro_workers = 1, ro_trials = 1;
  std::size_t ro_max = 0;
  bool ro_verify = false;
  rollout_cmd->add_option("--config", rollout_common.config, "Config file");
  auto* ro_tasks_opt = rollout_cmd->add_option("--tasks", ro_tasks, "Tasks directory");
  auto* ro_out_opt = rollout_cmd->add_option("--out", ro_out, "Output directory");
  auto* ro_workers_opt = rollout_cmd->add_option("--workers", ro_workers, "Concurrent sessions")->check(CLI::PositiveNumber);
  auto* ro_trials_opt = rollout_cmd->add_option("--trials", ro_trials, "Trials per task")->check(CLI::PositiveNumber);
  auto* ro_max_opt = rollout_cmd->add_option("--max-episodes", ro_max, "Stop after this many episodes");
  auto* ro_verify_opt = rollout_cmd->add_flag("--verify", ro_verify, "Run task tests after each episode");
  auto* ro_mock_opt = rollout_cmd->add_option("--mock-script", ro_mock, "Use a scripted mock model");
  auto* ro_backend_opt = rollout_cmd->add_option("--backend", ro_backend, "scripted | local_pty | container");
  auto* ro_script_opt = rollout_cmd->add_option("--script", ro_script, "Scripted terminal transcript(s)");
  auto* ro_history_opt = rollout_cmd->add_option("--history", ro_history, "fresh | chat");
  rollout_cmd->callback([&] {
    action = [&] {
      auto doc = rollout_common.doc();
      CampaignConfig c = campaign_config_from_json(doc);
      if (ro_tasks_opt->count()) c.tasks_dir = ro_tasks;
      if (ro_out_opt->count()) c.out_dir = ro_out;
      if (ro_workers_opt->count()) c.workers = ro_workers;
      if (ro_trials_opt->count()) c.trials_per_task = ro_trials;
      if (ro_max_opt->count()) c.max_episodes = ro_max;
      if (ro_verify_opt->count()) c.verify = ro_verify;
      if (ro_mock_opt->count()) {
        c.model.kind = "mock";
        c.model.mock_script = ro_mock;
      }
      if (ro_backend_opt->count()) c.session.backend = backend_from_string(ro_backend);
      if (ro_script_opt->count()) c.session.script_path = ro_script;
      if (ro_history_opt->count()) c.history_mode = history_mode_from_string(ro_history);
      require(c.tasks_dir, "--tasks");
      require(c.out_dir, "--out");
      auto report = run_campaign(c);
      write_file_atomic(c.out_dir / "campaign_report.json", report.to_json().dump(2) + "\n");
      print_json(out, report.to_json());
    };
  });

  // verify -----------------------------------------------------------------
  auto* verify_cmd = app.add_subcommand("verify", "Run task tests in fresh sessions");
  Common verify_common;
  std::string vf_tasks, vf_out, vf_backend, vf_script;
  bool vf_solution = false;
  verify_cmd->add_option("--config", verify_common.config, "Config file");
  auto* vf_tasks_opt = verify_cmd->add_option("--tasks", vf_tasks, "Tasks directory");
  auto* vf_out_opt = verify_cmd->add_option("--out", vf_out, "Directory for reports");
  auto* vf_solution_opt = verify_cmd->add_flag("--with-solution", vf_solution, "Run solution/solve.sh first");
  auto* vf_backend_opt = verify_cmd->add_option("--backend", vf_backend, "scripted | local_pty | container");
  auto* vf_script_opt = verify_cmd->add_option("--script", vf_script, "Scripted terminal transcript(s)");
  verify_cmd->callback([&] {
    action = [&] {
      auto doc = verify_common.doc();
      CampaignConfig c = campaign_config_from_json(doc);
      if (vf_tasks_opt->count()) c.tasks_dir = vf_tasks;
      if (vf_out_opt->count()) c.out_dir = vf_out;
      if (vf_backend_opt->count()) c.session.backend = backend_from_string(vf_backend);
      if (vf_script_opt->count()) c.session.script_path = vf_script;
      bool with_solution = vf_solution_opt->count() ? vf_solution : doc.section("verify").value("with_solution", false);
      require(c.tasks_dir, "--tasks");
      require(c.out_dir, "--out");
      auto loaded = load_tasks(c.tasks_dir);
      nlohmann::ordered_json summary;
      summary["scores"] = nlohmann::ordered_json::object();
      summary["failures"] = nlohmann::ordered_json::array();
      for (const auto& task : loaded.tasks) {
        try {
          if (task.tests.empty()) throw Error(Errc::NoTests, "task has no tests");
          auto session = start_session(task, c.session);
          if (with_solution && task.solution) {
            for (const auto& f : *task.solution) session->put_file("solution/" + f.path, f.content, f.executable);
            if (task.solution->find("solve.sh")) (void)session->exec("bash solution/solve.sh", c.test_runner.timeout_seconds);
          }
          TestReport report = run_tests_in(*session, task, c.test_runner);
          session->stop();
          write_file_atomic(c.out_dir / "reports" / (task.id + ".json"), to_json(report).dump(2) + "\n");
          summary["scores"][task.id] = report.weighted_score.to_string();
        } catch (const Error& e) {
          summary["failures"].push_back({{"task", task.id}, {"code", to_string(e.code())}, {"reason", e.what()}});
        }
      }
      for (const auto& [id, why] : loaded.failures) summary["failures"].push_back({{"task", id}, {"reason", why}});
      print_json(out, summary);
    };
  });

  // decontaminate -----------------------------------------------------------
  auto* decon_cmd = app.add_subcommand("decontaminate", "Remove prompts overlapping benchmark text");
  Common decon_common;
  std::string dc_bench, dc_tasks, dc_prompts, dc_report, dc_kept, dc_fields;
  std::size_t dc_n = 14;
  bool dc_no_lower = false;
  decon_cmd->add_option("--config", decon_common.config, "Config file");
  auto* dc_bench_opt = decon_cmd->add_option("--benchmark", dc_bench, "Benchmark tasks directory or JSONL {text}");
  auto* dc_tasks_opt = decon_cmd->add_option("--tasks", dc_tasks, "Training tasks directory (instructions)");
  auto* dc_prompts_opt = decon_cmd->add_option("--prompts", dc_prompts, "Training prompts JSONL {id, text}");
  auto* dc_report_opt = decon_cmd->add_option("--report", dc_report, "Removal report (JSONL)");
  auto* dc_kept_opt = decon_cmd->add_option("--kept", dc_kept, "File listing kept ids");
  auto* dc_n_opt = decon_cmd->add_option("--n", dc_n, "n-gram size")->check(CLI::PositiveNumber);
  auto* dc_fields_opt = decon_cmd->add_option("--fields", dc_fields, "Benchmark fields: instruction,tests,solution");
  decon_cmd->add_flag("--no-lowercase", dc_no_lower, "Compare case-sensitively");
  decon_cmd->callback([&] {
    action = [&] {
      auto doc = decon_common.doc();
      const auto& sec = doc.section("decontaminate");
      DecontamConfig config;
      config.n = pick<std::size_t>(dc_n_opt, dc_n, sec, "n", 14);
      config.lowercase = !dc_no_lower && sec.value("lowercase", true);
      config.collapse_whitespace = sec.value("collapse_whitespace", true);
      BenchmarkFields fields;
      std::string field_list = pick<std::string>(dc_fields_opt, dc_fields, sec, "fields", "instruction,tests,solution");
      auto chosen = split_list(field_list);
      auto has = [&](const char* f) { return std::find(chosen.begin(), chosen.end(), f) != chosen.end(); };
      fields.instruction = has("instruction");
      fields.tests = has("tests");
      fields.solution = has("solution");

      fs::path bench = pick_path(dc_bench_opt, dc_bench, doc, sec, "benchmark");
      require(bench, "--benchmark");
      std::vector<std::string> texts;
      if (fs::is_directory(bench)) {
        for (const auto& t : load_tasks(bench).tasks) {
          for (auto& s : benchmark_texts(t, fields)) texts.push_back(std::move(s));
        }
      } else {
        for (const auto& line : read_lines(bench)) {
          if (trim(line).empty()) continue;
          texts.push_back(nlohmann::json::parse(line).at("text").get<std::string>());
        }
      }
      NGramIndex index = ngram_index(texts, config);

      std::vector<TextItem> prompts;
      fs::path tasks = pick_path(dc_tasks_opt, dc_tasks, doc, sec, "tasks_dir");
      fs::path prompt_file = pick_path(dc_prompts_opt, dc_prompts, doc, sec, "prompts");
      if (!tasks.empty()) {
        for (const auto& t : load_tasks(tasks).tasks) prompts.push_back({t.id, t.instruction});
      } else if (!prompt_file.empty()) {
        for (const auto& line : read_lines(prompt_file)) {
          if (trim(line).empty()) continue;
          auto j = nlohmann::json::parse(line);
          prompts.push_back({j.at("id").get<std::string>(), j.at("text").get<std::string>()});
        }
      } else {
        throw CLI::RequiredError("--tasks or --prompts");
      }
      auto result = decontaminate(prompts, index);
      fs::path report = pick_path(dc_report_opt, dc_report, doc, sec, "report");
      if (!report.empty()) write_file_atomic(report, result.report_jsonl());
      fs::path kept = pick_path(dc_kept_opt, dc_kept, doc, sec, "kept");
      if (!kept.empty()) {
        std::string listing;
        for (const auto& id : result.kept) listing += id + "\n";
        write_file_atomic(kept, listing);
      }
      nlohmann::ordered_json summary;
      summary["n"] = config.n;
      summary["benchmark_windows"] = index.size();
      summary["input"] = prompts.size();
      summary["kept"] = result.kept.size();
      summary["removed"] = result.removed.size();
      print_json(out, summary);
    };
  });

  // filter -----------------------------------------------------------------
  auto* filter_cmd = app.add_subcommand("filter", "Select trajectories (quality, complete-only, success-only)");
  Common filter_common;
  std::string ft_trajs, ft_out, ft_stages, ft_patterns, ft_threshold;
  filter_cmd->add_option("--config", filter_common.config, "Config file");
  auto* ft_trajs_opt = filter_cmd->add_option("--trajs", ft_trajs, "Rollout output directory");
  auto* ft_out_opt = filter_cmd->add_option("--out", ft_out, "Directory for kept episodes");
  auto* ft_stages_opt = filter_cmd->add_option("--stages", ft_stages, "Comma list of quality,complete,success");
  auto* ft_patterns_opt = filter_cmd->add_option("--patterns", ft_patterns, "Identity-leak pattern file");
  auto* ft_threshold_opt = filter_cmd->add_option("--threshold", ft_threshold, "Success score threshold (default 1)");
  filter_cmd->callback([&] {
    action = [&] {
      auto doc = filter_common.doc();
      const auto& sec = doc.section("filter");
      fs::path trajs = pick_path(ft_trajs_opt, ft_trajs, doc, sec, "trajs");
      fs::path outdir = pick_path(ft_out_opt, ft_out, doc, sec, "out_dir");
      require(trajs, "--trajs");
      require(outdir, "--out");
      auto stages = split_list(pick<std::string>(ft_stages_opt, ft_stages, sec, "stages", "quality,complete,success"));
      fs::path patterns = pick_path(ft_patterns_opt, ft_patterns, doc, sec, "patterns");
      QualityRules rules = patterns.empty() ? QualityRules() : QualityRules::from_pattern_file(patterns);
      Rational threshold = Rational::parse(pick<std::string>(ft_threshold_opt, ft_threshold, sec, "threshold", "1"));

      auto episodes = load_episodes(trajs);
      std::vector<Trajectory> current;
      std::map<std::string, TestReport> reports;
      for (const auto& ep : episodes) {
        current.push_back(ep.trajectory);
        if (ep.report) reports[report_key(ep.trajectory.task_id, ep.trajectory.trial)] = *ep.report;
      }
      nlohmann::ordered_json counts;
      counts["input"] = current.size();
      for (const auto& stage : stages) {
        if (stage == "quality") {
          std::vector<Trajectory> kept;
          for (auto& t : current) {
            if (quality_filter(t, rules).keep) kept.push_back(std::move(t));
          }
          current = std::move(kept);
        } else if (stage == "complete") {
          current = complete_only(current);
        } else if (stage == "success") {
          current = success_only(current, reports, threshold);
        } else {
          throw CLI::ValidationError("--stages", "unknown stage '" + stage + "'");
        }
        counts[stage] = current.size();
      }
      for (const auto& t : current) {
        auto it = reports.find(report_key(t.task_id, t.trial));
        write_episode(outdir, t, it == reports.end() ? std::nullopt : std::optional<TestReport>(it->second));
      }
      print_json(out, counts);
    };
  });

  // stats ------------------------------------------------------------------
  auto* stats_cmd = app.add_subcommand("stats", "Token and turn distributions");
  Common stats_common;
  std::string st_trajs, st_out;
  std::size_t st_bin = 1024;
  stats_cmd->add_option("--config", stats_common.config, "Config file");
  auto* st_trajs_opt = stats_cmd->add_option("--trajs", st_trajs, "Rollout output directory");
  auto* st_out_opt = stats_cmd->add_option("--out-dir", st_out, "Write tokens.csv and turns.csv here");
  auto* st_bin_opt = stats_cmd->add_option("--bin-width", st_bin, "Token histogram bin width")->check(CLI::PositiveNumber);
  stats_cmd->callback([&] {
    action = [&] {
      auto doc = stats_common.doc();
      const auto& sec = doc.section("stats");
      fs::path trajs = pick_path(st_trajs_opt, st_trajs, doc, sec, "trajs");
      require(trajs, "--trajs");
      std::vector<Trajectory> all;
      for (auto& ep : load_episodes(trajs)) all.push_back(std::move(ep.trajectory));
      auto stats = corpus_stats(all, default_token_estimator(), pick<std::size_t>(st_bin_opt, st_bin, sec, "bin_width", 1024));
      fs::path outdir = pick_path(st_out_opt, st_out, doc, sec, "out_dir");
      if (!outdir.empty()) {
        write_file_atomic(outdir / "tokens.csv", stats.tokens.table());
        write_file_atomic(outdir / "turns.csv", stats.turns.table());
      }
      print_json(out, stats.to_json());
    };
  });

  // export -----------------------------------------------------------------
  auto* export_cmd = app.add_subcommand("export", "Write SFT samples or build a mixture");
  Common export_common;
  std::string ex_trajs, ex_out, ex_policy, ex_template, ex_mixture;
  std::size_t ex_max = kDefaultMaxTokens;
  std::uint64_t ex_seed = 0;
  export_cmd->add_option("--config", export_common.config, "Config file");
  auto* ex_trajs_opt = export_cmd->add_option("--trajs", ex_trajs, "Rollout (or filtered) output directory");
  auto* ex_out_opt = export_cmd->add_option("--out", ex_out, "Output JSONL");
  auto* ex_max_opt = export_cmd->add_option("--max-tokens", ex_max, "Maximum estimated tokens per sample");
  auto* ex_policy_opt = export_cmd->add_option("--policy", ex_policy, "drop | truncate_tail");
  auto* ex_template_opt = export_cmd->add_option("--template", ex_template, "Agent prompt template");
  auto* ex_mixture_opt = export_cmd->add_option("--mixture", ex_mixture, "Mixture spec JSON (instead of --trajs)");
  auto* ex_seed_opt = export_cmd->add_option("--seed", ex_seed, "Mixture shuffle seed");
  export_cmd->callback([&] {
    action = [&] {
      auto doc = export_common.doc();
      const auto& sec = doc.section("export");
      fs::path outfile = pick_path(ex_out_opt, ex_out, doc, sec, "out");
      require(outfile, "--out");
      fs::path mixture = pick_path(ex_mixture_opt, ex_mixture, doc, sec, "mixture");
      nlohmann::ordered_json summary;
      if (!mixture.empty()) {
        auto spec = mixture_spec_from_json(nlohmann::json::parse(read_file(mixture)), fs::absolute(mixture).parent_path());
        auto samples = build_mixture(spec, pick<std::uint64_t>(ex_seed_opt, ex_seed, sec, "seed", 0));
        write_samples(outfile, samples);
        summary["samples"] = samples.size();
        print_json(out, summary);
        return;
      }
      fs::path trajs = pick_path(ex_trajs_opt, ex_trajs, doc, sec, "trajs");
      require(trajs, "--trajs");
      fs::path tmpl_path = pick_path(ex_template_opt, ex_template, doc, sec, "template");
      PromptTemplate tmpl = tmpl_path.empty() ? PromptTemplate::terminus() : PromptTemplate(read_file(tmpl_path));
      std::vector<SftSample> samples;
      std::size_t empty = 0;
      for (const auto& ep : load_episodes(trajs)) {
        try {
          samples.push_back(trajectory_to_sample(ep.trajectory, tmpl));
        } catch (const Error& e) {
          if (e.code() != Errc::EmptyTrajectory) throw;
          ++empty;
        }
      }
      std::size_t before = samples.size();
      auto policy = length_policy_from_string(pick<std::string>(ex_policy_opt, ex_policy, sec, "policy", "drop"));
      samples = apply_length_policy(std::move(samples), pick<std::size_t>(ex_max_opt, ex_max, sec, "max_tokens", kDefaultMaxTokens),
                                    policy);
      write_samples(outfile, samples);
      summary["trajectories"] = before + empty;
      summary["empty"] = empty;
      summary["samples"] = samples.size();
      summary["dropped_for_length"] = before - samples.size();
      print_json(out, summary);
    };
  });

  // eval -------------------------------------------------------------------
  auto* eval_cmd = app.add_subcommand("eval", "Aggregate test reports into mean +- stderr");
  Common eval_common;
  std::string ev_trajs, ev_reports;
  eval_cmd->add_option("--config", eval_common.config, "Config file");
  auto* ev_trajs_opt = eval_cmd->add_option("--trajs", ev_trajs, "Rollout output directory with reports");
  auto* ev_reports_opt = eval_cmd->add_option("--reports", ev_reports, "JSONL {task_id, trial, score|passed}");
  eval_cmd->callback([&] {
    action = [&] {
      auto doc = eval_common.doc();
      const auto& sec = doc.section("eval");
      fs::path trajs = pick_path(ev_trajs_opt, ev_trajs, doc, sec, "trajs");
      fs::path reports = pick_path(ev_reports_opt, ev_reports, doc, sec, "reports");
      std::vector<EvalRecord> records;
      if (!reports.empty()) {
        records = read_eval_records(reports);
      } else if (!trajs.empty()) {
        records = eval_records_from_episodes(load_episodes(trajs));
      } else {
        throw CLI::RequiredError("--trajs or --reports");
      }
      print_json(out, aggregate_eval(records).to_json());
    };
  });

  try {
    app.parse(argc, argv);
    if (action) action();
    return 0;
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "termgen: " << e.what() << "\n\n" << app.help();
    return 2;
  } catch (const Error& e) {
    err << "termgen: " << to_string(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "termgen: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace termgen
