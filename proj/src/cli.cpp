#include <cstdlib>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include "dataagent/app.hpp"
#include "dataagent/format.hpp"
#include "dataagent/harness.hpp"
#include "dataagent/json_io.hpp"
#include "dataagent/pipeline.hpp"
#include "dataagent/profiler.hpp"

namespace dataagent {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::filesystem::path sibling_script(const std::filesystem::path& file) {
  return file.parent_path() / (file.stem().string() + ".script.json");
}

std::shared_ptr<const LLMBackend> http_backend(const AppConfig& config) {
  HttpBackendConfig http;
  if (!config.base_url.empty())
    http.base_url = config.base_url;
  else if (const char* env = std::getenv("DATAAGENT_BASE_URL"); env && *env)
    http.base_url = env;
  http.api_key = api_key_from_env().value_or("");
  return std::make_shared<HttpChatBackend>(std::move(http));
}

}  // namespace

std::shared_ptr<const LLMBackend> make_backend(const AppConfig& config) {
  switch (config.backend) {
    case BackendKind::Scripted:
      return std::make_shared<ScriptedBackend>(ScriptedBackend::from_files(config.scripts));
    case BackendKind::Http: return http_backend(config);
    case BackendKind::Replay:
      if (config.cassette.empty()) throw UsageError("--cassette is required with --backend replay");
      return std::make_shared<RecordReplayBackend>(nullptr, config.cassette, CassetteMode::Replay);
    case BackendKind::Record:
      if (config.cassette.empty()) throw UsageError("--cassette is required with --backend record");
      return std::make_shared<RecordReplayBackend>(http_backend(config), config.cassette, CassetteMode::Record);
  }
  throw UsageError("unknown backend");
}

namespace {

void add_backend_options(CLI::App& cmd, AppConfig& config) {
  static const std::map<std::string, BackendKind> kinds{{"scripted", BackendKind::Scripted},
                                                        {"http", BackendKind::Http},
                                                        {"replay", BackendKind::Replay},
                                                        {"record", BackendKind::Record}};
  cmd.add_option("--backend", config.backend, "scripted | http | replay | record")
      ->transform(CLI::CheckedTransformer(kinds, CLI::ignore_case));
  cmd.add_option("--script", config.scripts, "scripted backend rule file (repeatable)");
  cmd.add_option("--cassette", config.cassette, "cassette file for replay / record");
  cmd.add_option("--base-url", config.base_url, "chat-completions origin (default: DATAAGENT_BASE_URL)");
  cmd.add_option("--model", config.planner.model_name, "model name sent to the backend");
  cmd.add_option("--temperature", config.planner.temperature)->check(CLI::Range(0.0, 2.0));
  cmd.add_option("--token-budget", config.planner.token_budget, "prompt token budget")->check(CLI::PositiveNumber);
  cmd.add_option("--max-steps", config.planner.max_steps)->check(CLI::PositiveNumber);
  cmd.add_option("--parse-retries", config.planner.parse_retries)->check(CLI::NonNegativeNumber);
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::InvalidArgument, fmt::format("cannot write {}", path.string()));
  out << text;
}

}  // namespace

int run_command(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Plans and runs data-analysis questions over CSV tables.", "dataagent"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "dataagent 0.1.0");

  AppConfig config;
  std::filesystem::path csv_path;
  std::string question;
  bool show_plan = true;
  std::size_t budget = 0;
  std::filesystem::path manifest, report_path, out_dir;
  std::string suite_name = "mini";
  std::uint64_t seed = GeneratorOptions{}.seed;
  unsigned jobs = 1;
  bool verbose = false;
  std::string predicted_text, truth_text;
  std::string host = "127.0.0.1";

  auto* profile = app.add_subcommand("profile", "print the dataset background used in prompts");
  profile->add_option("csv", csv_path)->required();
  profile->add_option("--budget", budget, "fit the background into this many tokens")->check(CLI::PositiveNumber);

  auto* ask = app.add_subcommand("ask", "plan and answer one question");
  ask->add_option("csv", csv_path)->required();
  ask->add_option("question", question)->required();
  ask->add_flag("--show-plan,!--no-show-plan", show_plan, "print the plan trace (default on)");
  add_backend_options(*ask, config);

  auto* bench = app.add_subcommand("bench", "benchmark suites");
  bench->require_subcommand(1);
  auto* bench_run = bench->add_subcommand("run", "run a suite manifest and report accuracy");
  bench_run->add_option("manifest", manifest)->required();
  bench_run->add_option("--report", report_path, "JSON report path (default <manifest>.report.json in the current directory)");
  bench_run->add_option("--margin", config.margin)->check(CLI::NonNegativeNumber);
  bench_run->add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  bench_run->add_flag("--verbose", verbose, "print one verdict line per case");
  add_backend_options(*bench_run, config);
  auto* bench_gen = bench->add_subcommand("generate", "write the synthetic suite");
  bench_gen->add_option("dir", out_dir)->required();
  bench_gen->add_option("--seed", seed);
  bench_gen->add_option("--name", suite_name);

  auto* check = app.add_subcommand("check", "compare a predicted answer with a ground truth");
  check->add_option("--predicted", predicted_text, "answer JSON (bare text is read as a string)")->required();
  check->add_option("--truth", truth_text, "truth JSON {kind, value, margin?}")->required();
  check->add_option("--margin", config.margin)->check(CLI::NonNegativeNumber);

  auto* serve_cmd = app.add_subcommand("serve", "start the HTTP service");
  serve_cmd->add_option("--port", config.port)->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--host", host);
  add_backend_options(*serve_cmd, config);

  std::vector<std::string> argv_store{"dataagent"};
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : argv_store) argv.push_back(a.c_str());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*profile) {
      DatasetProfile p = describe(load_csv_file(csv_path));
      out << (budget ? render_background(p, budget, estimate_tokens) : render_background(p, BackgroundDetail::Full));
      return 0;
    }

    if (*ask) {
      if (trim(question).empty()) throw UsageError("ask: question must not be empty");
      Table table = load_csv_file(csv_path);
      if (config.backend == BackendKind::Scripted && config.scripts.empty()) config.scripts.push_back(sibling_script(csv_path));
      auto backend = make_backend(config);
      QueryOutcome outcome = run_query(question, table, *backend, config.planner);
      if (show_plan) {
        if (outcome.plan) out << render_plan(*outcome.plan);
        std::vector<std::string> lines = trace_lines(outcome);
        if (outcome.failure) lines.pop_back();  // reported on stderr below
        for (const std::string& line : lines) out << line << "\n";
      }
      if (outcome.failure) {
        err << outcome.failure->reason() << "\n";
        return 1;
      }
      out << "answer: " << summarize(*outcome.answer) << "\n";
      return 0;
    }

    if (*bench_run) {
      BenchmarkSuite suite = load_suite(manifest);
      if (config.backend == BackendKind::Scripted && config.scripts.empty()) config.scripts.push_back(sibling_script(manifest));
      auto backend = make_backend(config);
      RunOptions options;
      options.planner = config.planner;
      options.check.default_margin = config.margin;
      options.jobs = jobs;
      std::vector<CaseResult> results = run_suite(suite, *backend, options);
      AccuracyReport report = aggregate(std::span<const CaseResult>(results), suite);
      if (verbose)
        for (const CaseResult& r : results)
          out << fmt::format("{} {}: {}\n", r.case_id, r.verdict.correct ? "correct" : "incorrect", r.verdict.reason);
      out << render_report_text(report);
      if (report_path.empty()) report_path = manifest.stem().string() + ".report.json";
      write_file(report_path, render_report_json(report, results));
      return 0;
    }

    if (*bench_gen) {
      GeneratorOptions options;
      options.seed = seed;
      write_suite(generate_suite(options), out_dir, suite_name);
      out << fmt::format("wrote {}\n", (out_dir / (suite_name + ".json")).string());
      return 0;
    }

    if (*check) {
      nlohmann::json truth_json = nlohmann::json::parse(truth_text, nullptr, false);
      if (truth_json.is_discarded()) throw UsageError("--truth: not valid JSON");
      GroundTruth truth = truth_from_json(truth_json);
      nlohmann::json predicted_json = nlohmann::json::parse(predicted_text, nullptr, false);
      Value predicted = predicted_json.is_discarded() ? Value(predicted_text) : value_from_json(predicted_json);
      CheckOptions options;
      options.default_margin = config.margin;
      Verdict v = check_answer(predicted, truth, options);
      out << (v.correct ? "correct" : "incorrect") << ": " << v.reason << "\n";
      return 0;
    }

    if (*serve_cmd) {
      auto backend = make_backend(config);
      std::function<std::shared_ptr<const LLMBackend>(const std::filesystem::path&)> bench_backend;
      if (config.backend == BackendKind::Scripted && config.scripts.empty())
        bench_backend = [](const std::filesystem::path& m) -> std::shared_ptr<const LLMBackend> {
          return std::make_shared<ScriptedBackend>(ScriptedBackend::from_files({sibling_script(m)}));
        };
      Service service(backend, config, bench_backend);
      err << fmt::format("listening on http://{}:{}\n", host, config.port);
      if (!serve(service, host, config.port)) {
        err << fmt::format("cannot bind {}:{}\n", host, config.port);
        return 1;
      }
      return 0;
    }
  } catch (const UsageError& e) {
    err << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace dataagent
