// Command-line front end for the dual-perspective news verification pipeline.

#include <filesystem>
#include <iostream>
#include <string>

#include "CLI11.hpp"

#include "janus/janus.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 1;
constexpr int kExitDatasetError = 2;
constexpr int kExitEvalFailures = 3;

int exit_code_for(const janus::Error& err) {
  switch (err.code) {
    case janus::Errc::dataset_error:
      return kExitDatasetError;
    default:
      return kExitConfigError;
  }
}

int fail(const janus::Error& err) {
  std::cerr << "error: " << err.describe() << "\n";
  return exit_code_for(err);
}

janus::Result<janus::Config> load_config(const std::string& path) {
  if (path.empty()) {
    return janus::make_error(janus::Errc::config_error, "--config is required");
  }
  return janus::Config::load(path);
}

void print_judgement(const char* heading, const std::optional<janus::Judgement>& j) {
  std::cout << "== " << heading << " ==\n";
  if (!j) {
    std::cout << "  (none)\n";
    return;
  }
  std::cout << "  verdict: " << janus::to_string(j->verdict) << "\n";
  if (!j->explanation.empty()) {
    std::cout << "  explanation: " << j->explanation << "\n";
  }
}

int run_build_store(const std::string& config_path, const std::string& train_path,
                    std::string out_path) {
  auto cfg = load_config(config_path);
  if (!cfg.ok()) return fail(cfg.error());
  auto articles = janus::load_dataset(train_path);
  if (!articles.ok()) return fail(articles.error());

  auto gateway = janus::make_gateway(*cfg);
  if (!gateway.ok()) return fail(gateway.error());
  auto provider = janus::make_embedding_provider(*cfg);
  if (!provider.ok()) return fail(provider.error());
  auto options = janus::pipeline_options_from_config(*cfg);
  if (!options.ok()) return fail(options.error());

  if (out_path.empty()) out_path = cfg->get_or("inside.store_path", "");
  if (out_path.empty()) {
    return fail(janus::make_error(janus::Errc::config_error,
                                  "set --out or inside.store_path"));
  }
  auto build = janus::build_datastore(*articles, options->detection, **provider,
                                      **gateway, out_path);
  if (!build.ok()) return fail(build.error());
  for (const auto& w : build->warnings) std::cerr << "warning: " << w << "\n";
  std::cout << "datastore: " << out_path << "\n";
  std::cout << "entries: " << build->store.entries.size() << " ("
            << build->store.count_label(janus::Label::Real) << " real / "
            << build->store.count_label(janus::Label::Fake) << " fake), dim "
            << build->store.dim << "\n";
  std::cout << "provider: " << build->store.provider_fingerprint << "\n";
  return kExitOk;
}

int run_detect(const std::string& config_path, const std::string& article_path,
               const std::string& trace_out) {
  auto cfg = load_config(config_path);
  if (!cfg.ok()) return fail(cfg.error());
  auto articles = janus::load_dataset(article_path);
  if (!articles.ok()) return fail(articles.error());
  if (articles->empty()) {
    return fail(janus::make_error(janus::Errc::dataset_error,
                                  "article file is empty: " + article_path));
  }
  auto ctx = janus::make_context(*cfg);
  if (!ctx.ok()) return fail(ctx.error());

  const janus::NewsArticle& article = articles->front();
  janus::PipelineTrace trace = janus::run_article(article, *ctx);

  std::cout << "== article ==\n";
  std::cout << "  id: " << article.id << "\n";
  if (!article.title.empty()) std::cout << "  title: " << article.title << "\n";
  if (article.gold_label) {
    std::cout << "  gold label: " << janus::to_string(*article.gold_label) << "\n";
  }

  std::cout << "== detection ==\n";
  if (trace.keyword_set) {
    std::cout << "  keywords: " << trace.keyword_set->joined() << "\n";
  } else {
    std::cout << "  (failed)\n";
  }

  std::cout << "== inside investigation ==\n";
  if (trace.demonstrations) {
    auto show = [](const janus::DemoExample& d) {
      std::cout << "  [" << janus::to_string(d.label) << "] d=" << d.distance << " "
                << d.article.id;
      if (!d.article.title.empty()) std::cout << " / " << d.article.title;
      std::cout << "\n";
    };
    for (const auto& d : trace.demonstrations->negative) show(d);
    for (const auto& d : trace.demonstrations->positive) show(d);
  } else {
    std::cout << "  (none)\n";
  }

  std::cout << "== outside investigation ==\n";
  if (trace.evidence) {
    std::cout << "  query: " << trace.evidence->query_used << "\n";
    if (trace.evidence->empty()) {
      std::cout << "  evidence: (none retrieved)\n";
    } else {
      std::cout << "  evidence: " << trace.evidence->snippet << "\n";
      if (trace.evidence->source_url) {
        std::cout << "  source: " << *trace.evidence->source_url << "\n";
      }
    }
  } else {
    std::cout << "  (none)\n";
  }

  print_judgement("inside judge", trace.inside_judgement);
  print_judgement("outside judge", trace.outside_judgement);

  for (const auto& e : trace.stage_errors) {
    std::cerr << "stage " << e.stage << ": " << e.description << "\n";
  }

  if (!trace_out.empty()) {
    auto written = janus::detail::write_file_atomic(trace_out, janus::serialize_trace(trace));
    if (!written.ok()) return fail(written.error());
  }

  if (!trace.verdict) {
    std::cout << "verdict: none (pipeline failed)\n";
    return kExitConfigError;
  }
  std::cout << "verdict: " << janus::to_string(trace.verdict->final_label) << " ("
            << janus::to_string(trace.verdict->decided_by) << ")\n";
  return kExitOk;
}

int run_eval(const std::string& config_path, const std::string& dataset_path,
             const std::string& test_dataset_path, int k, unsigned seed,
             const std::string& out_dir, double failure_threshold) {
  auto cfg = load_config(config_path);
  if (!cfg.ok()) return fail(cfg.error());
  auto pool = janus::load_dataset(dataset_path);
  if (!pool.ok()) return fail(pool.error());

  std::optional<std::vector<janus::NewsArticle>> fixed_test;
  if (!test_dataset_path.empty()) {
    auto test = janus::load_dataset(test_dataset_path);
    if (!test.ok()) return fail(test.error());
    fixed_test = std::move(*test);
  }

  janus::SplitSpec spec;
  spec.k_per_class = k;
  spec.seed = seed;
  spec.dataset_id = std::filesystem::path(dataset_path).filename().string();
  auto split = janus::sample_split(*pool, spec, fixed_test ? &*fixed_test : nullptr);
  if (!split.ok()) return fail(split.error());

  auto ctx = janus::make_context(*cfg);
  if (!ctx.ok()) return fail(ctx.error());

  janus::EvalOptions eval_options;
  eval_options.workers = cfg->get_int("eval.workers", 4);
  std::filesystem::path out(out_dir.empty() ? "." : out_dir);
  std::error_code ec;
  std::filesystem::create_directories(out / "traces", ec);
  eval_options.trace_dir = (out / "traces").string();

  auto outcomes = janus::evaluate(split->test, *ctx, eval_options);
  if (!outcomes.ok()) return fail(outcomes.error());
  janus::MetricsReport report = janus::score_outcomes(*outcomes);

  std::string table = janus::format_report_table(report, *outcomes);
  auto w1 = janus::detail::write_file_atomic(out / "report.txt", table);
  if (!w1.ok()) return fail(w1.error());
  auto w2 = janus::detail::write_file_atomic(
      out / "report.jsonl", janus::format_report_records(report, *outcomes, spec));
  if (!w2.ok()) return fail(w2.error());

  std::cout << table;
  std::cout << "reports written to " << out.string() << "\n";

  double failure_rate =
      report.n_evaluated ? static_cast<double>(report.n_failed) / report.n_evaluated : 0.0;
  if (failure_rate > failure_threshold) {
    std::cerr << "error: failure rate " << failure_rate << " exceeds threshold "
              << failure_threshold << "\n";
    return kExitEvalFailures;
  }
  return kExitOk;
}

int run_cache(const std::string& config_path, std::string dir, bool clear) {
  if (dir.empty()) {
    auto cfg = load_config(config_path);
    if (!cfg.ok()) return fail(cfg.error());
    dir = cfg->get_or("pipeline.cache_dir", "");
  }
  if (dir.empty()) {
    return fail(janus::make_error(janus::Errc::config_error,
                                  "set --dir or pipeline.cache_dir"));
  }
  janus::StageCache cache(dir);
  if (clear) {
    auto cleared = cache.clear();
    if (!cleared.ok()) return fail(cleared.error());
    std::cout << "cleared " << dir << "\n";
    return kExitOk;
  }
  auto stats = cache.stats();
  std::cout << "cache dir: " << dir << "\n";
  for (const auto& [stage, count] : stats.entries_per_stage) {
    std::cout << "  " << stage << ": " << count << "\n";
  }
  std::cout << "total entries: " << stats.total << "\n";
  return kExitOk;
}

// Converts cached live responses into replay fixtures: model completions from
// the stage cache, search results from the query cache.
int run_fixtures(const std::string& config_path, std::string cache_dir,
                 std::string search_cache_dir, const std::string& out_model,
                 const std::string& out_search) {
  if (cache_dir.empty() || search_cache_dir.empty()) {
    auto cfg = load_config(config_path);
    if (cfg.ok()) {
      if (cache_dir.empty()) cache_dir = cfg->get_or("pipeline.cache_dir", "");
      if (search_cache_dir.empty()) search_cache_dir = cfg->get_or("search.cache_dir", "");
    }
  }
  namespace fs = std::filesystem;
  std::error_code ec;

  if (!out_model.empty()) {
    if (cache_dir.empty()) {
      return fail(janus::make_error(janus::Errc::config_error,
                                    "set --cache-dir or pipeline.cache_dir"));
    }
    std::string lines;
    size_t count = 0;
    for (const char* stage :
         {janus::stage::kDetection, janus::stage::kInsideJudge,
          janus::stage::kOutsideJudge, janus::stage::kDetermination}) {
      fs::path stage_dir = fs::path(cache_dir) / stage;
      if (!fs::is_directory(stage_dir, ec)) continue;
      std::vector<fs::path> files;
      for (const auto& f : fs::directory_iterator(stage_dir, ec)) {
        if (f.path().extension() == ".json") files.push_back(f.path());
      }
      std::sort(files.begin(), files.end());
      for (const auto& file : files) {
        auto content = janus::detail::read_file(file);
        if (!content.ok()) continue;
        auto j = nlohmann::json::parse(*content, nullptr, false);
        if (j.is_discarded()) continue;
        std::string digest = j.value("prompt_digest", "");
        if (digest.empty()) continue;
        nlohmann::json fixture = {{"stage", stage},
                                  {"prompt_digest", digest},
                                  {"completion", j.value("completion", "")}};
        lines += fixture.dump() + "\n";
        ++count;
      }
    }
    auto written = janus::detail::write_file_atomic(out_model, lines);
    if (!written.ok()) return fail(written.error());
    std::cout << "wrote " << count << " model fixtures to " << out_model << "\n";
  }

  if (!out_search.empty()) {
    if (search_cache_dir.empty()) {
      return fail(janus::make_error(janus::Errc::config_error,
                                    "set --search-cache-dir or search.cache_dir"));
    }
    std::string lines;
    size_t count = 0;
    std::vector<fs::path> files;
    if (fs::is_directory(search_cache_dir, ec)) {
      for (const auto& f : fs::directory_iterator(search_cache_dir, ec)) {
        if (f.path().extension() == ".json") files.push_back(f.path());
      }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
      auto content = janus::detail::read_file(file);
      if (!content.ok()) continue;
      auto j = nlohmann::json::parse(*content, nullptr, false);
      if (j.is_discarded()) continue;
      auto results = j.value("results", nlohmann::json::array());
      if (results.empty()) continue;
      nlohmann::json fixture = {{"query", j.value("query", "")},
                                {"title", results[0].value("title", "")},
                                {"snippet", results[0].value("snippet", "")},
                                {"url", results[0].value("url", "")}};
      lines += fixture.dump() + "\n";
      ++count;
    }
    auto written = janus::detail::write_file_atomic(out_search, lines);
    if (!written.ok()) return fail(written.error());
    std::cout << "wrote " << count << " search fixtures to " << out_search << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"dual-perspective few-shot fake news detection pipeline"};
  app.require_subcommand(1);

  std::string config_path;

  auto* build = app.add_subcommand("build-store",
                                   "build the labeled keyword-embedding datastore");
  std::string train_path, store_out;
  build->add_option("--config", config_path, "config file")->required();
  build->add_option("--train", train_path, "labeled training dataset (jsonl)")->required();
  build->add_option("--out", store_out, "datastore output path (default inside.store_path)");

  auto* detect = app.add_subcommand("detect", "run one article through the pipeline");
  std::string article_path, trace_out;
  detect->add_option("--config", config_path, "config file")->required();
  detect->add_option("--article", article_path, "article file (jsonl, first record used)")
      ->required();
  detect->add_option("--trace-out", trace_out, "write the pipeline trace here");

  auto* eval = app.add_subcommand("eval", "evaluate on a K-shot split");
  std::string dataset_path, test_dataset_path, out_dir = "eval-out";
  int k = 8;
  unsigned seed = 0;
  double failure_threshold = 0.5;
  eval->add_option("--config", config_path, "config file")->required();
  eval->add_option("--dataset", dataset_path, "labeled dataset pool (jsonl)")->required();
  eval->add_option("--test-dataset", test_dataset_path,
                   "fixed test partition (jsonl); evaluated untouched");
  eval->add_option("--k", k, "training examples per class");
  eval->add_option("--seed", seed, "split sampling seed");
  eval->add_option("--out-dir", out_dir, "report + trace output directory");
  eval->add_option("--failure-threshold", failure_threshold,
                   "max tolerated fraction of hard-failed articles");

  auto* cache = app.add_subcommand("cache", "inspect or clear the stage cache");
  std::string cache_dir;
  bool cache_clear = false;
  cache->add_option("--config", config_path, "config file");
  cache->add_option("--dir", cache_dir, "cache directory (default pipeline.cache_dir)");
  cache->add_flag("--clear", cache_clear, "remove all cached stage results");

  auto* fixtures = app.add_subcommand(
      "fixtures", "convert cached live responses into replay fixtures");
  std::string fx_cache_dir, fx_search_dir, out_model, out_search;
  fixtures->add_option("--config", config_path, "config file");
  fixtures->add_option("--cache-dir", fx_cache_dir, "stage cache directory");
  fixtures->add_option("--search-cache-dir", fx_search_dir, "search query cache directory");
  fixtures->add_option("--out-model", out_model, "model fixtures output (jsonl)");
  fixtures->add_option("--out-search", out_search, "search fixtures output (jsonl)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build->parsed()) return run_build_store(config_path, train_path, store_out);
    if (detect->parsed()) return run_detect(config_path, article_path, trace_out);
    if (eval->parsed()) {
      return run_eval(config_path, dataset_path, test_dataset_path, k, seed, out_dir,
                      failure_threshold);
    }
    if (cache->parsed()) return run_cache(config_path, cache_dir, cache_clear);
    if (fixtures->parsed()) {
      return run_fixtures(config_path, fx_cache_dir, fx_search_dir, out_model, out_search);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return kExitConfigError;
}
