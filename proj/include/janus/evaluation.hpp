#pragma once

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <mutex>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "janus/dataset.hpp"
#include "janus/domain.hpp"
#include "janus/pipeline.hpp"

namespace janus {

// ---------------------------------------------------------------------------
// K-shot splits

struct SplitSpec {
  int k_per_class = 8;
  unsigned seed = 0;
  std::string dataset_id;
};

struct Split {
  std::vector<NewsArticle> train;
  std::vector<NewsArticle> test;
};

namespace eval_detail {

// Seeded selection of k items, stable across platforms: candidates are
// canonicalized by id, then drawn with a partial Fisher-Yates using raw
// mt19937 output. std::shuffle/std::sample are implementation-defined, so
// they are deliberately not used here.
inline std::vector<NewsArticle> draw(std::vector<NewsArticle> pool, int k,
                                     std::mt19937& rng) {
  std::sort(pool.begin(), pool.end(),
            [](const NewsArticle& a, const NewsArticle& b) { return a.id < b.id; });
  for (int i = 0; i < k; ++i) {
    size_t j = i + static_cast<size_t>(rng() % (pool.size() - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(static_cast<size_t>(k));
  return pool;
}

}  // namespace eval_detail

/// Samples a balanced K-shot training set from the labeled pool. When the
/// dataset ships a fixed test partition, it passes through untouched (and its
/// ids are excluded from sampling); otherwise the test set is every pool
/// article that was not drawn, in pool order.
inline Result<Split> sample_split(const std::vector<NewsArticle>& pool,
                                  const SplitSpec& spec,
                                  const std::vector<NewsArticle>* fixed_test = nullptr) {
  if (spec.k_per_class < 1) {
    return make_error(Errc::config_error, "k_per_class must be >= 1");
  }
  std::set<std::string> test_ids;
  if (fixed_test) {
    for (const auto& a : *fixed_test) test_ids.insert(a.id);
  }
  std::vector<NewsArticle> real, fake;
  for (const auto& a : pool) {
    if (test_ids.count(a.id)) continue;
    if (!a.gold_label) {
      return make_error(Errc::dataset_error,
                        "article '" + a.id + "' has no gold label; cannot sample a split");
    }
    (*a.gold_label == Label::Fake ? fake : real).push_back(a);
  }
  size_t k = static_cast<size_t>(spec.k_per_class);
  if (real.size() < k || fake.size() < k) {
    return make_error(Errc::insufficient_class_count,
                      "need " + std::to_string(k) + " per class, have " +
                          std::to_string(real.size()) + " real / " +
                          std::to_string(fake.size()) + " fake");
  }
  std::mt19937 rng(spec.seed);
  Split split;
  split.train = eval_detail::draw(real, spec.k_per_class, rng);
  auto fake_train = eval_detail::draw(fake, spec.k_per_class, rng);
  split.train.insert(split.train.end(), fake_train.begin(), fake_train.end());

  if (fixed_test) {
    split.test = *fixed_test;
  } else {
    std::set<std::string> train_ids;
    for (const auto& a : split.train) train_ids.insert(a.id);
    for (const auto& a : pool) {
      if (!train_ids.count(a.id)) split.test.push_back(a);
    }
  }
  return split;
}

// ---------------------------------------------------------------------------
// Metrics (fake is the positive class)

struct MetricsReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
  int n_evaluated = 0;
  int n_failed = 0;
};

inline Result<MetricsReport> compute_metrics(
    const std::vector<std::pair<Label, Label>>& predicted_gold) {
  if (predicted_gold.empty()) {
    return make_error(Errc::empty_input, "no prediction pairs to score");
  }
  MetricsReport r;
  for (const auto& [predicted, gold] : predicted_gold) {
    if (predicted == Label::Fake && gold == Label::Fake) r.tp++;
    else if (predicted == Label::Fake && gold == Label::Real) r.fp++;
    else if (predicted == Label::Real && gold == Label::Fake) r.fn++;
    else r.tn++;
  }
  r.n_evaluated = static_cast<int>(predicted_gold.size());
  r.accuracy = static_cast<double>(r.tp + r.tn) / r.n_evaluated;
  r.precision = (r.tp + r.fp) ? static_cast<double>(r.tp) / (r.tp + r.fp) : 0.0;
  r.recall = (r.tp + r.fn) ? static_cast<double>(r.tp) / (r.tp + r.fn) : 0.0;
  r.f1 = (r.precision + r.recall) > 0.0
             ? 2.0 * r.precision * r.recall / (r.precision + r.recall)
             : 0.0;
  return r;
}

// ---------------------------------------------------------------------------
// Batch evaluation

struct ArticleOutcome {
  std::string article_id;
  Label gold = Label::Real;
  std::optional<Label> predicted;  // empty = pipeline hard failure
  std::optional<DecidedBy> decided_by;
  PipelineTrace trace;
};

struct EvalOptions {
  int workers = 4;
  // When set, each trace is written here (<sanitized id>-<digest8>.json) as
  // soon as its article finishes.
  std::string trace_dir;
};

inline std::string trace_filename(const NewsArticle& article) {
  std::string name;
  for (char c : article.id) {
    name += (std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')
                ? c
                : '_';
  }
  return name + "-" + article_digest(article).substr(0, 8) + ".json";
}

/// Runs the pipeline over every test article with a bounded worker pool.
/// Per-article failures never abort the batch; they surface as outcomes with
/// no prediction. Results come back in input order.
inline Result<std::vector<ArticleOutcome>> evaluate(
    const std::vector<NewsArticle>& test_articles, const PipelineContext& ctx,
    const EvalOptions& options = {}) {
  for (const auto& a : test_articles) {
    if (!a.gold_label) {
      return make_error(Errc::dataset_error,
                        "test article '" + a.id + "' has no gold label");
    }
  }
  std::vector<ArticleOutcome> outcomes(test_articles.size());
  std::atomic<size_t> next{0};
  std::mutex io_mu;
  auto worker = [&] {
    while (true) {
      size_t i = next.fetch_add(1);
      if (i >= test_articles.size()) return;
      const NewsArticle& article = test_articles[i];
      ArticleOutcome outcome;
      outcome.article_id = article.id;
      outcome.gold = *article.gold_label;
      outcome.trace = run_article(article, ctx);
      if (outcome.trace.verdict) {
        outcome.predicted = outcome.trace.verdict->final_label;
        outcome.decided_by = outcome.trace.verdict->decided_by;
      }
      if (!options.trace_dir.empty()) {
        std::lock_guard lock(io_mu);
        (void)detail::write_file_atomic(
            std::filesystem::path(options.trace_dir) / trace_filename(article),
            serialize_trace(outcome.trace));
      }
      outcomes[i] = std::move(outcome);
    }
  };
  int workers = std::max(1, options.workers);
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int i = 0; i < workers; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();
  return outcomes;
}

/// Applies the scoring convention: an article with no verdict counts as a
/// wrong prediction against its gold label.
inline MetricsReport score_outcomes(const std::vector<ArticleOutcome>& outcomes) {
  std::vector<std::pair<Label, Label>> pairs;
  int failed = 0;
  pairs.reserve(outcomes.size());
  for (const auto& o : outcomes) {
    Label predicted = o.predicted.value_or(opposite(o.gold));
    if (!o.predicted) ++failed;
    pairs.push_back({predicted, o.gold});
  }
  MetricsReport report;
  if (!pairs.empty()) {
    report = *compute_metrics(pairs);
  }
  report.n_failed = failed;
  return report;
}

// ---------------------------------------------------------------------------
// Reports

inline std::string format_report_table(const MetricsReport& r,
                                       const std::vector<ArticleOutcome>& outcomes) {
  std::map<std::string, int> decided;
  for (const auto& o : outcomes) {
    if (o.decided_by) decided[to_string(*o.decided_by)]++;
  }
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << "articles evaluated: " << r.n_evaluated << " (failed: " << r.n_failed << ")\n";
  out << "accuracy:  " << r.accuracy << "\n";
  out << "precision: " << r.precision << "\n";
  out << "recall:    " << r.recall << "\n";
  out << "f1:        " << r.f1 << "\n";
  out << "confusion: TP=" << r.tp << " FP=" << r.fp << " FN=" << r.fn
      << " TN=" << r.tn << "\n";
  for (const auto& [how, count] : decided) {
    out << "decided by " << how << ": " << count << "\n";
  }
  return out.str();
}

inline std::string format_report_records(const MetricsReport& r,
                                         const std::vector<ArticleOutcome>& outcomes,
                                         const SplitSpec& spec) {
  std::string out;
  for (const auto& o : outcomes) {
    nlohmann::json j;
    j["type"] = "article";
    j["id"] = o.article_id;
    j["gold"] = to_string(o.gold);
    if (o.predicted) j["predicted"] = to_string(*o.predicted);
    if (o.decided_by) j["decided_by"] = to_string(*o.decided_by);
    j["failed"] = !o.predicted.has_value();
    out += j.dump() + "\n";
  }
  nlohmann::json summary;
  summary["type"] = "summary";
  summary["dataset_id"] = spec.dataset_id;
  summary["k_per_class"] = spec.k_per_class;
  summary["seed"] = spec.seed;
  summary["accuracy"] = r.accuracy;
  summary["precision"] = r.precision;
  summary["recall"] = r.recall;
  summary["f1"] = r.f1;
  summary["tp"] = r.tp;
  summary["fp"] = r.fp;
  summary["fn"] = r.fn;
  summary["tn"] = r.tn;
  summary["n_evaluated"] = r.n_evaluated;
  summary["n_failed"] = r.n_failed;
  out += summary.dump() + "\n";
  return out;
}

}  // namespace janus
