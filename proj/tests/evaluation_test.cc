#include "janus/evaluation.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "test_util.hpp"

namespace janus {
namespace {

using testutil::make_article;

TEST(Metrics, HandComputedConfusionExample) {
  // preds [F,F,R,F,R] vs gold [F,R,R,F,F]: TP=2 FP=1 FN=1 TN=1.
  std::vector<std::pair<Label, Label>> pairs = {
      {Label::Fake, Label::Fake}, {Label::Fake, Label::Real}, {Label::Real, Label::Real},
      {Label::Fake, Label::Fake}, {Label::Real, Label::Fake}};
  auto r = compute_metrics(pairs);
  ASSERT_TRUE(r.ok());
  EXPECT_EQ(r->tp, 2u);
  EXPECT_EQ(r->fp, 1u);
  EXPECT_EQ(r->fn, 1u);
  EXPECT_EQ(r->tn, 1u);
  EXPECT_NEAR(r->accuracy, 0.6, 1e-12);
  EXPECT_NEAR(r->precision, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r->recall, 2.0 / 3.0, 1e-12);
  EXPECT_NEAR(r->f1, 2.0 / 3.0, 1e-12);
}

TEST(Metrics, AllCorrectIsPerfect) {
  std::vector<std::pair<Label, Label>> pairs = {{Label::Fake, Label::Fake},
                                                {Label::Real, Label::Real},
                                                {Label::Fake, Label::Fake}};
  auto r = compute_metrics(pairs);
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r->accuracy, 1.0);
  EXPECT_DOUBLE_EQ(r->f1, 1.0);
}

TEST(Metrics, ZeroDenominatorConventions) {
  // All predicted real with a gold fake: precision 0/0 -> 0, F1 -> 0.
  std::vector<std::pair<Label, Label>> pairs = {{Label::Real, Label::Fake},
                                                {Label::Real, Label::Real}};
  auto r = compute_metrics(pairs);
  ASSERT_TRUE(r.ok());
  EXPECT_DOUBLE_EQ(r->precision, 0.0);
  EXPECT_DOUBLE_EQ(r->recall, 0.0);
  EXPECT_DOUBLE_EQ(r->f1, 0.0);
  EXPECT_DOUBLE_EQ(r->accuracy, 0.5);
}

TEST(Metrics, EmptyInputRejected) {
  auto r = compute_metrics({});
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.error().code, Errc::empty_input);
}

// Independent oracle: a direct counting loop, written separately from the
// implementation's branch structure.
struct OracleCounts {
  std::uint64_t tp = 0, fp = 0, fn = 0, tn = 0;
};
OracleCounts oracle_confusion(const std::vector<std::pair<Label, Label>>& pairs) {
  OracleCounts c;
  for (const auto& [pred, gold] : pairs) {
    bool pred_fake = pred == Label::Fake;
    bool gold_fake = gold == Label::Fake;
    c.tp += (pred_fake && gold_fake);
    c.fp += (pred_fake && !gold_fake);
    c.fn += (!pred_fake && gold_fake);
    c.tn += (!pred_fake && !gold_fake);
  }
  return c;
}

TEST(Metrics, MatchesOracleOnRandomVectors) {
  std::mt19937 rng(4242);
  for (int trial = 0; trial < 200; ++trial) {
    size_t n = 1 + rng() % 500;
    std::vector<std::pair<Label, Label>> pairs;
    for (size_t i = 0; i < n; ++i) {
      pairs.push_back({rng() % 2 ? Label::Fake : Label::Real,
                       rng() % 2 ? Label::Fake : Label::Real});
    }
    auto r = compute_metrics(pairs);
    ASSERT_TRUE(r.ok());
    OracleCounts oracle = oracle_confusion(pairs);
    ASSERT_EQ(r->tp, oracle.tp);
    ASSERT_EQ(r->fp, oracle.fp);
    ASSERT_EQ(r->fn, oracle.fn);
    ASSERT_EQ(r->tn, oracle.tn);
    double expected_acc = static_cast<double>(oracle.tp + oracle.tn) / n;
    ASSERT_NEAR(r->accuracy, expected_acc, 1e-12);
  }
}

TEST(Metrics, PermutationInvariant) {
  std::mt19937 rng(11);
  std::vector<std::pair<Label, Label>> pairs;
  for (int i = 0; i < 64; ++i) {
    pairs.push_back({rng() % 2 ? Label::Fake : Label::Real,
                     rng() % 2 ? Label::Fake : Label::Real});
  }
  auto base = compute_metrics(pairs);
  ASSERT_TRUE(base.ok());
  for (int p = 0; p < 10; ++p) {
    for (size_t i = pairs.size(); i > 1; --i) {
      std::swap(pairs[i - 1], pairs[rng() % i]);
    }
    auto shuffled = compute_metrics(pairs);
    ASSERT_TRUE(shuffled.ok());
    EXPECT_EQ(shuffled->tp, base->tp);
    EXPECT_EQ(shuffled->fp, base->fp);
    EXPECT_DOUBLE_EQ(shuffled->f1, base->f1);
  }
}

// ---------------------------------------------------------------------------
// Splits

std::vector<NewsArticle> labeled_pool(int real_count, int fake_count,
                                      const std::string& prefix = "p") {
  std::vector<NewsArticle> pool;
  for (int i = 0; i < real_count; ++i) {
    pool.push_back(make_article(prefix + "_real_" + std::to_string(i), "RT" + std::to_string(i),
                                "RB", {}, Label::Real));
  }
  for (int i = 0; i < fake_count; ++i) {
    pool.push_back(make_article(prefix + "_fake_" + std::to_string(i), "FT" + std::to_string(i),
                                "FB", {}, Label::Fake));
  }
  return pool;
}

TEST(SampleSplit, BalancedTrainAndUntouchedFixedTest) {
  auto pool = labeled_pool(150, 150, "train");
  auto fixed_test = labeled_pool(120, 80, "test");
  SplitSpec spec{8, 7, "politifact-shaped"};
  auto split = sample_split(pool, spec, &fixed_test);
  ASSERT_TRUE(split.ok());
  EXPECT_EQ(split->train.size(), 16u);
  size_t real_count = std::count_if(split->train.begin(), split->train.end(),
                                    [](const NewsArticle& a) {
                                      return a.gold_label == Label::Real;
                                    });
  EXPECT_EQ(real_count, 8u);
  ASSERT_EQ(split->test.size(), fixed_test.size());
  for (size_t i = 0; i < fixed_test.size(); ++i) {
    EXPECT_EQ(split->test[i].id, fixed_test[i].id);  // order preserved untouched
  }
}

TEST(SampleSplit, SameSeedReproduces) {
  auto pool = labeled_pool(40, 40);
  SplitSpec spec{8, 1234, "d"};
  auto a = sample_split(pool, spec);
  auto b = sample_split(pool, spec);
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  ASSERT_EQ(a->train.size(), b->train.size());
  for (size_t i = 0; i < a->train.size(); ++i) {
    EXPECT_EQ(a->train[i].id, b->train[i].id);
  }
}

TEST(SampleSplit, DifferentSeedsDiffer) {
  auto pool = labeled_pool(60, 60);
  auto a = sample_split(pool, {8, 1, "d"});
  auto b = sample_split(pool, {8, 2, "d"});
  ASSERT_TRUE(a.ok());
  ASSERT_TRUE(b.ok());
  std::vector<std::string> ids_a, ids_b;
  for (const auto& x : a->train) ids_a.push_back(x.id);
  for (const auto& x : b->train) ids_b.push_back(x.id);
  EXPECT_NE(ids_a, ids_b);
}

TEST(SampleSplit, InsufficientClassCountRejected) {
  auto pool = labeled_pool(100, 50);
  auto split = sample_split(pool, {100, 0, "d"});
  ASSERT_FALSE(split.ok());
  EXPECT_EQ(split.error().code, Errc::insufficient_class_count);
}

TEST(SampleSplit, SinglePoolTrainTestDisjointAndCovering) {
  auto pool = labeled_pool(30, 30);
  auto split = sample_split(pool, {8, 99, "d"});
  ASSERT_TRUE(split.ok());
  std::set<std::string> train_ids, test_ids, pool_ids;
  for (const auto& a : pool) pool_ids.insert(a.id);
  for (const auto& a : split->train) train_ids.insert(a.id);
  for (const auto& a : split->test) test_ids.insert(a.id);
  EXPECT_EQ(split->test.size(), pool.size() - split->train.size());
  for (const auto& id : train_ids) {
    EXPECT_FALSE(test_ids.count(id)) << id;
    EXPECT_TRUE(pool_ids.count(id));
  }
  for (const auto& id : test_ids) EXPECT_TRUE(pool_ids.count(id));
}

TEST(SampleSplit, UnlabeledPoolArticleRejected) {
  auto pool = labeled_pool(10, 10);
  pool.push_back(make_article("unlabeled", "T", "B", {}));
  auto split = sample_split(pool, {4, 0, "d"});
  ASSERT_FALSE(split.ok());
  EXPECT_EQ(split.error().code, Errc::dataset_error);
}

TEST(SampleSplit, FixedTestIdsExcludedFromSamplingPool) {
  auto pool = labeled_pool(10, 10);
  // The fixed test shares ids with the pool; none may be drawn into train.
  std::vector<NewsArticle> fixed_test(pool.begin(), pool.begin() + 4);
  fixed_test.insert(fixed_test.end(), pool.begin() + 10, pool.begin() + 14);
  auto split = sample_split(pool, {4, 3, "d"}, &fixed_test);
  ASSERT_TRUE(split.ok());
  std::set<std::string> test_ids;
  for (const auto& a : fixed_test) test_ids.insert(a.id);
  for (const auto& a : split->train) {
    EXPECT_FALSE(test_ids.count(a.id)) << a.id;
  }
}

// ---------------------------------------------------------------------------
// Outcome scoring

TEST(ScoreOutcomes, HardFailureCountsAgainstGoldLabel) {
  std::vector<ArticleOutcome> outcomes(3);
  outcomes[0].gold = Label::Fake;
  outcomes[0].predicted = Label::Fake;  // TP
  outcomes[1].gold = Label::Fake;       // failed -> scored Real -> FN
  outcomes[2].gold = Label::Real;       // failed -> scored Fake -> FP
  MetricsReport r = score_outcomes(outcomes);
  EXPECT_EQ(r.n_failed, 2);
  EXPECT_EQ(r.n_evaluated, 3);
  EXPECT_EQ(r.tp, 1u);
  EXPECT_EQ(r.fn, 1u);
  EXPECT_EQ(r.fp, 1u);
  EXPECT_EQ(r.tn, 0u);
}

TEST(Reports, TableAndRecordsAreDeterministic) {
  std::vector<ArticleOutcome> outcomes(2);
  outcomes[0].article_id = "a";
  outcomes[0].gold = Label::Fake;
  outcomes[0].predicted = Label::Fake;
  outcomes[0].decided_by = DecidedBy::Agreement;
  outcomes[1].article_id = "b";
  outcomes[1].gold = Label::Real;
  outcomes[1].predicted = Label::Fake;
  outcomes[1].decided_by = DecidedBy::DeterminationSelector;
  MetricsReport r = score_outcomes(outcomes);
  SplitSpec spec{8, 7, "d"};
  EXPECT_EQ(format_report_table(r, outcomes), format_report_table(r, outcomes));
  std::string records = format_report_records(r, outcomes, spec);
  EXPECT_EQ(records, format_report_records(r, outcomes, spec));
  EXPECT_NE(records.find("\"type\":\"summary\""), std::string::npos);
  EXPECT_NE(records.find("\"id\":\"a\""), std::string::npos);
}

}  // namespace
}  // namespace janus
