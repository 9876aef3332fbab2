#include "janus/pipeline.hpp"

#include <gtest/gtest.h>

#include "janus/context.hpp"
#include "test_util.hpp"

namespace janus {
namespace {

using testutil::ArticleScript;
using testutil::build_direct_store;
using testutil::make_article;
using testutil::script_article;
using testutil::TempDir;

std::vector<NewsArticle> small_train() {
  return {
      make_article("tr_r1", "Council approves transit plan", "Votes counted Tuesday.", {},
                   Label::Real),
      make_article("tr_r2", "Harbor reopens after repairs", "Ferries resume weekday runs.", {},
                   Label::Real),
      make_article("tr_f1", "Aliens endorse mayor", "A viral post with no source.", {},
                   Label::Fake),
      make_article("tr_f2", "Seawater cures insomnia", "A fabricated medical claim.", {},
                   Label::Fake),
  };
}

NewsArticle test_article() {
  return make_article("art_1", "Tariff plan targets chips",
                      "New tariffs on imported chips were announced.",
                      {"chips getting pricier"}, Label::Fake);
}

struct Rig {
  std::shared_ptr<CharHistogramProvider> provider =
      std::make_shared<CharHistogramProvider>(16);
  std::shared_ptr<MockChatBackend> mock = std::make_shared<MockChatBackend>();
  std::shared_ptr<FixtureSearchClient> search_client =
      std::make_shared<FixtureSearchClient>();
  std::shared_ptr<const Datastore> store;
  PipelineOptions options;

  Rig() {
    options.judge.truncate_chars = 2000;
    store = std::make_shared<const Datastore>(
        build_direct_store(small_train(), *provider));
  }

  Label script(const NewsArticle& article, const ArticleScript& s) {
    std::vector<testutil::SearchFixture> fixtures;
    Label expected = script_article(article, s, *store, options, *provider, *mock, &fixtures);
    for (const auto& f : fixtures) {
      search_client->add(f.query, {f.title, f.snippet, f.url, 1});
    }
    return expected;
  }

  PipelineContext context(std::shared_ptr<StageCache> cache = nullptr) const {
    PipelineContext ctx;
    ctx.options = options;
    ctx.gateway = testutil::make_mock_gateway(mock);
    ctx.provider = provider;
    ctx.search_client = search_client;
    ctx.datastore = store;
    ctx.cache = cache;
    ctx.fingerprints = compute_stage_fingerprints(options, "mock:test",
                                                  provider->fingerprint(),
                                                  datastore_digest(*store),
                                                  search_client->id());
    return ctx;
  }
};

TEST(RunArticle, ColdRunPopulatesAllSixStageFields) {
  Rig rig;
  auto article = test_article();
  Label expected = rig.script(article, {Label::Fake, Label::Fake, std::nullopt, true});
  auto ctx = rig.context();
  PipelineTrace trace = run_article(article, ctx);

  EXPECT_TRUE(trace.keyword_set.has_value());
  EXPECT_TRUE(trace.demonstrations.has_value());
  EXPECT_TRUE(trace.evidence.has_value());
  EXPECT_TRUE(trace.inside_judgement.has_value());
  EXPECT_TRUE(trace.outside_judgement.has_value());
  ASSERT_TRUE(trace.verdict.has_value());
  EXPECT_EQ(trace.verdict->final_label, expected);
  EXPECT_EQ(trace.verdict->decided_by, DecidedBy::Agreement);
  EXPECT_TRUE(trace.stage_errors.empty());
  EXPECT_EQ(trace.timings_ms.count(stage::kDetection), 1u);
  EXPECT_EQ(trace.timings_ms.count(stage::kDetermination), 1u);
}

TEST(RunArticle, AgreementUsesExactlyThreeModelCalls) {
  Rig rig;
  auto article = test_article();
  rig.script(article, {Label::Real, Label::Real, std::nullopt, true});
  auto ctx = rig.context();
  run_article(article, ctx);
  CallLedger ledger = ctx.gateway->ledger_snapshot();
  EXPECT_EQ(ledger.total_requests(), 3u);
  EXPECT_EQ(ledger.determination.requests, 0u);
}

TEST(RunArticle, ConflictUsesExactlyFourModelCalls) {
  Rig rig;
  auto article = test_article();
  Label expected = rig.script(article, {Label::Fake, Label::Real, Label::Fake, true});
  auto ctx = rig.context();
  PipelineTrace trace = run_article(article, ctx);
  ASSERT_TRUE(trace.verdict.has_value());
  EXPECT_EQ(trace.verdict->final_label, expected);
  EXPECT_EQ(trace.verdict->decided_by, DecidedBy::DeterminationSelector);
  CallLedger ledger = ctx.gateway->ledger_snapshot();
  EXPECT_EQ(ledger.total_requests(), 4u);
  EXPECT_EQ(ledger.determination.requests, 1u);
}

TEST(RunArticle, MissingEvidenceStillJudgesOutside) {
  Rig rig;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Fake, std::nullopt, /*with_evidence=*/false});
  auto ctx = rig.context();
  PipelineTrace trace = run_article(article, ctx);
  ASSERT_TRUE(trace.evidence.has_value());
  EXPECT_TRUE(trace.evidence->empty());
  EXPECT_TRUE(trace.outside_judgement.has_value());
  bool noted = false;
  for (const auto& e : trace.stage_errors) {
    noted |= e.description.find("no outside evidence") != std::string::npos;
  }
  EXPECT_TRUE(noted);
}

TEST(RunArticle, DetectionFailureYieldsTraceWithoutVerdict) {
  Rig rig;  // no fixtures scripted at all
  auto ctx = rig.context();
  PipelineTrace trace = run_article(test_article(), ctx);
  EXPECT_FALSE(trace.keyword_set.has_value());
  EXPECT_FALSE(trace.verdict.has_value());
  ASSERT_FALSE(trace.stage_errors.empty());
  EXPECT_EQ(trace.stage_errors[0].stage, stage::kDetection);
}

TEST(RunArticle, ColdRunsAreByteIdenticalExceptTimings) {
  Rig rig;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Real, Label::Fake, true});
  auto zero_timings = [](PipelineTrace t) {
    for (auto& [stage, ms] : t.timings_ms) ms = 0;
    return t;
  };
  auto ctx1 = rig.context();
  auto ctx2 = rig.context();
  PipelineTrace first = run_article(article, ctx1);
  PipelineTrace second = run_article(article, ctx2);
  EXPECT_EQ(serialize_trace(zero_timings(first)), serialize_trace(zero_timings(second)));
}

TEST(RunArticle, WarmRerunHitsCacheAndMatchesByteForByte) {
  Rig rig;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Real, Label::Fake, true});
  TempDir tmp;
  auto cache = std::make_shared<StageCache>((tmp / "cache").string());

  auto cold_ctx = rig.context(cache);
  PipelineTrace cold = run_article(article, cold_ctx);
  ASSERT_TRUE(cold.verdict.has_value());
  EXPECT_EQ(cold_ctx.gateway->ledger_snapshot().total_requests(), 4u);

  auto warm_ctx = rig.context(cache);  // fresh gateway, same cache
  PipelineTrace warm = run_article(article, warm_ctx);
  EXPECT_EQ(warm_ctx.gateway->ledger_snapshot().total_requests(), 0u);
  EXPECT_EQ(serialize_trace(warm), serialize_trace(cold));
}

TEST(RunArticle, ChangingInsideKInvalidatesOnlyInsideAndDownstream) {
  Rig rig;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Fake, std::nullopt, true});
  TempDir tmp;
  auto cache = std::make_shared<StageCache>((tmp / "cache").string());

  auto cold_ctx = rig.context(cache);
  run_article(article, cold_ctx);

  // Same article with k = 1: detection and outside stages stay cached, the
  // inside retrieval + judge rerun.
  Rig rig2 = rig;
  rig2.options.inside_k = 1;
  {
    // Re-script the inside judge for the k=1 demo set.
    auto keywords = parse_keywords(testutil::scripted_detection_completion(article),
                                   rig2.options.detection, article.id)
                        .value();
    auto vec = embed_keywords(keywords, *rig2.provider).value();
    auto demos = knn_retrieve(vec, *rig2.store, 1).value();
    auto prompt = render_inside_prompt(article, demos, rig2.options.judge).value();
    rig2.mock->add_exact("inside_judge", sha256_hex(prompt),
                         std::string(kFakeMarker) + " scripted inside view k1");
  }
  auto ctx2 = rig2.context(cache);
  PipelineTrace trace2 = run_article(article, ctx2);
  ASSERT_TRUE(trace2.verdict.has_value());
  CallLedger ledger = ctx2.gateway->ledger_snapshot();
  EXPECT_EQ(ledger.detection.requests, 0u);      // cache hit
  EXPECT_EQ(ledger.outside_judge.requests, 0u);  // cache hit
  EXPECT_EQ(ledger.inside_judge.requests, 1u);   // invalidated by k change
  ASSERT_EQ(trace2.demonstrations->positive.size(), 1u);
}

TEST(RunArticle, OutsideOnlyModeSkipsInsidePath) {
  Rig rig;
  rig.options.mode = PipelineMode::OutsideOnly;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Real, Label::Fake, true});
  auto ctx = rig.context();
  ctx.datastore = nullptr;
  ctx.provider = nullptr;
  PipelineTrace trace = run_article(article, ctx);
  EXPECT_FALSE(trace.demonstrations.has_value());
  EXPECT_FALSE(trace.inside_judgement.has_value());
  ASSERT_TRUE(trace.verdict.has_value());
  EXPECT_EQ(trace.verdict->final_label, Label::Real);  // outside verdict
  EXPECT_EQ(trace.verdict->decided_by, DecidedBy::SinglePerspectiveFallback);
  EXPECT_EQ(ctx.gateway->ledger_snapshot().total_requests(), 2u);
}

TEST(RunArticle, InsideOnlyModeSkipsOutsidePath) {
  Rig rig;
  rig.options.mode = PipelineMode::InsideOnly;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Real, Label::Fake, true});
  auto ctx = rig.context();
  ctx.search_client = nullptr;
  PipelineTrace trace = run_article(article, ctx);
  EXPECT_FALSE(trace.evidence.has_value());
  EXPECT_FALSE(trace.outside_judgement.has_value());
  ASSERT_TRUE(trace.verdict.has_value());
  EXPECT_EQ(trace.verdict->final_label, Label::Fake);  // inside verdict
  EXPECT_EQ(trace.verdict->decided_by, DecidedBy::SinglePerspectiveFallback);
}

TEST(RunArticle, UnparseableInsideJudgeFallsBackToOutside) {
  Rig rig;
  auto article = test_article();
  rig.script(article, {Label::Fake, Label::Real, Label::Fake, true});
  // Override the scripted inside judge with garbage via stage fallback
  // removal: re-register exact fixture with garbage.
  auto keywords = parse_keywords(testutil::scripted_detection_completion(article),
                                 rig.options.detection, article.id)
                      .value();
  auto vec = embed_keywords(keywords, *rig.provider).value();
  auto demos = knn_retrieve(vec, *rig.store, rig.options.inside_k).value();
  auto prompt = render_inside_prompt(article, demos, rig.options.judge).value();
  rig.mock->add_exact("inside_judge", sha256_hex(prompt), "garbage with no phrase");

  auto ctx = rig.context();
  PipelineTrace trace = run_article(article, ctx);
  EXPECT_FALSE(trace.inside_judgement.has_value());
  ASSERT_TRUE(trace.verdict.has_value());
  EXPECT_EQ(trace.verdict->final_label, Label::Real);
  EXPECT_EQ(trace.verdict->decided_by, DecidedBy::SinglePerspectiveFallback);
  bool recorded = false;
  for (const auto& e : trace.stage_errors) {
    recorded |= e.stage == stage::kInsideJudge;
  }
  EXPECT_TRUE(recorded);
}

// ---------------------------------------------------------------------------
// Stage cache mechanics

TEST(StageCache, PutGetRoundTripAndStats) {
  TempDir tmp;
  StageCache cache((tmp / "c").string());
  nlohmann::json record = {{"payload", {{"x", 1}}}, {"latency_ms", 7}};
  ASSERT_TRUE(cache.put("detection", "digest1", "fp1", record).ok());
  auto hit = cache.get("detection", "digest1", "fp1");
  ASSERT_TRUE(hit.has_value());
  EXPECT_EQ((*hit)["latency_ms"], 7);
  EXPECT_FALSE(cache.get("detection", "digest1", "fp2").has_value());
  EXPECT_FALSE(cache.get("detection", "digest2", "fp1").has_value());
  auto stats = cache.stats();
  EXPECT_EQ(stats.total, 1u);
  EXPECT_EQ(stats.entries_per_stage["detection"], 1u);
  ASSERT_TRUE(cache.clear().ok());
  EXPECT_EQ(cache.stats().total, 0u);
}

// ---------------------------------------------------------------------------
// Context assembly from config

TEST(MakeContext, LiveModelWithoutApiKeyIsActionableConfigError) {
  auto cfg = Config::from_string(
      "model.endpoint_url = http://localhost:9/v1/chat/completions\n"
      "pipeline.mode = outside_only\n"
      "search.fixtures_path = /dev/null\n");
  ASSERT_TRUE(cfg.ok());
  auto ctx = make_context(*cfg);
  ASSERT_FALSE(ctx.ok());
  EXPECT_EQ(ctx.error().code, Errc::config_error);
  EXPECT_NE(ctx.error().message.find("JANUS_MODEL_API_KEY"), std::string::npos);
}

TEST(MakeContext, ProviderFingerprintMismatchRejected) {
  TempDir tmp;
  CharHistogramProvider provider(8);
  Datastore store = build_direct_store(small_train(), provider);
  ASSERT_TRUE(save_datastore(store, tmp / "store.jsonl").ok());
  testutil::write_model_fixtures(tmp / "m.jsonl", {{"detection", "", "a, b, c, d, e"}});
  testutil::write_search_fixtures(tmp / "s.jsonl", {});
  auto cfg = Config::from_string(
      "model.fixtures_path = " + (tmp / "m.jsonl").string() + "\n" +
      "search.fixtures_path = " + (tmp / "s.jsonl").string() + "\n" +
      "inside.store_path = " + (tmp / "store.jsonl").string() + "\n" +
      "embedding.dim = 16\n");  // store was built at dim 8
  ASSERT_TRUE(cfg.ok());
  auto ctx = make_context(*cfg);
  ASSERT_FALSE(ctx.ok());
  EXPECT_EQ(ctx.error().code, Errc::config_error);
  EXPECT_NE(ctx.error().message.find("rebuild"), std::string::npos);
}

TEST(MakeContext, AssemblesMockPipelineFromConfig) {
  TempDir tmp;
  CharHistogramProvider provider(16);
  Datastore store = build_direct_store(small_train(), provider);
  ASSERT_TRUE(save_datastore(store, tmp / "store.jsonl").ok());
  testutil::write_model_fixtures(tmp / "m.jsonl", {{"detection", "", "a, b, c, d, e"}});
  testutil::write_search_fixtures(tmp / "s.jsonl", {});
  auto cfg = Config::from_string(
      "model.fixtures_path = " + (tmp / "m.jsonl").string() + "\n" +
      "search.fixtures_path = " + (tmp / "s.jsonl").string() + "\n" +
      "inside.store_path = " + (tmp / "store.jsonl").string() + "\n" +
      "pipeline.cache_dir = " + (tmp / "cache").string() + "\n" +
      "inside.k = 2\n");
  ASSERT_TRUE(cfg.ok());
  auto ctx = make_context(*cfg);
  ASSERT_TRUE(ctx.ok()) << ctx.error().describe();
  EXPECT_NE(ctx->gateway, nullptr);
  EXPECT_NE(ctx->datastore, nullptr);
  EXPECT_NE(ctx->search_client, nullptr);
  EXPECT_NE(ctx->cache, nullptr);
  EXPECT_EQ(ctx->datastore->entries.size(), 4u);
}

}  // namespace
}  // namespace janus
