#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "janus/config.hpp"
#include "janus/determination.hpp"
#include "janus/detection.hpp"
#include "janus/domain.hpp"
#include "janus/inside_investigation.hpp"
#include "janus/judge.hpp"
#include "janus/llm_gateway.hpp"
#include "janus/outside_investigation.hpp"
#include "janus/stage_cache.hpp"

namespace janus {

enum class PipelineMode { Dual, InsideOnly, OutsideOnly };

inline std::string to_string(PipelineMode m) {
  switch (m) {
    case PipelineMode::Dual: return "dual";
    case PipelineMode::InsideOnly: return "inside_only";
    case PipelineMode::OutsideOnly: return "outside_only";
  }
  return "dual";
}

inline Result<PipelineMode> parse_pipeline_mode(std::string_view s) {
  std::string t = detail::to_lower(detail::trim(s));
  if (t == "dual" || t.empty()) return PipelineMode::Dual;
  if (t == "inside_only" || t == "inside") return PipelineMode::InsideOnly;
  if (t == "outside_only" || t == "outside") return PipelineMode::OutsideOnly;
  return make_error(Errc::config_error, "unknown pipeline.mode: '" + std::string(s) + "'");
}

struct PipelineOptions {
  DetectionConfig detection;
  JudgeConfig judge;
  DeterminationConfig determination;
  SamplingConfig sampling;
  int inside_k = 2;
  PipelineMode mode = PipelineMode::Dual;
};

// Stage names as they appear in traces, timings, and the cache layout.
namespace stage {
inline constexpr const char* kDetection = "detection";
inline constexpr const char* kInsideInvestigation = "inside_investigation";
inline constexpr const char* kOutsideInvestigation = "outside_investigation";
inline constexpr const char* kInsideJudge = "inside_judge";
inline constexpr const char* kOutsideJudge = "outside_judge";
inline constexpr const char* kDetermination = "determination";
}  // namespace stage

/// Per-stage cache fingerprints. Each one digests the stage's own
/// configuration plus the fingerprints of the stages it consumes, so cache
/// validity follows the dataflow.
struct StageFingerprints {
  std::string detection;
  std::string inside_investigation;
  std::string outside_investigation;
  std::string inside_judge;
  std::string outside_judge;
  std::string determination;
};

inline StageFingerprints compute_stage_fingerprints(
    const PipelineOptions& options, const std::string& model_id,
    const std::string& provider_fingerprint, const std::string& store_digest,
    const std::string& search_id) {
  auto fp = [](const nlohmann::json& j) { return sha256_hex(j.dump()); };
  nlohmann::json model = {model_id,
                          options.sampling.temperature,
                          options.sampling.top_k,
                          options.sampling.top_p,
                          options.sampling.max_new_tokens,
                          options.sampling.do_sample};
  nlohmann::json judge_cfg = {options.judge.truncate_chars,
                              options.judge.retry_on_unparseable};
  StageFingerprints fps;
  fps.detection = fp({kSchemaVersion, "detection", options.detection.n_keywords, model});
  fps.inside_investigation = fp({fps.detection, "inside_investigation",
                                 provider_fingerprint, store_digest, options.inside_k});
  fps.outside_investigation = fp({fps.detection, "outside_investigation", search_id});
  fps.inside_judge = fp({fps.inside_investigation, "inside_judge", judge_cfg, model});
  fps.outside_judge = fp({fps.outside_investigation, "outside_judge", judge_cfg, model});
  fps.determination = fp({fps.inside_judge, fps.outside_judge, "determination",
                          to_string(options.determination.conflict_fallback), model});
  return fps;
}

/// Everything one article run needs. Immutable and shareable across article
/// workers.
struct PipelineContext {
  PipelineOptions options;
  std::shared_ptr<LlmGateway> gateway;
  std::shared_ptr<EmbeddingProvider> provider;    // unused in outside_only mode
  std::shared_ptr<SearchClient> search_client;    // unused in inside_only mode
  std::shared_ptr<const Datastore> datastore;     // unused in outside_only mode
  std::shared_ptr<StageCache> cache;              // null disables stage caching
  StageFingerprints fingerprints;
};

namespace pipeline_detail {

struct StageRecord {
  nlohmann::json payload;
  std::vector<std::string> warnings;
  std::int64_t latency_ms = 0;
  std::string prompt_digest;
  std::string completion;
};

inline nlohmann::json to_json(const StageRecord& r) {
  nlohmann::json j;
  j["payload"] = r.payload;
  j["warnings"] = r.warnings;
  j["latency_ms"] = r.latency_ms;
  if (!r.prompt_digest.empty()) j["prompt_digest"] = r.prompt_digest;
  if (!r.completion.empty()) j["completion"] = r.completion;
  return j;
}

inline StageRecord record_from_json(const nlohmann::json& j) {
  StageRecord r;
  r.payload = j.value("payload", nlohmann::json());
  r.warnings = j.value("warnings", std::vector<std::string>{});
  r.latency_ms = j.value("latency_ms", std::int64_t{0});
  r.prompt_digest = j.value("prompt_digest", "");
  r.completion = j.value("completion", "");
  return r;
}

inline std::optional<StageRecord> lookup(const PipelineContext& ctx,
                                         const std::string& stage,
                                         const std::string& article_digest,
                                         const std::string& config_fp) {
  if (!ctx.cache) return std::nullopt;
  auto j = ctx.cache->get(stage, article_digest, config_fp);
  if (!j) return std::nullopt;
  return record_from_json(*j);
}

inline void store(const PipelineContext& ctx, const std::string& stage,
                  const std::string& article_digest, const std::string& config_fp,
                  const StageRecord& record) {
  if (!ctx.cache) return;
  // Cache write failures are non-fatal; the run simply stays cold.
  (void)ctx.cache->put(stage, article_digest, config_fp, to_json(record));
}

inline void absorb_warnings(PipelineTrace& trace, const std::string& stage,
                            const std::vector<std::string>& warnings) {
  for (const auto& w : warnings) trace.add_error(stage, "warning: " + w);
}

}  // namespace pipeline_detail

/// One article through the full dataflow:
/// detection -> (inside | outside investigation) -> (inside | outside judge)
/// -> determination. Never throws on per-article trouble; the worst case is
/// a trace full of stage_errors and no verdict. Stage results are cached
/// under (article digest, stage, config fingerprint) when a cache is set.
inline PipelineTrace run_article(const NewsArticle& article, const PipelineContext& ctx) {
  using pipeline_detail::StageRecord;
  PipelineTrace trace;
  trace.article_id = article.id;
  const std::string adigest = article_digest(article);
  const PipelineOptions& opt = ctx.options;

  // ---- detection ----------------------------------------------------------
  if (auto hit = pipeline_detail::lookup(ctx, stage::kDetection, adigest,
                                         ctx.fingerprints.detection)) {
    trace.keyword_set = jsonio::keywordset_from_json(hit->payload);
    trace.timings_ms[stage::kDetection] = hit->latency_ms;
    pipeline_detail::absorb_warnings(trace, stage::kDetection, hit->warnings);
  } else {
    detail::StopWatch watch;
    auto detected = detect(article, opt.detection, *ctx.gateway);
    std::int64_t elapsed = watch.elapsed_ms();
    trace.timings_ms[stage::kDetection] = elapsed;
    if (detected.ok()) {
      trace.keyword_set = detected->keywords;
      pipeline_detail::absorb_warnings(trace, stage::kDetection, detected->warnings);
      StageRecord record;
      record.payload = jsonio::to_json(detected->keywords);
      record.warnings = detected->warnings;
      record.latency_ms = elapsed;
      record.prompt_digest = detected->prompt_digest;
      record.completion = detected->raw_completion;
      pipeline_detail::store(ctx, stage::kDetection, adigest,
                             ctx.fingerprints.detection, record);
    } else {
      trace.add_error(stage::kDetection, detected.error().describe());
    }
  }

  // ---- inside investigation + judge ---------------------------------------
  std::optional<Judgement> inside_judgement;
  bool inside_enabled = opt.mode != PipelineMode::OutsideOnly && ctx.datastore != nullptr;
  if (inside_enabled && trace.keyword_set) {
    if (auto hit = pipeline_detail::lookup(ctx, stage::kInsideInvestigation, adigest,
                                           ctx.fingerprints.inside_investigation)) {
      auto demos = jsonio::demonstrations_from_json(hit->payload);
      if (demos.ok()) {
        trace.demonstrations = *demos;
        trace.timings_ms[stage::kInsideInvestigation] = hit->latency_ms;
        pipeline_detail::absorb_warnings(trace, stage::kInsideInvestigation, hit->warnings);
      }
    }
    if (!trace.demonstrations) {
      detail::StopWatch watch;
      auto vec = ctx.provider ? embed_keywords(*trace.keyword_set, *ctx.provider)
                              : Result<EmbeddingVector>(make_error(
                                    Errc::config_error, "no embedding provider configured"));
      if (!vec.ok()) {
        trace.add_error(stage::kInsideInvestigation, vec.error().describe());
      } else {
        auto demos = knn_retrieve(*vec, *ctx.datastore, opt.inside_k);
        std::int64_t elapsed = watch.elapsed_ms();
        trace.timings_ms[stage::kInsideInvestigation] = elapsed;
        if (!demos.ok()) {
          trace.add_error(stage::kInsideInvestigation, demos.error().describe());
        } else {
          StageRecord record;
          record.latency_ms = elapsed;
          size_t k = static_cast<size_t>(opt.inside_k);
          if (demos->positive.size() < k) {
            record.warnings.push_back("retrieved " + std::to_string(demos->positive.size()) +
                                      "/" + std::to_string(k) + " fake demonstrations");
          }
          if (demos->negative.size() < k) {
            record.warnings.push_back("retrieved " + std::to_string(demos->negative.size()) +
                                      "/" + std::to_string(k) + " real demonstrations");
          }
          trace.demonstrations = *demos;
          pipeline_detail::absorb_warnings(trace, stage::kInsideInvestigation,
                                           record.warnings);
          record.payload = jsonio::to_json(*demos);
          pipeline_detail::store(ctx, stage::kInsideInvestigation, adigest,
                                 ctx.fingerprints.inside_investigation, record);
        }
      }
    }
  }
  if (inside_enabled && trace.demonstrations && !trace.demonstrations->empty()) {
    if (auto hit = pipeline_detail::lookup(ctx, stage::kInsideJudge, adigest,
                                           ctx.fingerprints.inside_judge)) {
      auto jd = jsonio::judgement_from_json(hit->payload);
      if (jd.ok()) {
        inside_judgement = *jd;
        trace.timings_ms[stage::kInsideJudge] = hit->latency_ms;
        pipeline_detail::absorb_warnings(trace, stage::kInsideJudge, hit->warnings);
      }
    }
    if (!inside_judgement) {
      detail::StopWatch watch;
      auto outcome = inside_judge(article, *trace.demonstrations, *ctx.gateway, opt.judge);
      std::int64_t elapsed = watch.elapsed_ms();
      trace.timings_ms[stage::kInsideJudge] = elapsed;
      if (!outcome.ok()) {
        trace.add_error(stage::kInsideJudge, outcome.error().describe());
      } else {
        inside_judgement = outcome->judgement;
        pipeline_detail::absorb_warnings(trace, stage::kInsideJudge, outcome->warnings);
        StageRecord record;
        record.payload = jsonio::to_json(outcome->judgement);
        record.warnings = outcome->warnings;
        record.latency_ms = elapsed;
        record.prompt_digest = outcome->prompt_digest;
        record.completion = outcome->judgement.raw_model_output;
        pipeline_detail::store(ctx, stage::kInsideJudge, adigest,
                               ctx.fingerprints.inside_judge, record);
      }
    }
  } else if (inside_enabled && trace.demonstrations && trace.demonstrations->empty()) {
    trace.add_error(stage::kInsideJudge, "no inside demonstrations");
  }
  trace.inside_judgement = inside_judgement;

  // ---- outside investigation + judge --------------------------------------
  std::optional<Judgement> outside_judgement;
  bool outside_enabled =
      opt.mode != PipelineMode::InsideOnly && ctx.search_client != nullptr;
  if (outside_enabled && trace.keyword_set) {
    if (auto hit = pipeline_detail::lookup(ctx, stage::kOutsideInvestigation, adigest,
                                           ctx.fingerprints.outside_investigation)) {
      trace.evidence = jsonio::evidence_from_json(hit->payload);
      trace.timings_ms[stage::kOutsideInvestigation] = hit->latency_ms;
      pipeline_detail::absorb_warnings(trace, stage::kOutsideInvestigation, hit->warnings);
    } else {
      detail::StopWatch watch;
      SearchQuery query = build_query(*trace.keyword_set);
      auto evidence = search(query, *ctx.search_client);
      std::int64_t elapsed = watch.elapsed_ms();
      trace.timings_ms[stage::kOutsideInvestigation] = elapsed;
      if (!evidence.ok()) {
        trace.add_error(stage::kOutsideInvestigation, evidence.error().describe());
      } else {
        trace.evidence = *evidence;
        StageRecord record;
        record.payload = jsonio::to_json(*evidence);
        record.latency_ms = elapsed;
        pipeline_detail::store(ctx, stage::kOutsideInvestigation, adigest,
                               ctx.fingerprints.outside_investigation, record);
      }
    }
    if (trace.evidence && trace.evidence->empty()) {
      trace.add_error(stage::kOutsideInvestigation, "no outside evidence");
    }
  }
  if (outside_enabled && trace.evidence) {
    if (auto hit = pipeline_detail::lookup(ctx, stage::kOutsideJudge, adigest,
                                           ctx.fingerprints.outside_judge)) {
      auto jd = jsonio::judgement_from_json(hit->payload);
      if (jd.ok()) {
        outside_judgement = *jd;
        trace.timings_ms[stage::kOutsideJudge] = hit->latency_ms;
        pipeline_detail::absorb_warnings(trace, stage::kOutsideJudge, hit->warnings);
      }
    }
    if (!outside_judgement) {
      detail::StopWatch watch;
      auto outcome = outside_judge(article, *trace.evidence, *ctx.gateway, opt.judge);
      std::int64_t elapsed = watch.elapsed_ms();
      trace.timings_ms[stage::kOutsideJudge] = elapsed;
      if (!outcome.ok()) {
        trace.add_error(stage::kOutsideJudge, outcome.error().describe());
      } else {
        outside_judgement = outcome->judgement;
        pipeline_detail::absorb_warnings(trace, stage::kOutsideJudge, outcome->warnings);
        StageRecord record;
        record.payload = jsonio::to_json(outcome->judgement);
        record.warnings = outcome->warnings;
        record.latency_ms = elapsed;
        record.prompt_digest = outcome->prompt_digest;
        record.completion = outcome->judgement.raw_model_output;
        pipeline_detail::store(ctx, stage::kOutsideJudge, adigest,
                               ctx.fingerprints.outside_judge, record);
      }
    }
  }
  trace.outside_judgement = outside_judgement;

  // ---- determination -------------------------------------------------------
  if (auto hit = pipeline_detail::lookup(ctx, stage::kDetermination, adigest,
                                         ctx.fingerprints.determination)) {
    auto v = jsonio::verdict_from_json(hit->payload);
    if (v.ok()) {
      trace.verdict = *v;
      trace.timings_ms[stage::kDetermination] = hit->latency_ms;
      pipeline_detail::absorb_warnings(trace, stage::kDetermination, hit->warnings);
      return trace;
    }
  }
  detail::StopWatch watch;
  auto outcome = determine(article, inside_judgement, outside_judgement, *ctx.gateway,
                           opt.determination, opt.judge);
  std::int64_t elapsed = watch.elapsed_ms();
  trace.timings_ms[stage::kDetermination] = elapsed;
  if (!outcome.ok()) {
    trace.add_error(stage::kDetermination, outcome.error().describe());
    return trace;
  }
  trace.verdict = outcome->verdict;
  pipeline_detail::absorb_warnings(trace, stage::kDetermination, outcome->warnings);
  StageRecord record;
  record.payload = jsonio::to_json(outcome->verdict);
  record.warnings = outcome->warnings;
  record.latency_ms = elapsed;
  record.prompt_digest = outcome->prompt_digest;
  record.completion = outcome->raw_completion;
  pipeline_detail::store(ctx, stage::kDetermination, adigest,
                         ctx.fingerprints.determination, record);
  return trace;
}

}  // namespace janus
