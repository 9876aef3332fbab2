#pragma once

#include <memory>
#include <string>

#include "janus/config.hpp"
#include "janus/evaluation.hpp"
#include "janus/pipeline.hpp"

namespace janus {

// Builders that wire a Config into live or replay components. Selection
// rules: a *_fixtures_path key selects the deterministic replay
// implementation; otherwise an endpoint url selects the live one.

inline Result<std::shared_ptr<ChatBackend>> make_chat_backend(const Config& cfg) {
  if (auto fixtures = cfg.get("model.fixtures_path")) {
    auto mock = MockChatBackend::load(*fixtures);
    if (!mock.ok()) return mock.error();
    return std::shared_ptr<ChatBackend>(*mock);
  }
  auto endpoint = cfg.get("model.endpoint_url");
  if (!endpoint) {
    return make_error(Errc::config_error,
                      "no model backend: set model.fixtures_path or model.endpoint_url");
  }
  auto api_key = cfg.get_or("model.api_key", "");
  if (api_key.empty()) {
    return make_error(Errc::config_error,
                      "model.api_key is required with a live model endpoint "
                      "(set it in the config or export " +
                          Config::env_key("model.api_key") +
                          "; use the literal value 'none' for unauthenticated "
                          "local endpoints)");
  }
  if (api_key == "none") api_key.clear();
  return std::shared_ptr<ChatBackend>(std::make_shared<HttpChatBackend>(
      *endpoint, api_key, cfg.get_or("model.name", "zephyr-7b-beta")));
}

inline SamplingConfig sampling_from_config(const Config& cfg) {
  SamplingConfig s;
  s.temperature = cfg.get_double("model.temperature", s.temperature);
  s.top_k = cfg.get_int("model.top_k", s.top_k);
  s.top_p = cfg.get_double("model.top_p", s.top_p);
  s.max_new_tokens = cfg.get_int("model.max_new_tokens", s.max_new_tokens);
  s.do_sample = cfg.get_bool("model.do_sample", s.do_sample);
  return s;
}

inline Result<std::shared_ptr<LlmGateway>> make_gateway(const Config& cfg) {
  auto backend = make_chat_backend(cfg);
  if (!backend.ok()) return backend.error();
  RetryPolicy retry;
  retry.retry_limit = cfg.get_int("model.retry_limit", retry.retry_limit);
  retry.backoff_base_ms = cfg.get_int("model.backoff_ms", retry.backoff_base_ms);
  return std::make_shared<LlmGateway>(*backend, retry,
                                      cfg.get_int("model.concurrency", 4));
}

inline Result<std::shared_ptr<EmbeddingProvider>> make_embedding_provider(
    const Config& cfg) {
  int dim = cfg.get_int("embedding.dim", 16);
  if (dim < 1) return make_error(Errc::config_error, "embedding.dim must be >= 1");
  if (auto endpoint = cfg.get("embedding.endpoint_url")) {
    return std::shared_ptr<EmbeddingProvider>(std::make_shared<HttpEmbeddingProvider>(
        *endpoint, cfg.get_or("embedding.model", "deberta-base"), dim,
        cfg.get_or("embedding.api_key", "")));
  }
  return std::shared_ptr<EmbeddingProvider>(std::make_shared<CharHistogramProvider>(dim));
}

inline Result<std::shared_ptr<SearchClient>> make_search_client(const Config& cfg) {
  std::shared_ptr<SearchClient> client;
  if (auto fixtures = cfg.get("search.fixtures_path")) {
    auto fixture_client = FixtureSearchClient::load(*fixtures);
    if (!fixture_client.ok()) return fixture_client.error();
    client = *fixture_client;
  } else if (auto endpoint = cfg.get("search.endpoint_url")) {
    auto api_key = cfg.get_or("search.api_key", "");
    if (api_key.empty()) {
      return make_error(Errc::config_error,
                        "search.api_key is required with a live search endpoint (set it "
                        "in the config or export " +
                            Config::env_key("search.api_key") + ")");
    }
    client = std::make_shared<HttpSearchClient>(
        *endpoint, api_key, cfg.get_int("search.retry_limit", 2),
        cfg.get_int("search.backoff_ms", 500), 30,
        cfg.get_int("search.concurrency", 4));
  } else {
    return make_error(Errc::config_error,
                      "no search client: set search.fixtures_path or search.endpoint_url");
  }
  if (auto cache_dir = cfg.get("search.cache_dir")) {
    client = std::make_shared<CachingSearchClient>(client, *cache_dir);
  }
  return client;
}

inline Result<PipelineOptions> pipeline_options_from_config(const Config& cfg) {
  PipelineOptions opt;
  opt.detection.n_keywords = cfg.get_int("detection.n_keywords", 5);
  if (opt.detection.n_keywords < 1) {
    return make_error(Errc::config_error, "detection.n_keywords must be >= 1");
  }
  opt.judge.truncate_chars =
      static_cast<size_t>(cfg.get_int("judge.truncate_chars", 2000));
  opt.judge.retry_on_unparseable = cfg.get_bool("judge.retry_on_unparseable", true);
  std::string fallback = cfg.get_or("determination.conflict_fallback", "outside");
  if (fallback == "outside") {
    opt.determination.conflict_fallback = Perspective::Outside;
  } else if (fallback == "inside") {
    opt.determination.conflict_fallback = Perspective::Inside;
  } else {
    return make_error(Errc::config_error,
                      "determination.conflict_fallback must be 'outside' or 'inside'");
  }
  opt.sampling = sampling_from_config(cfg);
  opt.inside_k = cfg.get_int("inside.k", 2);
  if (opt.inside_k < 1) return make_error(Errc::config_error, "inside.k must be >= 1");
  auto mode = parse_pipeline_mode(cfg.get_or("pipeline.mode", "dual"));
  if (!mode.ok()) return mode.error();
  opt.mode = *mode;
  return opt;
}

/// Assembles the full pipeline context from configuration: backend, gateway,
/// embedding provider, search client, datastore, stage cache, and the cache
/// fingerprints. A datastore is required (and its provider fingerprint
/// checked) unless the mode is outside_only.
inline Result<PipelineContext> make_context(const Config& cfg) {
  PipelineContext ctx;
  auto options = pipeline_options_from_config(cfg);
  if (!options.ok()) return options.error();
  ctx.options = *options;

  auto gateway = make_gateway(cfg);
  if (!gateway.ok()) return gateway.error();
  ctx.gateway = *gateway;

  std::string store_digest;
  if (ctx.options.mode != PipelineMode::OutsideOnly) {
    auto provider = make_embedding_provider(cfg);
    if (!provider.ok()) return provider.error();
    ctx.provider = *provider;
    auto store_path = cfg.get("inside.store_path");
    if (!store_path) {
      return make_error(Errc::config_error,
                        "inside.store_path is required unless pipeline.mode = outside_only");
    }
    auto store = load_datastore(*store_path);
    if (!store.ok()) return store.error();
    if (store->provider_fingerprint != ctx.provider->fingerprint()) {
      return make_error(Errc::config_error,
                        "datastore was built with provider '" + store->provider_fingerprint +
                            "' but the configured provider is '" +
                            ctx.provider->fingerprint() + "'; rebuild the store");
    }
    store_digest = datastore_digest(*store);
    ctx.datastore = std::make_shared<const Datastore>(std::move(*store));
  }

  std::string search_id = "disabled";
  if (ctx.options.mode != PipelineMode::InsideOnly) {
    auto client = make_search_client(cfg);
    if (!client.ok()) return client.error();
    ctx.search_client = *client;
    search_id = ctx.search_client->id();
  }

  if (auto cache_dir = cfg.get("pipeline.cache_dir")) {
    ctx.cache = std::make_shared<StageCache>(*cache_dir);
  }

  std::string model_id;
  {
    auto backend_for_id = cfg.get("model.fixtures_path");
    model_id = backend_for_id ? "mock:" + *backend_for_id
                              : "http:" + cfg.get_or("model.name", "zephyr-7b-beta");
  }
  ctx.fingerprints = compute_stage_fingerprints(
      ctx.options, model_id, ctx.provider ? ctx.provider->fingerprint() : "none",
      store_digest, search_id);
  return ctx;
}

}  // namespace janus
