#pragma once

#include <condition_variable>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <utility>

#include "httplib.h"
#include "json.hpp"

#include "janus/digest.hpp"
#include "janus/domain.hpp"
#include "janus/result.hpp"

namespace janus {

enum class StageTag { Detection, InsideJudge, OutsideJudge, Determination };

inline std::string to_string(StageTag tag) {
  switch (tag) {
    case StageTag::Detection: return "detection";
    case StageTag::InsideJudge: return "inside_judge";
    case StageTag::OutsideJudge: return "outside_judge";
    case StageTag::Determination: return "determination";
  }
  return "unknown";
}

struct SamplingConfig {
  double temperature = 0.70;
  int top_k = 50;
  double top_p = 0.95;
  int max_new_tokens = 256;
  bool do_sample = true;
};

struct ModelRequest {
  std::string prompt;
  SamplingConfig sampling;
  StageTag stage_tag = StageTag::Detection;
};

struct ModelResponse {
  std::string text;
  std::int64_t latency_ms = 0;
  std::string backend_id;
};

struct StageCounters {
  std::uint64_t requests = 0;
  std::uint64_t retries = 0;
  std::uint64_t failures = 0;
};

struct CallLedger {
  StageCounters detection;
  StageCounters inside_judge;
  StageCounters outside_judge;
  StageCounters determination;

  StageCounters& for_stage(StageTag tag) {
    switch (tag) {
      case StageTag::Detection: return detection;
      case StageTag::InsideJudge: return inside_judge;
      case StageTag::OutsideJudge: return outside_judge;
      case StageTag::Determination: return determination;
    }
    return detection;
  }
  const StageCounters& for_stage(StageTag tag) const {
    return const_cast<CallLedger*>(this)->for_stage(tag);
  }

  std::uint64_t total_requests() const {
    return detection.requests + inside_judge.requests + outside_judge.requests +
           determination.requests;
  }
};

// ---------------------------------------------------------------------------
// Backends

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual Result<std::string> complete(const ModelRequest& request) = 0;
  virtual std::string id() const = 0;
};

/// Deterministic replay backend. Fixture file is line-delimited JSON with
/// fields `stage`, optional `prompt_digest` (sha256 of the exact prompt), and
/// `completion`. A record without prompt_digest acts as the fallback for its
/// stage; exact digest matches win.
class MockChatBackend : public ChatBackend {
 public:
  MockChatBackend() = default;

  static Result<std::shared_ptr<MockChatBackend>> load(
      const std::filesystem::path& path) {
    auto content = detail::read_file(path);
    if (!content.ok()) {
      return make_error(Errc::config_error, "cannot read fixtures: " + path.string());
    }
    auto backend = std::make_shared<MockChatBackend>();
    std::istringstream in(*content);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (detail::trim(line).empty()) continue;
      auto j = nlohmann::json::parse(line, nullptr, false);
      if (j.is_discarded()) {
        return make_error(Errc::config_error, path.string() + ":" +
                                                  std::to_string(lineno) +
                                                  ": invalid fixture JSON");
      }
      std::string stage = j.value("stage", "");
      std::string completion = j.value("completion", "");
      if (j.contains("prompt_digest")) {
        backend->add_exact(stage, j["prompt_digest"].get<std::string>(), completion);
      } else {
        backend->add_fallback(stage, completion);
      }
    }
    backend->id_ = "mock:" + path.filename().string();
    return backend;
  }

  void add_exact(const std::string& stage, const std::string& prompt_digest,
                 std::string completion) {
    exact_[stage + "/" + prompt_digest] = std::move(completion);
  }

  void add_fallback(const std::string& stage, std::string completion) {
    fallback_[stage] = std::move(completion);
  }

  Result<std::string> complete(const ModelRequest& request) override {
    std::string stage = to_string(request.stage_tag);
    auto it = exact_.find(stage + "/" + sha256_hex(request.prompt));
    if (it != exact_.end()) return it->second;
    auto fb = fallback_.find(stage);
    if (fb != fallback_.end()) return fb->second;
    return make_error(Errc::backend_refused,
                      "no fixture for stage '" + stage + "' (prompt digest " +
                          sha256_hex(request.prompt).substr(0, 12) + "...)");
  }

  std::string id() const override { return id_.empty() ? "mock" : id_; }

 private:
  std::map<std::string, std::string> exact_;
  std::map<std::string, std::string> fallback_;
  std::string id_;
};

/// Chat-completions-style HTTP backend: POSTs a single user message plus the
/// sampling fields, reads choices[0]. Works against the common serving stacks
/// for instruction-tuned models.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::string endpoint_url, std::string api_key,
                  std::string model_name, int timeout_sec = 120)
      : endpoint_url_(std::move(endpoint_url)),
        api_key_(std::move(api_key)),
        model_name_(std::move(model_name)),
        timeout_sec_(timeout_sec) {}

  Result<std::string> complete(const ModelRequest& request) override {
    auto parts = detail::split_url(endpoint_url_);
    if (!parts.ok()) return parts.error();

    nlohmann::json body;
    body["model"] = model_name_;
    body["messages"] = nlohmann::json::array(
        {{{"role", "user"}, {"content", request.prompt}}});
    body["temperature"] = request.sampling.temperature;
    body["top_k"] = request.sampling.top_k;
    body["top_p"] = request.sampling.top_p;
    body["max_tokens"] = request.sampling.max_new_tokens;
    body["do_sample"] = request.sampling.do_sample;

    httplib::Client client(parts->base);
    client.set_connection_timeout(timeout_sec_, 0);
    client.set_read_timeout(timeout_sec_, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) {
      headers.emplace("Authorization", "Bearer " + api_key_);
    }
    auto res = client.Post(parts->path, headers, body.dump(), "application/json");
    if (!res) {
      return make_error(Errc::transport_error,
                        "connection to " + parts->base + " failed: " +
                            httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      Errc code = detail::retryable_status(res->status) ? Errc::transport_error
                                                        : Errc::backend_refused;
      return make_error(code, "model endpoint returned HTTP " +
                                  std::to_string(res->status) + ": " + res->body);
    }
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded()) {
      return make_error(Errc::transport_error, "model endpoint returned invalid JSON");
    }
    if (j.contains("choices") && !j["choices"].empty()) {
      const auto& choice = j["choices"][0];
      if (choice.contains("message") && choice["message"].contains("content")) {
        return choice["message"]["content"].get<std::string>();
      }
      if (choice.contains("text")) return choice["text"].get<std::string>();
    }
    return make_error(Errc::transport_error, "model response has no choices[0] text");
  }

  std::string id() const override { return "http:" + model_name_; }

 private:
  std::string endpoint_url_;
  std::string api_key_;
  std::string model_name_;
  int timeout_sec_;
};

// ---------------------------------------------------------------------------
// Gateway

struct RetryPolicy {
  int retry_limit = 2;       // additional attempts after the first
  int backoff_base_ms = 500; // doubles per retry
};

/// The single entry point every stage uses to call the model. Shareable
/// across threads; call accounting is internally synchronized and live
/// requests are bounded by the concurrency cap.
class LlmGateway {
 public:
  LlmGateway(std::shared_ptr<ChatBackend> backend, RetryPolicy retry = {},
             int concurrency = 4)
      : backend_(std::move(backend)), retry_(retry), gate_(concurrency) {}

  Result<ModelResponse> complete(const ModelRequest& request) {
    if (request.prompt.empty()) {
      return make_error(Errc::backend_refused, "empty prompt");
    }
    janus::detail::ConcurrencyGate::Pass pass(gate_);
    {
      std::lock_guard lock(mu_);
      ledger_.for_stage(request.stage_tag).requests++;
    }
    janus::detail::StopWatch watch;
    int attempt = 0;
    while (true) {
      auto completion = backend_->complete(request);
      if (completion.ok()) {
        ModelResponse response;
        response.text = std::move(*completion);
        response.latency_ms = watch.elapsed_ms();
        response.backend_id = backend_->id();
        return response;
      }
      const Error& err = completion.error();
      bool retryable = err.code == Errc::transport_error;
      if (!retryable || attempt >= retry_.retry_limit) {
        std::lock_guard lock(mu_);
        ledger_.for_stage(request.stage_tag).failures++;
        return err;
      }
      {
        std::lock_guard lock(mu_);
        ledger_.for_stage(request.stage_tag).retries++;
      }
      std::this_thread::sleep_for(
          std::chrono::milliseconds(retry_.backoff_base_ms << attempt));
      ++attempt;
    }
  }

  CallLedger ledger_snapshot() const {
    std::lock_guard lock(mu_);
    return ledger_;
  }

 private:
  std::shared_ptr<ChatBackend> backend_;
  RetryPolicy retry_;
  janus::detail::ConcurrencyGate gate_;
  mutable std::mutex mu_;
  CallLedger ledger_;
};

}  // namespace janus
