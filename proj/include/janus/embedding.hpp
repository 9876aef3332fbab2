#pragma once

#include <cmath>
#include <memory>
#include <string>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "janus/llm_gateway.hpp"
#include "janus/result.hpp"

namespace janus {

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual Result<std::vector<double>> embed(const std::string& text) = 0;
  virtual int dim() const = 0;
  // Identifies provider + version; stores built with a different fingerprint
  // are rejected at load.
  virtual std::string fingerprint() const = 0;
};

/// Deterministic offline provider: a byte histogram over `dim` buckets
/// (bucket = byte value mod dim), L2-normalized. No semantics, but stable,
/// fast, and good enough to drive retrieval tests end to end.
class CharHistogramProvider : public EmbeddingProvider {
 public:
  explicit CharHistogramProvider(int dim = 16) : dim_(dim < 1 ? 1 : dim) {}

  Result<std::vector<double>> embed(const std::string& text) override {
    std::vector<double> v(static_cast<size_t>(dim_), 0.0);
    for (unsigned char c : text) {
      v[c % static_cast<unsigned>(dim_)] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    if (norm > 0.0) {
      for (double& x : v) x /= norm;
    }
    return v;
  }

  int dim() const override { return dim_; }
  std::string fingerprint() const override {
    return "charhist-v1:dim=" + std::to_string(dim_);
  }

 private:
  int dim_;
};

/// Remote encoder endpoint. POSTs {"model", "input"} and expects
/// {"data": [{"embedding": [...]}]}; the serving side is responsible for
/// mean pooling.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint_url, std::string model_name, int dim,
                        std::string api_key = "", int timeout_sec = 60)
      : endpoint_url_(std::move(endpoint_url)),
        model_name_(std::move(model_name)),
        api_key_(std::move(api_key)),
        dim_(dim),
        timeout_sec_(timeout_sec) {}

  Result<std::vector<double>> embed(const std::string& text) override {
    auto parts = detail::split_url(endpoint_url_);
    if (!parts.ok()) return parts.error();
    httplib::Client client(parts->base);
    client.set_connection_timeout(timeout_sec_, 0);
    client.set_read_timeout(timeout_sec_, 0);
    httplib::Headers headers;
    if (!api_key_.empty()) headers.emplace("Authorization", "Bearer " + api_key_);
    nlohmann::json body = {{"model", model_name_}, {"input", text}};
    auto res = client.Post(parts->path, headers, body.dump(), "application/json");
    if (!res) {
      return make_error(Errc::provider_error, "embedding endpoint unreachable: " +
                                                  httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      return make_error(Errc::provider_error, "embedding endpoint returned HTTP " +
                                                  std::to_string(res->status));
    }
    auto j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.contains("data") || j["data"].empty() ||
        !j["data"][0].contains("embedding")) {
      return make_error(Errc::provider_error, "embedding response missing data[0].embedding");
    }
    std::vector<double> v = j["data"][0]["embedding"].get<std::vector<double>>();
    if (static_cast<int>(v.size()) != dim_) {
      return make_error(Errc::dimension_mismatch,
                        "provider returned dim " + std::to_string(v.size()) +
                            ", expected " + std::to_string(dim_));
    }
    for (double x : v) {
      if (!std::isfinite(x)) {
        return make_error(Errc::provider_error, "provider returned a non-finite value");
      }
    }
    return v;
  }

  int dim() const override { return dim_; }
  std::string fingerprint() const override {
    return "http-mean-v1:" + model_name_ + ":dim=" + std::to_string(dim_);
  }

 private:
  std::string endpoint_url_;
  std::string model_name_;
  std::string api_key_;
  int dim_;
  int timeout_sec_;
};

}  // namespace janus
