#pragma once

#include <atomic>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "httplib.h"
#include "json.hpp"

#include "janus/digest.hpp"
#include "janus/domain.hpp"
#include "janus/result.hpp"

namespace janus {

// Queries are scoped to Wikipedia by prefixing the domain.
inline constexpr const char* kWikipediaPrefix = "en.wikipedia.org ";

// What the outside judge sees when retrieval produced nothing.
inline constexpr const char* kNoEvidenceText = "No additional information was retrieved.";

struct SearchQuery {
  std::string text;
  std::string keywords_digest;
};

/// Joins keywords with single spaces and prepends the Wikipedia scope prefix.
inline SearchQuery build_query(const KeywordSet& keywords) {
  SearchQuery q;
  std::string joined = keywords.joined();
  q.text = std::string(kWikipediaPrefix) + joined;
  q.keywords_digest = sha256_hex(joined);
  return q;
}

struct SearchResult {
  std::string title;
  std::string snippet;
  std::string url;
  int rank = 1;
};

struct SearchResponse {
  std::vector<SearchResult> results;
  std::string raw;  // raw client payload, persisted by the cache for replay
};

class SearchClient {
 public:
  virtual ~SearchClient() = default;
  virtual Result<SearchResponse> search(const std::string& query_text) = 0;
  virtual std::string id() const = 0;
};

/// Replay client backed by line-delimited JSON records with fields `query`,
/// `title`, `snippet`, `url`. A query with no record yields zero results.
class FixtureSearchClient : public SearchClient {
 public:
  FixtureSearchClient() = default;

  static Result<std::shared_ptr<FixtureSearchClient>> load(
      const std::filesystem::path& path) {
    auto content = detail::read_file(path);
    if (!content.ok()) {
      return make_error(Errc::config_error,
                        "cannot read search fixtures: " + path.string());
    }
    auto client = std::make_shared<FixtureSearchClient>();
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
      SearchResult r;
      r.title = j.value("title", "");
      r.snippet = j.value("snippet", "");
      r.url = j.value("url", "");
      client->add(j.value("query", ""), r);
    }
    client->id_ = "fixture:" + path.filename().string();
    return client;
  }

  void add(const std::string& query, SearchResult result) {
    results_[query].push_back(std::move(result));
  }

  Result<SearchResponse> search(const std::string& query_text) override {
    calls_++;
    SearchResponse response;
    auto it = results_.find(query_text);
    if (it != results_.end()) {
      response.results = it->second;
      for (size_t i = 0; i < response.results.size(); ++i) {
        response.results[i].rank = static_cast<int>(i) + 1;
      }
    }
    nlohmann::json raw = nlohmann::json::array();
    for (const auto& r : response.results) {
      raw.push_back({{"title", r.title}, {"snippet", r.snippet}, {"link", r.url}});
    }
    response.raw = raw.dump();
    return response;
  }

  std::string id() const override { return id_.empty() ? "fixture" : id_; }
  std::uint64_t calls() const { return calls_; }

 private:
  std::map<std::string, std::vector<SearchResult>> results_;
  std::string id_;
  std::uint64_t calls_ = 0;
};

/// SerpAPI-shaped live client: GET with q / engine=google / api_key, evidence
/// comes from the organic_results array.
class HttpSearchClient : public SearchClient {
 public:
  HttpSearchClient(std::string endpoint_url, std::string api_key,
                   int retry_limit = 2, int backoff_base_ms = 500,
                   int timeout_sec = 30, int concurrency = 4)
      : endpoint_url_(std::move(endpoint_url)),
        api_key_(std::move(api_key)),
        retry_limit_(retry_limit),
        backoff_base_ms_(backoff_base_ms),
        timeout_sec_(timeout_sec),
        gate_(concurrency) {}

  Result<SearchResponse> search(const std::string& query_text) override {
    detail::ConcurrencyGate::Pass pass(gate_);
    auto parts = detail::split_url(endpoint_url_);
    if (!parts.ok()) return parts.error();
    httplib::Params params{{"q", query_text}, {"engine", "google"}};
    if (!api_key_.empty()) params.emplace("api_key", api_key_);

    Error last = make_error(Errc::transport_error, "search not attempted");
    for (int attempt = 0; attempt <= retry_limit_; ++attempt) {
      if (attempt > 0) {
        std::this_thread::sleep_for(
            std::chrono::milliseconds(backoff_base_ms_ << (attempt - 1)));
      }
      httplib::Client client(parts->base);
      client.set_connection_timeout(timeout_sec_, 0);
      client.set_read_timeout(timeout_sec_, 0);
      auto res = client.Get(parts->path, params, httplib::Headers{});
      if (!res) {
        last = make_error(Errc::transport_error, "search endpoint unreachable: " +
                                                     httplib::to_string(res.error()));
        continue;
      }
      if (res->status != 200) {
        if (detail::retryable_status(res->status)) {
          last = make_error(Errc::transport_error, "search endpoint returned HTTP " +
                                                       std::to_string(res->status));
          continue;
        }
        return make_error(Errc::transport_error,
                          "search endpoint refused: HTTP " + std::to_string(res->status) +
                              ": " + res->body);
      }
      auto j = nlohmann::json::parse(res->body, nullptr, false);
      if (j.is_discarded()) {
        return make_error(Errc::transport_error, "search endpoint returned invalid JSON");
      }
      SearchResponse response;
      response.raw = res->body;
      for (const auto& item : j.value("organic_results", nlohmann::json::array())) {
        SearchResult r;
        r.title = item.value("title", "");
        r.snippet = item.value("snippet", "");
        r.url = item.value("link", "");
        r.rank = static_cast<int>(response.results.size()) + 1;
        response.results.push_back(std::move(r));
      }
      return response;
    }
    return last;
  }

  std::string id() const override { return "serpapi:" + endpoint_url_; }

 private:
  std::string endpoint_url_;
  std::string api_key_;
  int retry_limit_;
  int backoff_base_ms_;
  int timeout_sec_;
  detail::ConcurrencyGate gate_;
};

/// On-disk query cache keyed by the digest of the query text. Stores the full
/// raw client payload so live responses can be replayed offline. Writes are
/// atomic; hits never touch the inner client.
class CachingSearchClient : public SearchClient {
 public:
  CachingSearchClient(std::shared_ptr<SearchClient> inner, std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {}

  Result<SearchResponse> search(const std::string& query_text) override {
    std::filesystem::path file = dir_ / (sha256_hex(query_text) + ".json");
    {
      std::lock_guard lock(mu_);
      auto cached = detail::read_file(file);
      if (cached.ok()) {
        auto j = nlohmann::json::parse(*cached, nullptr, false);
        if (!j.is_discarded() && j.value("query", "") == query_text) {
          SearchResponse response;
          response.raw = j.value("raw", "");
          for (const auto& item : j.value("results", nlohmann::json::array())) {
            SearchResult r;
            r.title = item.value("title", "");
            r.snippet = item.value("snippet", "");
            r.url = item.value("url", "");
            r.rank = item.value("rank", 1);
            response.results.push_back(std::move(r));
          }
          return response;
        }
      }
    }
    auto fresh = inner_->search(query_text);
    if (!fresh.ok()) return fresh.error();
    inner_calls_++;
    nlohmann::json j;
    j["query"] = query_text;
    j["raw"] = fresh->raw;
    nlohmann::json results = nlohmann::json::array();
    for (const auto& r : fresh->results) {
      results.push_back(
          {{"title", r.title}, {"snippet", r.snippet}, {"url", r.url}, {"rank", r.rank}});
    }
    j["results"] = results;
    {
      std::lock_guard lock(mu_);
      auto written = detail::write_file_atomic(file, j.dump(2) + "\n");
      if (!written.ok()) return written.error();
    }
    return fresh;
  }

  std::string id() const override { return inner_->id(); }
  std::uint64_t inner_calls() const { return inner_calls_; }

 private:
  std::shared_ptr<SearchClient> inner_;
  std::filesystem::path dir_;
  std::mutex mu_;
  std::atomic<std::uint64_t> inner_calls_ = 0;
};

/// Issues the query and reduces the response to top-1 evidence. Zero results
/// is not an error: the caller receives the explicit empty-evidence sentinel.
inline Result<Evidence> search(const SearchQuery& query, SearchClient& client) {
  auto response = client.search(query.text);
  if (!response.ok()) return response.error();
  if (response->results.empty()) {
    return Evidence::none(query.text);
  }
  const SearchResult& top = response->results.front();
  Evidence evidence;
  evidence.snippet = top.snippet.empty() ? top.title : top.snippet;
  if (!top.title.empty()) evidence.source_title = top.title;
  if (!top.url.empty()) evidence.source_url = top.url;
  evidence.query_used = query.text;
  return evidence;
}

}  // namespace janus
