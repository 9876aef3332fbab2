#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>
#include <string>
#include <vector>

#include "janus/dataset.hpp"
#include "janus/detection.hpp"
#include "janus/domain.hpp"
#include "janus/embedding.hpp"

namespace janus {

struct EmbeddingVector {
  std::vector<double> values;

  int dim() const { return static_cast<int>(values.size()); }
  bool finite() const {
    return std::all_of(values.begin(), values.end(),
                       [](double x) { return std::isfinite(x); });
  }
};

struct DatastoreEntry {
  std::string article_id;
  EmbeddingVector vector;
  Label label = Label::Real;
  NewsArticle article;
};

/// The labeled few-shot datastore: one (embedding, label, article) triple per
/// training article. Immutable after build; safe to share across threads.
struct Datastore {
  std::vector<DatastoreEntry> entries;
  int dim = 0;
  std::string provider_fingerprint;

  size_t count_label(Label label) const {
    return static_cast<size_t>(
        std::count_if(entries.begin(), entries.end(),
                      [&](const DatastoreEntry& e) { return e.label == label; }));
  }
};

inline double euclidean_distance(const EmbeddingVector& a, const EmbeddingVector& b) {
  double sum = 0.0;
  for (size_t i = 0; i < a.values.size(); ++i) {
    double d = a.values[i] - b.values[i];
    sum += d * d;
  }
  return std::sqrt(sum);
}

/// Keyword representation: keywords joined with single spaces (then edge
/// whitespace trimmed) and handed to the provider.
inline Result<EmbeddingVector> embed_keywords(const KeywordSet& keywords,
                                              EmbeddingProvider& provider) {
  if (keywords.keywords.empty()) {
    return make_error(Errc::empty_input, "cannot embed an empty keyword set");
  }
  std::string joined = detail::trim(keywords.joined());
  auto v = provider.embed(joined);
  if (!v.ok()) return v.error();
  if (static_cast<int>(v->size()) != provider.dim()) {
    return make_error(Errc::dimension_mismatch,
                      "provider returned dim " + std::to_string(v->size()) +
                          ", expected " + std::to_string(provider.dim()));
  }
  EmbeddingVector out{std::move(*v)};
  if (!out.finite()) {
    return make_error(Errc::provider_error, "embedding contains non-finite values");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Persistence: one header line (dim, fingerprint, count), then one line per
// entry carrying the id, label, vector, and the full article payload.

inline Result<void> save_datastore(const Datastore& store,
                                   const std::filesystem::path& path) {
  nlohmann::json header = {{"dim", store.dim},
                           {"fingerprint", store.provider_fingerprint},
                           {"count", store.entries.size()},
                           {"schema", kSchemaVersion}};
  std::string out = header.dump() + "\n";
  for (const auto& e : store.entries) {
    nlohmann::json j = {{"id", e.article_id},
                        {"label", to_string(e.label)},
                        {"vector", e.vector.values},
                        {"article", jsonio::to_json(e.article)}};
    out += j.dump() + "\n";
  }
  return detail::write_file_atomic(path, out);
}

inline Result<Datastore> load_datastore(const std::filesystem::path& path) {
  auto content = detail::read_file(path);
  if (!content.ok()) {
    return make_error(Errc::io_error, "cannot read datastore: " + path.string());
  }
  std::istringstream in(*content);
  std::string line;
  if (!std::getline(in, line)) {
    return make_error(Errc::dataset_error, "datastore file is empty: " + path.string());
  }
  auto header = nlohmann::json::parse(line, nullptr, false);
  if (header.is_discarded() || !header.contains("dim")) {
    return make_error(Errc::dataset_error, "datastore header is invalid");
  }
  Datastore store;
  store.dim = header["dim"].get<int>();
  store.provider_fingerprint = header.value("fingerprint", "");
  size_t expected = header.value("count", size_t{0});
  while (std::getline(in, line)) {
    if (detail::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      return make_error(Errc::dataset_error, "datastore entry is invalid JSON");
    }
    DatastoreEntry entry;
    entry.article_id = j.value("id", "");
    auto lbl = parse_label(j.value("label", ""));
    if (!lbl.ok()) return lbl.error();
    entry.label = *lbl;
    entry.vector.values = j.value("vector", std::vector<double>{});
    if (entry.vector.dim() != store.dim) {
      return make_error(Errc::dimension_mismatch,
                        "entry '" + entry.article_id + "' has dim " +
                            std::to_string(entry.vector.dim()) + ", store dim " +
                            std::to_string(store.dim));
    }
    auto article = jsonio::article_from_json(j.at("article"));
    if (!article.ok()) return article.error();
    entry.article = *article;
    store.entries.push_back(std::move(entry));
  }
  if (store.entries.size() != expected) {
    return make_error(Errc::dataset_error,
                      "datastore count mismatch: header says " + std::to_string(expected) +
                          ", found " + std::to_string(store.entries.size()));
  }
  return store;
}

/// Digest of a store's content, used in cache fingerprints so a rebuilt or
/// swapped store invalidates dependent stage results.
inline std::string datastore_digest(const Datastore& store) {
  nlohmann::json j = nlohmann::json::array();
  j.push_back(store.dim);
  j.push_back(store.provider_fingerprint);
  for (const auto& e : store.entries) {
    j.push_back({{"id", e.article_id}, {"label", to_string(e.label)}, {"v", e.vector.values}});
  }
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Build

struct DatastoreBuild {
  Datastore store;
  std::vector<std::string> warnings;  // skipped articles etc.
};

/// Runs detection + keyword embedding for every training article and collects
/// the (H_i, l_i) entries. Articles whose detection hard-fails are skipped
/// with a warning. An optional path persists the store on success.
inline Result<DatastoreBuild> build_datastore(
    const std::vector<NewsArticle>& training_articles, const DetectionConfig& config,
    EmbeddingProvider& provider, LlmGateway& gateway,
    const std::filesystem::path& store_path = {}) {
  if (training_articles.empty()) {
    return make_error(Errc::empty_datastore, "refusing to build an empty datastore");
  }
  DatastoreBuild build;
  build.store.dim = provider.dim();
  build.store.provider_fingerprint = provider.fingerprint();
  for (const auto& article : training_articles) {
    if (!article.gold_label) {
      return make_error(Errc::dataset_error,
                        "training article '" + article.id + "' has no gold label");
    }
    auto detected = detect(article, config, gateway);
    if (!detected.ok()) {
      build.warnings.push_back("skipped '" + article.id +
                               "': " + detected.error().describe());
      continue;
    }
    for (const auto& w : detected->warnings) {
      build.warnings.push_back("'" + article.id + "': " + w);
    }
    auto vec = embed_keywords(detected->keywords, provider);
    if (!vec.ok()) {
      build.warnings.push_back("skipped '" + article.id +
                               "': " + vec.error().describe());
      continue;
    }
    DatastoreEntry entry;
    entry.article_id = article.id;
    entry.vector = std::move(*vec);
    entry.label = *article.gold_label;
    entry.article = article;
    build.store.entries.push_back(std::move(entry));
  }
  if (build.store.entries.empty()) {
    return make_error(Errc::empty_datastore, "every training article failed detection");
  }
  if (!store_path.empty()) {
    auto saved = save_datastore(build.store, store_path);
    if (!saved.ok()) return saved.error();
  }
  return build;
}

// ---------------------------------------------------------------------------
// Retrieval

/// Exact k-nearest-neighbor retrieval, class-balanced: the k nearest
/// Fake-labeled and k nearest Real-labeled entries by Euclidean distance,
/// each list ascending, ties broken by ascending article id. A class with
/// fewer than k entries yields a shorter list.
inline Result<Demonstrations> knn_retrieve(const EmbeddingVector& query,
                                           const Datastore& store, int k) {
  if (query.dim() != store.dim) {
    return make_error(Errc::dimension_mismatch,
                      "query dim " + std::to_string(query.dim()) + " != store dim " +
                          std::to_string(store.dim));
  }
  if (k < 1) return make_error(Errc::empty_input, "k must be >= 1");

  struct Scored {
    double distance;
    const DatastoreEntry* entry;
  };
  std::vector<Scored> fake, real;
  for (const auto& entry : store.entries) {
    Scored s{euclidean_distance(query, entry.vector), &entry};
    (entry.label == Label::Fake ? fake : real).push_back(s);
  }
  auto by_distance_then_id = [](const Scored& a, const Scored& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    return a.entry->article_id < b.entry->article_id;
  };
  std::sort(fake.begin(), fake.end(), by_distance_then_id);
  std::sort(real.begin(), real.end(), by_distance_then_id);

  Demonstrations demos;
  auto take = [&](const std::vector<Scored>& pool, Label label,
                  std::vector<DemoExample>& out) {
    for (size_t i = 0; i < pool.size() && i < static_cast<size_t>(k); ++i) {
      out.push_back({pool[i].entry->article, label, pool[i].distance});
    }
  };
  take(fake, Label::Fake, demos.positive);
  take(real, Label::Real, demos.negative);
  return demos;
}

}  // namespace janus
