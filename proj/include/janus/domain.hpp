#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "janus/detail.hpp"
#include "janus/digest.hpp"
#include "janus/result.hpp"

namespace janus {

// Bumped whenever a change invalidates previously persisted artifacts
// (digests, caches, traces).
inline constexpr const char* kSchemaVersion = "janus/v1";

// Tweets are interpolated into prompts as one joined field; this is the one
// place the separator is defined.
inline constexpr const char* kTweetSeparator = "; ";

// ---------------------------------------------------------------------------
// Labels

enum class Label { Real, Fake };

inline std::string to_string(Label label) {
  return label == Label::Fake ? "fake" : "real";
}

inline Result<Label> parse_label(std::string_view text) {
  std::string t = detail::to_lower(detail::trim(text));
  if (t == "real") return Label::Real;
  if (t == "fake") return Label::Fake;
  return make_error(Errc::dataset_error, "unknown label: '" + std::string(text) + "'");
}

inline Label opposite(Label label) {
  return label == Label::Fake ? Label::Real : Label::Fake;
}

// ---------------------------------------------------------------------------
// Articles

struct NewsArticle {
  std::string id;
  std::string title;
  std::string body;
  std::vector<std::string> tweets;
  std::optional<Label> gold_label;

  bool valid() const { return !id.empty() && (!title.empty() || !body.empty()); }
};

inline std::string join_tweets(const std::vector<std::string>& tweets) {
  return detail::join(tweets, kTweetSeparator);
}

/// Canonical textual form of an article used by every prompt builder:
/// "news title: ..., news text: ..., news tweet: ...". Empty fields are
/// omitted so no dangling labels or separators appear. A nonzero budget
/// truncates body and tweet-join each to that many bytes.
inline std::string render_article_fields(const NewsArticle& article,
                                         size_t truncate_chars = 0) {
  auto cap = [&](const std::string& s) {
    return truncate_chars == 0 ? s : detail::truncate_utf8(s, truncate_chars);
  };
  std::vector<std::string> parts;
  if (!article.title.empty()) parts.push_back("news title: " + article.title);
  if (!article.body.empty()) parts.push_back("news text: " + cap(article.body));
  if (!article.tweets.empty()) {
    parts.push_back("news tweet: " + cap(join_tweets(article.tweets)));
  }
  return detail::join(parts, ", ");
}

/// Content hash of an article (title, body, tweets, schema version). The id
/// deliberately does not participate so renamed exports of identical content
/// share cache entries.
inline std::string article_digest(const NewsArticle& article) {
  nlohmann::json j = nlohmann::json::array();
  j.push_back(kSchemaVersion);
  j.push_back(article.title);
  j.push_back(article.body);
  j.push_back(article.tweets);
  return sha256_hex(j.dump());
}

// ---------------------------------------------------------------------------
// Pipeline artifacts

struct KeywordSet {
  std::vector<std::string> keywords;
  std::string source_article_id;

  // Single-space concatenation, shared by the embedding and query builders.
  std::string joined() const { return detail::join(keywords, " "); }
};

struct Evidence {
  std::string snippet;
  std::optional<std::string> source_title;
  std::optional<std::string> source_url;
  std::string query_used;

  bool empty() const { return snippet.empty(); }

  static Evidence none(std::string query) {
    Evidence e;
    e.query_used = std::move(query);
    return e;
  }
};

enum class Perspective { Inside, Outside };

inline std::string to_string(Perspective p) {
  return p == Perspective::Inside ? "inside" : "outside";
}

struct Judgement {
  Label verdict = Label::Real;
  std::string explanation;
  Perspective perspective = Perspective::Inside;
  std::string raw_model_output;
};

enum class DecidedBy { Agreement, DeterminationSelector, SinglePerspectiveFallback };

inline std::string to_string(DecidedBy d) {
  switch (d) {
    case DecidedBy::Agreement: return "agreement";
    case DecidedBy::DeterminationSelector: return "determination_selector";
    case DecidedBy::SinglePerspectiveFallback: return "single_perspective_fallback";
  }
  return "unknown";
}

struct Verdict {
  Label final_label = Label::Real;
  DecidedBy decided_by = DecidedBy::Agreement;
  std::optional<std::string> raw_model_output;
};

// One retrieved neighbor: the stored article, its gold label, and the exact
// Euclidean distance from the query.
struct DemoExample {
  NewsArticle article;
  Label label = Label::Real;
  double distance = 0.0;
};

struct Demonstrations {
  std::vector<DemoExample> positive;  // Fake-labeled neighbors
  std::vector<DemoExample> negative;  // Real-labeled neighbors

  bool empty() const { return positive.empty() && negative.empty(); }
  size_t size() const { return positive.size() + negative.size(); }
};

// ---------------------------------------------------------------------------
// Trace

struct StageError {
  std::string stage;
  std::string description;
};

/// Every intermediate artifact of one article's run. Stage fields fill in
/// pipeline order; failures and degradations land in stage_errors.
struct PipelineTrace {
  std::string article_id;
  std::optional<KeywordSet> keyword_set;
  std::optional<Demonstrations> demonstrations;
  std::optional<Evidence> evidence;
  std::optional<Judgement> inside_judgement;
  std::optional<Judgement> outside_judgement;
  std::optional<Verdict> verdict;
  std::vector<StageError> stage_errors;
  std::map<std::string, std::int64_t> timings_ms;

  void add_error(std::string stage, std::string description) {
    stage_errors.push_back({std::move(stage), std::move(description)});
  }
};

// ---------------------------------------------------------------------------
// JSON serialization. Keys are emitted in sorted order (nlohmann::json's
// default map), which makes serialize -> parse -> serialize byte-stable.

namespace jsonio {

inline nlohmann::json to_json(const NewsArticle& a) {
  nlohmann::json j;
  j["id"] = a.id;
  j["title"] = a.title;
  j["text"] = a.body;
  j["tweets"] = a.tweets;
  if (a.gold_label) j["label"] = to_string(*a.gold_label);
  return j;
}

inline Result<NewsArticle> article_from_json(const nlohmann::json& j) {
  NewsArticle a;
  if (!j.is_object()) return make_error(Errc::dataset_error, "article record is not an object");
  a.id = j.value("id", "");
  a.title = j.value("title", "");
  a.body = j.value("text", "");
  if (j.contains("tweets")) {
    if (!j["tweets"].is_array()) {
      return make_error(Errc::dataset_error, "tweets must be an array of strings");
    }
    for (const auto& t : j["tweets"]) {
      if (!t.is_string()) {
        return make_error(Errc::dataset_error, "tweets must be an array of strings");
      }
      a.tweets.push_back(t.get<std::string>());
    }
  }
  if (j.contains("label") && !j["label"].is_null()) {
    auto lbl = parse_label(j["label"].get<std::string>());
    if (!lbl.ok()) return lbl.error();
    a.gold_label = *lbl;
  }
  if (a.id.empty()) return make_error(Errc::dataset_error, "article is missing an id");
  if (!a.valid()) {
    return make_error(Errc::dataset_error, "article '" + a.id + "' has neither title nor text");
  }
  return a;
}

inline nlohmann::json to_json(const KeywordSet& k) {
  return {{"keywords", k.keywords}, {"source_article_id", k.source_article_id}};
}

inline KeywordSet keywordset_from_json(const nlohmann::json& j) {
  KeywordSet k;
  k.keywords = j.value("keywords", std::vector<std::string>{});
  k.source_article_id = j.value("source_article_id", "");
  return k;
}

inline nlohmann::json to_json(const Evidence& e) {
  nlohmann::json j;
  j["snippet"] = e.snippet;
  j["query_used"] = e.query_used;
  if (e.source_title) j["source_title"] = *e.source_title;
  if (e.source_url) j["source_url"] = *e.source_url;
  return j;
}

inline Evidence evidence_from_json(const nlohmann::json& j) {
  Evidence e;
  e.snippet = j.value("snippet", "");
  e.query_used = j.value("query_used", "");
  if (j.contains("source_title")) e.source_title = j["source_title"].get<std::string>();
  if (j.contains("source_url")) e.source_url = j["source_url"].get<std::string>();
  return e;
}

inline nlohmann::json to_json(const Judgement& jd) {
  return {{"verdict", to_string(jd.verdict)},
          {"explanation", jd.explanation},
          {"perspective", to_string(jd.perspective)},
          {"raw_model_output", jd.raw_model_output}};
}

inline Result<Judgement> judgement_from_json(const nlohmann::json& j) {
  Judgement jd;
  auto lbl = parse_label(j.value("verdict", ""));
  if (!lbl.ok()) return lbl.error();
  jd.verdict = *lbl;
  jd.explanation = j.value("explanation", "");
  jd.perspective = j.value("perspective", "inside") == "outside" ? Perspective::Outside
                                                                 : Perspective::Inside;
  jd.raw_model_output = j.value("raw_model_output", "");
  return jd;
}

inline nlohmann::json to_json(const Verdict& v) {
  nlohmann::json j;
  j["final"] = to_string(v.final_label);
  j["decided_by"] = to_string(v.decided_by);
  if (v.raw_model_output) j["raw_model_output"] = *v.raw_model_output;
  return j;
}

inline Result<Verdict> verdict_from_json(const nlohmann::json& j) {
  Verdict v;
  auto lbl = parse_label(j.value("final", ""));
  if (!lbl.ok()) return lbl.error();
  v.final_label = *lbl;
  std::string d = j.value("decided_by", "");
  if (d == "agreement") {
    v.decided_by = DecidedBy::Agreement;
  } else if (d == "determination_selector") {
    v.decided_by = DecidedBy::DeterminationSelector;
  } else if (d == "single_perspective_fallback") {
    v.decided_by = DecidedBy::SinglePerspectiveFallback;
  } else {
    return make_error(Errc::dataset_error, "unknown decided_by: '" + d + "'");
  }
  if (j.contains("raw_model_output")) v.raw_model_output = j["raw_model_output"].get<std::string>();
  return v;
}

inline nlohmann::json to_json(const DemoExample& d) {
  return {{"article", to_json(d.article)},
          {"label", to_string(d.label)},
          {"distance", d.distance}};
}

inline Result<DemoExample> demo_from_json(const nlohmann::json& j) {
  DemoExample d;
  auto art = article_from_json(j.at("article"));
  if (!art.ok()) return art.error();
  d.article = *art;
  auto lbl = parse_label(j.value("label", ""));
  if (!lbl.ok()) return lbl.error();
  d.label = *lbl;
  d.distance = j.value("distance", 0.0);
  return d;
}

inline nlohmann::json to_json(const Demonstrations& d) {
  nlohmann::json pos = nlohmann::json::array();
  nlohmann::json neg = nlohmann::json::array();
  for (const auto& e : d.positive) pos.push_back(to_json(e));
  for (const auto& e : d.negative) neg.push_back(to_json(e));
  return {{"positive", pos}, {"negative", neg}};
}

inline Result<Demonstrations> demonstrations_from_json(const nlohmann::json& j) {
  Demonstrations d;
  for (const auto& e : j.value("positive", nlohmann::json::array())) {
    auto demo = demo_from_json(e);
    if (!demo.ok()) return demo.error();
    d.positive.push_back(*demo);
  }
  for (const auto& e : j.value("negative", nlohmann::json::array())) {
    auto demo = demo_from_json(e);
    if (!demo.ok()) return demo.error();
    d.negative.push_back(*demo);
  }
  return d;
}

inline nlohmann::json to_json(const PipelineTrace& t) {
  nlohmann::json j;
  j["article_id"] = t.article_id;
  if (t.keyword_set) j["keyword_set"] = to_json(*t.keyword_set);
  if (t.demonstrations) j["demonstrations"] = to_json(*t.demonstrations);
  if (t.evidence) j["evidence"] = to_json(*t.evidence);
  if (t.inside_judgement) j["inside_judgement"] = to_json(*t.inside_judgement);
  if (t.outside_judgement) j["outside_judgement"] = to_json(*t.outside_judgement);
  if (t.verdict) j["verdict"] = to_json(*t.verdict);
  nlohmann::json errs = nlohmann::json::array();
  for (const auto& e : t.stage_errors) {
    errs.push_back({{"stage", e.stage}, {"description", e.description}});
  }
  j["stage_errors"] = errs;
  j["timings_ms"] = t.timings_ms;
  return j;
}

inline Result<PipelineTrace> trace_from_json(const nlohmann::json& j) {
  PipelineTrace t;
  t.article_id = j.value("article_id", "");
  if (j.contains("keyword_set")) t.keyword_set = keywordset_from_json(j["keyword_set"]);
  if (j.contains("demonstrations")) {
    auto d = demonstrations_from_json(j["demonstrations"]);
    if (!d.ok()) return d.error();
    t.demonstrations = *d;
  }
  if (j.contains("evidence")) t.evidence = evidence_from_json(j["evidence"]);
  if (j.contains("inside_judgement")) {
    auto jd = judgement_from_json(j["inside_judgement"]);
    if (!jd.ok()) return jd.error();
    t.inside_judgement = *jd;
  }
  if (j.contains("outside_judgement")) {
    auto jd = judgement_from_json(j["outside_judgement"]);
    if (!jd.ok()) return jd.error();
    t.outside_judgement = *jd;
  }
  if (j.contains("verdict")) {
    auto v = verdict_from_json(j["verdict"]);
    if (!v.ok()) return v.error();
    t.verdict = *v;
  }
  for (const auto& e : j.value("stage_errors", nlohmann::json::array())) {
    t.stage_errors.push_back({e.value("stage", ""), e.value("description", "")});
  }
  if (j.contains("timings_ms")) {
    t.timings_ms = j["timings_ms"].get<std::map<std::string, std::int64_t>>();
  }
  return t;
}

}  // namespace jsonio

inline std::string serialize_trace(const PipelineTrace& t) {
  return jsonio::to_json(t).dump(2) + "\n";
}

inline Result<PipelineTrace> parse_trace(std::string_view text) {
  auto j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded()) return make_error(Errc::dataset_error, "trace is not valid JSON");
  return jsonio::trace_from_json(j);
}

}  // namespace janus
