#pragma once

#include <algorithm>
#include <map>
#include <string>
#include <vector>

#include "janus/domain.hpp"
#include "janus/llm_gateway.hpp"
#include "janus/result.hpp"

namespace janus {

struct DetectionConfig {
  int n_keywords = 5;
};

/// Keyword-extraction prompt. The keyword count is interpolated into both
/// count slots of the template.
inline std::string render_detection_prompt(const NewsArticle& article,
                                           const DetectionConfig& config) {
  std::string n = std::to_string(config.n_keywords);
  std::string prompt;
  prompt += "As a news keyword extractor, your task is to extract the " + n +
            " most important keywords from a given news text. The keywords "
            "should include when, where, who, what, how and why the news "
            "happened. Please give me the " + n +
            " keywords only. My first suggestion request is ";
  prompt += render_article_fields(article);
  prompt += ".";
  return prompt;
}

namespace detection_detail {

inline std::string strip_list_decoration(std::string item) {
  std::string t = detail::trim(item);
  // numbering: "12." or "12)"
  size_t i = 0;
  while (i < t.size() && std::isdigit(static_cast<unsigned char>(t[i]))) ++i;
  if (i > 0 && i < t.size() && (t[i] == '.' || t[i] == ')')) {
    t = detail::trim(t.substr(i + 1));
  } else if (!t.empty() && (t[0] == '-' || t[0] == '*')) {
    t = detail::trim(t.substr(1));
  }
  // surrounding quotes
  if (t.size() >= 2) {
    char f = t.front(), b = t.back();
    if ((f == '"' && b == '"') || (f == '\'' && b == '\'')) {
      t = detail::trim(t.substr(1, t.size() - 2));
    }
  }
  return t;
}

// Candidate items from a raw completion: split by newlines and commas,
// strip list numbering / bullets / quotes, drop empties. Semicolons are
// intentionally not separators.
inline std::vector<std::string> clean_keyword_items(const std::string& raw) {
  std::vector<std::string> items;
  for (const auto& line : detail::split(raw, '\n')) {
    for (const auto& piece : detail::split(line, ',')) {
      std::string cleaned = strip_list_decoration(piece);
      if (!cleaned.empty()) items.push_back(std::move(cleaned));
    }
  }
  return items;
}

// Non-stopword tokens of `text` ordered by descending frequency, ties by
// first appearance. Tokens keep their original casing.
inline std::vector<std::string> frequent_tokens(const std::string& text) {
  static const std::vector<std::string> kStopwords = {
      "the", "a",  "an",  "of",   "to",   "in", "and", "on",   "for",
      "is",  "at", "by",  "with", "from", "as", "that", "this", "it",
      "its", "be", "are", "was",  "were", "has", "have"};
  std::vector<std::string> order;
  std::map<std::string, int> counts;
  std::map<std::string, std::string> original;
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::string key = detail::to_lower(token);
    if (std::find(kStopwords.begin(), kStopwords.end(), key) == kStopwords.end()) {
      if (counts[key]++ == 0) {
        order.push_back(key);
        original[key] = token;
      }
    }
    token.clear();
  };
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      token += c;
    } else {
      flush();
    }
  }
  flush();
  std::stable_sort(order.begin(), order.end(),
                   [&](const std::string& a, const std::string& b) {
                     return counts[a] > counts[b];
                   });
  std::vector<std::string> out;
  out.reserve(order.size());
  for (const auto& key : order) out.push_back(original[key]);
  return out;
}

}  // namespace detection_detail

/// Splits a completion into keywords and returns the first n_keywords in
/// order. Fails with keyword_shortfall (detail = count found) when fewer
/// items survive cleaning; the caller decides the fallback.
inline Result<KeywordSet> parse_keywords(const std::string& raw,
                                         const DetectionConfig& config,
                                         const std::string& source_article_id = "") {
  auto items = detection_detail::clean_keyword_items(raw);
  if (static_cast<int>(items.size()) < config.n_keywords) {
    return make_error(Errc::keyword_shortfall,
                      "found " + std::to_string(items.size()) + " keywords, need " +
                          std::to_string(config.n_keywords),
                      static_cast<long>(items.size()));
  }
  KeywordSet set;
  set.source_article_id = source_article_id;
  set.keywords.assign(items.begin(), items.begin() + config.n_keywords);
  return set;
}

struct DetectionOutcome {
  KeywordSet keywords;
  std::vector<std::string> warnings;
  std::string prompt_digest;
  std::string raw_completion;
};

/// Full detection stage: render, call the model, parse. One retry on a
/// keyword shortfall; if the model still comes up short, the set is padded
/// from the article's most frequent non-stopword tokens (title first, then
/// body) and a warning is recorded.
inline Result<DetectionOutcome> detect(const NewsArticle& article,
                                       const DetectionConfig& config,
                                       LlmGateway& gateway) {
  ModelRequest request;
  request.prompt = render_detection_prompt(article, config);
  request.stage_tag = StageTag::Detection;

  DetectionOutcome outcome;
  outcome.prompt_digest = sha256_hex(request.prompt);

  std::vector<std::string> items;
  for (int attempt = 0; attempt < 2; ++attempt) {
    auto response = gateway.complete(request);
    if (!response.ok()) return response.error();
    outcome.raw_completion = response->text;
    items = detection_detail::clean_keyword_items(response->text);
    if (static_cast<int>(items.size()) >= config.n_keywords) {
      outcome.keywords.keywords.assign(items.begin(), items.begin() + config.n_keywords);
      outcome.keywords.source_article_id = article.id;
      return outcome;
    }
  }

  // Persistent shortfall: keep what the model produced and pad.
  size_t model_count = items.size();
  auto absorbed = [&](const std::string& candidate) {
    return std::any_of(items.begin(), items.end(), [&](const std::string& k) {
      return detail::to_lower(k) == detail::to_lower(candidate);
    });
  };
  for (const std::string& source : {article.title, article.body}) {
    if (static_cast<int>(items.size()) >= config.n_keywords) break;
    for (const auto& token : detection_detail::frequent_tokens(source)) {
      if (static_cast<int>(items.size()) >= config.n_keywords) break;
      if (!absorbed(token)) items.push_back(token);
    }
  }
  outcome.keywords.keywords = items;
  outcome.keywords.source_article_id = article.id;
  outcome.warnings.push_back(
      "keyword shortfall: model produced " + std::to_string(model_count) + " of " +
      std::to_string(config.n_keywords) + " keywords after retry; padded " +
      std::to_string(items.size() - model_count) + " from article tokens");
  if (static_cast<int>(items.size()) < config.n_keywords) {
    outcome.warnings.push_back("keyword set still short after padding: " +
                               std::to_string(items.size()) + " of " +
                               std::to_string(config.n_keywords));
  }
  return outcome;
}

}  // namespace janus
