#pragma once

#include <filesystem>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "janus/domain.hpp"

namespace janus {

/// Line-delimited article records: one JSON object per line with fields
/// `id`, `title`, `text`, `tweets` (array of strings) and optional `label`
/// ("real" | "fake"). UTF-8 throughout.
inline Result<std::vector<NewsArticle>> load_dataset(
    const std::filesystem::path& path) {
  auto content = detail::read_file(path);
  if (!content.ok()) {
    return make_error(Errc::dataset_error, "cannot read dataset: " + path.string());
  }
  std::vector<NewsArticle> articles;
  std::set<std::string> seen_ids;
  std::istringstream in(*content);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) {
      return make_error(Errc::dataset_error,
                        path.string() + ":" + std::to_string(lineno) + ": invalid JSON");
    }
    auto article = jsonio::article_from_json(j);
    if (!article.ok()) {
      return make_error(Errc::dataset_error,
                        path.string() + ":" + std::to_string(lineno) + ": " +
                            article.error().message);
    }
    if (!seen_ids.insert(article->id).second) {
      return make_error(Errc::dataset_error,
                        path.string() + ":" + std::to_string(lineno) +
                            ": duplicate article id '" + article->id + "'");
    }
    articles.push_back(std::move(*article));
  }
  return articles;
}

inline Result<void> save_dataset(const std::filesystem::path& path,
                                 const std::vector<NewsArticle>& articles) {
  std::string out;
  for (const auto& a : articles) {
    out += jsonio::to_json(a).dump();
    out += '\n';
  }
  return detail::write_file_atomic(path, out);
}

}  // namespace janus
