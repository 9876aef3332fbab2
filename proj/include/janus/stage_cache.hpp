#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>

#include "json.hpp"

#include "janus/detail.hpp"
#include "janus/result.hpp"

namespace janus {

/// Content-addressed cache of per-stage pipeline results. An entry is keyed
/// by (article content digest, stage name, stage config fingerprint); config
/// fingerprints are cumulative over upstream stages, so changing e.g. the
/// retrieval k invalidates retrieval and everything after it but leaves
/// detection hits intact.
class StageCache {
 public:
  explicit StageCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  std::optional<nlohmann::json> get(const std::string& stage,
                                    const std::string& article_digest,
                                    const std::string& config_fp) const {
    auto content = detail::read_file(file_for(stage, article_digest, config_fp));
    if (!content.ok()) return std::nullopt;
    auto j = nlohmann::json::parse(*content, nullptr, false);
    if (j.is_discarded()) return std::nullopt;
    return j;
  }

  Result<void> put(const std::string& stage, const std::string& article_digest,
                   const std::string& config_fp, const nlohmann::json& record) const {
    return detail::write_file_atomic(file_for(stage, article_digest, config_fp),
                                     record.dump(2) + "\n");
  }

  struct Stats {
    std::map<std::string, size_t> entries_per_stage;
    size_t total = 0;
  };

  Stats stats() const {
    Stats s;
    std::error_code ec;
    if (!std::filesystem::is_directory(dir_, ec)) return s;
    for (const auto& stage_dir : std::filesystem::directory_iterator(dir_, ec)) {
      if (!stage_dir.is_directory()) continue;
      size_t count = 0;
      for (const auto& f : std::filesystem::directory_iterator(stage_dir.path(), ec)) {
        if (f.path().extension() == ".json") ++count;
      }
      s.entries_per_stage[stage_dir.path().filename().string()] = count;
      s.total += count;
    }
    return s;
  }

  Result<void> clear() const {
    std::error_code ec;
    std::filesystem::remove_all(dir_, ec);
    if (ec) return make_error(Errc::io_error, "cannot clear cache: " + ec.message());
    return {};
  }

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path file_for(const std::string& stage,
                                 const std::string& article_digest,
                                 const std::string& config_fp) const {
    return dir_ / stage / (article_digest + "-" + config_fp.substr(0, 16) + ".json");
  }

  std::filesystem::path dir_;
};

}  // namespace janus
