#pragma once

#include <optional>
#include <string>
#include <vector>

#include "janus/domain.hpp"
#include "janus/judge.hpp"
#include "janus/llm_gateway.hpp"
#include "janus/result.hpp"

namespace janus {

struct DeterminationConfig {
  // Which judgement wins when the selector itself cannot be parsed.
  Perspective conflict_fallback = Perspective::Outside;
};

/// Conflict-resolution prompt: the article, then the inside view ("Some
/// people"), then the outside view ("Others"), ending with the open
/// [Explanation] slot.
inline std::string render_determination_prompt(const NewsArticle& article,
                                               const Judgement& inside,
                                               const Judgement& outside,
                                               const JudgeConfig& judge_config = {}) {
  std::string prompt;
  prompt +=
      "I need your assistance in evaluating the authenticity of a news "
      "article. This news article include news title, news text and news "
      "tweet.\n\n";
  prompt += "The news article is: " +
            render_article_fields(article, judge_config.truncate_chars) + ".\n\n";
  prompt += "There are two different views on this news article.\n\n";
  prompt += "Some people believe that " + verdict_marker(inside.verdict) +
            ", their explanation is: " + inside.explanation + ".\n\n";
  prompt += "Others believe that " + verdict_marker(outside.verdict) +
            ", their explanation is: " + outside.explanation + ".\n\n";
  prompt +=
      "Please judge their opinion and give your decision. The first sentence "
      "after [Explanation] must be [This is fake news] or [This is real "
      "news], and then give your explanation.\n\n";
  prompt += "[Explanation]:";
  return prompt;
}

struct DeterminationOutcome {
  Verdict verdict;
  std::vector<std::string> warnings;
  std::string prompt_digest;   // empty unless the selector ran
  std::string raw_completion;  // last selector output, when it ran
};

/// Final decision. Matching judgements short-circuit with zero model calls;
/// conflicting judgements go through one selector call; a lone judgement
/// carries the verdict by itself.
inline Result<DeterminationOutcome> determine(
    const NewsArticle& article, const std::optional<Judgement>& inside,
    const std::optional<Judgement>& outside, LlmGateway& gateway,
    const DeterminationConfig& config = {}, const JudgeConfig& judge_config = {}) {
  DeterminationOutcome outcome;
  if (!inside && !outside) {
    return make_error(Errc::no_judgements, "neither perspective produced a judgement");
  }
  if (inside && !outside) {
    outcome.verdict = {inside->verdict, DecidedBy::SinglePerspectiveFallback, std::nullopt};
    return outcome;
  }
  if (outside && !inside) {
    outcome.verdict = {outside->verdict, DecidedBy::SinglePerspectiveFallback, std::nullopt};
    return outcome;
  }
  if (inside->verdict == outside->verdict) {
    outcome.verdict = {inside->verdict, DecidedBy::Agreement, std::nullopt};
    return outcome;
  }

  ModelRequest request;
  request.prompt = render_determination_prompt(article, *inside, *outside, judge_config);
  request.stage_tag = StageTag::Determination;
  outcome.prompt_digest = sha256_hex(request.prompt);

  for (int attempt = 0; attempt < 2; ++attempt) {
    auto response = gateway.complete(request);
    if (!response.ok()) return response.error();
    outcome.raw_completion = response->text;
    auto parsed = parse_verdict(response->text);
    if (parsed.ok()) {
      outcome.verdict = {parsed->verdict, DecidedBy::DeterminationSelector, response->text};
      return outcome;
    }
  }

  // Selector never produced a verdict phrase: fall back to one perspective.
  const Judgement& chosen =
      config.conflict_fallback == Perspective::Outside ? *outside : *inside;
  outcome.verdict = {chosen.verdict, DecidedBy::SinglePerspectiveFallback, std::nullopt};
  outcome.warnings.push_back("determination selector output unparseable twice; fell back to the " +
                             to_string(config.conflict_fallback) + " judgement");
  return outcome;
}

}  // namespace janus
