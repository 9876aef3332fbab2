#pragma once

#include <optional>
#include <string>
#include <vector>

#include "janus/domain.hpp"
#include "janus/llm_gateway.hpp"
#include "janus/outside_investigation.hpp"
#include "janus/result.hpp"

namespace janus {

struct JudgeConfig {
  // Byte budget applied to an article's body and tweet-join before prompt
  // interpolation (0 disables). Applies to demonstrations and the target.
  size_t truncate_chars = 2000;
  bool retry_on_unparseable = true;
};

inline constexpr const char* kFakeMarker = "[This is fake news]";
inline constexpr const char* kRealMarker = "[This is real news]";

inline std::string verdict_marker(Label label) {
  return label == Label::Fake ? kFakeMarker : kRealMarker;
}

namespace judge_detail {

inline std::string input_news_line(const NewsArticle& article, size_t truncate_chars) {
  return "[input news]: [" + render_article_fields(article, truncate_chars) + "]";
}

// Demonstrations enter the prompt alternating real/fake by ascending
// distance (real 1, fake 1, real 2, fake 2, ...) so neither label owns a
// fixed position. Lists are pre-sorted by retrieval.
inline std::vector<const DemoExample*> interleave(const Demonstrations& demos) {
  std::vector<const DemoExample*> out;
  size_t longest = std::max(demos.negative.size(), demos.positive.size());
  for (size_t i = 0; i < longest; ++i) {
    if (i < demos.negative.size()) out.push_back(&demos.negative[i]);
    if (i < demos.positive.size()) out.push_back(&demos.positive[i]);
  }
  return out;
}

inline void note_truncation(const NewsArticle& article, size_t budget,
                            std::vector<std::string>& warnings) {
  if (budget == 0) return;
  if (article.body.size() > budget) {
    warnings.push_back("truncated news text of '" + article.id + "' from " +
                       std::to_string(article.body.size()) + " to " +
                       std::to_string(budget) + " bytes");
  }
  std::string joined = join_tweets(article.tweets);
  if (joined.size() > budget) {
    warnings.push_back("truncated tweets of '" + article.id + "' from " +
                       std::to_string(joined.size()) + " to " +
                       std::to_string(budget) + " bytes");
  }
}

}  // namespace judge_detail

/// Inside-judge prompt: task instruction, the retrieved demonstrations as
/// worked examples, then the target article with an open output slot.
inline Result<std::string> render_inside_prompt(const NewsArticle& article,
                                                const Demonstrations& demos,
                                                const JudgeConfig& config = {}) {
  if (demos.empty()) {
    return make_error(Errc::no_demonstrations, "no inside demonstrations");
  }
  std::string prompt;
  prompt +=
      "I need your assistance in evaluating the authenticity of a news "
      "article. I will provide you the news article and additional "
      "information about this news. You have to answer that [This is fake "
      "news] or [This is real news] in the first sentence of your output and "
      "give your explanation about [target news].\n\n";
  prompt +=
      "I will give you some examples of news. Your answer after [output] "
      "should be consistent with the following examples:\n\n";
  int n = 0;
  for (const DemoExample* demo : judge_detail::interleave(demos)) {
    ++n;
    prompt += "[example " + std::to_string(n) + "]:\n";
    prompt += judge_detail::input_news_line(demo->article, config.truncate_chars) + "\n";
    prompt += "[output]: [This is " + to_string(demo->label) + " news]\n\n";
  }
  prompt += "[target news]:\n";
  prompt += judge_detail::input_news_line(article, config.truncate_chars) + "\n";
  prompt += "[output]:";
  return prompt;
}

/// Outside-judge prompt: the article followed by the retrieved evidence (or
/// the no-evidence sentinel), ending with the open [Decision] slot.
inline std::string render_outside_prompt(const NewsArticle& article,
                                         const Evidence& evidence,
                                         const JudgeConfig& config = {}) {
  // The sentinel is already a full sentence; a raw snippet gets the template
  // period appended.
  std::string info = evidence.empty() ? kNoEvidenceText : evidence.snippet + ".";
  std::string prompt;
  prompt +=
      "I need your assistance in evaluating the authenticity of a news "
      "article. I will provide you the news article and additional "
      "information about this news. Please analyze the following news and "
      "give your decision. The first sentence of your [Decision] must be "
      "[This is fake news] or [This is real news].\n\n";
  prompt += "The news article is: " + render_article_fields(article, config.truncate_chars) +
            ".\n\n";
  prompt += "The additional information is: " + info + "\n\n";
  prompt += "[Decision]:";
  return prompt;
}

struct ParsedVerdict {
  Label verdict = Label::Real;
  std::string explanation;
};

/// Scans a completion for the earliest verdict phrase ("this is fake news" /
/// "this is real news", bracketed or not, any case). The explanation is the
/// completion with that first marker removed and whitespace trimmed.
inline Result<ParsedVerdict> parse_verdict(const std::string& raw) {
  constexpr std::string_view kFakePhrase = "this is fake news";
  constexpr std::string_view kRealPhrase = "this is real news";
  size_t fake_pos = detail::ifind(raw, kFakePhrase);
  size_t real_pos = detail::ifind(raw, kRealPhrase);
  if (fake_pos == std::string::npos && real_pos == std::string::npos) {
    return make_error(Errc::unparseable_verdict,
                      "completion contains neither verdict phrase");
  }
  ParsedVerdict parsed;
  size_t pos;
  size_t len = kFakePhrase.size();
  if (fake_pos < real_pos) {
    parsed.verdict = Label::Fake;
    pos = fake_pos;
  } else {
    parsed.verdict = Label::Real;
    pos = real_pos;
  }
  // Strip the bracketed marker when brackets surround the phrase.
  size_t begin = pos, end = pos + len;
  if (pos > 0 && raw[pos - 1] == '[' && end < raw.size() && raw[end] == ']') {
    begin = pos - 1;
    end = end + 1;
  }
  parsed.explanation = detail::trim(raw.substr(0, begin) + raw.substr(end));
  return parsed;
}

struct JudgeOutcome {
  Judgement judgement;
  std::vector<std::string> warnings;
  std::string prompt_digest;
};

namespace judge_detail {

inline Result<JudgeOutcome> run_judge(const std::string& prompt, StageTag stage,
                                      Perspective perspective, LlmGateway& gateway,
                                      const JudgeConfig& config,
                                      std::vector<std::string> warnings) {
  ModelRequest request;
  request.prompt = prompt;
  request.stage_tag = stage;

  JudgeOutcome outcome;
  outcome.warnings = std::move(warnings);
  outcome.prompt_digest = sha256_hex(prompt);

  int attempts = config.retry_on_unparseable ? 2 : 1;
  std::string last_raw;
  for (int i = 0; i < attempts; ++i) {
    auto response = gateway.complete(request);
    if (!response.ok()) return response.error();
    last_raw = response->text;
    auto parsed = parse_verdict(response->text);
    if (parsed.ok()) {
      outcome.judgement.verdict = parsed->verdict;
      outcome.judgement.explanation = parsed->explanation;
      outcome.judgement.perspective = perspective;
      outcome.judgement.raw_model_output = response->text;
      return outcome;
    }
  }
  return make_error(Errc::double_unparseable,
                    "no verdict phrase after " + std::to_string(attempts) +
                        " attempt(s); last output: " + last_raw);
}

}  // namespace judge_detail

inline Result<JudgeOutcome> inside_judge(const NewsArticle& article,
                                         const Demonstrations& demos,
                                         LlmGateway& gateway,
                                         const JudgeConfig& config = {}) {
  auto prompt = render_inside_prompt(article, demos, config);
  if (!prompt.ok()) return prompt.error();
  std::vector<std::string> warnings;
  judge_detail::note_truncation(article, config.truncate_chars, warnings);
  for (const auto* demo : judge_detail::interleave(demos)) {
    judge_detail::note_truncation(demo->article, config.truncate_chars, warnings);
  }
  return judge_detail::run_judge(*prompt, StageTag::InsideJudge, Perspective::Inside,
                                 gateway, config, std::move(warnings));
}

inline Result<JudgeOutcome> outside_judge(const NewsArticle& article,
                                          const Evidence& evidence,
                                          LlmGateway& gateway,
                                          const JudgeConfig& config = {}) {
  std::string prompt = render_outside_prompt(article, evidence, config);
  std::vector<std::string> warnings;
  judge_detail::note_truncation(article, config.truncate_chars, warnings);
  return judge_detail::run_judge(prompt, StageTag::OutsideJudge, Perspective::Outside,
                                 gateway, config, std::move(warnings));
}

}  // namespace janus
