#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ttscale/question.hpp"

namespace ttscale {

enum class ExtractionMethod { boxed, regex_fallback, none };

std::string_view to_string(ExtractionMethod method);
ExtractionMethod parse_extraction_method(std::string_view text);

/// Half-open byte range into the text an answer was extracted from.
struct TextSpan {
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const TextSpan&, const TextSpan&) = default;
};

struct ExtractionOutcome {
  std::optional<char> letter;
  ExtractionMethod method = ExtractionMethod::none;
  TextSpan span;
  /// Id of the fallback pattern that fired; empty otherwise.
  std::string pattern;

  friend bool operator==(const ExtractionOutcome&, const ExtractionOutcome&) = default;
};

/// The letters a model may answer with and, when known, the option texts
/// (so that `\boxed{yes}` can resolve to the letter of "yes").
struct AnswerChoices {
  std::vector<char> letters;
  OptionMap texts;

  static AnswerChoices of(const McqQuestion& q);
  static AnswerChoices of_letters(std::vector<char> letters);

  [[nodiscard]] bool allows(char c) const;
};

/// Fallback cascade applied when no `\boxed{}` answer is usable. Patterns are
/// tried in order; within one pattern the earliest match wins. Letters must
/// be upper case and allowed. Tail-only patterns only accept letters in the
/// final `kFallbackTailChars` characters.
struct FallbackPattern {
  std::string_view id;
  std::string_view regex;
  bool tail_only = false;
};

inline constexpr std::string_view kFallbackTableVersion = "fallback-v1";
inline constexpr std::size_t kFallbackTailChars = 200;

const std::vector<FallbackPattern>& fallback_patterns();

/// Pure and total: every text yields exactly one outcome.
ExtractionOutcome extract_answer(std::string_view text, const AnswerChoices& choices);

bool grade(const ExtractionOutcome& outcome, char gold);

}  // namespace ttscale
