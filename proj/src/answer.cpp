#include "ttscale/answer.hpp"

#include <algorithm>
#include <cctype>
#include <regex>
#include <stdexcept>

namespace ttscale {

std::string_view to_string(ExtractionMethod method) {
  switch (method) {
    case ExtractionMethod::boxed: return "boxed";
    case ExtractionMethod::regex_fallback: return "regex_fallback";
    case ExtractionMethod::none: return "none";
  }
  return "none";
}

ExtractionMethod parse_extraction_method(std::string_view text) {
  if (text == "boxed") return ExtractionMethod::boxed;
  if (text == "regex_fallback") return ExtractionMethod::regex_fallback;
  if (text == "none") return ExtractionMethod::none;
  throw std::invalid_argument("bad extraction method: " + std::string(text));
}

AnswerChoices AnswerChoices::of(const McqQuestion& q) { return {q.letters(), q.options}; }

AnswerChoices AnswerChoices::of_letters(std::vector<char> letters) {
  return {std::move(letters), {}};
}

bool AnswerChoices::allows(char c) const {
  return std::find(letters.begin(), letters.end(), c) != letters.end();
}

const std::vector<FallbackPattern>& fallback_patterns() {
  static const std::vector<FallbackPattern> table = {
      {"answer_is", R"(answer\s+is\s*:?\s*[\(\[\*]*([A-Z])(?![A-Za-z0-9]))", false},
      {"answer_colon", R"(answer\s*:\s*[\(\[\*]*([A-Z])(?![A-Za-z0-9]))", false},
      {"option", R"(option\s*[\(\[]?([A-Z])(?![A-Za-z0-9]))", false},
      {"standalone", R"((?:^|[^A-Za-z0-9])(?:\(([A-Z])\)|([A-Z])\.(?=\s|$)))", true},
  };
  return table;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

// Removes LaTeX text wrappers such as \text{B} or \textbf{B} that span the
// whole content.
std::string_view unwrap_latex(std::string_view s) {
  static constexpr std::string_view kWrappers[] = {"\\text{", "\\textbf{", "\\mathrm{",
                                                   "\\mathbf{"};
  for (bool changed = true; changed;) {
    changed = false;
    s = trim(s);
    for (auto w : kWrappers) {
      if (s.starts_with(w) && s.ends_with('}')) {
        s = s.substr(w.size(), s.size() - w.size() - 1);
        changed = true;
      }
    }
  }
  return s;
}

std::string_view strip_period(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.back() == '.') s.remove_suffix(1);
  return trim(s);
}

std::optional<char> match_option_text(std::string_view s, const AnswerChoices& choices) {
  const std::string wanted = lower(strip_period(s));
  if (wanted.empty()) return std::nullopt;
  for (const auto& [letter, text] : choices.texts) {
    if (choices.allows(letter) && lower(strip_period(text)) == wanted) return letter;
  }
  return std::nullopt;
}

std::optional<char> resolve_boxed(std::string_view content, const AnswerChoices& choices) {
  std::string_view s = unwrap_latex(content);
  if (s.empty()) return std::nullopt;
  // "(B)" or "(B) text"
  if (s.size() >= 3 && s.front() == '(' && s[2] == ')' && choices.allows(s[1])) return s[1];

  const char first = s.front();
  if (choices.allows(first)) {
    if (s.size() == 1) return first;
    const char next = s[1];
    if (next == '.' || next == ')' || next == ':') return first;
    if (std::isspace(static_cast<unsigned char>(next)) &&
        match_option_text(s.substr(2), choices) == first) {
      return first;
    }
  }
  return match_option_text(s, choices);
}

std::optional<ExtractionOutcome> find_boxed(std::string_view text, const AnswerChoices& choices) {
  static constexpr std::string_view kBoxed = "\\boxed";
  std::size_t from = 0;
  while ((from = text.find(kBoxed, from)) != std::string_view::npos) {
    const std::size_t start = from;
    std::size_t i = from + kBoxed.size();
    from = i;
    while (i < text.size() && text[i] == ' ') ++i;
    if (i >= text.size() || text[i] != '{') continue;
    int depth = 0;
    std::size_t close = std::string_view::npos;
    for (std::size_t j = i; j < text.size(); ++j) {
      if (text[j] == '{') {
        ++depth;
      } else if (text[j] == '}' && --depth == 0) {
        close = j;
        break;
      }
    }
    if (close == std::string_view::npos) continue;
    if (auto letter = resolve_boxed(text.substr(i + 1, close - i - 1), choices)) {
      return ExtractionOutcome{letter, ExtractionMethod::boxed, {start, close + 1}, {}};
    }
  }
  return std::nullopt;
}

std::optional<ExtractionOutcome> find_fallback(std::string_view text,
                                               const AnswerChoices& choices) {
  static const auto compiled = [] {
    std::vector<std::regex> out;
    for (const auto& p : fallback_patterns()) {
      out.emplace_back(std::string(p.regex), std::regex::ECMAScript | std::regex::icase);
    }
    return out;
  }();

  const std::size_t tail_start = text.size() > kFallbackTailChars
                                     ? text.size() - kFallbackTailChars
                                     : 0;
  const auto& table = fallback_patterns();
  for (std::size_t p = 0; p < table.size(); ++p) {
    using It = std::string_view::const_iterator;
    for (std::regex_iterator<It> it(text.begin(), text.end(), compiled[p]), end; it != end;
         ++it) {
      const auto& m = *it;
      for (std::size_t g = 1; g < m.size(); ++g) {
        if (!m[g].matched) continue;
        const auto pos = static_cast<std::size_t>(m.position(g));
        const char c = text[pos];
        if (!std::isupper(static_cast<unsigned char>(c)) || !choices.allows(c)) continue;
        if (table[p].tail_only && pos < tail_start) continue;
        const auto begin = static_cast<std::size_t>(m.position(0));
        return ExtractionOutcome{c, ExtractionMethod::regex_fallback,
                                 {begin, begin + static_cast<std::size_t>(m.length(0))},
                                 std::string(table[p].id)};
      }
    }
  }
  return std::nullopt;
}

}  // namespace

ExtractionOutcome extract_answer(std::string_view text, const AnswerChoices& choices) {
  if (auto boxed = find_boxed(text, choices)) return *boxed;
  if (auto fallback = find_fallback(text, choices)) return *fallback;
  return ExtractionOutcome{};
}

bool grade(const ExtractionOutcome& outcome, char gold) {
  return outcome.method != ExtractionMethod::none && outcome.letter == gold;
}

}  // namespace ttscale
