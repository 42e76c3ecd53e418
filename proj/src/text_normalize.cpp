#include "ttscale/text_normalize.hpp"

#include <cctype>
#include <stdexcept>

namespace ttscale {

std::string normalize_text(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool pending_space = false;
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (c < 0x80 && std::ispunct(c)) continue;
    if (c < 0x80 && std::isspace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) {
      out.push_back(' ');
      pending_space = false;
    }
    out.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
  }
  return out;
}

std::vector<std::string_view> split_words(std::string_view normalized) {
  std::vector<std::string_view> words;
  std::size_t start = 0;
  while (start < normalized.size()) {
    auto end = normalized.find(' ', start);
    if (end == std::string_view::npos) end = normalized.size();
    if (end > start) words.push_back(normalized.substr(start, end - start));
    start = end + 1;
  }
  return words;
}

std::vector<std::string> word_ngrams(std::string_view normalized, std::size_t n) {
  if (n == 0) throw std::invalid_argument("n-gram size must be positive");
  const auto words = split_words(normalized);
  std::vector<std::string> out;
  if (words.empty()) return out;
  if (words.size() < n) {
    out.emplace_back(normalized);
    return out;
  }
  for (std::size_t i = 0; i + n <= words.size(); ++i) {
    const char* begin = words[i].data();
    const char* end = words[i + n - 1].data() + words[i + n - 1].size();
    out.emplace_back(begin, end);
  }
  return out;
}

void NgramIndex::add(std::string_view text) {
  for (auto& w : word_ngrams(normalize_text(text), n_)) windows_.insert(std::move(w));
}

bool NgramIndex::overlaps(std::string_view text) const {
  for (const auto& w : word_ngrams(normalize_text(text), n_)) {
    if (windows_.contains(w)) return true;
  }
  return false;
}

}  // namespace ttscale
