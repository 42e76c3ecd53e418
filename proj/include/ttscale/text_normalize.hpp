#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace ttscale {

inline constexpr std::size_t kDefaultNgramSize = 8;
inline constexpr std::string_view kNormalizationName = "lowercase+strip-ascii-punct+collapse-ws";

/// Lower-cases ASCII, deletes ASCII punctuation and collapses runs of
/// whitespace to one space, trimming both ends.
std::string normalize_text(std::string_view text);

std::vector<std::string_view> split_words(std::string_view normalized);

/// Word n-gram windows of already-normalized text, each joined by single
/// spaces. Text with fewer than `n` words yields one window holding all of
/// it; empty text yields none.
std::vector<std::string> word_ngrams(std::string_view normalized, std::size_t n);

/// Set of n-gram windows drawn from a reference collection.
class NgramIndex {
 public:
  explicit NgramIndex(std::size_t n = kDefaultNgramSize) : n_(n) {}

  void add(std::string_view text);
  [[nodiscard]] bool overlaps(std::string_view text) const;
  [[nodiscard]] std::size_t n() const { return n_; }
  [[nodiscard]] std::size_t size() const { return windows_.size(); }

 private:
  std::size_t n_;
  std::unordered_set<std::string> windows_;
};

}  // namespace ttscale
