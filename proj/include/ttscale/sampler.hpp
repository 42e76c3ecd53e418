#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "ttscale/curation.hpp"

namespace ttscale {

/// Seeded generator with a fixed, documented algorithm: std::mt19937_64
/// (whose output sequence the standard pins down) with bounded draws by
/// rejection sampling, so draws do not depend on the standard library's
/// distribution implementations.
class StableRng {
 public:
  static constexpr std::string_view kAlgorithm = "mt19937_64/rejection";

  explicit StableRng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
};

/// domain -> dataset -> item ids.
using Strata = std::map<std::string, std::map<std::string, std::vector<std::string>>>;

struct SamplingPlan {
  std::size_t target_n = 0;
  std::uint64_t seed = 42;
  Strata strata;

  /// Every item is placed in the stratum of each of its domains ("Unlabeled"
  /// when it has none) under its source dataset.
  template <typename Item>
  static SamplingPlan from_items(const std::vector<Item>& items, std::size_t target_n,
                                 std::uint64_t seed) {
    SamplingPlan plan{target_n, seed, {}};
    for (const auto& item : items) {
      const McqQuestion& q = question_of(item);
      if (q.domains.empty()) {
        plan.strata[kUnlabeled][q.source].push_back(q.id);
      }
      for (const auto& d : q.domains) plan.strata[d][q.source].push_back(q.id);
    }
    return plan;
  }

  [[nodiscard]] std::size_t distinct_items() const;

  /// Throws std::invalid_argument if a pool repeats an id, an id appears
  /// under two datasets, or target_n exceeds the number of distinct items.
  void validate() const;
};

/// Repeats {uniform domain among those with items left; uniform dataset among
/// that domain's nonempty datasets; uniform item without replacement} until
/// target_n items are drawn. A drawn item leaves every stratum it belongs to.
/// Returns ids in draw order.
std::vector<std::string> diversity_sample(const SamplingPlan& plan);

/// Keeps the items whose id was drawn, in draw order.
template <typename Item>
std::vector<Item> select_by_ids(const std::vector<Item>& items,
                                const std::vector<std::string>& ids) {
  std::unordered_map<std::string, const Item*> by_id;
  for (const auto& item : items) by_id.emplace(question_of(item).id, &item);
  std::vector<Item> out;
  out.reserve(ids.size());
  for (const auto& id : ids) out.push_back(*by_id.at(id));
  return out;
}

template <typename Item>
StageResult<Item> diversity_sample_items(const std::vector<Item>& items, std::size_t target_n,
                                         std::uint64_t seed) {
  auto picked = select_by_ids(items, diversity_sample(SamplingPlan::from_items(items, target_n, seed)));
  auto row = count_by_source(kStageSample, picked);
  return {std::move(picked), std::move(row)};
}

}  // namespace ttscale
