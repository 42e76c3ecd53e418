#include "ttscale/sampler.hpp"

#include <limits>

namespace ttscale {

std::uint64_t StableRng::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("StableRng::below needs a positive bound");
  // Largest multiple of n that fits; draws at or above it are rejected.
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % n;
  for (;;) {
    const std::uint64_t x = engine_();
    if (x < limit) return x % n;
  }
}

std::size_t SamplingPlan::distinct_items() const {
  std::unordered_set<std::string> ids;
  for (const auto& [_, datasets] : strata) {
    for (const auto& [__, pool] : datasets) ids.insert(pool.begin(), pool.end());
  }
  return ids.size();
}

void SamplingPlan::validate() const {
  std::unordered_map<std::string, std::string> dataset_of;
  for (const auto& [domain, datasets] : strata) {
    std::unordered_set<std::string> in_domain;
    for (const auto& [dataset, pool] : datasets) {
      for (const auto& id : pool) {
        if (!in_domain.insert(id).second) {
          throw std::invalid_argument("item " + id + " appears twice in domain " + domain);
        }
        const auto [it, fresh] = dataset_of.emplace(id, dataset);
        if (!fresh && it->second != dataset) {
          throw std::invalid_argument("item " + id + " belongs to two datasets");
        }
      }
    }
  }
  if (target_n > dataset_of.size()) {
    throw std::invalid_argument("target_n " + std::to_string(target_n) + " exceeds pool of " +
                                std::to_string(dataset_of.size()) + " items");
  }
}

namespace {

// Index-addressed pools with O(1) removal of any id from every pool holding it.
class StratumPools {
 public:
  explicit StratumPools(const Strata& strata) {
    for (const auto& [domain, datasets] : strata) {
      auto& d = domains_.emplace_back();
      d.name = domain;
      for (const auto& [dataset, ids] : datasets) {
        const std::size_t p = pools_.size();
        pools_.push_back(Pool{ids, {}});
        auto& pool = pools_.back();
        for (std::size_t i = 0; i < pool.ids.size(); ++i) {
          pool.position.emplace(pool.ids[i], i);
          owners_[pool.ids[i]].push_back(p);
        }
        d.pools.push_back(p);
      }
    }
  }

  std::string draw(StableRng& rng) {
    std::vector<std::size_t> live_domains;
    for (std::size_t d = 0; d < domains_.size(); ++d) {
      if (domain_size(d) > 0) live_domains.push_back(d);
    }
    const auto& domain = domains_[live_domains[rng.below(live_domains.size())]];

    std::vector<std::size_t> live_pools;
    for (const std::size_t p : domain.pools) {
      if (!pools_[p].ids.empty()) live_pools.push_back(p);
    }
    const auto& pool = pools_[live_pools[rng.below(live_pools.size())]];

    std::string id = pool.ids[rng.below(pool.ids.size())];
    for (const std::size_t p : owners_.at(id)) remove(pools_[p], id);
    return id;
  }

 private:
  struct Pool {
    std::vector<std::string> ids;
    std::unordered_map<std::string, std::size_t> position;
  };
  struct Domain {
    std::string name;
    std::vector<std::size_t> pools;
  };

  std::size_t domain_size(std::size_t d) const {
    std::size_t n = 0;
    for (const std::size_t p : domains_[d].pools) n += pools_[p].ids.size();
    return n;
  }

  static void remove(Pool& pool, const std::string& id) {
    const auto it = pool.position.find(id);
    if (it == pool.position.end()) return;
    const std::size_t i = it->second;
    pool.position.erase(it);
    if (i + 1 != pool.ids.size()) {
      pool.ids[i] = std::move(pool.ids.back());
      pool.position[pool.ids[i]] = i;
    }
    pool.ids.pop_back();
  }

  std::vector<Domain> domains_;
  std::vector<Pool> pools_;
  std::unordered_map<std::string, std::vector<std::size_t>> owners_;
};

}  // namespace

std::vector<std::string> diversity_sample(const SamplingPlan& plan) {
  plan.validate();
  StableRng rng(plan.seed);
  StratumPools pools(plan.strata);
  std::vector<std::string> drawn;
  drawn.reserve(plan.target_n);
  while (drawn.size() < plan.target_n) drawn.push_back(pools.draw(rng));
  return drawn;
}

}  // namespace ttscale
