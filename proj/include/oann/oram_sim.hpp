#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "oann/oram_params.hpp"
#include "oann/rng.hpp"

namespace oann {

// Metadata-only mirror of the tree ORAM protocol: identical position-map,
// stash, eviction, and reshuffle logic, but no payload bytes, sealing, or
// physical storage. It consumes the same leaf-draw stream as the real client,
// so a run with equal (config, seed, workload) reproduces the real instance's
// stash sizes, eviction leaves, and reshuffle schedule step for step. This is
// what makes million-access tail experiments cheap.
//
// The infinite-capacity mode disables the Z limit during placement (evictions
// then always drain the stash); it exists to measure expected bucket loads
// against the analytical budget a = A(d-1)/2.

class OramSimulator {
 public:
  struct StepResult {
    bool evicted = false;
    uint64_t eviction_leaf = 0;
    uint32_t reshuffles = 0;
    uint64_t stash_size = 0;
  };

  OramSimulator(OramConfig cfg, uint64_t master_seed, uint64_t instance = 0,
                bool infinite_capacity = false)
      : cfg_(cfg),
        infinite_(infinite_capacity),
        leaf_rng_(derive_rng(master_seed, RngPurpose::kOramLeaf, instance)),
        setup_rng_(derive_rng(master_seed, RngPurpose::kOramSetup, instance)) {
    buckets_.resize(cfg_.bucket_count());
    meta_.assign(cfg_.bucket_count(), Meta{});
    posmap_.resize(cfg_.capacity);
    bucket_level_.resize(cfg_.bucket_count());
    for (uint64_t b = 0; b < cfg_.bucket_count(); ++b)
      bucket_level_[b] = cfg_.level_of_bucket(b);
  }

  /// Mirrors TreeOram::setup_bulk for the first `block_count` addresses.
  void setup(uint64_t block_count) {
    const uint64_t leaves = cfg_.leaf_count();
    for (uint64_t addr = 0; addr < cfg_.capacity; ++addr)
      posmap_[addr] = Pos{setup_rng_.uniform(leaves), kNoLevel, kNoSlot};
    for (uint64_t addr = 0; addr < block_count; ++addr) {
      const uint64_t leaf = posmap_[addr].leaf;
      bool placed = false;
      for (int32_t level = static_cast<int32_t>(cfg_.depth); level >= 0;
           --level) {
        const uint64_t b = cfg_.bucket_at(leaf, static_cast<uint32_t>(level));
        if (infinite_ || buckets_[b].size() < cfg_.real_slots) {
          place(addr, b, static_cast<uint32_t>(level));
          placed = true;
          break;
        }
      }
      if (!placed) stash_[addr] = posmap_[addr].leaf;
    }
    for (auto& m : meta_) m = Meta{};
  }

  StepResult access(uint64_t addr) {
    StepResult res;
    Pos& e = posmap_[addr];
    const uint64_t old_leaf = e.leaf;
    const int32_t old_lvl = e.lvl;
    const int32_t old_slot = e.slot;
    e.leaf = leaf_rng_.uniform(cfg_.leaf_count());
    e.lvl = kNoLevel;
    e.slot = kNoSlot;

    if (!infinite_) {
      for (uint32_t i = 0; i <= cfg_.depth; ++i) {
        const uint64_t b = cfg_.bucket_at(old_leaf, i);
        Meta& m = meta_[b];
        if (static_cast<int32_t>(i) != old_lvl) m.dummy++;
        m.count++;
      }
    }
    if (old_lvl != kNoLevel) {
      const uint64_t b = cfg_.bucket_at(old_leaf, static_cast<uint32_t>(old_lvl));
      remove_at(b, static_cast<uint32_t>(old_slot));
    } else {
      stash_.erase(addr);
    }
    stash_[addr] = e.leaf;

    ++counter_;
    if (counter_ % cfg_.evict_period == 0) {
      res.evicted = true;
      res.eviction_leaf = evict();
    }
    if (!infinite_) res.reshuffles = reshuffle(old_leaf);
    res.stash_size = stash_.size();
    reshuffle_count_ += res.reshuffles;
    return res;
  }

  uint64_t stash_size() const { return stash_.size(); }
  uint64_t reshuffle_count() const { return reshuffle_count_; }
  uint64_t access_counter() const { return counter_; }

  uint64_t bucket_load(uint64_t b) const { return buckets_[b].size(); }
  uint32_t bucket_level(uint64_t b) const { return bucket_level_[b]; }

 private:
  static constexpr int32_t kNoLevel = -1;
  static constexpr int32_t kNoSlot = -1;

  struct Pos {
    uint64_t leaf = 0;
    int32_t lvl = kNoLevel;
    int32_t slot = kNoSlot;
  };

  struct Meta {
    uint32_t count = 0;
    uint32_t dummy = 0;
  };

  void place(uint64_t addr, uint64_t b, uint32_t level) {
    posmap_[addr].lvl = static_cast<int32_t>(level);
    posmap_[addr].slot = static_cast<int32_t>(buckets_[b].size());
    buckets_[b].push_back(addr);
  }

  void remove_at(uint64_t b, uint32_t slot) {
    auto& v = buckets_[b];
    const uint64_t moved = v.back();
    v[slot] = moved;
    v.pop_back();
    if (slot < v.size()) posmap_[moved].slot = static_cast<int32_t>(slot);
  }

  void drain_bucket_to_stash(uint64_t b) {
    for (uint64_t addr : buckets_[b]) {
      posmap_[addr].lvl = kNoLevel;
      posmap_[addr].slot = kNoSlot;
      stash_[addr] = posmap_[addr].leaf;
    }
    buckets_[b].clear();
  }

  /// Greedy leaf-to-root write-back of one bucket, lowest addresses first.
  void fill_bucket_from_stash(uint64_t b, uint32_t level) {
    for (auto it = stash_.begin(); it != stash_.end();) {
      if (!infinite_ && buckets_[b].size() >= cfg_.real_slots) break;
      if (cfg_.bucket_at(it->second, level) == b) {
        place(it->first, b, level);
        it = stash_.erase(it);
      } else {
        ++it;
      }
    }
    meta_[b] = Meta{};
  }

  uint64_t evict() {
    const uint64_t ordinal = counter_ / cfg_.evict_period;
    const uint64_t leaf =
        reverse_digits(ordinal % cfg_.leaf_count(), cfg_.d, cfg_.depth);
    for (uint32_t i = 0; i <= cfg_.depth; ++i)
      drain_bucket_to_stash(cfg_.bucket_at(leaf, i));
    for (int32_t i = static_cast<int32_t>(cfg_.depth); i >= 0; --i)
      fill_bucket_from_stash(cfg_.bucket_at(leaf, static_cast<uint32_t>(i)),
                             static_cast<uint32_t>(i));
    return leaf;
  }

  uint32_t reshuffle(uint64_t leaf) {
    uint32_t n = 0;
    for (uint32_t i = 0; i <= cfg_.depth; ++i) {
      const uint64_t b = cfg_.bucket_at(leaf, i);
      if (meta_[b].count == cfg_.dummy_slots) {
        ++n;
        drain_bucket_to_stash(b);
        fill_bucket_from_stash(b, i);
      }
    }
    return n;
  }

  OramConfig cfg_;
  bool infinite_;
  Rng leaf_rng_;
  Rng setup_rng_;
  std::vector<std::vector<uint64_t>> buckets_;  // addrs per bucket
  std::vector<uint32_t> bucket_level_;
  std::vector<Meta> meta_;
  std::vector<Pos> posmap_;
  std::map<uint64_t, uint64_t> stash_;  // addr -> assigned leaf
  uint64_t counter_ = 0;
  uint64_t reshuffle_count_ = 0;
};

/// Stash-occupancy tail over a round-robin load of `block_count` distinct
/// blocks. Occupancy is sampled after each eviction, matching the quantity
/// the analytical bound speaks about.
struct StashTailResult {
  std::map<uint64_t, uint64_t> histogram;  // occupancy -> eviction epochs
  uint64_t samples = 0;
  uint64_t reshuffles = 0;
  uint64_t bucket_touches = 0;

  double tail_probability(uint64_t r) const {
    uint64_t above = 0;
    for (const auto& [occ, n] : histogram)
      if (occ > r) above += n;
    return samples == 0 ? 0.0
                        : static_cast<double>(above) / static_cast<double>(samples);
  }
};

inline StashTailResult simulate_stash_tail(const OramConfig& cfg,
                                           uint64_t accesses, uint64_t seed,
                                           uint64_t block_count = 0) {
  if (block_count == 0) block_count = cfg.capacity;
  OramSimulator sim(cfg, seed);
  sim.setup(block_count);
  StashTailResult out;
  for (uint64_t i = 0; i < accesses; ++i) {
    const auto step = sim.access(i % block_count);
    if (step.evicted) {
      out.histogram[step.stash_size]++;
      out.samples++;
    }
  }
  out.reshuffles = sim.reshuffle_count();
  out.bucket_touches = accesses * cfg.levels();
  return out;
}

/// Time-averaged per-bucket load in the infinite-capacity model, sampled at
/// eviction epochs. Only non-leaf buckets are reported; the analytical budget
/// for each is a = A(d-1)/2.
struct BucketLoadResult {
  std::vector<double> mean_load;  // indexed by bucket id; leaves are NaN-free 0
  std::vector<uint32_t> level;
  uint64_t epochs = 0;
};

inline BucketLoadResult simulate_bucket_load(const OramConfig& cfg,
                                             uint64_t accesses, uint64_t seed,
                                             uint64_t block_count = 0) {
  if (block_count == 0) block_count = cfg.capacity;
  OramSimulator sim(cfg, seed, 0, /*infinite_capacity=*/true);
  sim.setup(block_count);
  BucketLoadResult out;
  const uint64_t nonleaf = cfg.level_offset(cfg.depth);
  std::vector<double> sums(nonleaf, 0.0);
  for (uint64_t i = 0; i < accesses; ++i) {
    const auto step = sim.access(i % block_count);
    if (step.evicted) {
      out.epochs++;
      for (uint64_t b = 0; b < nonleaf; ++b)
        sums[b] += static_cast<double>(sim.bucket_load(b));
    }
  }
  out.mean_load.resize(nonleaf, 0.0);
  out.level.resize(nonleaf);
  for (uint64_t b = 0; b < nonleaf; ++b) {
    out.mean_load[b] = out.epochs ? sums[b] / static_cast<double>(out.epochs) : 0.0;
    out.level[b] = sim.bucket_level(b);
  }
  return out;
}

}  // namespace oann
