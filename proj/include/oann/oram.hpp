#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "oann/block_store.hpp"
#include "oann/oram_params.hpp"
#include "oann/rng.hpp"
#include "oann/sealing.hpp"

namespace oann {

// d-ary large-bucket tree ORAM. Per logical access the client reads one slot
// per level of the target path (the real block where present, an unread dummy
// elsewhere), restashes the block under a fresh uniform leaf, and every A
// accesses flushes the stash along a deterministic reverse-lexicographic
// eviction path using whole-bucket reads and writes. All bucket metadata
// (version, slot permutation, validity, counters) lives client-side, so no
// per-level metadata fetch is needed. A bucket that has served S reads since
// its last write is reshuffled before it can run out of dummies.
//
// Every opened slot is integrity-verified; one failure permanently aborts the
// instance.

inline constexpr int32_t kNoLevel = -1;
inline constexpr int32_t kNoSlot = -1;

struct PosMapEntry {
  uint64_t leaf = 0;
  int32_t lvl = kNoLevel;   // level of the holding bucket, or kNoLevel
  int32_t slot = kNoSlot;   // logical slot within that bucket, or kNoSlot
};

struct BucketMeta {
  uint64_t ver = 0;
  std::vector<uint32_t> ptrs;  // logical slot -> physical offset, a bijection
  std::vector<uint8_t> valid;  // per logical slot; cleared when read
  uint32_t dummy = 0;          // dummies consumed since last write
  uint32_t count = 0;          // reads since last write; reshuffle at S
};

struct StashEntry {
  uint64_t leaf = 0;
  std::vector<uint8_t> data;
};

enum class OramOp { kRead, kWrite };

/// Requests/bytes issued by each protocol phase, for attribution when
/// comparing measured multipliers against the analytical models.
struct PhaseIo {
  uint64_t requests = 0;
  uint64_t bytes = 0;
};

struct OramIoBreakdown {
  PhaseIo setup;
  PhaseIo path;
  PhaseIo evict;
  PhaseIo reshuffle;
};

class TreeOram {
 public:
  /// `instance` salts the key and randomness streams so two instances built
  /// from one master seed are independent.
  TreeOram(OramConfig cfg, std::shared_ptr<BlockStore> store,
           uint64_t master_seed, uint64_t instance = 0)
      : cfg_(cfg),
        store_(std::move(store)),
        sealer_(SealKey::derive(master_seed ^ 0x6f72616dULL, instance),
                cfg.block_size,
                derive_rng(master_seed, RngPurpose::kSealNonce, instance ^ 0x9e)
                    .next_u64()),
        leaf_rng_(derive_rng(master_seed, RngPurpose::kOramLeaf, instance)),
        perm_rng_(derive_rng(master_seed, RngPurpose::kOramPerm, instance)),
        setup_rng_(derive_rng(master_seed, RngPurpose::kOramSetup, instance)) {
    cfg_.validate();
    const StoreGeometry want{cfg_.bucket_count(), cfg_.slots_per_bucket(),
                             sealer_.slot_bytes()};
    const StoreGeometry& have = store_->geometry();
    if (have.bucket_count != want.bucket_count ||
        have.slots_per_bucket != want.slots_per_bucket ||
        have.slot_bytes != want.slot_bytes)
      throw UsageError("TreeOram: store geometry does not match config");
    posmap_.resize(cfg_.capacity);
    initialized_.assign(cfg_.capacity, 0);
    meta_.resize(cfg_.bucket_count());
    for (auto& m : meta_) {
      m.ptrs.clear();
      m.valid.assign(cfg_.slots_per_bucket(), 0);
    }
    if (cfg_.debug_introspection)
      shadow_.assign(cfg_.bucket_count(),
                     std::vector<uint64_t>(cfg_.real_slots, kDummyAddr));
  }

  static StoreGeometry store_geometry(const OramConfig& cfg) {
    return StoreGeometry{cfg.bucket_count(), cfg.slots_per_bucket(),
                         sealed_slot_bytes(cfg.block_size)};
  }

  const OramConfig& config() const { return cfg_; }
  BlockStore& store() { return *store_; }
  bool aborted() const { return aborted_; }
  uint64_t access_counter() const { return access_counter_; }

  /// Trusted-side initialization: assigns every address a uniform leaf,
  /// places the given blocks greedily leaf-to-root within bucket capacity
  /// (overflow to stash), and seals every bucket exactly once. Runs before
  /// the oblivious access phase.
  void setup_bulk(const std::map<uint64_t, std::vector<uint8_t>>& blocks,
                  uint64_t setup_stash_limit = 0) {
    if (ready_) throw UsageError("setup_bulk: instance already initialized");
    if (blocks.size() > cfg_.capacity)
      throw SetupError("setup_bulk: more blocks than capacity");
    if (setup_stash_limit == 0) setup_stash_limit = cfg_.real_slots;

    const uint64_t leaves = cfg_.leaf_count();
    for (uint64_t addr = 0; addr < cfg_.capacity; ++addr)
      posmap_[addr] = PosMapEntry{setup_rng_.uniform(leaves), kNoLevel, kNoSlot};

    struct Placed {
      uint64_t addr;
      const std::vector<uint8_t>* data;
    };
    std::vector<std::vector<Placed>> fill(cfg_.bucket_count());
    for (const auto& [addr, data] : blocks) {
      if (addr >= cfg_.capacity)
        throw SetupError("setup_bulk: address out of range");
      if (data.size() != cfg_.block_size)
        throw SetupError("setup_bulk: block size mismatch");
      const uint64_t leaf = posmap_[addr].leaf;
      bool placed = false;
      for (int32_t level = static_cast<int32_t>(cfg_.depth); level >= 0;
           --level) {
        const uint64_t b = cfg_.bucket_at(leaf, static_cast<uint32_t>(level));
        if (fill[b].size() < cfg_.real_slots) {
          fill[b].push_back(Placed{addr, &data});
          placed = true;
          break;
        }
      }
      if (!placed) stash_[addr] = StashEntry{leaf, data};
      initialized_[addr] = 1;
    }
    if (stash_.size() > setup_stash_limit)
      throw SetupError("setup_bulk: placement overflow, stash " +
                       std::to_string(stash_.size()) + " > limit " +
                       std::to_string(setup_stash_limit));

    for (uint64_t b = 0; b < cfg_.bucket_count(); ++b) {
      std::vector<std::pair<uint64_t, std::vector<uint8_t>>> real;
      real.reserve(fill[b].size());
      for (const Placed& p : fill[b]) real.emplace_back(p.addr, *p.data);
      seal_bucket(b, cfg_.level_of_bucket(b), real, io_.setup);
    }
    ready_ = true;
  }

  /// One logical access. Returns the pre-overwrite value (a zero block for a
  /// first-time write). Reads of never-written addresses are a usage error.
  std::vector<uint8_t> access(uint64_t addr, OramOp op,
                              const std::vector<uint8_t>* new_data = nullptr) {
    if (aborted_) throw AbortedError("oram: instance aborted");
    if (!ready_) throw UsageError("oram: setup_bulk has not run");
    if (addr >= cfg_.capacity) throw UsageError("oram: address out of range");
    if (op == OramOp::kRead && !initialized_[addr])
      throw UsageError("oram: read of uninitialized address");
    if (op == OramOp::kWrite) {
      if (new_data == nullptr || new_data->size() != cfg_.block_size)
        throw UsageError("oram: write payload size mismatch");
    }

    const PosMapEntry old = posmap_[addr];
    const uint64_t new_leaf = leaf_rng_.uniform(cfg_.leaf_count());
    posmap_[addr] = PosMapEntry{new_leaf, kNoLevel, kNoSlot};

    // A stashed (or fresh) block still reads a full path of dummies; the old
    // assigned leaf is uniform and unrevealed, so the path looks like any
    // other.
    std::optional<std::vector<uint8_t>> data =
        read_path(old.leaf, old.lvl, old.slot, addr);
    if (!data.has_value()) {
      auto it = stash_.find(addr);
      if (it != stash_.end()) {
        data = std::move(it->second.data);
        stash_.erase(it);
      }
    }
    if (!data.has_value()) data = std::vector<uint8_t>(cfg_.block_size, 0);

    std::vector<uint8_t> result = *data;
    if (op == OramOp::kWrite) data = *new_data;
    stash_[addr] = StashEntry{new_leaf, std::move(*data)};
    initialized_[addr] = 1;
    if (stash_.size() > cfg_.stash_abort_limit)
      throw std::logic_error("oram: stash exceeded abort limit");

    ++access_counter_;
    if (access_counter_ % cfg_.evict_period == 0) evict_path();
    early_reshuffle(old.leaf);

    if (cfg_.debug_introspection) leaf_reads_.push_back(old.leaf);
    return result;
  }

  std::vector<uint8_t> read(uint64_t addr) { return access(addr, OramOp::kRead); }
  void write(uint64_t addr, const std::vector<uint8_t>& data) {
    access(addr, OramOp::kWrite, &data);
  }

  // -- Introspection (debug builds of experiments only).

  uint64_t stash_size() const { return stash_.size(); }

  uint64_t reshuffle_count() const { return reshuffle_count_; }

  const OramIoBreakdown& io_breakdown() const { return io_; }

  const std::vector<uint64_t>& eviction_leaves() const {
    require_introspection();
    return eviction_leaves_;
  }

  const std::vector<uint64_t>& leaf_reads() const {
    require_introspection();
    return leaf_reads_;
  }

  BucketMeta bucket_meta(uint64_t bucket) const {
    require_introspection();
    return meta_.at(bucket);
  }

  /// Every initialized non-stashed block must sit, valid, at its position-map
  /// location, and that bucket must lie on the block's assigned-leaf path.
  bool check_path_invariant() const {
    require_introspection();
    for (uint64_t addr = 0; addr < cfg_.capacity; ++addr) {
      if (!initialized_[addr]) continue;
      const PosMapEntry& e = posmap_[addr];
      if (e.lvl == kNoLevel) {
        if (stash_.find(addr) == stash_.end()) return false;
        continue;
      }
      if (stash_.find(addr) != stash_.end()) return false;
      const uint64_t b = cfg_.bucket_at(e.leaf, static_cast<uint32_t>(e.lvl));
      if (shadow_[b][static_cast<size_t>(e.slot)] != addr) return false;
      if (!meta_[b].valid[static_cast<size_t>(e.slot)]) return false;
    }
    return true;
  }

  // -- Persistence: versioned binary client state (position map, bucket
  //    metadata, stash, counters, key material, randomness streams).

  void save(std::ostream& os) const {
    os.write("OANNORM1", 8);
    cfg_.save(os);
    write_u64(os, access_counter_);
    write_u32(os, ready_ ? 1 : 0);
    write_u32(os, aborted_ ? 1 : 0);
    sealer_.save(os);
    leaf_rng_.save(os);
    perm_rng_.save(os);
    setup_rng_.save(os);
    for (const auto& e : posmap_) {
      write_u64(os, e.leaf);
      write_u32(os, static_cast<uint32_t>(e.lvl + 1));
      write_u32(os, static_cast<uint32_t>(e.slot + 1));
    }
    os.write(reinterpret_cast<const char*>(initialized_.data()),
             static_cast<std::streamsize>(initialized_.size()));
    for (const auto& m : meta_) {
      write_u64(os, m.ver);
      for (uint32_t p : m.ptrs) write_u32(os, p);
      write_u32(os, m.ptrs.empty() ? 0 : 1);
      os.write(reinterpret_cast<const char*>(m.valid.data()),
               static_cast<std::streamsize>(m.valid.size()));
      write_u32(os, m.dummy);
      write_u32(os, m.count);
    }
    write_u64(os, stash_.size());
    for (const auto& [addr, entry] : stash_) {
      write_u64(os, addr);
      write_u64(os, entry.leaf);
      write_bytes(os, entry.data);
    }
    if (cfg_.debug_introspection) {
      for (const auto& row : shadow_)
        for (uint64_t a : row) write_u64(os, a);
    }
  }

  static TreeOram restore(std::istream& is, std::shared_ptr<BlockStore> store) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "OANNORM1")
      throw UsageError("TreeOram::restore: bad magic");
    OramConfig cfg = OramConfig::restore(is);
    TreeOram oram(cfg, std::move(store), 0, 0);
    oram.access_counter_ = read_u64(is);
    oram.ready_ = read_u32(is) != 0;
    oram.aborted_ = read_u32(is) != 0;
    oram.sealer_ = Sealer::restore(is);
    oram.leaf_rng_.load(is);
    oram.perm_rng_.load(is);
    oram.setup_rng_.load(is);
    for (auto& e : oram.posmap_) {
      e.leaf = read_u64(is);
      e.lvl = static_cast<int32_t>(read_u32(is)) - 1;
      e.slot = static_cast<int32_t>(read_u32(is)) - 1;
    }
    is.read(reinterpret_cast<char*>(oram.initialized_.data()),
            static_cast<std::streamsize>(oram.initialized_.size()));
    for (auto& m : oram.meta_) {
      m.ver = read_u64(is);
      m.ptrs.resize(cfg.slots_per_bucket());
      for (auto& p : m.ptrs) p = read_u32(is);
      if (read_u32(is) == 0) m.ptrs.clear();
      m.valid.resize(cfg.slots_per_bucket());
      is.read(reinterpret_cast<char*>(m.valid.data()),
              static_cast<std::streamsize>(m.valid.size()));
      m.dummy = read_u32(is);
      m.count = read_u32(is);
    }
    const uint64_t stash_n = read_u64(is);
    for (uint64_t i = 0; i < stash_n; ++i) {
      const uint64_t addr = read_u64(is);
      StashEntry e;
      e.leaf = read_u64(is);
      e.data = read_bytes(is);
      oram.stash_.emplace(addr, std::move(e));
    }
    if (cfg.debug_introspection) {
      for (auto& row : oram.shadow_)
        for (auto& a : row) a = read_u64(is);
    }
    if (!is) throw UsageError("TreeOram::restore: truncated state");
    return oram;
  }

 private:
  void require_introspection() const {
    if (!cfg_.debug_introspection)
      throw UsageError("oram: introspection requires debug flag");
  }

  void abort_instance() { aborted_ = true; }

  static void internal_check(bool cond, const char* what) {
    if (!cond) throw std::logic_error(std::string("oram invariant: ") + what);
  }

  /// Picks the physical offset to read in bucket `b`: the block's own logical
  /// slot for the holding level, the next unread dummy elsewhere.
  uint32_t get_offset(uint64_t b, int32_t logical_slot) {
    BucketMeta& m = meta_[b];
    uint32_t j;
    if (logical_slot == kNoSlot) {
      internal_check(m.dummy < cfg_.dummy_slots, "dummy slots exhausted");
      j = cfg_.real_slots + m.dummy;
      m.dummy++;
    } else {
      j = static_cast<uint32_t>(logical_slot);
    }
    internal_check(m.count < cfg_.dummy_slots, "bucket read past S");
    m.count++;
    m.valid[j] = 0;
    return m.ptrs[j];
  }

  std::optional<std::vector<uint8_t>> read_path(uint64_t leaf, int32_t lvl,
                                                int32_t slot, uint64_t addr) {
    std::optional<std::vector<uint8_t>> found;
    for (uint32_t i = 0; i <= cfg_.depth; ++i) {
      const uint64_t b = cfg_.bucket_at(leaf, i);
      if (cfg_.variant == ProtocolVariant::kRingBaseline) {
        store_->read_meta(b, cfg_.meta_fetch_bytes);
        io_.path.requests++;
        io_.path.bytes += cfg_.meta_fetch_bytes;
      }
      const int32_t j = (static_cast<int32_t>(i) == lvl) ? slot : kNoSlot;
      const uint32_t k = get_offset(b, j);
      const std::vector<uint8_t> ct = store_->read_slot(b, k);
      io_.path.requests++;
      io_.path.bytes += ct.size();
      std::optional<SlotPayload> payload =
          sealer_.open(b, k, meta_[b].ver, ct);
      if (!payload.has_value()) {
        abort_instance();
        throw IntegrityError("oram: slot failed authentication on path read");
      }
      if (static_cast<int32_t>(i) == lvl) {
        internal_check(payload->addr == addr, "position map points at wrong block");
        found = std::move(payload->data);
      }
    }
    return found;
  }

  /// Merges a bucket's live blocks into the stash. Reads the whole bucket as
  /// one request under the default variant, or the Z real-capable slots
  /// individually under the emulated baselines.
  void read_bucket_into_stash(uint64_t b, PhaseIo& phase) {
    BucketMeta& m = meta_[b];
    std::vector<std::pair<uint64_t, std::vector<uint8_t>>> live;
    if (cfg_.variant == ProtocolVariant::kFullBucketReads) {
      const auto slots = store_->read_bucket(b);
      phase.requests++;
      phase.bytes += store_->geometry().bucket_bytes();
      for (uint32_t j = 0; j < cfg_.slots_per_bucket(); ++j) {
        const uint32_t k = m.ptrs[j];
        std::optional<SlotPayload> payload =
            sealer_.open(b, k, m.ver, slots[k]);
        if (!payload.has_value()) {
          abort_instance();
          throw IntegrityError("oram: slot failed authentication in bucket read");
        }
        if (j < cfg_.real_slots && m.valid[j] && !payload->is_dummy())
          live.emplace_back(payload->addr, std::move(payload->data));
      }
    } else {
      for (uint32_t j = 0; j < cfg_.real_slots; ++j) {
        const uint32_t k = m.ptrs[j];
        const std::vector<uint8_t> ct = store_->read_slot(b, k);
        phase.requests++;
        phase.bytes += ct.size();
        std::optional<SlotPayload> payload = sealer_.open(b, k, m.ver, ct);
        if (!payload.has_value()) {
          abort_instance();
          throw IntegrityError("oram: slot failed authentication in bucket read");
        }
        if (m.valid[j] && !payload->is_dummy())
          live.emplace_back(payload->addr, std::move(payload->data));
      }
    }
    for (auto& [addr, data] : live) {
      PosMapEntry& e = posmap_[addr];
      e.lvl = kNoLevel;
      e.slot = kNoSlot;
      const bool inserted =
          stash_.emplace(addr, StashEntry{e.leaf, std::move(data)}).second;
      internal_check(inserted, "live block already stashed");
    }
  }

  /// Writes bucket `b` back from the stash: up to Z assignable blocks (lowest
  /// address first), fresh slot permutation, bumped version, full reseal.
  void write_bucket_from_stash(uint64_t b, uint32_t level, PhaseIo& phase) {
    std::vector<std::pair<uint64_t, std::vector<uint8_t>>> selected;
    for (auto it = stash_.begin();
         it != stash_.end() && selected.size() < cfg_.real_slots;) {
      if (cfg_.bucket_at(it->second.leaf, level) == b) {
        selected.emplace_back(it->first, std::move(it->second.data));
        it = stash_.erase(it);
      } else {
        ++it;
      }
    }
    seal_bucket(b, level, selected, phase);
  }

  void seal_bucket(
      uint64_t b, uint32_t level,
      const std::vector<std::pair<uint64_t, std::vector<uint8_t>>>& real,
      PhaseIo& phase) {
    internal_check(real.size() <= cfg_.real_slots, "bucket overfilled");
    BucketMeta& m = meta_[b];
    m.ptrs = perm_rng_.permutation(cfg_.slots_per_bucket());
    m.ver++;
    std::vector<std::vector<uint8_t>> cts(cfg_.slots_per_bucket());
    for (uint32_t j = 0; j < cfg_.slots_per_bucket(); ++j) {
      const uint32_t k = m.ptrs[j];
      if (j < real.size()) {
        const auto& [addr, data] = real[j];
        cts[k] = sealer_.seal(b, k, m.ver, SlotPayload{addr, data});
        posmap_[addr].lvl = static_cast<int32_t>(level);
        posmap_[addr].slot = static_cast<int32_t>(j);
        if (cfg_.debug_introspection) shadow_[b][j] = addr;
      } else {
        cts[k] = sealer_.seal(b, k, m.ver, SlotPayload::dummy(cfg_.block_size));
        if (cfg_.debug_introspection && j < cfg_.real_slots)
          shadow_[b][j] = kDummyAddr;
      }
    }
    store_->write_bucket(b, cts);
    phase.requests++;
    phase.bytes += store_->geometry().bucket_bytes();
    m.valid.assign(cfg_.slots_per_bucket(), 1);
    m.count = 0;
    m.dummy = 0;
  }

  void evict_path() {
    const uint64_t ordinal = access_counter_ / cfg_.evict_period;
    const uint64_t leaf =
        reverse_digits(ordinal % cfg_.leaf_count(), cfg_.d, cfg_.depth);
    if (cfg_.debug_introspection) eviction_leaves_.push_back(leaf);
    for (uint32_t i = 0; i <= cfg_.depth; ++i)
      read_bucket_into_stash(cfg_.bucket_at(leaf, i), io_.evict);
    for (int32_t i = static_cast<int32_t>(cfg_.depth); i >= 0; --i)
      write_bucket_from_stash(cfg_.bucket_at(leaf, static_cast<uint32_t>(i)),
                              static_cast<uint32_t>(i), io_.evict);
  }

  void early_reshuffle(uint64_t leaf) {
    for (uint32_t i = 0; i <= cfg_.depth; ++i) {
      const uint64_t b = cfg_.bucket_at(leaf, i);
      if (meta_[b].count == cfg_.dummy_slots) {
        reshuffle_count_++;
        read_bucket_into_stash(b, io_.reshuffle);
        write_bucket_from_stash(b, i, io_.reshuffle);
      }
    }
  }

  OramConfig cfg_;
  std::shared_ptr<BlockStore> store_;
  Sealer sealer_;
  Rng leaf_rng_;
  Rng perm_rng_;
  Rng setup_rng_;

  std::vector<PosMapEntry> posmap_;
  std::vector<uint8_t> initialized_;
  std::vector<BucketMeta> meta_;
  std::map<uint64_t, StashEntry> stash_;  // ordered: lowest address first
  uint64_t access_counter_ = 0;
  bool ready_ = false;
  bool aborted_ = false;

  OramIoBreakdown io_;
  uint64_t reshuffle_count_ = 0;
  std::vector<uint64_t> eviction_leaves_;
  std::vector<uint64_t> leaf_reads_;
  std::vector<std::vector<uint64_t>> shadow_;  // debug: logical slot -> addr
};

}  // namespace oann
