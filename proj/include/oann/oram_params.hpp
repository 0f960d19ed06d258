#pragma once

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>

#include "oann/errors.hpp"
#include "oann/io_trace.hpp"
#include "oann/serial.hpp"
#include "oann/stats.hpp"

namespace oann {

/// I/O discipline of the tree ORAM. The default reads whole buckets during
/// evictions and keeps all bucket metadata client-side; the other two emulate
/// the protocols it was derived from, so measured multipliers can be compared
/// against each analytical model.
enum class ProtocolVariant : uint32_t {
  kRingBaseline = 0,     // per-level metadata fetch + per-slot eviction reads
  kLocalMeta = 1,        // client-side metadata + per-slot eviction reads
  kFullBucketReads = 2,  // client-side metadata + whole-bucket eviction I/O
};

inline const char* to_string(ProtocolVariant v) {
  switch (v) {
    case ProtocolVariant::kRingBaseline:
      return "ring-baseline";
    case ProtocolVariant::kLocalMeta:
      return "local-meta";
    case ProtocolVariant::kFullBucketReads:
      return "full-bucket";
  }
  return "?";
}

struct OramConfig {
  uint32_t d = 2;           // tree arity
  uint32_t depth = 0;       // L; levels are 0..L, d^L leaves
  uint32_t real_slots = 0;  // Z
  uint32_t dummy_slots = 0; // S
  uint32_t evict_period = 0;  // A: one eviction per A accesses
  uint64_t capacity = 0;      // N logical blocks
  uint32_t block_size = 0;    // bytes per logical block

  ProtocolVariant variant = ProtocolVariant::kFullBucketReads;
  uint64_t stash_abort_limit = 1000000;  // guards runaway bugs, not a cap
  uint32_t meta_fetch_bytes = 8;  // emulated metadata request size (baseline)
  bool debug_introspection = false;

  uint32_t slots_per_bucket() const { return real_slots + dummy_slots; }
  uint32_t levels() const { return depth + 1; }

  uint64_t leaf_count() const {
    uint64_t n = 1;
    for (uint32_t i = 0; i < depth; ++i) n *= d;
    return n;
  }

  uint64_t bucket_count() const {
    uint64_t n = 1, total = 1;
    for (uint32_t i = 0; i < depth; ++i) {
      n *= d;
      total += n;
    }
    return total;
  }

  uint64_t level_offset(uint32_t level) const {
    uint64_t n = 1, total = 0;
    for (uint32_t i = 0; i < level; ++i) {
      total += n;
      n *= d;
    }
    return total;
  }

  /// Bucket index at `level` on the root-to-leaf path of `leaf`.
  uint64_t bucket_at(uint64_t leaf, uint32_t level) const {
    uint64_t div = 1;
    for (uint32_t i = 0; i < depth - level; ++i) div *= d;
    return level_offset(level) + leaf / div;
  }

  uint32_t level_of_bucket(uint64_t bucket) const {
    uint64_t n = 1, total = 0;
    for (uint32_t level = 0;; ++level) {
      if (bucket < total + n) return level;
      total += n;
      n *= d;
    }
  }

  /// a = A(d-1)/2, the expected-load budget per bucket.
  double load_budget() const {
    return static_cast<double>(evict_period) * (d - 1) / 2.0;
  }

  /// q = Z ln(Z/a) + a - Z - 1 - ln d. The stash tail bound needs q > 0.
  double stash_exponent() const {
    const double a = load_budget();
    const double z = static_cast<double>(real_slots);
    return z * std::log(z / a) + a - z - 1.0 - std::log(static_cast<double>(d));
  }

  void validate() const {
    if (d < 2) throw UsageError("OramConfig: arity must be >= 2");
    if (real_slots == 0 || dummy_slots == 0 || evict_period == 0 ||
        capacity == 0 || block_size == 0)
      throw UsageError("OramConfig: zero-sized parameter");
  }

  void save(std::ostream& os) const {
    write_u32(os, d);
    write_u32(os, depth);
    write_u32(os, real_slots);
    write_u32(os, dummy_slots);
    write_u32(os, evict_period);
    write_u64(os, capacity);
    write_u32(os, block_size);
    write_u32(os, static_cast<uint32_t>(variant));
    write_u64(os, stash_abort_limit);
    write_u32(os, meta_fetch_bytes);
    write_u32(os, debug_introspection ? 1 : 0);
  }

  static OramConfig restore(std::istream& is) {
    OramConfig c;
    c.d = read_u32(is);
    c.depth = read_u32(is);
    c.real_slots = read_u32(is);
    c.dummy_slots = read_u32(is);
    c.evict_period = read_u32(is);
    c.capacity = read_u64(is);
    c.block_size = read_u32(is);
    c.variant = static_cast<ProtocolVariant>(read_u32(is));
    c.stash_abort_limit = read_u64(is);
    c.meta_fetch_bytes = read_u32(is);
    c.debug_introspection = read_u32(is) != 0;
    return c;
  }
};

/// Reverses the L-digit base-d representation of x. Eviction paths cycle
/// through the leaves in this order.
inline uint64_t reverse_digits(uint64_t x, uint32_t d, uint32_t depth) {
  uint64_t range = 1;
  for (uint32_t i = 0; i < depth; ++i) range *= d;
  if (x >= range) throw UsageError("reverse_digits: value out of range");
  uint64_t out = 0;
  for (uint32_t i = 0; i < depth; ++i) {
    out = out * d + x % d;
    x /= d;
  }
  return out;
}

/// Parameter planner. Picks the largest eviction period A <= 2Z/(d-1) with a
/// positive stash exponent (the bound degenerates at equality, so the scan
/// descends until q > 0), the matching tree depth, and the smallest dummy
/// count S whose Poisson(A) tail stays within the early-reshuffle budget.
inline OramConfig plan_oram(uint64_t capacity, uint32_t block_size, uint32_t d,
                            uint32_t real_slots, double reshuffle_rate) {
  if (d < 2) throw UsageError("plan_oram: arity must be >= 2");
  if (real_slots < 1) throw UsageError("plan_oram: Z must be >= 1");
  if (!(reshuffle_rate > 0.0 && reshuffle_rate < 1.0))
    throw UsageError("plan_oram: reshuffle rate must be in (0,1)");
  if (capacity == 0) throw UsageError("plan_oram: empty capacity");

  OramConfig cfg;
  cfg.d = d;
  cfg.real_slots = real_slots;
  cfg.capacity = capacity;
  cfg.block_size = block_size;

  const uint32_t a_max = (2 * real_slots) / (d - 1);
  cfg.evict_period = 0;
  for (uint32_t A = a_max; A >= 1; --A) {
    cfg.evict_period = A;
    if (cfg.stash_exponent() > 0.0) break;
    cfg.evict_period = 0;
  }
  if (cfg.evict_period == 0)
    throw PlanningError("plan_oram: no eviction period with q > 0 for Z=" +
                        std::to_string(real_slots) +
                        ", d=" + std::to_string(d));

  // Smallest depth with a * d^L >= N, i.e. L = ceil(log_d(2N/(A(d-1)))),
  // computed in integers. At least one level so leaves exist.
  const uint64_t denom =
      static_cast<uint64_t>(cfg.evict_period) * (d - 1);  // = 2a
  uint32_t depth = 1;
  uint64_t leaves = d;
  while (leaves * denom < 2 * capacity) {
    leaves *= d;
    ++depth;
    if (depth > 60) throw PlanningError("plan_oram: depth overflow");
  }
  cfg.depth = depth;

  cfg.dummy_slots = static_cast<uint32_t>(poisson_upper_quantile(
      static_cast<double>(cfg.evict_period), reshuffle_rate));
  if (cfg.dummy_slots == 0) cfg.dummy_slots = 1;
  return cfg;
}

/// Theorem-style stash tail bound Pr[stash > R] <= (a/Z)^R / (1 - e^-q).
inline double stash_bound(const OramConfig& cfg, uint64_t r) {
  const double q = cfg.stash_exponent();
  if (!(q > 0.0))
    throw PlanningError("stash_bound: q <= 0, bound inapplicable");
  const double ratio = cfg.load_budget() / static_cast<double>(cfg.real_slots);
  return std::pow(ratio, static_cast<double>(r)) / (1.0 - std::exp(-q));
}

/// Expected physical requests and slot-units moved per logical access under
/// each protocol variant, ignoring early reshuffles. Levels enter as L+1.
inline Multipliers analytical_multipliers(const OramConfig& cfg,
                                          ProtocolVariant variant) {
  const double levels = static_cast<double>(cfg.levels());
  const double z = static_cast<double>(cfg.real_slots);
  const double s = static_cast<double>(cfg.dummy_slots);
  const double a = static_cast<double>(cfg.evict_period);
  Multipliers m;
  switch (variant) {
    case ProtocolVariant::kRingBaseline:
      m.access_count = (2.0 + (z + 1.0) / a) * levels;
      m.bandwidth = (1.0 + (2.0 * z + s) / a) * levels;
      break;
    case ProtocolVariant::kLocalMeta:
      m.access_count = (1.0 + (z + 1.0) / a) * levels;
      m.bandwidth = (1.0 + (2.0 * z + s) / a) * levels;
      break;
    case ProtocolVariant::kFullBucketReads:
      m.access_count = (1.0 + 2.0 / a) * levels;
      m.bandwidth = (1.0 + (2.0 * z + 2.0 * s) / a) * levels;
      break;
  }
  return m;
}

}  // namespace oann
