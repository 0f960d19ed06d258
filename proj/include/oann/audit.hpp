#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oann/engine.hpp"
#include "oann/stats.hpp"

namespace oann {

// Trace auditor: runs paired workloads and checks that the adversary's view
// (the physical event stream) carries no workload-dependent signal beyond
// what the design declares (early-reshuffle timing, which is tested
// distributionally across seeds).

struct WorkloadRun {
  std::vector<LogicalAccess> logical;
  IoTrace trav_trace;
  IoTrace refine_trace;
  OramConfig trav_cfg;
  OramConfig refine_cfg;
  uint64_t trav_reshuffles = 0;
  uint64_t refine_reshuffles = 0;
  uint64_t trav_logical = 0;
  uint64_t refine_logical = 0;
  std::vector<uint64_t> trav_leaf_reads;
  std::vector<uint64_t> refine_leaf_reads;

  double reshuffle_rate() const {
    const double touches =
        static_cast<double>(trav_logical) * trav_cfg.levels() +
        static_cast<double>(refine_logical) * refine_cfg.levels();
    return touches == 0.0
               ? 0.0
               : static_cast<double>(trav_reshuffles + refine_reshuffles) /
                     touches;
  }
};

struct AuditReport {
  bool logical_equal = false;
  bool trace_lengths_equal = false;
  bool event_shape_equal = false;
  bool eviction_schedule_ok = false;
  double reshuffle_rate_a = 0.0;
  double reshuffle_rate_b = 0.0;
  double leaf_chi_square = 0.0;
  double leaf_chi_square_p = 0.0;
  bool leaf_uniform_ok = false;

  bool pass() const {
    return logical_equal && trace_lengths_equal && event_shape_equal &&
           eviction_schedule_ok && leaf_uniform_ok;
  }
};

/// Executes one search workload on a fresh engine and collects everything the
/// audit consumes. Store traces are reset after setup so only the adaptive
/// phase is compared, matching the security game.
inline WorkloadRun run_search_workload(const IndexBundle& bundle,
                                       EngineOptions options,
                                       const FloatMatrix& queries) {
  options.debug_introspection = true;
  Engine engine(bundle, options);
  engine.traversal_store().trace_reset();
  engine.refinement_store().trace_reset();
  for (size_t q = 0; q < queries.count; ++q) engine.search(queries.row_vec(q));
  WorkloadRun run;
  run.logical = engine.logical_log();
  run.trav_trace = engine.traversal_store().trace_snapshot();
  run.refine_trace = engine.refinement_store().trace_snapshot();
  run.trav_cfg = engine.traversal_oram().config();
  run.refine_cfg = engine.refinement_oram().config();
  run.trav_reshuffles = engine.traversal_oram().reshuffle_count();
  run.refine_reshuffles = engine.refinement_oram().reshuffle_count();
  const IoReport rep = engine.io_report();
  run.trav_logical = rep.traversal_logical;
  run.refine_logical = rep.refinement_logical;
  run.trav_leaf_reads = engine.traversal_oram().leaf_reads();
  run.refine_leaf_reads = engine.refinement_oram().leaf_reads();
  return run;
}

struct NormalizedTrace {
  std::vector<std::pair<IoKind, uint64_t>> shape;  // (kind, bytes) sequence
  std::vector<uint64_t> eviction_leaves;
  uint64_t reshuffle_pairs = 0;
  bool parse_ok = true;
};

/// Structural parse of a physical trace under the default protocol: per
/// access L+1 slot reads, a whole-bucket eviction group every A accesses,
/// and reshuffle read/write pairs after an access. Reshuffle events are
/// removed from the shape; eviction leaves are recovered from the observed
/// bucket ids.
inline NormalizedTrace normalize_trace(const IoTrace& trace,
                                       const OramConfig& cfg) {
  NormalizedTrace out;
  const auto& ev = trace.events;
  const uint32_t levels = cfg.levels();
  const uint64_t leaf_base = cfg.level_offset(cfg.depth);
  size_t i = 0;
  uint64_t accesses = 0;
  auto take_pair = [&](bool keep) {
    // ReadBucket followed by its WriteBucket for the same bucket.
    if (i + 1 >= ev.size() || ev[i].kind != IoKind::kReadBucket) {
      out.parse_ok = false;
      return;
    }
    size_t j = i + 1;
    if (ev[j].kind != IoKind::kWriteBucket || ev[j].bucket_id != ev[i].bucket_id)
      out.parse_ok = false;
    if (keep) {
      out.shape.emplace_back(ev[i].kind, ev[i].bytes);
      out.shape.emplace_back(ev[j].kind, ev[j].bytes);
    }
    i = j + 1;
  };
  while (i < ev.size() && out.parse_ok) {
    for (uint32_t l = 0; l < levels && out.parse_ok; ++l) {
      if (i >= ev.size() || ev[i].kind != IoKind::kReadSlot) {
        out.parse_ok = false;
        break;
      }
      out.shape.emplace_back(ev[i].kind, ev[i].bytes);
      ++i;
    }
    if (!out.parse_ok) break;
    ++accesses;
    if (accesses % cfg.evict_period == 0) {
      // Eviction group: levels bucket reads then levels bucket writes,
      // deepest bucket identifying the eviction leaf.
      uint64_t leaf_bucket = 0;
      for (uint32_t l = 0; l < levels && out.parse_ok; ++l) {
        if (i >= ev.size() || ev[i].kind != IoKind::kReadBucket) {
          out.parse_ok = false;
          break;
        }
        leaf_bucket = std::max(leaf_bucket, ev[i].bucket_id);
        out.shape.emplace_back(ev[i].kind, ev[i].bytes);
        ++i;
      }
      for (uint32_t l = 0; l < levels && out.parse_ok; ++l) {
        if (i >= ev.size() || ev[i].kind != IoKind::kWriteBucket) {
          out.parse_ok = false;
          break;
        }
        out.shape.emplace_back(ev[i].kind, ev[i].bytes);
        ++i;
      }
      if (out.parse_ok) out.eviction_leaves.push_back(leaf_bucket - leaf_base);
    }
    while (i < ev.size() && ev[i].kind == IoKind::kReadBucket) {
      take_pair(false);
      if (out.parse_ok) out.reshuffle_pairs++;
    }
  }
  return out;
}

/// Observed eviction leaves must equal reverse_digits(e mod d^L) for the
/// 1-based eviction ordinal e.
inline bool eviction_schedule_matches(const std::vector<uint64_t>& leaves,
                                      const OramConfig& cfg) {
  for (size_t e = 0; e < leaves.size(); ++e) {
    const uint64_t expect =
        reverse_digits((e + 1) % cfg.leaf_count(), cfg.d, cfg.depth);
    if (leaves[e] != expect) return false;
  }
  return true;
}

inline AuditReport audit_pair(const WorkloadRun& a, const WorkloadRun& b,
                              double chi_square_alpha = 1e-3) {
  AuditReport rep;
  rep.logical_equal = a.logical == b.logical;

  const NormalizedTrace ta = normalize_trace(a.trav_trace, a.trav_cfg);
  const NormalizedTrace tb = normalize_trace(b.trav_trace, b.trav_cfg);
  const NormalizedTrace ra = normalize_trace(a.refine_trace, a.refine_cfg);
  const NormalizedTrace rb = normalize_trace(b.refine_trace, b.refine_cfg);

  rep.trace_lengths_equal = ta.parse_ok && tb.parse_ok && ra.parse_ok &&
                            rb.parse_ok && ta.shape.size() == tb.shape.size() &&
                            ra.shape.size() == rb.shape.size();
  rep.event_shape_equal =
      rep.trace_lengths_equal && ta.shape == tb.shape && ra.shape == rb.shape;
  rep.eviction_schedule_ok =
      eviction_schedule_matches(ta.eviction_leaves, a.trav_cfg) &&
      eviction_schedule_matches(tb.eviction_leaves, b.trav_cfg) &&
      eviction_schedule_matches(ra.eviction_leaves, a.refine_cfg) &&
      eviction_schedule_matches(rb.eviction_leaves, b.refine_cfg);

  rep.reshuffle_rate_a = a.reshuffle_rate();
  rep.reshuffle_rate_b = b.reshuffle_rate();

  // Leaves read on the traversal instance, pooled over both runs, against
  // the uniform distribution.
  std::vector<uint64_t> counts(a.trav_cfg.leaf_count(), 0);
  for (uint64_t leaf : a.trav_leaf_reads) counts[leaf]++;
  for (uint64_t leaf : b.trav_leaf_reads) counts[leaf]++;
  rep.leaf_chi_square = chi_square_uniform_statistic(counts);
  rep.leaf_chi_square_p = chi_square_p_value(
      rep.leaf_chi_square, static_cast<double>(counts.size() - 1));
  rep.leaf_uniform_ok = rep.leaf_chi_square_p >= chi_square_alpha;
  return rep;
}

}  // namespace oann
