#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <set>
#include <string>
#include <unordered_set>
#include <vector>

#include "oann/errors.hpp"
#include "oann/rng.hpp"
#include "oann/serial.hpp"

namespace oann {

inline constexpr uint32_t kInvalidId = 0xffffffffu;

inline float l2_sq(const float* a, const float* b, uint32_t dim) {
  float d = 0.0f;
  for (uint32_t i = 0; i < dim; ++i) {
    const float t = a[i] - b[i];
    d += t * t;
  }
  return d;
}

struct BuildParams {
  uint32_t max_degree = 32;
  uint32_t build_list_size = 128;
  float alpha = 1.2f;  // must be > 1
  uint64_t seed = 1;

  void validate() const {
    if (max_degree == 0) throw UsageError("BuildParams: zero degree bound");
    if (build_list_size == 0) throw UsageError("BuildParams: zero list size");
    if (!(alpha > 1.0f)) throw UsageError("BuildParams: alpha must be > 1");
  }
};

struct ScoredId {
  float dist;
  uint32_t id;

  bool operator<(const ScoredId& o) const {
    return dist < o.dist || (dist == o.dist && id < o.id);
  }
};

/// Keeps the closest candidates, dropping any later candidate already covered
/// by a kept one: c' is dropped when dist(kept, c') <= alpha * dist(target, c').
/// Candidates carry distances to the target; `pair_dist` supplies distances
/// between candidates. At most `max_degree` survive. Output order is the scan
/// order (increasing target distance), independent of input order.
template <typename PairDist>
inline std::vector<uint32_t> robust_prune(std::vector<ScoredId> candidates,
                                          float alpha, uint32_t max_degree,
                                          PairDist&& pair_dist) {
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end(),
                               [](const ScoredId& a, const ScoredId& b) {
                                 return a.id == b.id;
                               }),
                   candidates.end());
  std::vector<uint32_t> kept;
  std::vector<bool> dropped(candidates.size(), false);
  for (size_t i = 0; i < candidates.size() && kept.size() < max_degree; ++i) {
    if (dropped[i]) continue;
    kept.push_back(candidates[i].id);
    for (size_t j = i + 1; j < candidates.size(); ++j) {
      if (dropped[j]) continue;
      const float between = pair_dist(candidates[i].id, candidates[j].id);
      if (between <= alpha * candidates[j].dist) dropped[j] = true;
    }
  }
  return kept;
}

/// Bounded-degree proximity graph over full-precision vectors, built by
/// iterative insertion (greedy search for candidates, then pruning), with
/// lazy tombstoned deletes and batched neighborhood repair.
class GraphIndex {
 public:
  GraphIndex() = default;

  uint32_t dim() const { return dim_; }
  uint32_t size() const { return static_cast<uint32_t>(adjacency_.size()); }
  uint32_t start_node() const { return start_; }
  const BuildParams& params() const { return params_; }
  const std::vector<uint32_t>& neighbors(uint32_t id) const {
    return adjacency_.at(id);
  }
  const float* vector_of(uint32_t id) const {
    return vectors_.data() + static_cast<size_t>(id) * dim_;
  }
  bool is_deleted(uint32_t id) const { return deleted_.count(id) > 0; }
  const std::set<uint32_t>& tombstones() const { return deleted_; }
  uint32_t live_count() const {
    return size() - static_cast<uint32_t>(deleted_.size());
  }

  float dist(uint32_t a, uint32_t b) const {
    return l2_sq(vector_of(a), vector_of(b), dim_);
  }
  float dist_to(const float* q, uint32_t id) const {
    return l2_sq(q, vector_of(id), dim_);
  }

  static GraphIndex build(const std::vector<float>& vectors, uint32_t dim,
                          const BuildParams& params) {
    params.validate();
    if (dim == 0 || vectors.size() % dim != 0)
      throw UsageError("GraphIndex: ragged vectors");
    const uint32_t n = static_cast<uint32_t>(vectors.size() / dim);
    if (n < 2) throw UsageError("GraphIndex: need at least 2 vectors");

    GraphIndex g;
    g.dim_ = dim;
    g.params_ = params;
    g.vectors_ = vectors;
    g.adjacency_.assign(n, {});
    g.start_ = g.compute_medoid();

    Rng rng = derive_rng(params.seed, RngPurpose::kGraphBuild);
    std::vector<uint32_t> order(n);
    for (uint32_t i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    for (uint32_t id : order) {
      if (id == g.start_) continue;
      g.link_node(id, g.vector_of(id));
    }
    return g;
  }

  /// Greedy beam search over exact distances. Returns the visited set in
  /// expansion order and leaves the final candidate list in `out_list` when
  /// non-null. Tombstoned nodes are traversed but never reported.
  std::vector<uint32_t> greedy_search(const float* query, uint32_t list_size,
                                      std::vector<ScoredId>* out_list = nullptr,
                                      uint32_t start_override = kInvalidId) const {
    const uint32_t s = start_override == kInvalidId ? start_ : start_override;
    std::set<ScoredId> list;          // current candidate list, size-capped
    std::unordered_set<uint32_t> seen;
    std::unordered_set<uint32_t> visited;
    std::vector<uint32_t> visit_order;
    list.insert(ScoredId{dist_to(query, s), s});
    seen.insert(s);
    while (true) {
      auto next = list.end();
      for (auto it = list.begin(); it != list.end(); ++it) {
        if (!visited.count(it->id)) {
          next = it;
          break;
        }
      }
      if (next == list.end()) break;
      const uint32_t p = next->id;
      visited.insert(p);
      visit_order.push_back(p);
      for (uint32_t nb : adjacency_[p]) {
        if (seen.count(nb)) continue;
        seen.insert(nb);
        list.insert(ScoredId{dist_to(query, nb), nb});
      }
      while (list.size() > list_size) list.erase(std::prev(list.end()));
    }
    if (out_list) out_list->assign(list.begin(), list.end());
    return visit_order;
  }

  /// Exact top-k over the final candidate list of a greedy search.
  std::vector<uint32_t> search(const float* query, uint32_t k,
                               uint32_t list_size) const {
    std::vector<ScoredId> list;
    greedy_search(query, list_size, &list);
    std::vector<uint32_t> out;
    for (const ScoredId& c : list) {
      if (is_deleted(c.id)) continue;
      out.push_back(c.id);
      if (out.size() == k) break;
    }
    return out;
  }

  /// Inserts a new vector under a fresh id (must equal the current size).
  void insert(uint32_t id, const std::vector<float>& vec) {
    if (vec.size() != dim_) throw UsageError("insert: dimension mismatch");
    if (id != size()) throw UsageError("insert: id must be the next free id");
    vectors_.insert(vectors_.end(), vec.begin(), vec.end());
    adjacency_.emplace_back();
    link_node(id, vector_of(id));
  }

  /// Marks nodes deleted. Repair happens in `consolidate`.
  void delete_batch(const std::vector<uint32_t>& ids) {
    for (uint32_t id : ids) {
      if (id >= size() || deleted_.count(id))
        throw UsageError("delete_batch: unknown or already deleted id");
      deleted_.insert(id);
    }
  }

  /// Rebuilds every neighborhood that references a tombstone, using the live
  /// neighbors plus the tombstones' own live neighbors as repair candidates,
  /// then drops the tombstoned adjacency. Ids are never reused.
  void consolidate() {
    if (deleted_.empty()) return;
    for (uint32_t u = 0; u < size(); ++u) {
      if (deleted_.count(u)) continue;
      auto& nbrs = adjacency_[u];
      bool dirty = false;
      for (uint32_t nb : nbrs)
        if (deleted_.count(nb)) dirty = true;
      if (!dirty) continue;
      std::set<uint32_t> cand_ids;
      for (uint32_t nb : nbrs) {
        if (deleted_.count(nb)) {
          for (uint32_t nn : adjacency_[nb])
            if (!deleted_.count(nn) && nn != u) cand_ids.insert(nn);
        } else {
          cand_ids.insert(nb);
        }
      }
      std::vector<ScoredId> cands;
      cands.reserve(cand_ids.size());
      for (uint32_t c : cand_ids) cands.push_back(ScoredId{dist(u, c), c});
      adjacency_[u] = robust_prune(
          std::move(cands), params_.alpha, params_.max_degree,
          [this](uint32_t a, uint32_t b) { return dist(a, b); });
    }
    for (uint32_t t : deleted_) adjacency_[t].clear();
    if (deleted_.count(start_)) start_ = compute_medoid_live();
  }

  void save(std::ostream& os) const {
    os.write("OANNGRF1", 8);
    write_u32(os, dim_);
    write_u32(os, size());
    write_u32(os, start_);
    write_u32(os, params_.max_degree);
    write_u32(os, params_.build_list_size);
    write_f32(os, params_.alpha);
    write_u64(os, params_.seed);
    for (float f : vectors_) write_f32(os, f);
    for (const auto& nbrs : adjacency_) {
      write_u32(os, static_cast<uint32_t>(nbrs.size()));
      for (uint32_t id : nbrs) write_u32(os, id);
    }
    write_u64(os, deleted_.size());
    for (uint32_t t : deleted_) write_u32(os, t);
  }

  static GraphIndex restore(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "OANNGRF1")
      throw UsageError("GraphIndex::restore: bad magic");
    GraphIndex g;
    g.dim_ = read_u32(is);
    const uint32_t n = read_u32(is);
    g.start_ = read_u32(is);
    g.params_.max_degree = read_u32(is);
    g.params_.build_list_size = read_u32(is);
    g.params_.alpha = read_f32(is);
    g.params_.seed = read_u64(is);
    g.vectors_.resize(static_cast<size_t>(n) * g.dim_);
    for (float& f : g.vectors_) f = read_f32(is);
    g.adjacency_.resize(n);
    for (auto& nbrs : g.adjacency_) {
      nbrs.resize(read_u32(is));
      for (uint32_t& id : nbrs) id = read_u32(is);
    }
    const uint64_t tn = read_u64(is);
    for (uint64_t i = 0; i < tn; ++i) g.deleted_.insert(read_u32(is));
    return g;
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("cannot write " + path);
    save(os);
  }
  static GraphIndex restore_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UsageError("cannot read " + path);
    return restore(is);
  }

 private:
  /// Candidate generation + pruning + reverse edges for one node.
  void link_node(uint32_t id, const float* vec) {
    std::vector<uint32_t> visited = greedy_search(vec, params_.build_list_size);
    std::vector<ScoredId> cands;
    cands.reserve(visited.size());
    for (uint32_t v : visited) {
      if (v == id || deleted_.count(v)) continue;
      cands.push_back(ScoredId{dist_to(vec, v), v});
    }
    adjacency_[id] = robust_prune(
        std::move(cands), params_.alpha, params_.max_degree,
        [this](uint32_t a, uint32_t b) { return dist(a, b); });
    for (uint32_t q : adjacency_[id]) {
      auto& back = adjacency_[q];
      if (std::find(back.begin(), back.end(), id) != back.end()) continue;
      back.push_back(id);
      if (back.size() > params_.max_degree) {
        std::vector<ScoredId> bc;
        bc.reserve(back.size());
        for (uint32_t nb : back) bc.push_back(ScoredId{dist(q, nb), nb});
        back = robust_prune(
            std::move(bc), params_.alpha, params_.max_degree,
            [this](uint32_t a, uint32_t b) { return dist(a, b); });
      }
    }
  }

  /// Point minimizing the total distance to all others; exact up to 1e5
  /// vectors, computed on a fixed 1e4 sample above that.
  uint32_t compute_medoid() const {
    const uint32_t n = size();
    std::vector<uint32_t> sample;
    if (n <= 100000) {
      sample.resize(n);
      for (uint32_t i = 0; i < n; ++i) sample[i] = i;
    } else {
      Rng rng = derive_rng(params_.seed, RngPurpose::kGraphBuild, 0x4d);
      sample.resize(10000);
      for (auto& s : sample) s = static_cast<uint32_t>(rng.uniform(n));
    }
    double best = std::numeric_limits<double>::max();
    uint32_t best_id = 0;
    for (uint32_t i : sample) {
      double total = 0.0;
      for (uint32_t j : sample) total += std::sqrt(static_cast<double>(dist(i, j)));
      if (total < best) {
        best = total;
        best_id = i;
      }
    }
    return best_id;
  }

  uint32_t compute_medoid_live() const {
    double best = std::numeric_limits<double>::max();
    uint32_t best_id = 0;
    for (uint32_t i = 0; i < size(); ++i) {
      if (deleted_.count(i)) continue;
      double total = 0.0;
      for (uint32_t j = 0; j < size(); ++j) {
        if (deleted_.count(j)) continue;
        total += std::sqrt(static_cast<double>(dist(i, j)));
      }
      if (total < best) {
        best = total;
        best_id = i;
      }
    }
    return best_id;
  }

  uint32_t dim_ = 0;
  uint32_t start_ = 0;
  BuildParams params_;
  std::vector<float> vectors_;
  std::vector<std::vector<uint32_t>> adjacency_;
  std::set<uint32_t> deleted_;
};

}  // namespace oann
