#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "oann/oram.hpp"
#include "oann/packed_index.hpp"
#include "oann/pq.hpp"

namespace oann {

// End-to-end oblivious search over two ORAM instances: one for the small
// traversal blocks (adjacency + pruning hint), one for the full-precision
// refinement blocks. A search runs three phases:
//
//   1. Traversal: beam search guided by the in-memory hints; each expansion
//      fetches one traversal block. Exactly l_cand blocks are fetched, with
//      dummy reads filling in when the frontier empties early.
//   2. Pruning: the fetched candidates are re-ranked by the prefetched
//      pruning hints; the top l_prune survive. No storage accesses.
//   3. Refinement: one refinement fetch per survivor (dummy-padded up to
//      l_prune), exact re-rank, top-k returned.
//
// Every operation therefore issues a fixed, parameter-determined number of
// logical accesses per instance, independent of the query. Inserts and
// deletes are padded to their worst case the same way.

struct SearchParams {
  uint32_t k = 10;
  uint32_t l_cand = 128;
  uint32_t l_prune = 32;
  uint32_t beam_width = 4;

  void validate() const {
    if (k == 0 || beam_width == 0) throw UsageError("SearchParams: zero field");
    if (!(k <= l_prune && l_prune <= l_cand))
      throw UsageError("SearchParams: need k <= l_prune <= l_cand");
  }
};

struct EngineOptions {
  SearchParams search;
  uint32_t oram_arity = 8;
  uint32_t oram_bucket_capacity = 64;
  double reshuffle_rate = 0.001;
  uint64_t seed = 1;
  uint32_t extra_capacity = 128;   // insert headroom
  uint32_t build_list_size = 64;   // insert-time search list
  float alpha = 1.2f;              // insert-time pruning slack
  bool passthrough = false;        // bypass ORAM entirely
  bool leaky = false;  // intentional bug switch for audit negative controls:
                       // skips all fixed-count padding (dummy reads)
  bool file_backend = false;
  std::string state_dir;
  bool debug_introspection = false;
};

struct LogicalAccess {
  uint8_t instance;  // 0 = traversal, 1 = refinement
  uint8_t write;

  bool operator==(const LogicalAccess& o) const {
    return instance == o.instance && write == o.write;
  }
};

/// Closed-form per-access bandwidth ratio of the coupled layout over the
/// decoupled one: (|N|+|F|) / ((|N|+|Hp|) + (Lp/L)*|F|).
inline double ann_bandwidth_ratio(double adj_bytes, double hp_bytes,
                                  double f_bytes, double l_cand,
                                  double l_prune) {
  return (adj_bytes + f_bytes) /
         ((adj_bytes + hp_bytes) + (l_prune / l_cand) * f_bytes);
}

struct IoReport {
  uint64_t searches = 0;
  uint64_t inserts = 0;
  uint64_t deletes = 0;
  uint64_t traversal_logical = 0;
  uint64_t refinement_logical = 0;
  uint64_t ann_traversal_bytes = 0;   // logical fetches x traversal block
  uint64_t ann_refinement_bytes = 0;  // logical fetches x refinement block
  uint64_t traversal_physical_requests = 0;
  uint64_t traversal_physical_bytes = 0;
  uint64_t refinement_physical_requests = 0;
  uint64_t refinement_physical_bytes = 0;
  double coupled_bytes_per_search = 0.0;  // (|N|+|F|) * l_cand
  double bandwidth_ratio_formula = 0.0;
};

class Engine {
 public:
  Engine(const IndexBundle& bundle, EngineOptions options)
      : opt_(std::move(options)) {
    opt_.search.validate();
    if (bundle.packed.count == 0) throw SetupError("engine: empty index");
    if (!(opt_.alpha > 1.0f)) throw UsageError("engine: alpha must be > 1");
    dim_ = bundle.packed.dim;
    count_loaded_ = bundle.packed.count;
    capacity_ = bundle.packed.count + opt_.extra_capacity;
    max_degree_ = bundle.packed.max_degree;
    hp_bytes_ = bundle.packed.hp_bytes;
    tbs_ = bundle.packed.traversal_block_size;
    rbs_ = bundle.packed.refinement_block_size;
    start_ = bundle.packed.start;
    hp_cb_ = bundle.hp_codebook;
    ht_cb_ = bundle.ht_codebook;
    ht_bytes_ = ht_cb_.code_bytes();
    ht_codes_.assign(static_cast<size_t>(capacity_) * ht_bytes_, 0);
    std::copy(bundle.ht_codes.begin(), bundle.ht_codes.end(),
              ht_codes_.begin());
    exists_.assign(capacity_, 0);
    tombstone_.assign(capacity_, 0);
    for (uint32_t id = 0; id < count_loaded_; ++id) {
      exists_[id] = 1;
      if (bundle.packed.decode(id).tombstone) tombstone_[id] = 1;
    }

    if (opt_.passthrough) {
      pass_trav_.assign(static_cast<size_t>(capacity_ + 1) * tbs_, 0);
      pass_refine_.assign(static_cast<size_t>(capacity_ + 1) * rbs_, 0);
      std::copy(bundle.packed.traversal_blocks.begin(),
                bundle.packed.traversal_blocks.end(), pass_trav_.begin());
      std::copy(bundle.packed.refinement_blocks.begin(),
                bundle.packed.refinement_blocks.end(), pass_refine_.begin());
      return;
    }

    // The reserved dummy address lives one past the last real key; both
    // ORAMs are planned over capacity + 1 logical blocks.
    const uint64_t n_blocks = static_cast<uint64_t>(capacity_) + 1;
    OramConfig tcfg = plan_oram(n_blocks, tbs_, opt_.oram_arity,
                                opt_.oram_bucket_capacity, opt_.reshuffle_rate);
    OramConfig rcfg = plan_oram(n_blocks, rbs_, opt_.oram_arity,
                                opt_.oram_bucket_capacity, opt_.reshuffle_rate);
    tcfg.debug_introspection = opt_.debug_introspection;
    rcfg.debug_introspection = opt_.debug_introspection;

    trav_store_ = make_store(tcfg, "trav.store");
    refine_store_ = make_store(rcfg, "refine.store");
    trav_oram_ = std::make_unique<TreeOram>(tcfg, trav_store_, opt_.seed, 0);
    refine_oram_ = std::make_unique<TreeOram>(rcfg, refine_store_, opt_.seed, 1);

    std::map<uint64_t, std::vector<uint8_t>> tblocks, rblocks;
    for (uint32_t id = 0; id < count_loaded_; ++id) {
      tblocks[id] = std::vector<uint8_t>(
          bundle.packed.traversal_block(id),
          bundle.packed.traversal_block(id) + tbs_);
      rblocks[id] = std::vector<uint8_t>(
          bundle.packed.refinement_block(id),
          bundle.packed.refinement_block(id) + rbs_);
    }
    tblocks[dummy_addr()] = std::vector<uint8_t>(tbs_, 0);
    rblocks[dummy_addr()] = std::vector<uint8_t>(rbs_, 0);
    trav_oram_->setup_bulk(tblocks);
    refine_oram_->setup_bulk(rblocks);
  }

  uint32_t dim() const { return dim_; }
  uint32_t capacity() const { return capacity_; }
  uint64_t dummy_addr() const { return capacity_; }
  const SearchParams& search_params() const { return opt_.search; }
  bool exists(uint32_t id) const { return id < capacity_ && exists_[id]; }
  bool is_deleted(uint32_t id) const { return id < capacity_ && tombstone_[id]; }

  TreeOram& traversal_oram() { return require_oram(*trav_oram_); }
  TreeOram& refinement_oram() { return require_oram(*refine_oram_); }
  BlockStore& traversal_store() { return *trav_store_; }
  BlockStore& refinement_store() { return *refine_store_; }

  const std::vector<LogicalAccess>& logical_log() const { return log_; }
  void clear_logical_log() { log_.clear(); }

  /// Top-k keys for the query, nearest first.
  std::vector<uint32_t> search(const std::vector<float>& query) {
    if (query.size() != dim_) throw UsageError("search: dimension mismatch");
    const SearchParams& sp = opt_.search;
    const std::vector<float> adc_t = ht_cb_.adc_table(query);

    std::unordered_map<uint32_t, float> tdist;
    auto ht_dist = [&](uint32_t id) {
      auto it = tdist.find(id);
      if (it != tdist.end()) return it->second;
      const float d =
          ht_cb_.approx_distance(adc_t, &ht_codes_[static_cast<size_t>(id) * ht_bytes_]);
      tdist.emplace(id, d);
      return d;
    };

    // Phase 1: traversal. The candidate list holds the best l_cand ids seen
    // so far by traversal-hint distance; each round expands the top
    // beam_width unvisited of them.
    std::set<ScoredId> cand;
    std::unordered_set<uint32_t> visited_set;
    std::vector<uint32_t> visited;
    std::unordered_map<uint32_t, std::vector<uint8_t>> hp_code_of;
    cand.insert(ScoredId{ht_dist(start_), start_});
    uint32_t fetched = 0;
    while (opt_.leaky || fetched < sp.l_cand) {
      std::vector<uint32_t> frontier;
      const uint32_t want = opt_.leaky
                                ? sp.beam_width
                                : std::min(sp.beam_width, sp.l_cand - fetched);
      for (auto it = cand.begin(); it != cand.end() && frontier.size() < want;
           ++it)
        if (!visited_set.count(it->id)) frontier.push_back(it->id);
      if (frontier.empty()) {
        if (!opt_.leaky)
          while (fetched < sp.l_cand) {
            dummy_access(0, false);
            ++fetched;
          }
        break;
      }
      std::vector<TraversalBlock> blocks;
      blocks.reserve(frontier.size());
      for (uint32_t p : frontier) {
        blocks.push_back(fetch_traversal(p));
        visited_set.insert(p);
        visited.push_back(p);
        hp_code_of.emplace(p, blocks.back().hp_code);
        ++fetched;
      }
      for (const TraversalBlock& blk : blocks)
        for (uint32_t nb : blk.neighbors) {
          if (nb >= capacity_ || !exists_[nb]) continue;
          cand.insert(ScoredId{ht_dist(nb), nb});
        }
      while (cand.size() > sp.l_cand) cand.erase(std::prev(cand.end()));
    }

    // Phase 2: pruning, from the prefetched hints only.
    const std::vector<float> adc_p = hp_cb_.adc_table(query);
    std::vector<ScoredId> pool;
    pool.reserve(visited.size());
    for (uint32_t id : visited) {
      if (tombstone_[id]) continue;
      pool.push_back(
          ScoredId{hp_cb_.approx_distance(adc_p, hp_code_of[id]), id});
    }
    std::sort(pool.begin(), pool.end());
    const size_t survivors = std::min<size_t>(sp.l_prune, pool.size());

    // Phase 3: refinement, in candidate-rank order, padded to l_prune.
    std::vector<ScoredId> exact;
    exact.reserve(survivors);
    for (size_t i = 0; i < survivors; ++i) {
      const uint32_t id = pool[i].id;
      const std::vector<uint8_t> raw = fetch_refinement(id);
      std::vector<float> v(dim_);
      for (uint32_t j = 0; j < dim_; ++j) v[j] = load_f32(raw.data() + 4 * j);
      exact.push_back(ScoredId{l2_sq(query.data(), v.data(), dim_), id});
    }
    if (!opt_.leaky)
      for (size_t i = survivors; i < sp.l_prune; ++i) dummy_access(1, false);
    std::sort(exact.begin(), exact.end());

    std::vector<uint32_t> out;
    for (size_t i = 0; i < exact.size() && out.size() < sp.k; ++i)
      out.push_back(exact[i].id);
    ++searches_;
    return out;
  }

  /// Adds a vector under a fresh key. Issues exactly build_list_size + R + 1
  /// traversal accesses and R + 1 refinement accesses regardless of the key
  /// or data (R = max graph degree).
  void insert(uint32_t id, const std::vector<float>& vec) {
    if (vec.size() != dim_) throw UsageError("insert: dimension mismatch");
    if (id >= capacity_) throw UsageError("insert: capacity reached");
    if (exists_[id]) throw UsageError("insert: duplicate key");

    const std::vector<float> adc_t = ht_cb_.adc_table(vec);
    std::unordered_map<uint32_t, float> tdist;
    auto ht_dist = [&](uint32_t nid) {
      auto it = tdist.find(nid);
      if (it != tdist.end()) return it->second;
      const float d = ht_cb_.approx_distance(
          adc_t, &ht_codes_[static_cast<size_t>(nid) * ht_bytes_]);
      tdist.emplace(nid, d);
      return d;
    };

    // Candidate generation: single-beam traversal, padded to exactly
    // build_list_size fetches.
    std::set<ScoredId> cand;
    std::unordered_set<uint32_t> visited_set;
    std::vector<uint32_t> visited;
    std::unordered_map<uint32_t, TraversalBlock> block_of;
    cand.insert(ScoredId{ht_dist(start_), start_});
    uint32_t fetched = 0;
    while (fetched < opt_.build_list_size) {
      uint32_t next = kInvalidId;
      for (const ScoredId& c : cand)
        if (!visited_set.count(c.id)) {
          next = c.id;
          break;
        }
      if (next == kInvalidId) break;
      TraversalBlock blk = fetch_traversal(next);
      visited_set.insert(next);
      visited.push_back(next);
      ++fetched;
      for (uint32_t nb : blk.neighbors) {
        if (nb >= capacity_ || !exists_[nb]) continue;
        cand.insert(ScoredId{ht_dist(nb), nb});
      }
      block_of.emplace(next, std::move(blk));
      while (cand.size() > opt_.build_list_size)
        cand.erase(std::prev(cand.end()));
    }
    while (fetched < opt_.build_list_size) {
      dummy_access(0, false);
      ++fetched;
    }

    // Neighbor selection over the pruning-hint reconstructions of the
    // fetched candidates.
    std::unordered_map<uint32_t, std::vector<float>> recon;
    std::vector<ScoredId> cands;
    for (uint32_t v : visited) {
      if (tombstone_[v]) continue;
      recon.emplace(v, hp_cb_.reconstruct(block_of[v].hp_code));
      cands.push_back(
          ScoredId{l2_sq(vec.data(), recon[v].data(), dim_), v});
    }
    std::vector<uint32_t> nbrs = robust_prune(
        std::move(cands), opt_.alpha, max_degree_,
        [&](uint32_t a, uint32_t b) {
          return l2_sq(recon[a].data(), recon[b].data(), dim_);
        });

    // Write the new node, then patch reverse edges; re-pruning of overfull
    // neighborhoods scores members by their in-memory traversal hints, which
    // cover every node.
    const std::vector<uint8_t> hp_code = hp_cb_.encode(vec);
    const std::vector<uint8_t> ht_code = ht_cb_.encode(vec);
    std::copy(ht_code.begin(), ht_code.end(),
              ht_codes_.begin() + static_cast<size_t>(id) * ht_bytes_);
    exists_[id] = 1;

    std::vector<uint8_t> block(tbs_);
    encode_traversal_block(block.data(), tbs_, max_degree_, hp_bytes_, nbrs,
                           hp_code.data(), false);
    write_traversal(id, block);
    uint32_t tr_accesses = 1;

    auto recon_t = [&](uint32_t nid) {
      return ht_cb_.reconstruct(&ht_codes_[static_cast<size_t>(nid) * ht_bytes_]);
    };
    for (uint32_t q : nbrs) {
      TraversalBlock& bq = block_of[q];
      std::vector<uint32_t> updated = bq.neighbors;
      updated.push_back(id);
      if (updated.size() > max_degree_) {
        const std::vector<float> rq = recon_t(q);
        std::unordered_map<uint32_t, std::vector<float>> rm;
        std::vector<ScoredId> mc;
        for (uint32_t m : updated) {
          rm.emplace(m, recon_t(m));
          mc.push_back(ScoredId{l2_sq(rq.data(), rm[m].data(), dim_), m});
        }
        updated = robust_prune(std::move(mc), opt_.alpha, max_degree_,
                               [&](uint32_t a, uint32_t b) {
                                 return l2_sq(rm[a].data(), rm[b].data(), dim_);
                               });
      }
      encode_traversal_block(block.data(), tbs_, max_degree_, hp_bytes_,
                             updated, bq.hp_code.data(), bq.tombstone);
      write_traversal(q, block);
      ++tr_accesses;
    }
    for (; tr_accesses < max_degree_ + 1; ++tr_accesses) dummy_access(0, false);

    std::vector<uint8_t> rblock(rbs_);
    for (uint32_t j = 0; j < dim_; ++j) store_f32(rblock.data() + 4 * j, vec[j]);
    write_refinement(id, rblock);
    for (uint32_t i = 1; i < max_degree_ + 1; ++i) dummy_access(1, false);
    ++inserts_;
  }

  /// Tombstones a key: one traversal write, nothing else.
  void remove(uint32_t id) {
    if (id >= capacity_ || !exists_[id] || tombstone_[id])
      throw UsageError("remove: unknown key");
    tombstone_[id] = 1;
    std::vector<uint8_t> block(tbs_);
    const std::vector<uint8_t> zero_hp(hp_bytes_, 0);
    encode_traversal_block(block.data(), tbs_, max_degree_, hp_bytes_, {},
                           zero_hp.data(), true);
    write_traversal(id, block);
    ++deletes_;
  }

  IoReport io_report() const {
    IoReport r;
    r.searches = searches_;
    r.inserts = inserts_;
    r.deletes = deletes_;
    r.traversal_logical = traversal_logical_;
    r.refinement_logical = refinement_logical_;
    r.ann_traversal_bytes = traversal_logical_ * tbs_;
    r.ann_refinement_bytes = refinement_logical_ * rbs_;
    const double adj = 2.0 + 4.0 * max_degree_;
    r.coupled_bytes_per_search =
        (adj + rbs_) * static_cast<double>(opt_.search.l_cand);
    r.bandwidth_ratio_formula =
        ann_bandwidth_ratio(adj, hp_bytes_, rbs_, opt_.search.l_cand,
                            opt_.search.l_prune);
    if (!opt_.passthrough) {
      const IoTotals t = trav_store_->trace_totals();
      const IoTotals f = refine_store_->trace_totals();
      r.traversal_physical_requests = t.request_count;
      r.traversal_physical_bytes = t.bytes_read + t.bytes_written;
      r.refinement_physical_requests = f.request_count;
      r.refinement_physical_bytes = f.bytes_read + f.bytes_written;
    } else {
      const IoTotals t = pass_trace_.totals();
      r.traversal_physical_requests = t.request_count;
      r.traversal_physical_bytes = t.bytes_read + t.bytes_written;
    }
    return r;
  }

  IoTrace passthrough_trace() const { return pass_trace_.snapshot(); }

  // Persists client state next to the file-backed stores.
  void save() const {
    if (opt_.passthrough || !opt_.file_backend)
      throw UsageError("save: requires the file backend");
    std::ofstream os(opt_.state_dir + "/engine.state", std::ios::binary);
    if (!os) throw UsageError("cannot write engine state");
    os.write("OANNENG1", 8);
    write_u32(os, dim_);
    write_u32(os, count_loaded_);
    write_u32(os, capacity_);
    write_u32(os, max_degree_);
    write_u32(os, hp_bytes_);
    write_u32(os, tbs_);
    write_u32(os, rbs_);
    write_u32(os, start_);
    write_u32(os, opt_.search.k);
    write_u32(os, opt_.search.l_cand);
    write_u32(os, opt_.search.l_prune);
    write_u32(os, opt_.search.beam_width);
    write_u32(os, opt_.build_list_size);
    write_f32(os, opt_.alpha);
    write_u64(os, opt_.seed);
    hp_cb_.save(os);
    ht_cb_.save(os);
    write_bytes(os, ht_codes_);
    write_bytes(os, exists_);
    write_bytes(os, tombstone_);
    trav_oram_->save(os);
    refine_oram_->save(os);
  }

  static std::unique_ptr<Engine> load(const std::string& state_dir) {
    std::ifstream is(state_dir + "/engine.state", std::ios::binary);
    if (!is) throw UsageError("cannot read engine state");
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "OANNENG1")
      throw UsageError("Engine::load: bad magic");
    auto e = std::unique_ptr<Engine>(new Engine());
    e->opt_.file_backend = true;
    e->opt_.state_dir = state_dir;
    e->dim_ = read_u32(is);
    e->count_loaded_ = read_u32(is);
    e->capacity_ = read_u32(is);
    e->max_degree_ = read_u32(is);
    e->hp_bytes_ = read_u32(is);
    e->tbs_ = read_u32(is);
    e->rbs_ = read_u32(is);
    e->start_ = read_u32(is);
    e->opt_.search.k = read_u32(is);
    e->opt_.search.l_cand = read_u32(is);
    e->opt_.search.l_prune = read_u32(is);
    e->opt_.search.beam_width = read_u32(is);
    e->opt_.build_list_size = read_u32(is);
    e->opt_.alpha = read_f32(is);
    e->opt_.seed = read_u64(is);
    e->hp_cb_ = PqCodebook::restore(is);
    e->ht_cb_ = PqCodebook::restore(is);
    e->ht_bytes_ = e->ht_cb_.code_bytes();
    e->ht_codes_ = read_bytes(is);
    e->exists_ = read_bytes(is);
    e->tombstone_ = read_bytes(is);
    // Peek each ORAM config to size the stores, then restore.
    const std::streampos pos = is.tellg();
    is.ignore(8);
    OramConfig tcfg = OramConfig::restore(is);
    is.seekg(pos);
    auto tstore = std::make_shared<FileBlockStore>(
        TreeOram::store_geometry(tcfg), state_dir + "/trav.store");
    e->trav_oram_ =
        std::make_unique<TreeOram>(TreeOram::restore(is, tstore));
    e->trav_store_ = std::move(tstore);
    const std::streampos pos2 = is.tellg();
    is.ignore(8);
    OramConfig rcfg = OramConfig::restore(is);
    is.seekg(pos2);
    auto rstore = std::make_shared<FileBlockStore>(
        TreeOram::store_geometry(rcfg), state_dir + "/refine.store");
    e->refine_oram_ =
        std::make_unique<TreeOram>(TreeOram::restore(is, rstore));
    e->refine_store_ = std::move(rstore);
    return e;
  }

 private:
  Engine() = default;

  TreeOram& require_oram(TreeOram& o) {
    if (opt_.passthrough) throw UsageError("engine: passthrough mode has no ORAM");
    return o;
  }

  std::shared_ptr<BlockStore> make_store(const OramConfig& cfg,
                                         const std::string& name) {
    const StoreGeometry geo = TreeOram::store_geometry(cfg);
    if (opt_.file_backend) {
      if (opt_.state_dir.empty())
        throw UsageError("engine: file backend needs a state dir");
      return std::make_shared<FileBlockStore>(geo, opt_.state_dir + "/" + name);
    }
    return std::make_shared<MemoryBlockStore>(geo);
  }

  TraversalBlock fetch_traversal(uint32_t id) {
    log_.push_back(LogicalAccess{0, 0});
    ++traversal_logical_;
    if (opt_.passthrough) {
      pass_trace_.record(IoKind::kReadSlot, id, std::nullopt, tbs_);
      return decode_traversal_block(
          pass_trav_.data() + static_cast<size_t>(id) * tbs_, max_degree_,
          hp_bytes_);
    }
    const std::vector<uint8_t> raw = trav_oram_->read(id);
    return decode_traversal_block(raw.data(), max_degree_, hp_bytes_);
  }

  std::vector<uint8_t> fetch_refinement(uint32_t id) {
    log_.push_back(LogicalAccess{1, 0});
    ++refinement_logical_;
    if (opt_.passthrough) {
      pass_trace_.record(IoKind::kReadSlot, id, std::nullopt, rbs_);
      return std::vector<uint8_t>(
          pass_refine_.begin() + static_cast<size_t>(id) * rbs_,
          pass_refine_.begin() + static_cast<size_t>(id + 1) * rbs_);
    }
    return refine_oram_->read(id);
  }

  void write_traversal(uint32_t id, const std::vector<uint8_t>& block) {
    log_.push_back(LogicalAccess{0, 1});
    ++traversal_logical_;
    if (opt_.passthrough) {
      pass_trace_.record(IoKind::kWriteBucket, id, std::nullopt, tbs_);
      std::copy(block.begin(), block.end(),
                pass_trav_.begin() + static_cast<size_t>(id) * tbs_);
      return;
    }
    trav_oram_->write(id, block);
  }

  void write_refinement(uint32_t id, const std::vector<uint8_t>& block) {
    log_.push_back(LogicalAccess{1, 1});
    ++refinement_logical_;
    if (opt_.passthrough) {
      pass_trace_.record(IoKind::kWriteBucket, id, std::nullopt, rbs_);
      std::copy(block.begin(), block.end(),
                pass_refine_.begin() + static_cast<size_t>(id) * rbs_);
      return;
    }
    refine_oram_->write(id, block);
  }

  /// Read of the reserved dummy address: indistinguishable from a real
  /// access by the ORAM's guarantee.
  void dummy_access(uint8_t instance, bool /*write*/) {
    log_.push_back(LogicalAccess{instance, 0});
    if (instance == 0) {
      ++traversal_logical_;
      if (opt_.passthrough)
        pass_trace_.record(IoKind::kReadSlot, dummy_addr(), std::nullopt, tbs_);
      else
        trav_oram_->read(dummy_addr());
    } else {
      ++refinement_logical_;
      if (opt_.passthrough)
        pass_trace_.record(IoKind::kReadSlot, dummy_addr(), std::nullopt, rbs_);
      else
        refine_oram_->read(dummy_addr());
    }
  }

  EngineOptions opt_;
  uint32_t dim_ = 0;
  uint32_t count_loaded_ = 0;
  uint32_t capacity_ = 0;
  uint32_t max_degree_ = 0;
  uint32_t hp_bytes_ = 0;
  uint32_t ht_bytes_ = 0;
  uint32_t tbs_ = 0;
  uint32_t rbs_ = 0;
  uint32_t start_ = 0;
  PqCodebook hp_cb_;
  PqCodebook ht_cb_;
  std::vector<uint8_t> ht_codes_;
  std::vector<uint8_t> exists_;
  std::vector<uint8_t> tombstone_;

  std::shared_ptr<BlockStore> trav_store_;
  std::shared_ptr<BlockStore> refine_store_;
  std::unique_ptr<TreeOram> trav_oram_;
  std::unique_ptr<TreeOram> refine_oram_;

  std::vector<uint8_t> pass_trav_;
  std::vector<uint8_t> pass_refine_;
  TraceRecorder pass_trace_;

  std::vector<LogicalAccess> log_;
  uint64_t searches_ = 0;
  uint64_t inserts_ = 0;
  uint64_t deletes_ = 0;
  uint64_t traversal_logical_ = 0;
  uint64_t refinement_logical_ = 0;
};

}  // namespace oann
