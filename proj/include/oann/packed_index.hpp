#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "oann/errors.hpp"
#include "oann/graph.hpp"
#include "oann/pq.hpp"
#include "oann/serial.hpp"

namespace oann {

// On-disk layout of the search index, split by access phase: fixed-size
// traversal blocks holding adjacency plus the pruning hint, and refinement
// blocks holding the full-precision vector. Block id equals node id in both
// arrays. Constant block sizes are what keeps request sizes data-independent.
//
//   traversal block: degree u16 (bit 15 = tombstone) | max_degree id u32,
//                    padded with the all-ones sentinel | pruning-hint code |
//                    zero padding up to traversal_block_size
//   refinement block: dim f32, little-endian

inline constexpr uint16_t kTombstoneBit = 0x8000;

struct TraversalBlock {
  std::vector<uint32_t> neighbors;
  std::vector<uint8_t> hp_code;
  bool tombstone = false;
};

inline uint32_t traversal_block_min_bytes(uint32_t max_degree,
                                          uint32_t hp_bytes) {
  return 2 + 4 * max_degree + hp_bytes;
}

inline void encode_traversal_block(uint8_t* out, uint32_t block_size,
                                   uint32_t max_degree, uint32_t hp_bytes,
                                   const std::vector<uint32_t>& neighbors,
                                   const uint8_t* hp_code, bool tombstone) {
  if (neighbors.size() > max_degree)
    throw UsageError("traversal block: degree overflow");
  if (traversal_block_min_bytes(max_degree, hp_bytes) > block_size)
    throw UsageError("traversal block: contents exceed block size");
  std::memset(out, 0, block_size);
  uint16_t deg = static_cast<uint16_t>(neighbors.size());
  if (tombstone) deg |= kTombstoneBit;
  store_u16(out, deg);
  for (uint32_t i = 0; i < max_degree; ++i)
    store_u32(out + 2 + 4 * i,
              i < neighbors.size() ? neighbors[i] : kInvalidId);
  if (hp_bytes > 0) std::memcpy(out + 2 + 4 * max_degree, hp_code, hp_bytes);
}

inline TraversalBlock decode_traversal_block(const uint8_t* in,
                                             uint32_t max_degree,
                                             uint32_t hp_bytes) {
  TraversalBlock b;
  const uint16_t deg_raw = load_u16(in);
  b.tombstone = (deg_raw & kTombstoneBit) != 0;
  const uint16_t deg = deg_raw & ~kTombstoneBit;
  if (deg > max_degree) throw UsageError("traversal block: corrupt degree");
  b.neighbors.resize(deg);
  for (uint16_t i = 0; i < deg; ++i) b.neighbors[i] = load_u32(in + 2 + 4 * i);
  b.hp_code.assign(in + 2 + 4 * max_degree, in + 2 + 4 * max_degree + hp_bytes);
  return b;
}

struct PackedIndex {
  uint32_t dim = 0;
  uint32_t count = 0;
  uint32_t max_degree = 0;
  uint32_t hp_bytes = 0;
  uint32_t traversal_block_size = 0;
  uint32_t refinement_block_size = 0;
  uint32_t start = 0;
  uint64_t seed = 0;
  std::vector<uint8_t> traversal_blocks;
  std::vector<uint8_t> refinement_blocks;

  const uint8_t* traversal_block(uint32_t id) const {
    return traversal_blocks.data() +
           static_cast<size_t>(id) * traversal_block_size;
  }
  const uint8_t* refinement_block(uint32_t id) const {
    return refinement_blocks.data() +
           static_cast<size_t>(id) * refinement_block_size;
  }

  TraversalBlock decode(uint32_t id) const {
    return decode_traversal_block(traversal_block(id), max_degree, hp_bytes);
  }

  std::vector<float> vector_of(uint32_t id) const {
    std::vector<float> v(dim);
    const uint8_t* p = refinement_block(id);
    for (uint32_t i = 0; i < dim; ++i) v[i] = load_f32(p + 4 * i);
    return v;
  }

  /// Packs a graph and its pruning-hint codebook. A zero block size selects
  /// the tightest fit.
  static PackedIndex pack(const GraphIndex& graph, const PqCodebook& hp,
                          uint32_t traversal_block_size = 0) {
    if (hp.dim() != graph.dim())
      throw UsageError("pack: codebook dimensionality mismatch");
    PackedIndex p;
    p.dim = graph.dim();
    p.count = graph.size();
    p.max_degree = graph.params().max_degree;
    p.hp_bytes = hp.code_bytes();
    p.seed = graph.params().seed;
    p.start = graph.start_node();
    const uint32_t need = traversal_block_min_bytes(p.max_degree, p.hp_bytes);
    p.traversal_block_size =
        traversal_block_size == 0 ? need : traversal_block_size;
    if (p.traversal_block_size < need)
      throw UsageError("pack: adjacency + hint exceed configured block size");
    p.refinement_block_size = 4 * p.dim;

    p.traversal_blocks.assign(
        static_cast<size_t>(p.count) * p.traversal_block_size, 0);
    p.refinement_blocks.assign(
        static_cast<size_t>(p.count) * p.refinement_block_size, 0);
    for (uint32_t id = 0; id < p.count; ++id) {
      const std::vector<uint8_t> code = hp.encode(graph.vector_of(id), p.dim);
      encode_traversal_block(
          p.traversal_blocks.data() +
              static_cast<size_t>(id) * p.traversal_block_size,
          p.traversal_block_size, p.max_degree, p.hp_bytes,
          graph.neighbors(id), code.data(), graph.is_deleted(id));
      uint8_t* r = p.refinement_blocks.data() +
                   static_cast<size_t>(id) * p.refinement_block_size;
      for (uint32_t i = 0; i < p.dim; ++i)
        store_f32(r + 4 * i, graph.vector_of(id)[i]);
    }
    return p;
  }

  // Persisted as two flat block files plus a small header.

  void save(const std::string& dir) const {
    std::ofstream meta(dir + "/index.meta", std::ios::binary);
    if (!meta) throw UsageError("cannot write " + dir + "/index.meta");
    meta.write("OANNPIX1", 8);
    write_u32(meta, dim);
    write_u32(meta, count);
    write_u32(meta, max_degree);
    write_u32(meta, hp_bytes);
    write_u32(meta, traversal_block_size);
    write_u32(meta, refinement_block_size);
    write_u32(meta, start);
    write_u64(meta, seed);
    std::ofstream trav(dir + "/index.trav.bin", std::ios::binary);
    trav.write(reinterpret_cast<const char*>(traversal_blocks.data()),
               static_cast<std::streamsize>(traversal_blocks.size()));
    std::ofstream refine(dir + "/index.refine.bin", std::ios::binary);
    refine.write(reinterpret_cast<const char*>(refinement_blocks.data()),
                 static_cast<std::streamsize>(refinement_blocks.size()));
  }

  static PackedIndex load(const std::string& dir) {
    std::ifstream meta(dir + "/index.meta", std::ios::binary);
    if (!meta) throw UsageError("cannot read " + dir + "/index.meta");
    char magic[8];
    meta.read(magic, 8);
    if (!meta || std::string(magic, 8) != "OANNPIX1")
      throw UsageError("PackedIndex::load: bad magic");
    PackedIndex p;
    p.dim = read_u32(meta);
    p.count = read_u32(meta);
    p.max_degree = read_u32(meta);
    p.hp_bytes = read_u32(meta);
    p.traversal_block_size = read_u32(meta);
    p.refinement_block_size = read_u32(meta);
    p.start = read_u32(meta);
    p.seed = read_u64(meta);
    auto slurp = [&](const std::string& path, std::vector<uint8_t>& out,
                     size_t want) {
      std::ifstream is(path, std::ios::binary);
      if (!is) throw UsageError("cannot read " + path);
      out.resize(want);
      is.read(reinterpret_cast<char*>(out.data()),
              static_cast<std::streamsize>(want));
      if (static_cast<size_t>(is.gcount()) != want)
        throw UsageError("truncated block file " + path);
    };
    slurp(dir + "/index.trav.bin", p.traversal_blocks,
          static_cast<size_t>(p.count) * p.traversal_block_size);
    slurp(dir + "/index.refine.bin", p.refinement_blocks,
          static_cast<size_t>(p.count) * p.refinement_block_size);
    return p;
  }
};

/// Everything the engine needs to come up: packed blocks plus both hint
/// codebooks and the in-memory traversal codes.
struct IndexBundle {
  PackedIndex packed;
  PqCodebook hp_codebook;
  PqCodebook ht_codebook;
  std::vector<uint8_t> ht_codes;  // count * ht_codebook.code_bytes()

  void save(const std::string& dir) const {
    packed.save(dir);
    hp_codebook.save_file(dir + "/hp.pq");
    ht_codebook.save_file(dir + "/ht.pq");
    std::ofstream codes(dir + "/ht.codes", std::ios::binary);
    if (!codes) throw UsageError("cannot write " + dir + "/ht.codes");
    codes.write(reinterpret_cast<const char*>(ht_codes.data()),
                static_cast<std::streamsize>(ht_codes.size()));
  }

  static IndexBundle load(const std::string& dir) {
    IndexBundle b;
    b.packed = PackedIndex::load(dir);
    b.hp_codebook = PqCodebook::restore_file(dir + "/hp.pq");
    b.ht_codebook = PqCodebook::restore_file(dir + "/ht.pq");
    std::ifstream codes(dir + "/ht.codes", std::ios::binary);
    if (!codes) throw UsageError("cannot read " + dir + "/ht.codes");
    const size_t want =
        static_cast<size_t>(b.packed.count) * b.ht_codebook.code_bytes();
    b.ht_codes.resize(want);
    codes.read(reinterpret_cast<char*>(b.ht_codes.data()),
               static_cast<std::streamsize>(want));
    if (static_cast<size_t>(codes.gcount()) != want)
      throw UsageError("truncated ht.codes");
    return b;
  }

  /// Builds the bundle for a graph: trains both hint tiers on the indexed
  /// vectors and encodes every node.
  static IndexBundle create(const GraphIndex& graph, uint32_t ht_bytes,
                            uint32_t hp_bytes, uint64_t seed,
                            uint32_t traversal_block_size = 0,
                            uint32_t kc = 256, uint32_t train_iters = 12) {
    IndexBundle b;
    std::vector<float> all(graph.vector_of(0),
                           graph.vector_of(0) +
                               static_cast<size_t>(graph.size()) * graph.dim());
    const uint32_t kc_eff =
        static_cast<uint32_t>(std::min<size_t>(kc, graph.size()));
    b.hp_codebook = PqCodebook::train(all, graph.dim(), hp_bytes, kc_eff,
                                      train_iters, seed ^ 0x6870);
    b.ht_codebook = PqCodebook::train(all, graph.dim(), ht_bytes, kc_eff,
                                      train_iters, seed ^ 0x6874);
    b.packed = PackedIndex::pack(graph, b.hp_codebook, traversal_block_size);
    b.ht_codes.resize(static_cast<size_t>(graph.size()) * ht_bytes);
    for (uint32_t id = 0; id < graph.size(); ++id) {
      const auto code = b.ht_codebook.encode(graph.vector_of(id), graph.dim());
      std::copy(code.begin(), code.end(), b.ht_codes.begin() +
                                              static_cast<size_t>(id) * ht_bytes);
    }
    return b;
  }
};

}  // namespace oann
