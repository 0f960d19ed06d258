#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "oann/errors.hpp"
#include "oann/rng.hpp"
#include "oann/serial.hpp"

namespace oann {

// Product quantization over L2. One codebook serves both hint tiers: the
// in-memory traversal hints use a small byte budget, the on-disk pruning
// hints a larger one. Codes are one byte per subspace (centroid_count <= 256)
// so the hint size in bytes equals the subspace count.

class PqCodebook {
 public:
  PqCodebook() = default;

  uint32_t dim() const { return dim_; }
  uint32_t subspaces() const { return subspaces_; }
  uint32_t dims_per_subspace() const { return dsub_; }
  uint32_t centroid_count() const { return kc_; }
  uint32_t code_bytes() const { return subspaces_; }

  /// Per-subspace k-means. Requires at least `centroid_count` vectors;
  /// deterministic under the seed. `mse_history`, when given, receives the
  /// quantization MSE after each Lloyd iteration.
  static PqCodebook train(const std::vector<float>& vectors, uint32_t dim,
                          uint32_t subspaces, uint32_t centroid_count,
                          uint32_t iters, uint64_t seed,
                          std::vector<double>* mse_history = nullptr) {
    if (dim == 0 || subspaces == 0) throw UsageError("pq: empty geometry");
    if (subspaces > dim) throw UsageError("pq: more subspaces than dimensions");
    if (centroid_count == 0 || centroid_count > 256)
      throw UsageError("pq: centroid count must be in [1, 256]");
    const size_t n = vectors.size() / dim;
    if (n * dim != vectors.size()) throw UsageError("pq: ragged input");
    if (n < centroid_count)
      throw UsageError("pq: need at least " + std::to_string(centroid_count) +
                       " training vectors");

    PqCodebook cb;
    cb.dim_ = dim;
    cb.subspaces_ = subspaces;
    cb.dsub_ = (dim + subspaces - 1) / subspaces;
    cb.kc_ = centroid_count;
    cb.centroids_.assign(
        static_cast<size_t>(subspaces) * centroid_count * cb.dsub_, 0.0f);

    // Zero-padded per-subspace views of the training set.
    const uint32_t padded = cb.dsub_ * subspaces;
    std::vector<float> sub(n * cb.dsub_);
    Rng rng = derive_rng(seed, RngPurpose::kPqTrain);
    std::vector<uint32_t> assign(n);
    std::vector<double> iter_mse(iters == 0 ? 1 : iters, 0.0);

    for (uint32_t s = 0; s < subspaces; ++s) {
      for (size_t v = 0; v < n; ++v)
        for (uint32_t t = 0; t < cb.dsub_; ++t) {
          const uint32_t col = s * cb.dsub_ + t;
          sub[v * cb.dsub_ + t] = col < dim ? vectors[v * dim + col] : 0.0f;
        }
      float* cents = cb.centroids_mut(s);

      // Init from a random sample of distinct rows.
      std::vector<uint32_t> order(n);
      for (size_t i = 0; i < n; ++i) order[i] = static_cast<uint32_t>(i);
      rng.shuffle(order);
      for (uint32_t c = 0; c < centroid_count; ++c)
        std::copy_n(&sub[static_cast<size_t>(order[c]) * cb.dsub_], cb.dsub_,
                    cents + static_cast<size_t>(c) * cb.dsub_);

      for (uint32_t it = 0; it < std::max(1u, iters); ++it) {
        double mse = 0.0;
        for (size_t v = 0; v < n; ++v) {
          float best = std::numeric_limits<float>::max();
          uint32_t best_c = 0;
          for (uint32_t c = 0; c < centroid_count; ++c) {
            const float d = l2sq(&sub[v * cb.dsub_],
                                 cents + static_cast<size_t>(c) * cb.dsub_,
                                 cb.dsub_);
            if (d < best) {
              best = d;
              best_c = c;
            }
          }
          assign[v] = best_c;
          mse += best;
        }
        iter_mse[it] += mse / static_cast<double>(n);

        std::vector<double> sums(static_cast<size_t>(centroid_count) * cb.dsub_,
                                 0.0);
        std::vector<uint32_t> counts(centroid_count, 0);
        for (size_t v = 0; v < n; ++v) {
          counts[assign[v]]++;
          for (uint32_t t = 0; t < cb.dsub_; ++t)
            sums[static_cast<size_t>(assign[v]) * cb.dsub_ + t] +=
                sub[v * cb.dsub_ + t];
        }
        for (uint32_t c = 0; c < centroid_count; ++c) {
          if (counts[c] == 0) {
            // Re-seed an empty cluster from the point worst served by its
            // current centroid.
            size_t worst_v = 0;
            float worst = -1.0f;
            for (size_t v = 0; v < n; ++v) {
              const float d =
                  l2sq(&sub[v * cb.dsub_],
                       cents + static_cast<size_t>(assign[v]) * cb.dsub_,
                       cb.dsub_);
              if (d > worst) {
                worst = d;
                worst_v = v;
              }
            }
            std::copy_n(&sub[worst_v * cb.dsub_], cb.dsub_,
                        cents + static_cast<size_t>(c) * cb.dsub_);
            continue;
          }
          for (uint32_t t = 0; t < cb.dsub_; ++t)
            cents[static_cast<size_t>(c) * cb.dsub_ + t] = static_cast<float>(
                sums[static_cast<size_t>(c) * cb.dsub_ + t] / counts[c]);
        }
      }
    }
    (void)padded;
    if (mse_history) *mse_history = iter_mse;
    return cb;
  }

  /// Nearest centroid per subspace, ties to the lowest index.
  std::vector<uint8_t> encode(const float* vec, uint32_t dim) const {
    check_dim(dim);
    std::vector<uint8_t> code(subspaces_);
    std::vector<float> padded(dsub_);
    for (uint32_t s = 0; s < subspaces_; ++s) {
      load_subvector(vec, s, padded.data());
      float best = std::numeric_limits<float>::max();
      uint32_t best_c = 0;
      const float* cents = centroids(s);
      for (uint32_t c = 0; c < kc_; ++c) {
        const float d =
            l2sq(padded.data(), cents + static_cast<size_t>(c) * dsub_, dsub_);
        if (d < best) {
          best = d;
          best_c = c;
        }
      }
      code[s] = static_cast<uint8_t>(best_c);
    }
    return code;
  }

  std::vector<uint8_t> encode(const std::vector<float>& vec) const {
    return encode(vec.data(), static_cast<uint32_t>(vec.size()));
  }

  /// Asymmetric distance table: table[s * k_c + c] is the squared distance
  /// between the query's subvector s and centroid c.
  std::vector<float> adc_table(const float* query, uint32_t dim) const {
    check_dim(dim);
    std::vector<float> table(static_cast<size_t>(subspaces_) * kc_);
    std::vector<float> padded(dsub_);
    for (uint32_t s = 0; s < subspaces_; ++s) {
      load_subvector(query, s, padded.data());
      const float* cents = centroids(s);
      for (uint32_t c = 0; c < kc_; ++c)
        table[static_cast<size_t>(s) * kc_ + c] =
            l2sq(padded.data(), cents + static_cast<size_t>(c) * dsub_, dsub_);
    }
    return table;
  }

  std::vector<float> adc_table(const std::vector<float>& query) const {
    return adc_table(query.data(), static_cast<uint32_t>(query.size()));
  }

  float approx_distance(const std::vector<float>& table,
                        const uint8_t* code) const {
    float d = 0.0f;
    for (uint32_t s = 0; s < subspaces_; ++s)
      d += table[static_cast<size_t>(s) * kc_ + code[s]];
    return d;
  }

  float approx_distance(const std::vector<float>& table,
                        const std::vector<uint8_t>& code) const {
    if (code.size() != subspaces_) throw UsageError("pq: code length mismatch");
    return approx_distance(table, code.data());
  }

  /// Centroid lookup, truncated back to the original dimensionality.
  std::vector<float> reconstruct(const uint8_t* code) const {
    std::vector<float> out(dim_);
    for (uint32_t s = 0; s < subspaces_; ++s) {
      const float* cent = centroids(s) + static_cast<size_t>(code[s]) * dsub_;
      for (uint32_t t = 0; t < dsub_; ++t) {
        const uint32_t col = s * dsub_ + t;
        if (col < dim_) out[col] = cent[t];
      }
    }
    return out;
  }

  std::vector<float> reconstruct(const std::vector<uint8_t>& code) const {
    if (code.size() != subspaces_) throw UsageError("pq: code length mismatch");
    return reconstruct(code.data());
  }

  void save(std::ostream& os) const {
    os.write("OANNPQC1", 8);
    write_u32(os, dim_);
    write_u32(os, subspaces_);
    write_u32(os, kc_);
    for (float f : centroids_) write_f32(os, f);
  }

  static PqCodebook restore(std::istream& is) {
    char magic[8];
    is.read(magic, 8);
    if (!is || std::string(magic, 8) != "OANNPQC1")
      throw UsageError("PqCodebook::restore: bad magic");
    PqCodebook cb;
    cb.dim_ = read_u32(is);
    cb.subspaces_ = read_u32(is);
    cb.kc_ = read_u32(is);
    cb.dsub_ = (cb.dim_ + cb.subspaces_ - 1) / cb.subspaces_;
    cb.centroids_.resize(static_cast<size_t>(cb.subspaces_) * cb.kc_ * cb.dsub_);
    for (float& f : cb.centroids_) f = read_f32(is);
    return cb;
  }

  void save_file(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw UsageError("cannot write " + path);
    save(os);
  }

  static PqCodebook restore_file(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw UsageError("cannot read " + path);
    return restore(is);
  }

 private:
  static float l2sq(const float* a, const float* b, uint32_t n) {
    float d = 0.0f;
    for (uint32_t i = 0; i < n; ++i) {
      const float t = a[i] - b[i];
      d += t * t;
    }
    return d;
  }

  void check_dim(uint32_t dim) const {
    if (dim != dim_) throw UsageError("pq: dimensionality mismatch");
  }

  void load_subvector(const float* vec, uint32_t s, float* out) const {
    for (uint32_t t = 0; t < dsub_; ++t) {
      const uint32_t col = s * dsub_ + t;
      out[t] = col < dim_ ? vec[col] : 0.0f;
    }
  }

  const float* centroids(uint32_t s) const {
    return centroids_.data() + static_cast<size_t>(s) * kc_ * dsub_;
  }
  float* centroids_mut(uint32_t s) {
    return centroids_.data() + static_cast<size_t>(s) * kc_ * dsub_;
  }

  uint32_t dim_ = 0;
  uint32_t subspaces_ = 0;
  uint32_t dsub_ = 0;
  uint32_t kc_ = 0;
  std::vector<float> centroids_;  // [subspace][centroid][dsub]
};

}  // namespace oann
