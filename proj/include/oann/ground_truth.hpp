#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#include "oann/errors.hpp"
#include "oann/graph.hpp"
#include "oann/vecio.hpp"

namespace oann {

/// Exact L2 top-k, ties broken by id. One row of ids per query.
inline IntMatrix brute_force_knn(const FloatMatrix& base,
                                 const FloatMatrix& queries, uint32_t k) {
  if (base.dim != queries.dim)
    throw UsageError("brute_force_knn: dimension mismatch");
  if (k == 0 || k > base.count)
    throw UsageError("brute_force_knn: k out of range");
  IntMatrix out;
  out.dim = k;
  out.count = queries.count;
  out.data.resize(static_cast<size_t>(k) * queries.count);
  std::vector<ScoredId> scored(base.count);
  for (size_t q = 0; q < queries.count; ++q) {
    for (size_t i = 0; i < base.count; ++i)
      scored[i] = ScoredId{l2_sq(queries.row(q), base.row(i), base.dim),
                           static_cast<uint32_t>(i)};
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end());
    for (uint32_t j = 0; j < k; ++j)
      out.data[q * k + j] = static_cast<int32_t>(scored[j].id);
  }
  return out;
}

/// Mean over queries of |results ∩ truth| / k, using the first k entries of
/// each row.
inline double recall_at_k(const IntMatrix& results, const IntMatrix& truth,
                          uint32_t k) {
  if (results.count != truth.count)
    throw UsageError("recall_at_k: query count mismatch");
  if (k == 0 || k > results.dim || k > truth.dim)
    throw UsageError("recall_at_k: k out of range");
  if (results.count == 0) return 0.0;
  double total = 0.0;
  for (size_t q = 0; q < results.count; ++q) {
    std::vector<int32_t> t(truth.row(q), truth.row(q) + k);
    std::sort(t.begin(), t.end());
    uint32_t hit = 0;
    for (uint32_t j = 0; j < k; ++j)
      if (std::binary_search(t.begin(), t.end(), results.row(q)[j])) ++hit;
    total += static_cast<double>(hit) / k;
  }
  return total / static_cast<double>(results.count);
}

}  // namespace oann
