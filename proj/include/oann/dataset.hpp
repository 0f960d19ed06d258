#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "oann/errors.hpp"
#include "oann/rng.hpp"
#include "oann/vecio.hpp"

namespace oann {

enum class Distribution { kUniform, kGaussianMixture };

inline Distribution parse_distribution(const std::string& s) {
  if (s == "uniform") return Distribution::kUniform;
  if (s == "gmm" || s == "gaussian-mixture") return Distribution::kGaussianMixture;
  throw UsageError("unknown distribution: " + s);
}

/// Synthetic vectors, deterministic under the seed. Uniform draws from
/// [0,1)^dims; the mixture places `centers` well-separated uniform centers
/// and samples isotropic Gaussians (sigma 0.01) around them round-robin.
/// `labels`, when given, receives each vector's mixture component.
inline FloatMatrix gen_dataset(uint64_t n, uint32_t dims, Distribution dist,
                               uint64_t seed, uint32_t centers = 10,
                               std::vector<uint32_t>* labels = nullptr) {
  if (dims == 0) throw UsageError("gen_dataset: zero dimensionality");
  FloatMatrix m;
  m.dim = dims;
  m.count = n;
  m.data.resize(n * dims);
  if (labels) labels->assign(n, 0);
  Rng rng = derive_rng(seed, RngPurpose::kDataset);
  if (dist == Distribution::kUniform) {
    for (auto& f : m.data) f = static_cast<float>(rng.uniform_double());
    return m;
  }
  if (centers == 0) throw UsageError("gen_dataset: zero mixture centers");
  std::vector<float> mu(static_cast<size_t>(centers) * dims);
  for (auto& f : mu) f = static_cast<float>(rng.uniform_double());
  for (uint64_t i = 0; i < n; ++i) {
    const uint32_t c = static_cast<uint32_t>(i % centers);
    if (labels) (*labels)[i] = c;
    for (uint32_t j = 0; j < dims; ++j)
      m.data[i * dims + j] =
          mu[static_cast<size_t>(c) * dims + j] +
          0.01f * static_cast<float>(rng.normal());
  }
  return m;
}

}  // namespace oann
