#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "oann/errors.hpp"
#include "oann/serial.hpp"

namespace oann {

// fvecs / ivecs / bvecs: per vector a little-endian 4-byte component count
// followed by the components (f32 / i32 / u8).

struct FloatMatrix {
  uint32_t dim = 0;
  size_t count = 0;
  std::vector<float> data;  // row-major, count * dim

  const float* row(size_t i) const { return data.data() + i * dim; }
  std::vector<float> row_vec(size_t i) const {
    return std::vector<float>(row(i), row(i) + dim);
  }
};

struct IntMatrix {
  uint32_t dim = 0;
  size_t count = 0;
  std::vector<int32_t> data;

  const int32_t* row(size_t i) const { return data.data() + i * dim; }
};

inline void write_fvecs(const std::string& path, const FloatMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write " + path);
  for (size_t i = 0; i < m.count; ++i) {
    write_u32(os, m.dim);
    for (uint32_t j = 0; j < m.dim; ++j) write_f32(os, m.data[i * m.dim + j]);
  }
}

inline FloatMatrix read_fvecs(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot read " + path);
  FloatMatrix m;
  while (true) {
    uint8_t hdr[4];
    is.read(reinterpret_cast<char*>(hdr), 4);
    if (is.eof() && is.gcount() == 0) break;
    if (!is) throw UsageError("fvecs: truncated header in " + path);
    const uint32_t d = load_u32(hdr);
    if (m.dim == 0)
      m.dim = d;
    else if (d != m.dim)
      throw UsageError("fvecs: inconsistent dimension in " + path);
    const size_t base = m.data.size();
    m.data.resize(base + d);
    for (uint32_t j = 0; j < d; ++j) m.data[base + j] = read_f32(is);
    m.count++;
  }
  return m;
}

inline void write_ivecs(const std::string& path, const IntMatrix& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write " + path);
  for (size_t i = 0; i < m.count; ++i) {
    write_u32(os, m.dim);
    for (uint32_t j = 0; j < m.dim; ++j)
      write_u32(os, static_cast<uint32_t>(m.data[i * m.dim + j]));
  }
}

inline IntMatrix read_ivecs(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot read " + path);
  IntMatrix m;
  while (true) {
    uint8_t hdr[4];
    is.read(reinterpret_cast<char*>(hdr), 4);
    if (is.eof() && is.gcount() == 0) break;
    if (!is) throw UsageError("ivecs: truncated header in " + path);
    const uint32_t d = load_u32(hdr);
    if (m.dim == 0)
      m.dim = d;
    else if (d != m.dim)
      throw UsageError("ivecs: inconsistent dimension in " + path);
    const size_t base = m.data.size();
    m.data.resize(base + d);
    for (uint32_t j = 0; j < d; ++j)
      m.data[base + j] = static_cast<int32_t>(read_u32(is));
    m.count++;
  }
  return m;
}

inline void write_bvecs(const std::string& path, uint32_t dim,
                        const std::vector<uint8_t>& data) {
  if (dim == 0 || data.size() % dim != 0)
    throw UsageError("bvecs: ragged data");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot write " + path);
  const size_t count = data.size() / dim;
  for (size_t i = 0; i < count; ++i) {
    write_u32(os, dim);
    os.write(reinterpret_cast<const char*>(data.data() + i * dim), dim);
  }
}

inline std::pair<uint32_t, std::vector<uint8_t>> read_bvecs(
    const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot read " + path);
  uint32_t dim = 0;
  std::vector<uint8_t> data;
  while (true) {
    uint8_t hdr[4];
    is.read(reinterpret_cast<char*>(hdr), 4);
    if (is.eof() && is.gcount() == 0) break;
    if (!is) throw UsageError("bvecs: truncated header in " + path);
    const uint32_t d = load_u32(hdr);
    if (dim == 0)
      dim = d;
    else if (d != dim)
      throw UsageError("bvecs: inconsistent dimension in " + path);
    const size_t base = data.size();
    data.resize(base + d);
    is.read(reinterpret_cast<char*>(data.data() + base), d);
    if (!is) throw UsageError("bvecs: truncated payload in " + path);
  }
  return {dim, std::move(data)};
}

}  // namespace oann
