#pragma once

#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>
#include <vector>

#include "oann/errors.hpp"

namespace oann {

// Little-endian fixed-width encoding helpers. All on-disk integers in this
// project go through these so the formats are identical on every platform.

inline void put_u16(std::vector<uint8_t>& out, uint16_t v) {
  out.push_back(static_cast<uint8_t>(v));
  out.push_back(static_cast<uint8_t>(v >> 8));
}

inline void put_u32(std::vector<uint8_t>& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void put_u64(std::vector<uint8_t>& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<uint8_t>(v >> (8 * i)));
}

inline void store_u16(uint8_t* p, uint16_t v) {
  p[0] = static_cast<uint8_t>(v);
  p[1] = static_cast<uint8_t>(v >> 8);
}

inline void store_u32(uint8_t* p, uint32_t v) {
  for (int i = 0; i < 4; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

inline void store_u64(uint8_t* p, uint64_t v) {
  for (int i = 0; i < 8; ++i) p[i] = static_cast<uint8_t>(v >> (8 * i));
}

inline uint16_t load_u16(const uint8_t* p) {
  return static_cast<uint16_t>(p[0] | (p[1] << 8));
}

inline uint32_t load_u32(const uint8_t* p) {
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(p[i]) << (8 * i);
  return v;
}

inline uint64_t load_u64(const uint8_t* p) {
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(p[i]) << (8 * i);
  return v;
}

inline void store_f32(uint8_t* p, float v) {
  uint32_t bits;
  std::memcpy(&bits, &v, 4);
  store_u32(p, bits);
}

inline float load_f32(const uint8_t* p) {
  uint32_t bits = load_u32(p);
  float v;
  std::memcpy(&v, &bits, 4);
  return v;
}

// Stream variants for binary state files.

inline void write_u32(std::ostream& os, uint32_t v) {
  uint8_t b[4];
  store_u32(b, v);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_u64(std::ostream& os, uint64_t v) {
  uint8_t b[8];
  store_u64(b, v);
  os.write(reinterpret_cast<const char*>(b), 8);
}

inline void write_f32(std::ostream& os, float v) {
  uint8_t b[4];
  store_f32(b, v);
  os.write(reinterpret_cast<const char*>(b), 4);
}

inline void write_f64(std::ostream& os, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, 8);
  write_u64(os, bits);
}

inline void write_bytes(std::ostream& os, const std::vector<uint8_t>& v) {
  write_u64(os, v.size());
  os.write(reinterpret_cast<const char*>(v.data()),
           static_cast<std::streamsize>(v.size()));
}

inline uint32_t read_u32(std::istream& is) {
  uint8_t b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw UsageError("truncated stream while reading u32");
  return load_u32(b);
}

inline uint64_t read_u64(std::istream& is) {
  uint8_t b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw UsageError("truncated stream while reading u64");
  return load_u64(b);
}

inline float read_f32(std::istream& is) {
  uint8_t b[4];
  is.read(reinterpret_cast<char*>(b), 4);
  if (!is) throw UsageError("truncated stream while reading f32");
  return load_f32(b);
}

inline double read_f64(std::istream& is) {
  uint64_t bits = read_u64(is);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

inline std::vector<uint8_t> read_bytes(std::istream& is) {
  uint64_t n = read_u64(is);
  std::vector<uint8_t> v(n);
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n));
  if (!is) throw UsageError("truncated stream while reading byte array");
  return v;
}

}  // namespace oann
