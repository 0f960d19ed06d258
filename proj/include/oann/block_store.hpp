#pragma once

#include <fcntl.h>
#include <unistd.h>

#include <cstdint>
#include <cstring>
#include <memory>
#include <string>
#include <vector>

#include "oann/errors.hpp"
#include "oann/io_trace.hpp"

namespace oann {

struct StoreGeometry {
  uint64_t bucket_count = 0;
  uint32_t slots_per_bucket = 0;
  uint32_t slot_bytes = 0;

  uint64_t bucket_bytes() const {
    return static_cast<uint64_t>(slots_per_bucket) * slot_bytes;
  }
  uint64_t total_bytes() const { return bucket_count * bucket_bytes(); }

  void validate() const {
    if (bucket_count == 0 || slots_per_bucket == 0 || slot_bytes == 0)
      throw UsageError("StoreGeometry: all fields must be > 0");
  }
};

/// Untrusted slot-granular bucket storage. Reads and writes are recorded in
/// the trace; the fault-injection hooks model an adversary substituting
/// ciphertexts. Concurrent readers are safe, as are writers to distinct
/// buckets; same-bucket writers are serialized by the backend.
class BlockStore {
 public:
  explicit BlockStore(StoreGeometry geometry) : geometry_(geometry) {
    geometry_.validate();
  }
  virtual ~BlockStore() = default;

  const StoreGeometry& geometry() const { return geometry_; }

  std::vector<uint8_t> read_slot(uint64_t bucket_id, uint32_t slot_offset) {
    check_slot(bucket_id, slot_offset);
    std::vector<uint8_t> out(geometry_.slot_bytes);
    read_raw(slot_pos(bucket_id, slot_offset), out.data(), out.size());
    trace_.record(IoKind::kReadSlot, bucket_id, slot_offset,
                  geometry_.slot_bytes);
    return out;
  }

  /// Returns all slots in physical order as one sequential request.
  std::vector<std::vector<uint8_t>> read_bucket(uint64_t bucket_id) {
    check_bucket(bucket_id);
    std::vector<uint8_t> raw(geometry_.bucket_bytes());
    read_raw(bucket_pos(bucket_id), raw.data(), raw.size());
    trace_.record(IoKind::kReadBucket, bucket_id, std::nullopt, raw.size());
    std::vector<std::vector<uint8_t>> slots(geometry_.slots_per_bucket);
    for (uint32_t k = 0; k < geometry_.slots_per_bucket; ++k) {
      const uint8_t* p = raw.data() + static_cast<size_t>(k) * geometry_.slot_bytes;
      slots[k].assign(p, p + geometry_.slot_bytes);
    }
    return slots;
  }

  void write_bucket(uint64_t bucket_id,
                    const std::vector<std::vector<uint8_t>>& slots) {
    check_bucket(bucket_id);
    if (slots.size() != geometry_.slots_per_bucket)
      throw UsageError("write_bucket: expected " +
                       std::to_string(geometry_.slots_per_bucket) + " slots");
    std::vector<uint8_t> raw(geometry_.bucket_bytes());
    for (uint32_t k = 0; k < geometry_.slots_per_bucket; ++k) {
      if (slots[k].size() != geometry_.slot_bytes)
        throw UsageError("write_bucket: slot size mismatch");
      std::memcpy(raw.data() + static_cast<size_t>(k) * geometry_.slot_bytes,
                  slots[k].data(), geometry_.slot_bytes);
    }
    write_raw(bucket_pos(bucket_id), raw.data(), raw.size());
    trace_.record(IoKind::kWriteBucket, bucket_id, std::nullopt, raw.size());
  }

  /// Records the small metadata fetch issued per path bucket by the baseline
  /// protocol emulation. No payload moves; only the trace is affected.
  void read_meta(uint64_t bucket_id, uint64_t bytes) {
    check_bucket(bucket_id);
    trace_.record(IoKind::kReadMeta, bucket_id, std::nullopt, bytes);
  }

  // -- Fault injection (tamper testing). Not traced: the adversary rewrites
  //    its own storage without the client observing anything.

  void corrupt_flip_byte(uint64_t bucket_id, uint32_t slot_offset,
                         uint32_t byte_index) {
    check_slot(bucket_id, slot_offset);
    if (byte_index >= geometry_.slot_bytes)
      throw UsageError("corrupt_flip_byte: byte index out of range");
    uint8_t b;
    const uint64_t pos = slot_pos(bucket_id, slot_offset) + byte_index;
    read_raw(pos, &b, 1);
    b ^= 0x01;
    write_raw(pos, &b, 1);
  }

  void corrupt_replace_slot(uint64_t bucket_id, uint32_t slot_offset,
                            const std::vector<uint8_t>& ciphertext) {
    check_slot(bucket_id, slot_offset);
    if (ciphertext.size() != geometry_.slot_bytes)
      throw UsageError("corrupt_replace_slot: size mismatch");
    write_raw(slot_pos(bucket_id, slot_offset), ciphertext.data(),
              ciphertext.size());
  }

  /// Adversary-side snapshot of a slot (used to stage replay attacks).
  std::vector<uint8_t> peek_slot(uint64_t bucket_id, uint32_t slot_offset) {
    check_slot(bucket_id, slot_offset);
    std::vector<uint8_t> out(geometry_.slot_bytes);
    read_raw(slot_pos(bucket_id, slot_offset), out.data(), out.size());
    return out;
  }

  IoTrace trace_snapshot() const { return trace_.snapshot(); }
  IoTotals trace_totals() const { return trace_.totals(); }
  void trace_reset() { trace_.reset(); }

 protected:
  virtual void read_raw(uint64_t pos, uint8_t* dst, size_t n) = 0;
  virtual void write_raw(uint64_t pos, const uint8_t* src, size_t n) = 0;

 private:
  uint64_t bucket_pos(uint64_t bucket_id) const {
    return bucket_id * geometry_.bucket_bytes();
  }
  uint64_t slot_pos(uint64_t bucket_id, uint32_t slot_offset) const {
    return bucket_pos(bucket_id) +
           static_cast<uint64_t>(slot_offset) * geometry_.slot_bytes;
  }
  void check_bucket(uint64_t bucket_id) const {
    if (bucket_id >= geometry_.bucket_count)
      throw UsageError("bucket id " + std::to_string(bucket_id) +
                       " out of range");
  }
  void check_slot(uint64_t bucket_id, uint32_t slot_offset) const {
    check_bucket(bucket_id);
    if (slot_offset >= geometry_.slots_per_bucket)
      throw UsageError("slot offset " + std::to_string(slot_offset) +
                       " out of range");
  }

  StoreGeometry geometry_;
  TraceRecorder trace_;
};

class MemoryBlockStore final : public BlockStore {
 public:
  explicit MemoryBlockStore(StoreGeometry geometry)
      : BlockStore(geometry), data_(geometry.total_bytes(), 0) {}

 protected:
  void read_raw(uint64_t pos, uint8_t* dst, size_t n) override {
    std::memcpy(dst, data_.data() + pos, n);
  }
  void write_raw(uint64_t pos, const uint8_t* src, size_t n) override {
    std::memcpy(data_.data() + pos, src, n);
  }

 private:
  std::vector<uint8_t> data_;
};

/// Single flat file; bucket i lives at byte offset i * slots_per_bucket *
/// slot_bytes. pread/pwrite keep concurrent access to distinct regions safe.
class FileBlockStore final : public BlockStore {
 public:
  FileBlockStore(StoreGeometry geometry, const std::string& path)
      : BlockStore(geometry) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT, 0644);
    if (fd_ < 0) throw UsageError("FileBlockStore: cannot open " + path);
    if (::ftruncate(fd_, static_cast<off_t>(geometry.total_bytes())) != 0) {
      ::close(fd_);
      throw UsageError("FileBlockStore: cannot size " + path);
    }
  }

  ~FileBlockStore() override {
    if (fd_ >= 0) ::close(fd_);
  }

  FileBlockStore(const FileBlockStore&) = delete;
  FileBlockStore& operator=(const FileBlockStore&) = delete;

 protected:
  void read_raw(uint64_t pos, uint8_t* dst, size_t n) override {
    size_t done = 0;
    while (done < n) {
      const ssize_t r = ::pread(fd_, dst + done, n - done,
                                static_cast<off_t>(pos + done));
      if (r <= 0) throw UsageError("FileBlockStore: short read");
      done += static_cast<size_t>(r);
    }
  }
  void write_raw(uint64_t pos, const uint8_t* src, size_t n) override {
    size_t done = 0;
    while (done < n) {
      const ssize_t w = ::pwrite(fd_, src + done, n - done,
                                 static_cast<off_t>(pos + done));
      if (w <= 0) throw UsageError("FileBlockStore: short write");
      done += static_cast<size_t>(w);
    }
  }

 private:
  int fd_ = -1;
};

}  // namespace oann
