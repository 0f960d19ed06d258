#pragma once

#include <cstdint>
#include <mutex>
#include <optional>
#include <vector>

#include "oann/errors.hpp"

namespace oann {

// The recorded physical I/O stream. This is exactly what the untrusted host
// observes, so every obliviousness check in the test suite runs against it.

enum class IoKind : uint8_t {
  kReadSlot = 0,
  kReadBucket = 1,
  kWriteBucket = 2,
  // Emulation-only: the per-bucket metadata fetch issued by the baseline
  // protocol variant. Never emitted by the default configuration.
  kReadMeta = 3,
};

struct IoEvent {
  IoKind kind;
  uint64_t bucket_id;
  std::optional<uint32_t> slot_offset;  // absent for bucket-granular ops
  uint64_t bytes;
  uint64_t seq;
};

struct IoTotals {
  uint64_t request_count = 0;
  uint64_t bytes_read = 0;
  uint64_t bytes_written = 0;
};

struct IoTrace {
  std::vector<IoEvent> events;
  IoTotals totals;
};

/// Append-only event log shared by the storage backends. Events are totally
/// ordered by a single sequence counter.
class TraceRecorder {
 public:
  void record(IoKind kind, uint64_t bucket_id, std::optional<uint32_t> slot,
              uint64_t bytes) {
    std::lock_guard<std::mutex> lock(mu_);
    events_.push_back(IoEvent{kind, bucket_id, slot, bytes, seq_++});
    totals_.request_count++;
    if (kind == IoKind::kWriteBucket)
      totals_.bytes_written += bytes;
    else
      totals_.bytes_read += bytes;
  }

  IoTrace snapshot() const {
    std::lock_guard<std::mutex> lock(mu_);
    return IoTrace{events_, totals_};
  }

  IoTotals totals() const {
    std::lock_guard<std::mutex> lock(mu_);
    return totals_;
  }

  void reset() {
    std::lock_guard<std::mutex> lock(mu_);
    events_.clear();
    totals_ = IoTotals{};
    // seq_ keeps increasing across resets: "strictly increasing within a
    // trace" holds either way and a global order is handy when debugging.
  }

 private:
  mutable std::mutex mu_;
  std::vector<IoEvent> events_;
  IoTotals totals_;
  uint64_t seq_ = 0;
};

struct Multipliers {
  double access_count = 0.0;
  double bandwidth = 0.0;
};

/// Physical requests and bytes per logical access, bytes in units of
/// `unit_bytes` (pass the sealed-slot size to compare against the analytical
/// formulas, which count whole slots).
inline Multipliers measure_multipliers(const IoTotals& totals,
                                       uint64_t logical_access_count,
                                       uint64_t unit_bytes) {
  if (logical_access_count == 0)
    throw UsageError("measure_multipliers: no logical accesses");
  if (unit_bytes == 0) throw UsageError("measure_multipliers: zero unit");
  const double logical = static_cast<double>(logical_access_count);
  Multipliers m;
  m.access_count = static_cast<double>(totals.request_count) / logical;
  m.bandwidth = static_cast<double>(totals.bytes_read + totals.bytes_written) /
                (logical * static_cast<double>(unit_bytes));
  return m;
}

inline Multipliers measure_multipliers(const IoTrace& trace,
                                       uint64_t logical_access_count,
                                       uint64_t unit_bytes) {
  return measure_multipliers(trace.totals, logical_access_count, unit_bytes);
}

}  // namespace oann
