#include "oann/block_store.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <memory>
#include <string>

#include "oann/rng.hpp"

namespace oann {
namespace {

StoreGeometry small_geometry() { return StoreGeometry{9, 12, 40}; }

std::vector<std::vector<uint8_t>> random_bucket(Rng& rng,
                                                const StoreGeometry& g) {
  std::vector<std::vector<uint8_t>> slots(g.slots_per_bucket);
  for (auto& s : slots) {
    s.resize(g.slot_bytes);
    for (auto& b : s) b = static_cast<uint8_t>(rng.uniform(256));
  }
  return slots;
}

class BlockStoreTest : public ::testing::TestWithParam<bool> {
 protected:
  std::unique_ptr<BlockStore> make(StoreGeometry g) {
    if (GetParam()) {
      path_ = ::testing::TempDir() + "store_" +
              std::to_string(reinterpret_cast<uintptr_t>(this)) + ".bin";
      return std::make_unique<FileBlockStore>(g, path_);
    }
    return std::make_unique<MemoryBlockStore>(g);
  }
  void TearDown() override {
    if (!path_.empty()) std::remove(path_.c_str());
  }
  std::string path_;
};

TEST_P(BlockStoreTest, ReadYourWriteAtSlotGranularity) {
  auto store = make(small_geometry());
  Rng rng(1);
  auto bucket = random_bucket(rng, store->geometry());
  store->write_bucket(3, bucket);
  store->trace_reset();
  EXPECT_EQ(store->read_slot(3, 5), bucket[5]);
  const IoTrace t = store->trace_snapshot();
  ASSERT_EQ(t.events.size(), 1u);
  EXPECT_EQ(t.events[0].kind, IoKind::kReadSlot);
  EXPECT_EQ(t.events[0].bucket_id, 3u);
  EXPECT_EQ(t.events[0].slot_offset, 5u);
  EXPECT_EQ(t.events[0].bytes, store->geometry().slot_bytes);
}

TEST_P(BlockStoreTest, BoundaryIndicesAndRangeErrors) {
  auto store = make(small_geometry());
  EXPECT_NO_THROW(store->read_slot(8, 11));
  EXPECT_THROW(store->read_slot(9, 0), UsageError);
  EXPECT_THROW(store->read_slot(0, 12), UsageError);
  EXPECT_THROW(store->read_bucket(9), UsageError);
}

TEST_P(BlockStoreTest, BucketReadIsOneEventAndRoundTrips) {
  auto store = make(small_geometry());
  Rng rng(2);
  auto bucket = random_bucket(rng, store->geometry());
  store->write_bucket(0, bucket);
  store->trace_reset();
  EXPECT_EQ(store->read_bucket(0), bucket);
  store->read_bucket(0);
  const IoTrace t = store->trace_snapshot();
  EXPECT_EQ(t.events.size(), 2u);
  EXPECT_EQ(t.totals.request_count, 2u);
  for (const auto& e : t.events) {
    EXPECT_EQ(e.kind, IoKind::kReadBucket);
    EXPECT_EQ(e.bytes, store->geometry().bucket_bytes());
    EXPECT_FALSE(e.slot_offset.has_value());
  }
}

TEST_P(BlockStoreTest, WriteValidation) {
  auto store = make(small_geometry());
  Rng rng(3);
  auto bucket = random_bucket(rng, store->geometry());
  bucket.pop_back();
  EXPECT_THROW(store->write_bucket(1, bucket), UsageError);
  bucket = random_bucket(rng, store->geometry());
  bucket[0].pop_back();
  EXPECT_THROW(store->write_bucket(1, bucket), UsageError);
}

TEST_P(BlockStoreTest, NoCrossBucketBleed) {
  auto store = make(small_geometry());
  Rng rng(4);
  auto b1 = random_bucket(rng, store->geometry());
  auto b2 = random_bucket(rng, store->geometry());
  store->write_bucket(1, b1);
  store->write_bucket(2, b2);
  EXPECT_EQ(store->read_bucket(1), b1);
  EXPECT_EQ(store->read_bucket(2), b2);
}

TEST_P(BlockStoreTest, TraceTotalsFoldOverEvents) {
  auto store = make(small_geometry());
  Rng rng(5);
  const IoTrace empty = store->trace_snapshot();
  EXPECT_EQ(empty.totals.request_count, 0u);
  EXPECT_EQ(empty.totals.bytes_read, 0u);
  EXPECT_EQ(empty.totals.bytes_written, 0u);

  auto bucket = random_bucket(rng, store->geometry());
  store->write_bucket(4, bucket);
  store->read_bucket(4);
  store->read_slot(4, 0);
  const IoTrace t = store->trace_snapshot();
  IoTotals fold;
  uint64_t prev_seq = 0;
  for (size_t i = 0; i < t.events.size(); ++i) {
    const auto& e = t.events[i];
    fold.request_count++;
    if (e.kind == IoKind::kWriteBucket)
      fold.bytes_written += e.bytes;
    else
      fold.bytes_read += e.bytes;
    if (i > 0) EXPECT_GT(e.seq, prev_seq);
    prev_seq = e.seq;
  }
  EXPECT_EQ(fold.request_count, t.totals.request_count);
  EXPECT_EQ(fold.bytes_read, t.totals.bytes_read);
  EXPECT_EQ(fold.bytes_written, t.totals.bytes_written);
  const uint64_t bucket_bytes = store->geometry().bucket_bytes();
  EXPECT_EQ(t.totals.bytes_written, bucket_bytes);
  EXPECT_EQ(t.totals.bytes_read, bucket_bytes + store->geometry().slot_bytes);
}

TEST_P(BlockStoreTest, FaultInjectionFlipsAndRestores) {
  auto store = make(small_geometry());
  Rng rng(6);
  auto bucket = random_bucket(rng, store->geometry());
  store->write_bucket(2, bucket);
  const auto before = store->peek_slot(2, 7);
  store->corrupt_flip_byte(2, 7, 3);
  auto after = store->peek_slot(2, 7);
  EXPECT_NE(before, after);
  after[3] ^= 0x01;
  EXPECT_EQ(before, after);

  std::vector<uint8_t> replacement(store->geometry().slot_bytes, 0xaa);
  store->corrupt_replace_slot(2, 7, replacement);
  EXPECT_EQ(store->peek_slot(2, 7), replacement);
}

INSTANTIATE_TEST_SUITE_P(Backends, BlockStoreTest, ::testing::Bool(),
                         [](const ::testing::TestParamInfo<bool>& info) {
                           return info.param ? "File" : "Memory";
                         });

// The two backends must be indistinguishable: identical call sequences give
// byte-identical reads and identical traces.
TEST(BackendEquivalence, IdenticalSequencesProduceIdenticalResults) {
  const StoreGeometry g = small_geometry();
  MemoryBlockStore mem(g);
  const std::string path = ::testing::TempDir() + "equiv_store.bin";
  FileBlockStore file(g, path);
  Rng rng(7);

  for (int round = 0; round < 50; ++round) {
    const uint64_t b = rng.uniform(g.bucket_count);
    const int op = static_cast<int>(rng.uniform(3));
    if (op == 0) {
      Rng content(round);
      auto bucket = random_bucket(content, g);
      mem.write_bucket(b, bucket);
      file.write_bucket(b, bucket);
    } else if (op == 1) {
      EXPECT_EQ(mem.read_bucket(b), file.read_bucket(b)) << "round " << round;
    } else {
      const uint32_t k = static_cast<uint32_t>(rng.uniform(g.slots_per_bucket));
      EXPECT_EQ(mem.read_slot(b, k), file.read_slot(b, k)) << "round " << round;
    }
  }
  const IoTrace tm = mem.trace_snapshot();
  const IoTrace tf = file.trace_snapshot();
  ASSERT_EQ(tm.events.size(), tf.events.size());
  for (size_t i = 0; i < tm.events.size(); ++i) {
    EXPECT_EQ(tm.events[i].kind, tf.events[i].kind);
    EXPECT_EQ(tm.events[i].bucket_id, tf.events[i].bucket_id);
    EXPECT_EQ(tm.events[i].bytes, tf.events[i].bytes);
  }
  std::remove(path.c_str());
}

TEST(MeasureMultipliers, FoldsTotals) {
  IoTotals t;
  t.request_count = 30;
  t.bytes_read = 1200;
  t.bytes_written = 300;
  const Multipliers m = measure_multipliers(t, 10, 50);
  EXPECT_DOUBLE_EQ(m.access_count, 3.0);
  EXPECT_DOUBLE_EQ(m.bandwidth, 3.0);
  EXPECT_THROW(measure_multipliers(t, 0, 50), UsageError);
}

}  // namespace
}  // namespace oann
