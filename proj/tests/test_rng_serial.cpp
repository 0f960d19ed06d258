#include "oann/rng.hpp"
#include "oann/serial.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

namespace oann {
namespace {

TEST(Rng, DeterministicUnderSeed) {
  Rng a(42), b(42), c(43);
  bool differ = false;
  for (int i = 0; i < 100; ++i) {
    const uint64_t va = a.next_u64();
    EXPECT_EQ(va, b.next_u64());
    if (va != c.next_u64()) differ = true;
  }
  EXPECT_TRUE(differ);
}

TEST(Rng, UniformStaysInRange) {
  Rng rng(7);
  for (int i = 0; i < 10000; ++i) EXPECT_LT(rng.uniform(13), 13u);
  // Coarse balance check over a small modulus.
  std::vector<int> counts(4, 0);
  for (int i = 0; i < 40000; ++i) counts[rng.uniform(4)]++;
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

TEST(Rng, PermutationIsBijection) {
  Rng rng(11);
  auto p = rng.permutation(257);
  auto sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (uint32_t i = 0; i < sorted.size(); ++i) EXPECT_EQ(sorted[i], i);
}

TEST(Rng, DerivedStreamsAreIndependentOfConsumption) {
  // Consuming one purpose stream must not shift another.
  Rng leaf1 = derive_rng(5, RngPurpose::kOramLeaf, 0);
  Rng perm1 = derive_rng(5, RngPurpose::kOramPerm, 0);
  const uint64_t perm_first = perm1.next_u64();
  for (int i = 0; i < 1000; ++i) leaf1.next_u64();
  Rng perm2 = derive_rng(5, RngPurpose::kOramPerm, 0);
  EXPECT_EQ(perm2.next_u64(), perm_first);
  // Distinct instances get distinct streams.
  Rng i0 = derive_rng(5, RngPurpose::kOramLeaf, 0);
  Rng i1 = derive_rng(5, RngPurpose::kOramLeaf, 1);
  EXPECT_NE(i0.next_u64(), i1.next_u64());
}

TEST(Rng, SaveRestoreContinuesStream) {
  Rng rng(99);
  for (int i = 0; i < 17; ++i) rng.next_u64();
  std::stringstream ss;
  rng.save(ss);
  const uint64_t expect = rng.next_u64();
  Rng restored;
  restored.load(ss);
  EXPECT_EQ(restored.next_u64(), expect);
}

TEST(Rng, NormalHasReasonableMoments) {
  Rng rng(3);
  double sum = 0.0, sq = 0.0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal();
    sum += x;
    sq += x * x;
  }
  EXPECT_NEAR(sum / n, 0.0, 0.02);
  EXPECT_NEAR(sq / n, 1.0, 0.03);
}

TEST(Serial, RoundTripsAndEndianness) {
  std::vector<uint8_t> buf;
  put_u16(buf, 0x1234);
  put_u32(buf, 0xdeadbeef);
  put_u64(buf, 0x0123456789abcdefULL);
  // Little-endian byte order on the wire.
  EXPECT_EQ(buf[0], 0x34);
  EXPECT_EQ(buf[1], 0x12);
  EXPECT_EQ(buf[2], 0xef);
  EXPECT_EQ(load_u16(buf.data()), 0x1234);
  EXPECT_EQ(load_u32(buf.data() + 2), 0xdeadbeefu);
  EXPECT_EQ(load_u64(buf.data() + 6), 0x0123456789abcdefULL);

  uint8_t fb[4];
  store_f32(fb, 1.5f);
  EXPECT_EQ(load_f32(fb), 1.5f);

  std::stringstream ss;
  write_u32(ss, 77);
  write_u64(ss, 1ull << 40);
  write_f64(ss, 0.25);
  write_bytes(ss, {1, 2, 3});
  EXPECT_EQ(read_u32(ss), 77u);
  EXPECT_EQ(read_u64(ss), 1ull << 40);
  EXPECT_EQ(read_f64(ss), 0.25);
  EXPECT_EQ(read_bytes(ss), (std::vector<uint8_t>{1, 2, 3}));
}

TEST(Serial, TruncatedStreamThrows) {
  std::stringstream ss;
  write_u32(ss, 1);
  read_u32(ss);
  EXPECT_THROW(read_u64(ss), UsageError);
}

}  // namespace
}  // namespace oann
