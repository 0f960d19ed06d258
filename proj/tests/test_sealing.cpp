#include "oann/sealing.hpp"

#include <gtest/gtest.h>

#include <sstream>

#include "oann/rng.hpp"

namespace oann {
namespace {

constexpr uint32_t kBlock = 64;

Sealer make_sealer(uint64_t seed = 1) {
  return Sealer(SealKey::derive(seed, 0), kBlock, seed ^ 0xabc);
}

SlotPayload random_payload(Rng& rng) {
  SlotPayload p;
  p.addr = rng.uniform(1u << 20);
  p.data.resize(kBlock);
  for (auto& b : p.data) b = static_cast<uint8_t>(rng.uniform(256));
  return p;
}

TEST(Sealing, RoundTripOnRandomPayloads) {
  Sealer s = make_sealer();
  Rng rng(10);
  for (int i = 0; i < 200; ++i) {
    const SlotPayload p = random_payload(rng);
    const uint64_t b = rng.uniform(100), ver = rng.uniform(50);
    const uint32_t k = static_cast<uint32_t>(rng.uniform(64));
    const auto ct = s.seal(b, k, ver, p);
    const auto opened = s.open(b, k, ver, ct);
    ASSERT_TRUE(opened.has_value());
    EXPECT_EQ(opened->addr, p.addr);
    EXPECT_EQ(opened->data, p.data);
  }
}

TEST(Sealing, ProbabilisticEncryption) {
  Sealer s = make_sealer();
  Rng rng(11);
  const SlotPayload p = random_payload(rng);
  const auto c1 = s.seal(2, 3, 4, p);
  const auto c2 = s.seal(2, 3, 4, p);
  EXPECT_NE(c1, c2);
  ASSERT_TRUE(s.open(2, 3, 4, c1).has_value());
  ASSERT_TRUE(s.open(2, 3, 4, c2).has_value());
}

TEST(Sealing, ConstantLengthRegardlessOfPayload) {
  Sealer s = make_sealer();
  Rng rng(12);
  const auto real = s.seal(0, 0, 1, random_payload(rng));
  const auto dummy = s.seal(0, 1, 1, SlotPayload::dummy(kBlock));
  EXPECT_EQ(real.size(), dummy.size());
  EXPECT_EQ(real.size(), sealed_slot_bytes(kBlock));
  EXPECT_EQ(real.size(), kBlock + 36u);
}

TEST(Sealing, ContextMismatchFails) {
  Sealer s = make_sealer();
  Rng rng(13);
  const SlotPayload p = random_payload(rng);
  const auto ct = s.seal(1, 2, 7, p);
  EXPECT_TRUE(s.open(1, 2, 7, ct).has_value());
  EXPECT_FALSE(s.open(1, 3, 7, ct).has_value());  // wrong slot
  EXPECT_FALSE(s.open(2, 2, 7, ct).has_value());  // wrong bucket
  EXPECT_FALSE(s.open(1, 2, 8, ct).has_value());  // replayed version
  Sealer other(SealKey::derive(99, 0), kBlock, 5);
  EXPECT_FALSE(other.open(1, 2, 7, ct).has_value());  // wrong key
}

TEST(Sealing, TamperCompletenessOverRandomCorruptions) {
  Sealer s = make_sealer();
  Rng rng(14);
  const SlotPayload p = random_payload(rng);
  const auto ct = s.seal(5, 6, 7, p);
  int failures = 0;
  const int trials = 10000;
  for (int i = 0; i < trials; ++i) {
    auto bad = ct;
    const size_t pos = rng.uniform(bad.size());
    uint8_t delta;
    do {
      delta = static_cast<uint8_t>(rng.uniform(256));
    } while (delta == 0);
    bad[pos] ^= delta;
    if (!s.open(5, 6, 7, bad).has_value()) ++failures;
  }
  EXPECT_EQ(failures, trials);
}

TEST(Sealing, IndependentInstanceKeysDiffer) {
  const SealKey k0 = SealKey::derive(1, 0);
  const SealKey k1 = SealKey::derive(1, 1);
  EXPECT_NE(k0.bytes, k1.bytes);
}

TEST(Sealing, WrongSizePayloadRejected) {
  Sealer s = make_sealer();
  SlotPayload p;
  p.data.assign(kBlock + 1, 0);
  EXPECT_THROW(s.seal(0, 0, 0, p), UsageError);
  EXPECT_FALSE(s.open(0, 0, 0, std::vector<uint8_t>(10, 0)).has_value());
}

TEST(Sealing, SaveRestorePreservesKeyAndNonceState) {
  Sealer s = make_sealer();
  Rng rng(15);
  const SlotPayload p = random_payload(rng);
  const auto ct = s.seal(9, 1, 2, p);
  std::stringstream ss;
  s.save(ss);
  Sealer r = Sealer::restore(ss);
  ASSERT_TRUE(r.open(9, 1, 2, ct).has_value());
  // Restored sealer continues sealing without nonce reuse.
  const auto c2 = r.seal(9, 1, 2, p);
  EXPECT_NE(ct, c2);
  EXPECT_TRUE(s.open(9, 1, 2, c2).has_value());
}

}  // namespace
}  // namespace oann
