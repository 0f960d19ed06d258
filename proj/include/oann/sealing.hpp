#pragma once

#include <openssl/evp.h>

#include <array>
#include <atomic>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <vector>

#include "oann/errors.hpp"
#include "oann/rng.hpp"
#include "oann/serial.hpp"

namespace oann {

// Authenticated sealing of slot payloads. Each ciphertext is bound to its
// (bucket, physical slot, bucket version) through the associated data, so a
// ciphertext moved to another slot, another bucket, or replayed against a
// newer version fails to open. Sealed slot layout, all lengths fixed per
// configuration:
//
//   nonce (12) || ciphertext (8 + block_size) || tag (16)
//
// The plaintext is addr (8 bytes LE) || data (block_size bytes); dummies use
// the all-ones address sentinel and zero data, so real and dummy slots are
// indistinguishable by length.

inline constexpr uint64_t kDummyAddr = ~0ULL;
inline constexpr size_t kSealNonceBytes = 12;
inline constexpr size_t kSealTagBytes = 16;
inline constexpr size_t kSealAddrBytes = 8;
inline constexpr size_t kSealKeyBytes = 32;
inline constexpr size_t kSealAadBytes = 20;  // bucket(8) || slot(4) || ver(8)

/// Ciphertext size for a given logical block size.
inline constexpr uint32_t sealed_slot_bytes(uint32_t block_size) {
  return static_cast<uint32_t>(kSealNonceBytes + kSealAddrBytes + block_size +
                               kSealTagBytes);
}

struct SlotPayload {
  uint64_t addr = kDummyAddr;
  std::vector<uint8_t> data;

  bool is_dummy() const { return addr == kDummyAddr; }

  static SlotPayload dummy(uint32_t block_size) {
    return SlotPayload{kDummyAddr, std::vector<uint8_t>(block_size, 0)};
  }
};

struct SealKey {
  std::array<uint8_t, kSealKeyBytes> bytes{};

  /// Independent key derived from a seed stream. Each ORAM instance gets its
  /// own stream so the two instances never share key material.
  static SealKey derive(uint64_t master_seed, uint64_t instance) {
    Rng rng = derive_rng(master_seed, RngPurpose::kSealNonce, instance);
    SealKey k;
    for (size_t i = 0; i < kSealKeyBytes; i += 8)
      store_u64(k.bytes.data() + i, rng.next_u64());
    return k;
  }
};

/// AES-256-GCM sealer for one key. Nonces are a fixed random prefix plus a
/// per-seal counter; the counter is atomic so concurrent sealing never reuses
/// a nonce under the same key.
class Sealer {
 public:
  Sealer(SealKey key, uint32_t block_size, uint64_t nonce_seed)
      : key_(key), block_size_(block_size) {
    Rng rng(nonce_seed);
    nonce_prefix_ = static_cast<uint32_t>(rng.next_u64());
    nonce_counter_.store(rng.next_u64());
  }

  uint32_t block_size() const { return block_size_; }
  uint32_t slot_bytes() const { return sealed_slot_bytes(block_size_); }

  std::vector<uint8_t> seal(uint64_t bucket_id, uint32_t slot_offset,
                            uint64_t version, const SlotPayload& payload) {
    if (payload.data.size() != block_size_)
      throw UsageError("seal: payload size mismatch");

    std::vector<uint8_t> plain(kSealAddrBytes + block_size_);
    store_u64(plain.data(), payload.addr);
    std::memcpy(plain.data() + kSealAddrBytes, payload.data.data(),
                block_size_);

    std::array<uint8_t, kSealAadBytes> aad = encode_aad(bucket_id, slot_offset, version);

    std::vector<uint8_t> out(slot_bytes());
    uint8_t* nonce = out.data();
    uint8_t* ct = out.data() + kSealNonceBytes;
    uint8_t* tag = out.data() + kSealNonceBytes + plain.size();

    store_u32(nonce, nonce_prefix_);
    store_u64(nonce + 4, nonce_counter_.fetch_add(1));

    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    int len = 0;
    bool ok = ctx != nullptr &&
              EVP_EncryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, nullptr,
                                 nullptr) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, kSealNonceBytes,
                                  nullptr) == 1 &&
              EVP_EncryptInit_ex(ctx, nullptr, nullptr, key_.bytes.data(),
                                 nonce) == 1 &&
              EVP_EncryptUpdate(ctx, nullptr, &len, aad.data(),
                                static_cast<int>(aad.size())) == 1 &&
              EVP_EncryptUpdate(ctx, ct, &len, plain.data(),
                                static_cast<int>(plain.size())) == 1 &&
              EVP_EncryptFinal_ex(ctx, ct + len, &len) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_GET_TAG, kSealTagBytes,
                                  tag) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) throw std::runtime_error("seal: cipher failure");
    return out;
  }

  /// Returns the payload iff the ciphertext was produced by `seal` under the
  /// same key and (bucket, slot, version) context; nullopt on any mismatch.
  std::optional<SlotPayload> open(uint64_t bucket_id, uint32_t slot_offset,
                                  uint64_t version,
                                  const std::vector<uint8_t>& sealed) const {
    if (sealed.size() != slot_bytes()) return std::nullopt;

    const uint8_t* nonce = sealed.data();
    const uint8_t* ct = sealed.data() + kSealNonceBytes;
    const size_t ct_len = kSealAddrBytes + block_size_;
    std::vector<uint8_t> tag(sealed.end() - kSealTagBytes, sealed.end());

    std::array<uint8_t, kSealAadBytes> aad = encode_aad(bucket_id, slot_offset, version);
    std::vector<uint8_t> plain(ct_len);

    EVP_CIPHER_CTX* ctx = EVP_CIPHER_CTX_new();
    int len = 0;
    bool ok = ctx != nullptr &&
              EVP_DecryptInit_ex(ctx, EVP_aes_256_gcm(), nullptr, nullptr,
                                 nullptr) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_IVLEN, kSealNonceBytes,
                                  nullptr) == 1 &&
              EVP_DecryptInit_ex(ctx, nullptr, nullptr, key_.bytes.data(),
                                 nonce) == 1 &&
              EVP_DecryptUpdate(ctx, nullptr, &len, aad.data(),
                                static_cast<int>(aad.size())) == 1 &&
              EVP_DecryptUpdate(ctx, plain.data(), &len, ct,
                                static_cast<int>(ct_len)) == 1 &&
              EVP_CIPHER_CTX_ctrl(ctx, EVP_CTRL_GCM_SET_TAG, kSealTagBytes,
                                  tag.data()) == 1 &&
              EVP_DecryptFinal_ex(ctx, plain.data() + len, &len) == 1;
    EVP_CIPHER_CTX_free(ctx);
    if (!ok) return std::nullopt;

    SlotPayload payload;
    payload.addr = load_u64(plain.data());
    payload.data.assign(plain.begin() + kSealAddrBytes, plain.end());
    return payload;
  }

  void save(std::ostream& os) const {
    os.write(reinterpret_cast<const char*>(key_.bytes.data()), kSealKeyBytes);
    write_u32(os, block_size_);
    write_u32(os, nonce_prefix_);
    write_u64(os, nonce_counter_.load());
  }

  static Sealer restore(std::istream& is) {
    SealKey key;
    is.read(reinterpret_cast<char*>(key.bytes.data()), kSealKeyBytes);
    if (!is) throw UsageError("Sealer::restore: truncated stream");
    const uint32_t block_size = read_u32(is);
    Sealer s(key, block_size, 0);
    s.nonce_prefix_ = read_u32(is);
    s.nonce_counter_.store(read_u64(is));
    return s;
  }

  Sealer(const Sealer& other)
      : key_(other.key_),
        block_size_(other.block_size_),
        nonce_prefix_(other.nonce_prefix_),
        nonce_counter_(other.nonce_counter_.load()) {}

  Sealer& operator=(const Sealer& other) {
    key_ = other.key_;
    block_size_ = other.block_size_;
    nonce_prefix_ = other.nonce_prefix_;
    nonce_counter_.store(other.nonce_counter_.load());
    return *this;
  }

 private:
  static std::array<uint8_t, kSealAadBytes> encode_aad(uint64_t bucket_id,
                                                       uint32_t slot_offset,
                                                       uint64_t version) {
    std::array<uint8_t, kSealAadBytes> aad{};
    store_u64(aad.data(), bucket_id);
    store_u32(aad.data() + 8, slot_offset);
    store_u64(aad.data() + 12, version);
    return aad;
  }

  SealKey key_;
  uint32_t block_size_;
  uint32_t nonce_prefix_;
  std::atomic<uint64_t> nonce_counter_;
};

}  // namespace oann
