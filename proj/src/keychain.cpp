#include "trudi/keychain.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <memory>

namespace trudi {

namespace {

const EVP_MD* digest_for(HashAlgorithm algorithm) {
  // Explicit fetches avoid the implicit per-call provider lookup.
  static const EVP_MD* sha256 = EVP_MD_fetch(nullptr, "SHA2-256", nullptr);
  static const EVP_MD* sha512 = EVP_MD_fetch(nullptr, "SHA2-512", nullptr);
  static const EVP_MD* sha3 = EVP_MD_fetch(nullptr, "SHA3-256", nullptr);
  switch (algorithm) {
    case HashAlgorithm::sha256: return sha256;
    case HashAlgorithm::sha512: return sha512;
    case HashAlgorithm::sha3_256: return sha3;
  }
  throw std::invalid_argument("unknown hash algorithm");
}

struct CtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

EVP_MD_CTX* thread_ctx() {
  thread_local std::unique_ptr<EVP_MD_CTX, CtxDeleter> ctx{EVP_MD_CTX_new()};
  return ctx.get();
}

std::uint8_t tail_mask(unsigned key_bits) {
  const unsigned rem = key_bits % 8;
  return rem == 0 ? 0xff : static_cast<std::uint8_t>(0xff << (8 - rem));
}

int hex_value(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

}  // namespace

std::string_view to_string(HashAlgorithm algorithm) {
  switch (algorithm) {
    case HashAlgorithm::sha256: return "sha256";
    case HashAlgorithm::sha512: return "sha512";
    case HashAlgorithm::sha3_256: return "sha3-256";
  }
  return "unknown";
}

HashAlgorithm hash_algorithm_from_string(std::string_view name) {
  if (name == "sha256") return HashAlgorithm::sha256;
  if (name == "sha512") return HashAlgorithm::sha512;
  if (name == "sha3-256") return HashAlgorithm::sha3_256;
  throw std::invalid_argument("unknown hash algorithm: " + std::string(name));
}

void HashConfig::validate() const {
  if (key_bits == 0 || key_bits > max_key_bits) {
    throw std::invalid_argument("key_bits must be in [1, 256], got " + std::to_string(key_bits));
  }
}

Key::Key(std::span<const std::uint8_t> bytes) {
  if (bytes.size() > capacity) throw std::invalid_argument("key longer than 32 octets");
  std::copy(bytes.begin(), bytes.end(), data_.begin());
  size_ = static_cast<std::uint8_t>(bytes.size());
}

std::string Key::hex() const {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(size_ * 2);
  for (std::size_t i = 0; i < size_; ++i) {
    out.push_back(digits[data_[i] >> 4]);
    out.push_back(digits[data_[i] & 0x0f]);
  }
  return out;
}

Key Key::from_hex(std::string_view hex) {
  if (hex.size() % 2 != 0 || hex.size() / 2 > capacity) {
    throw std::invalid_argument("bad key hex length");
  }
  std::array<std::uint8_t, capacity> buf{};
  for (std::size_t i = 0; i < hex.size() / 2; ++i) {
    const int hi = hex_value(hex[2 * i]);
    const int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0) throw std::invalid_argument("bad key hex digit");
    buf[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return Key(std::span<const std::uint8_t>(buf.data(), hex.size() / 2));
}

Key hash_step(const Key& key, const HashConfig& hash) {
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  EVP_MD_CTX* ctx = thread_ctx();
  const auto in = key.bytes();
  if (EVP_DigestInit_ex(ctx, digest_for(hash.algorithm), nullptr) != 1 ||
      EVP_DigestUpdate(ctx, in.data(), in.size()) != 1 ||
      EVP_DigestFinal_ex(ctx, digest.data(), &len) != 1) {
    throw std::runtime_error("digest computation failed");
  }
  const std::size_t out_len = hash.key_bytes();
  digest[out_len - 1] &= tail_mask(hash.key_bits);
  return Key(std::span<const std::uint8_t>(digest.data(), out_len));
}

Key backtrack(const Key& key, std::uint64_t steps, const HashConfig& hash, std::uint64_t cap) {
  if (steps > cap) {
    throw BudgetExceeded("backtrack of " + std::to_string(steps) + " steps exceeds cap " +
                         std::to_string(cap));
  }
  Key k = key;
  for (std::uint64_t s = 0; s < steps; ++s) k = hash_step(k, hash);
  return k;
}

Key random_key(Rng& rng, const HashConfig& hash) {
  std::array<std::uint8_t, Key::capacity> buf{};
  const std::size_t len = hash.key_bytes();
  for (std::size_t i = 0; i < len; i += 8) {
    std::uint64_t word = rng();
    for (std::size_t b = i; b < std::min(len, i + 8); ++b) {
      buf[b] = static_cast<std::uint8_t>(word & 0xff);
      word >>= 8;
    }
  }
  buf[len - 1] &= tail_mask(hash.key_bits);
  return Key(std::span<const std::uint8_t>(buf.data(), len));
}

Keychain Keychain::derive(const Key& seed, std::uint32_t n, const HashConfig& hash) {
  hash.validate();
  if (seed.size() != hash.key_bytes()) {
    throw std::invalid_argument("seed length " + std::to_string(seed.size()) +
                                " does not match key width " + std::to_string(hash.key_bytes()));
  }
  if (seed.bytes().back() & static_cast<std::uint8_t>(~tail_mask(hash.key_bits))) {
    throw std::invalid_argument("seed has bits set beyond key_bits");
  }
  std::vector<Key> keys(static_cast<std::size_t>(n) + 1);
  keys[n] = seed;
  for (std::uint32_t i = n; i > 0; --i) keys[i - 1] = hash_step(keys[i], hash);
  return Keychain(std::move(keys), hash);
}

}  // namespace trudi
