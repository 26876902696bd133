#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace trudi {

/// Deterministic generator used for every random draw in the library.
using Rng = std::mt19937_64;

enum class HashAlgorithm { sha256, sha512, sha3_256 };

std::string_view to_string(HashAlgorithm algorithm);
HashAlgorithm hash_algorithm_from_string(std::string_view name);

/// Hash function H(.) plus the key width |K| it is truncated to.
///
/// Keys occupy ceil(key_bits / 8) octets; when key_bits is not a multiple
/// of 8 the trailing bits of the last octet are always zero.
struct HashConfig {
  HashAlgorithm algorithm = HashAlgorithm::sha256;
  unsigned key_bits = 128;

  static constexpr unsigned max_key_bits = 256;

  std::size_t key_bytes() const { return (key_bits + 7) / 8; }
  void validate() const;

  friend bool operator==(const HashConfig&, const HashConfig&) = default;
};

/// A (possibly truncated) hash value. Value type, no heap storage.
class Key {
 public:
  static constexpr std::size_t capacity = 32;

  Key() = default;
  explicit Key(std::span<const std::uint8_t> bytes);

  std::span<const std::uint8_t> bytes() const { return {data_.data(), size_}; }
  std::size_t size() const { return size_; }
  bool empty() const { return size_ == 0; }
  std::string hex() const;
  static Key from_hex(std::string_view hex);

  friend bool operator==(const Key& a, const Key& b) {
    return a.size_ == b.size_ && a.data_ == b.data_;
  }

 private:
  std::array<std::uint8_t, capacity> data_{};
  std::uint8_t size_ = 0;
};

/// Thrown when backtracking would exceed the configured step budget.
class BudgetExceeded : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One application of H, truncated to hash.key_bits.
Key hash_step(const Key& key, const HashConfig& hash);

/// H applied `steps` times. Throws BudgetExceeded if steps > cap.
Key backtrack(const Key& key, std::uint64_t steps, const HashConfig& hash,
              std::uint64_t cap = UINT64_MAX);

/// Uniformly random key of the configured width.
Key random_key(Rng& rng, const HashConfig& hash);

/// Keychain K_0..K_n with K_{i-1} = H(K_i); K_n is the seed, K_0 the root.
class Keychain {
 public:
  static Keychain derive(const Key& seed, std::uint32_t n, const HashConfig& hash);

  std::uint32_t length() const { return static_cast<std::uint32_t>(keys_.size() - 1); }
  const Key& key_at(std::uint32_t i) const { return keys_.at(i); }
  const Key& root() const { return keys_.front(); }
  const Key& seed() const { return keys_.back(); }
  const HashConfig& hash() const { return hash_; }
  std::span<const Key> keys() const { return keys_; }

 private:
  Keychain(std::vector<Key> keys, HashConfig hash) : keys_(std::move(keys)), hash_(hash) {}

  std::vector<Key> keys_;  // index i holds K_i
  HashConfig hash_;
};

inline Keychain derive_chain(const Key& seed, std::uint32_t n, const HashConfig& hash) {
  return Keychain::derive(seed, n, hash);
}

}  // namespace trudi
