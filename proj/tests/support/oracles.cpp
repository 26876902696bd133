#include "oracles.hpp"

#include <openssl/evp.h>

#include <array>
#include <stdexcept>

namespace oracle {

namespace {

const char* digest_name(trudi::HashAlgorithm a) {
  switch (a) {
    case trudi::HashAlgorithm::sha256: return "SHA256";
    case trudi::HashAlgorithm::sha512: return "SHA512";
    case trudi::HashAlgorithm::sha3_256: return "SHA3-256";
  }
  throw std::logic_error("digest");
}

std::vector<std::uint8_t> digest(const char* name, const std::vector<std::uint8_t>& data) {
  std::array<unsigned char, 64> out{};
  size_t len = 0;
  if (EVP_Q_digest(nullptr, name, nullptr, data.data(), data.size(), out.data(), &len) != 1) {
    throw std::runtime_error("EVP_Q_digest failed");
  }
  return {out.begin(), out.begin() + static_cast<long>(len)};
}

}  // namespace

trudi::Key hash(const trudi::Key& k, const trudi::HashConfig& cfg) {
  const auto in = k.bytes();
  auto d = digest(digest_name(cfg.algorithm), {in.begin(), in.end()});
  const unsigned bytes = (cfg.key_bits + 7) / 8;
  d.resize(bytes);
  // keep the leading key_bits bits
  const unsigned spare = bytes * 8 - cfg.key_bits;
  d.back() = static_cast<std::uint8_t>(d.back() >> spare << spare);
  return trudi::Key(std::span<const std::uint8_t>(d.data(), d.size()));
}

trudi::Key hash_n(trudi::Key k, std::uint64_t times, const trudi::HashConfig& cfg) {
  for (std::uint64_t t = 0; t < times; ++t) k = hash(k, cfg);
  return k;
}

trudi::Mac hmac16(const trudi::ScKey& key, const std::vector<std::uint8_t>& data) {
  std::vector<std::uint8_t> inner(64, 0x36), outer(64, 0x5c);
  for (std::size_t i = 0; i < key.size(); ++i) {
    inner[i] ^= key[i];
    outer[i] ^= key[i];
  }
  inner.insert(inner.end(), data.begin(), data.end());
  const auto ih = digest("SHA256", inner);
  outer.insert(outer.end(), ih.begin(), ih.end());
  const auto oh = digest("SHA256", outer);
  trudi::Mac mac{};
  for (std::size_t i = 0; i < mac.size(); ++i) mac[i] = oh[i];
  return mac;
}

std::vector<std::uint8_t> encode(const trudi::UFrame& f, const trudi::ScKey& key) {
  std::vector<std::uint8_t> b;
  b.push_back(0x01);
  b.push_back(f.link.sc_id >> 8);
  b.push_back(f.link.sc_id & 0xff);
  b.push_back(f.link.src_id >> 8);
  b.push_back(f.link.src_id & 0xff);
  for (int i = 7; i >= 0; --i) b.push_back(static_cast<std::uint8_t>(f.freshness >> (8 * i)));
  b.push_back(static_cast<std::uint8_t>(f.entries.size()));
  std::uint8_t tau = 0, omega = 0;
  for (std::size_t g = 0; g < f.entries.size(); ++g) {
    if (f.entries[g].tau) tau |= static_cast<std::uint8_t>(1 << g);
    if (f.entries[g].tau && f.entries[g].omega) omega |= static_cast<std::uint8_t>(1 << g);
  }
  b.push_back(tau);
  b.push_back(omega);
  for (const auto& e : f.entries) {
    if (!e.tau) continue;
    b.push_back(e.counter);
    b.push_back(e.index >> 8);
    b.push_back(e.index & 0xff);
    for (auto x : e.key.bytes()) b.push_back(x);
  }
  b.push_back(static_cast<std::uint8_t>(f.message.size() >> 8));
  b.push_back(static_cast<std::uint8_t>(f.message.size() & 0xff));
  b.insert(b.end(), f.message.begin(), f.message.end());
  const auto mac = hmac16(key, b);
  b.insert(b.end(), mac.begin(), mac.end());
  return b;
}

std::uint32_t key_to_int(const trudi::Key& k, unsigned key_bits) {
  std::uint32_t v = 0;
  for (auto x : k.bytes()) v = v << 8 | x;
  const unsigned spare = static_cast<unsigned>(k.size()) * 8 - key_bits;
  return v >> spare;
}

trudi::Key int_to_key(std::uint32_t v, unsigned key_bits) {
  const unsigned bytes = (key_bits + 7) / 8;
  const unsigned spare = bytes * 8 - key_bits;
  std::uint32_t w = v << spare;
  std::vector<std::uint8_t> out(bytes);
  for (int i = static_cast<int>(bytes) - 1; i >= 0; --i, w >>= 8) out[i] = w & 0xff;
  return trudi::Key(std::span<const std::uint8_t>(out.data(), out.size()));
}

FunctionalGraph::FunctionalGraph(const trudi::HashConfig& cfg) {
  if (cfg.key_bits > 24) throw std::invalid_argument("graph too large");
  const std::uint32_t n = 1u << cfg.key_bits;
  next_.resize(n);
  std::vector<std::uint32_t> indeg(n + 1, 0);
  for (std::uint32_t x = 0; x < n; ++x) {
    next_[x] = key_to_int(hash(int_to_key(x, cfg.key_bits), cfg), cfg.key_bits);
    ++indeg[next_[x] + 1];
  }
  pre_offset_.assign(n + 1, 0);
  for (std::uint32_t x = 0; x < n; ++x) pre_offset_[x + 1] = pre_offset_[x] + indeg[x + 1];
  pre_.resize(n);
  std::vector<std::uint32_t> fill(pre_offset_.begin(), pre_offset_.end() - 1);
  for (std::uint32_t x = 0; x < n; ++x) pre_[fill[next_[x]]++] = x;
}

double FunctionalGraph::hit_probability(std::uint32_t root, std::uint64_t budget) const {
  // dist(x) = number of hash calls before a walk from x first lands on root.
  std::vector<std::uint8_t> seen(next_.size(), 0);
  std::vector<std::uint32_t> frontier, following;
  for (std::uint32_t k = pre_offset_[root]; k < pre_offset_[root + 1]; ++k) {
    seen[pre_[k]] = 1;
    frontier.push_back(pre_[k]);
  }
  std::uint64_t hits = 0;
  for (std::uint64_t d = 1; d <= budget && !frontier.empty(); ++d) {
    hits += frontier.size();
    following.clear();
    for (auto y : frontier) {
      for (std::uint32_t k = pre_offset_[y]; k < pre_offset_[y + 1]; ++k) {
        const auto x = pre_[k];
        if (!seen[x]) {
          seen[x] = 1;
          following.push_back(x);
        }
      }
    }
    frontier.swap(following);
  }
  return static_cast<double>(hits) / static_cast<double>(next_.size());
}

}  // namespace oracle
