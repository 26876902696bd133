#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trudi/keychain.hpp"

namespace trudi {

/// Shared link-layer secret K_SC of a secure channel.
using ScKey = std::array<std::uint8_t, 16>;
using Mac = std::array<std::uint8_t, 16>;

inline constexpr std::uint8_t wire_version = 0x01;
inline constexpr unsigned max_slots = 8;
inline constexpr unsigned counter_bits = 8;  // w_c
inline constexpr std::uint32_t counter_modulus = 1u << counter_bits;

/// Per-keychain authentication tuple carried in a frame.
/// When `tau` is false the remaining fields carry no information.
struct AuthEntry {
  bool tau = false;
  bool omega = false;
  std::uint8_t counter = 0;
  std::uint16_t index = 0;
  Key key;

  friend bool operator==(const AuthEntry& a, const AuthEntry& b) {
    if (!a.tau && !b.tau) return true;
    return a.tau == b.tau && a.omega == b.omega && a.counter == b.counter &&
           a.index == b.index && a.key == b.key;
  }
};

/// Additional authenticated data L of a frame.
struct LinkInfo {
  std::uint16_t sc_id = 0;
  std::uint16_t src_id = 0;
  friend bool operator==(const LinkInfo&, const LinkInfo&) = default;
};

/// Unified frame. `entries[g-1]` holds the slot of keychain identifier g.
struct UFrame {
  LinkInfo link;
  std::uint64_t freshness = 0;
  std::vector<AuthEntry> entries;
  std::vector<std::uint8_t> message;
  Mac mac{};  // filled by decode_frame; recomputed by encode_frame

  std::size_t key_count() const;
  bool carries_root() const;  // any present entry with index 0

  // The MAC is derived from the other fields, so it takes no part in equality.
  friend bool operator==(const UFrame& a, const UFrame& b) {
    return a.link == b.link && a.freshness == b.freshness && a.entries == b.entries &&
           a.message == b.message;
  }
};

/// HMAC-SHA256 over `data`, truncated to 16 octets.
Mac compute_mac(const ScKey& sc_key, std::span<const std::uint8_t> data);

/// Serializes the frame and appends the MAC over everything before it.
///
/// Layout (multi-octet integers big-endian):
///   version(1) sc_id(2) src_id(2) freshness(8) G(1) tau_bitmap(1) omega_bitmap(1)
///   { counter(1) index(2) key(ceil(|K|/8)) } for every present slot, ascending
///   msg_len(2) message mac(16)
///
/// Throws std::invalid_argument on frames that cannot be represented.
std::vector<std::uint8_t> encode_frame(const UFrame& frame, const ScKey& sc_key);

/// Inverse of encode_frame. Any malformed, truncated, non-canonical or
/// MAC-failing input yields std::nullopt; callers cannot tell them apart.
std::optional<UFrame> decode_frame(std::span<const std::uint8_t> bytes, const ScKey& sc_key,
                                   unsigned key_bits);

/// Encoded size of a frame with `present` significant entries.
std::size_t encoded_size(std::size_t present, std::size_t key_bytes, std::size_t message_size);

}  // namespace trudi
