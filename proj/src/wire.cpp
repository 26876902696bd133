#include "trudi/wire.hpp"

#include <openssl/crypto.h>
#include <openssl/evp.h>
#include <openssl/hmac.h>

#include <stdexcept>
#include <string>

namespace trudi {

namespace {

constexpr std::size_t header_size = 1 + 2 + 2 + 8 + 1 + 1 + 1;

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v >> 8));
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
}

void put64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int shift = 56; shift >= 0; shift -= 8) out.push_back(static_cast<std::uint8_t>(v >> shift));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool has(std::size_t n) const { return bytes_.size() - pos_ >= n; }
  std::size_t remaining() const { return bytes_.size() - pos_; }
  std::uint8_t u8() { return bytes_[pos_++]; }
  std::uint16_t u16() {
    const auto v = static_cast<std::uint16_t>(bytes_[pos_] << 8 | bytes_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | bytes_[pos_ + i];
    pos_ += 8;
    return v;
  }
  std::span<const std::uint8_t> take(std::size_t n) {
    auto s = bytes_.subspan(pos_, n);
    pos_ += n;
    return s;
  }
  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::size_t UFrame::key_count() const {
  std::size_t n = 0;
  for (const auto& e : entries) n += e.tau ? 1 : 0;
  return n;
}

bool UFrame::carries_root() const {
  for (const auto& e : entries) {
    if (e.tau && e.index == 0) return true;
  }
  return false;
}

Mac compute_mac(const ScKey& sc_key, std::span<const std::uint8_t> data) {
  static const EVP_MD* md = EVP_MD_fetch(nullptr, "SHA2-256", nullptr);
  std::array<std::uint8_t, EVP_MAX_MD_SIZE> full{};
  unsigned int len = 0;
  if (HMAC(md, sc_key.data(), static_cast<int>(sc_key.size()), data.data(), data.size(),
           full.data(), &len) == nullptr) {
    throw std::runtime_error("HMAC computation failed");
  }
  Mac mac{};
  std::copy_n(full.begin(), mac.size(), mac.begin());
  return mac;
}

std::size_t encoded_size(std::size_t present, std::size_t key_bytes, std::size_t message_size) {
  return header_size + present * (3 + key_bytes) + 2 + message_size + 16;
}

std::vector<std::uint8_t> encode_frame(const UFrame& frame, const ScKey& sc_key) {
  const std::size_t slots = frame.entries.size();
  if (slots == 0 || slots > max_slots) {
    throw std::invalid_argument("frame must carry between 1 and 8 slots, got " +
                                std::to_string(slots));
  }
  if (frame.message.size() > 0xffff) {
    throw std::invalid_argument("message longer than 65535 octets");
  }
  std::size_t key_bytes = 0;
  std::uint8_t tau_bits = 0;
  std::uint8_t omega_bits = 0;
  for (std::size_t g = 0; g < slots; ++g) {
    const auto& e = frame.entries[g];
    if (!e.tau) continue;
    if (e.key.empty()) throw std::invalid_argument("present entry without key");
    if (key_bytes == 0) key_bytes = e.key.size();
    if (e.key.size() != key_bytes) throw std::invalid_argument("entries with mixed key widths");
    tau_bits |= static_cast<std::uint8_t>(1u << g);
    if (e.omega) omega_bits |= static_cast<std::uint8_t>(1u << g);
  }

  std::vector<std::uint8_t> out;
  out.reserve(encoded_size(frame.key_count(), key_bytes, frame.message.size()));
  out.push_back(wire_version);
  put16(out, frame.link.sc_id);
  put16(out, frame.link.src_id);
  put64(out, frame.freshness);
  out.push_back(static_cast<std::uint8_t>(slots));
  out.push_back(tau_bits);
  out.push_back(omega_bits);
  for (const auto& e : frame.entries) {
    if (!e.tau) continue;
    out.push_back(e.counter);
    put16(out, e.index);
    const auto k = e.key.bytes();
    out.insert(out.end(), k.begin(), k.end());
  }
  put16(out, static_cast<std::uint16_t>(frame.message.size()));
  out.insert(out.end(), frame.message.begin(), frame.message.end());
  const Mac mac = compute_mac(sc_key, out);
  out.insert(out.end(), mac.begin(), mac.end());
  return out;
}

std::optional<UFrame> decode_frame(std::span<const std::uint8_t> bytes, const ScKey& sc_key,
                                   unsigned key_bits) {
  if (key_bits == 0 || key_bits > HashConfig::max_key_bits) return std::nullopt;
  if (bytes.size() < header_size + 2 + 16) return std::nullopt;

  // Authenticate first so that every rejection path looks the same.
  const auto body = bytes.first(bytes.size() - 16);
  const Mac expected = compute_mac(sc_key, body);
  if (CRYPTO_memcmp(expected.data(), bytes.data() + body.size(), expected.size()) != 0) {
    return std::nullopt;
  }

  const std::size_t key_bytes = (key_bits + 7) / 8;
  const std::uint8_t pad_mask =
      key_bits % 8 == 0 ? 0 : static_cast<std::uint8_t>(0xff >> (key_bits % 8));

  Reader r(body);
  if (r.u8() != wire_version) return std::nullopt;
  UFrame frame;
  frame.link.sc_id = r.u16();
  frame.link.src_id = r.u16();
  frame.freshness = r.u64();
  const unsigned slots = r.u8();
  const std::uint8_t tau_bits = r.u8();
  const std::uint8_t omega_bits = r.u8();
  if (slots == 0 || slots > max_slots) return std::nullopt;
  const unsigned used_mask = (1u << slots) - 1;
  if ((tau_bits & ~used_mask) != 0 || (omega_bits & ~tau_bits) != 0) return std::nullopt;

  frame.entries.resize(slots);
  for (unsigned g = 0; g < slots; ++g) {
    if (!(tau_bits & (1u << g))) continue;
    if (!r.has(3 + key_bytes)) return std::nullopt;
    auto& e = frame.entries[g];
    e.tau = true;
    e.omega = (omega_bits & (1u << g)) != 0;
    e.counter = r.u8();
    e.index = r.u16();
    const auto k = r.take(key_bytes);
    if ((k.back() & pad_mask) != 0) return std::nullopt;
    e.key = Key(k);
  }
  if (!r.has(2)) return std::nullopt;
  const std::size_t msg_len = r.u16();
  if (r.remaining() != msg_len) return std::nullopt;
  const auto msg = r.take(msg_len);
  frame.message.assign(msg.begin(), msg.end());
  std::copy_n(bytes.data() + body.size(), frame.mac.size(), frame.mac.begin());
  return frame;
}

}  // namespace trudi
