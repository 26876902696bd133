#include "trudi/transmitter.hpp"

#include <stdexcept>

namespace trudi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint32_t half_length(const Strategy& s) {
  return std::visit(overloaded{
                        [](const DualFull& d) -> std::uint32_t { return d.half; },
                        [](const DualSparse& d) -> std::uint32_t {
                          return sparse_repetitions(d) * d.m;
                        },
                        [](const auto&) -> std::uint32_t {
                          throw std::invalid_argument("not a dual strategy");
                        },
                    },
                    s);
}

std::uint32_t overlap(const Strategy& s) {
  if (const auto* o = std::get_if<Overlapped>(&s)) return o->q;
  return 1;
}

}  // namespace

std::string to_string(const Rational& r) {
  return std::to_string(r.numerator()) + "/" + std::to_string(r.denominator());
}

std::string strategy_name(const Strategy& s) {
  return std::visit(overloaded{
                        [](const Basic&) { return std::string("basic"); },
                        [](const Overlapped&) { return std::string("overlapped"); },
                        [](const DualFull&) { return std::string("dual-full"); },
                        [](const DualSparse&) { return std::string("dual-sparse"); },
                    },
                    s);
}

std::uint32_t sparse_repetitions(const DualSparse& s) {
  return (static_cast<std::uint32_t>(s.n) + 1) / (static_cast<std::uint32_t>(s.m) + 1);
}

void validate(const StrategyConfig& config) {
  config.hash.validate();
  std::visit(overloaded{
                 [](const Basic& b) {
                   if (b.n < 1) throw std::invalid_argument("basic: n must be >= 1");
                 },
                 [](const Overlapped& o) {
                   if (o.n < 1) throw std::invalid_argument("overlapped: n must be >= 1");
                   if (o.q < 1) throw std::invalid_argument("overlapped: Q must be >= 1");
                   // The next junction zone must start after the previous one ends,
                   // otherwise three chains would be live at once.
                   if (2u * o.q > o.n + 1u) {
                     throw std::invalid_argument("overlapped: Q must satisfy 2Q <= n+1");
                   }
                 },
                 [](const DualFull& d) {
                   if (d.junction_keys != 2 && d.junction_keys != 3) {
                     throw std::invalid_argument("dual-full: junction_keys must be 2 or 3");
                   }
                   if (d.half < 1 || d.half > 32767) {
                     throw std::invalid_argument("dual-full: N must be in [1, 32767]");
                   }
                   // With N = 1 the 2-key pattern never discloses the start-up chain.
                   if (d.junction_keys == 2 && d.half < 2) {
                     throw std::invalid_argument("dual-full: the 2-key variant needs N >= 2");
                   }
                 },
                 [](const DualSparse& d) {
                   if (d.n < 1 || d.m < 1) {
                     throw std::invalid_argument("dual-sparse: n and m must be >= 1");
                   }
                   if ((static_cast<std::uint32_t>(d.n) + 1) % (d.m + 1u) != 0) {
                     throw std::invalid_argument("dual-sparse: (n+1) must be a multiple of (m+1)");
                   }
                 },
             },
             config.strategy);
}

std::uint32_t chain_length(const Strategy& s) {
  return std::visit(overloaded{
                        [](const Basic& b) -> std::uint32_t { return b.n; },
                        [](const Overlapped& o) -> std::uint32_t { return o.n; },
                        [](const DualFull& d) -> std::uint32_t {
                          return d.junction_keys == 3 ? 2u * d.half : 2u * d.half - 1;
                        },
                        [](const DualSparse& d) -> std::uint32_t { return d.n; },
                    },
                    s);
}

unsigned slot_count(const Strategy& s) { return is_dual(s) ? 3 : 2; }

bool is_dual(const Strategy& s) {
  return std::holds_alternative<DualFull>(s) || std::holds_alternative<DualSparse>(s);
}

std::uint32_t junction_spacing(const Strategy& s) {
  if (is_dual(s)) return half_length(s);
  return chain_length(s) - overlap(s) + 1;
}

std::uint32_t period_frames(const Strategy& s) {
  return is_dual(s) ? 2 * half_length(s) : junction_spacing(s);
}

std::uint32_t first_junction_ordinal(const Strategy& s) { return junction_spacing(s); }

std::uint32_t dual_offset(const Strategy& s) {
  const auto* d = std::get_if<DualFull>(&s);
  if (d == nullptr) throw std::invalid_argument("dual_offset: only defined for dual-full");
  return d->junction_keys == 3 ? d->half : d->half - 1u;
}

Rational theoretical_efficiency(const StrategyConfig& config) {
  validate(config);
  return std::visit(overloaded{
                        [](const Basic& b) { return Rational(b.n, b.n + 1); },
                        [](const Overlapped& o) { return Rational(o.n - o.q + 1, o.n + 1); },
                        [](const DualFull& d) {
                          // A 3-key junction adds one key per half period.
                          return d.junction_keys == 3 ? Rational(d.half, 2 * d.half + 1)
                                                      : Rational(1, 2);
                        },
                        [](const DualSparse& d) { return Rational(d.m, d.m + 1); },
                    },
                    config.strategy);
}

DualIndices derive_dual_indices(std::uint32_t index_a, std::uint8_t counter_a, std::uint32_t half) {
  if (half == 0 || index_a < 1 || index_a > 2 * half) {
    throw std::invalid_argument("derive_dual_indices: index out of range");
  }
  if (index_a <= half) return {index_a + half, counter_a};
  return {index_a - half, static_cast<std::uint8_t>((counter_a + 1) % counter_modulus)};
}

std::vector<std::uint64_t> junction_ordinals(const Strategy& s, std::uint64_t frame_count) {
  std::vector<std::uint64_t> out;
  const std::uint64_t spacing = junction_spacing(s);
  for (std::uint64_t j = spacing; j <= frame_count; j += spacing) out.push_back(j);
  return out;
}

// ---------------------------------------------------------------------------

Transmitter::Transmitter(const StrategyConfig& config, std::uint64_t seed, LinkInfo link)
    : config_(config), rng_(seed), link_(link) {
  validate(config_);
  slots_.resize(slot_count(config_.strategy));
  init_snapshot_.slots.resize(slots_.size());

  auto preload = [&](unsigned g, ChainRole role, std::uint16_t index) {
    Slot& slot = slots_[g - 1];
    slot.chain = fresh_chain();
    slot.role = role;
    slot.last_disclosed = index;
    init_snapshot_.slots[g - 1] = ChainState{true, 0, index, slot.chain->key_at(index)};
  };

  const std::uint32_t n = chain_length(config_.strategy);
  if (is_dual(config_.strategy)) {
    preload(1, ChainRole::a, 0);
    preload(2, ChainRole::b, static_cast<std::uint16_t>(n - half_length(config_.strategy)));
    startup_ = 1;
    settled_ = 2;
  } else {
    preload(1, ChainRole::a, 0);
    current_ = 1;
    next_index_ = 1;
  }
  pending_ = fresh_chain();
}

Keychain Transmitter::fresh_chain() {
  return Keychain::derive(random_key(rng_, config_.hash), chain_length(config_.strategy),
                          config_.hash);
}

const Keychain* Transmitter::chain_of(unsigned g) const {
  const auto& slot = slots_.at(g - 1);
  return slot.chain ? &*slot.chain : nullptr;
}

unsigned Transmitter::vacant_slot() const {
  for (unsigned g = 1; g <= slots_.size(); ++g) {
    if (!slots_[g - 1].chain) return g;
  }
  throw std::logic_error("no vacant keychain identifier");
}

unsigned Transmitter::bind_new_chain(unsigned old_slot) {
  const unsigned g = vacant_slot();
  Slot& fresh = slots_[g - 1];
  const Slot& old = slots_[old_slot - 1];
  fresh.chain = std::move(pending_);
  fresh.counter = static_cast<std::uint8_t>((old.counter + 1) % counter_modulus);
  fresh.role = old.role;
  fresh.terminated = false;
  fresh.last_disclosed.reset();
  pending_ = fresh_chain();
  return g;
}

AuthEntry Transmitter::disclose(unsigned g, std::uint32_t index, bool omega) {
  Slot& slot = slots_[g - 1];
  last_roles_[g - 1] = slot.role;
  slot.last_disclosed = static_cast<std::uint16_t>(index);
  if (omega) slot.terminated = true;
  return AuthEntry{true, omega, slot.counter, static_cast<std::uint16_t>(index),
                   slot.chain->key_at(index)};
}

UFrame Transmitter::emit(std::span<const std::uint8_t> message) {
  if (message.size() > 0xffff) throw std::invalid_argument("message longer than 65535 octets");
  UFrame frame;
  frame.link = link_;
  frame.freshness = ++freshness_;
  frame.entries.resize(slots_.size());
  last_roles_.assign(slots_.size(), ChainRole::a);
  frame.message.assign(message.begin(), message.end());
  if (is_dual(config_.strategy)) {
    emit_dual(frame);
  } else {
    emit_single(frame);
  }
  return frame;
}

void Transmitter::emit_single(UFrame& frame) {
  const std::uint32_t n = chain_length(config_.strategy);
  const std::uint32_t q = overlap(config_.strategy);
  const std::uint32_t zone_start = n - q + 1;
  const std::uint32_t i = next_index_;

  if (i < zone_start) {
    frame.entries[current_ - 1] = disclose(current_, i, false);
  } else {
    const std::uint32_t k = i - zone_start;
    if (k == 0) next_slot_ = bind_new_chain(current_);
    frame.entries[current_ - 1] = disclose(current_, i, true);
    frame.entries[next_slot_ - 1] = disclose(next_slot_, k, false);
  }

  if (i == n) {
    slots_[current_ - 1] = Slot{};
    current_ = next_slot_;
    next_index_ = q;
  } else {
    ++next_index_;
  }
}

void Transmitter::emit_dual(UFrame& frame) {
  const std::uint32_t n = chain_length(config_.strategy);
  const std::uint32_t len = half_length(config_.strategy);
  const std::uint32_t f = ++frame_in_half_;

  frame.entries[settled_ - 1] = disclose(settled_, n - len + f, f == len);

  std::optional<std::uint32_t> startup_index;
  if (const auto* d = std::get_if<DualFull>(&config_.strategy)) {
    if (f < len || d->junction_keys == 3) startup_index = f;
  } else {
    const auto& sp = std::get<DualSparse>(config_.strategy);
    if (f % sp.m == 0 && f < len) startup_index = f / sp.m;
  }
  if (startup_index) frame.entries[startup_ - 1] = disclose(startup_, *startup_index, false);

  if (f == len) {
    const unsigned joined = bind_new_chain(settled_);
    frame.entries[joined - 1] = disclose(joined, 0, false);
    slots_[settled_ - 1] = Slot{};
    settled_ = startup_;
    startup_ = joined;
    frame_in_half_ = 0;
  }
}

Snapshot Transmitter::handle_recovery_request() const {
  Snapshot snap;
  snap.freshness = freshness_;
  snap.slots.resize(slots_.size());
  for (std::size_t g = 0; g < slots_.size(); ++g) {
    const Slot& slot = slots_[g];
    if (!slot.chain || slot.terminated || !slot.last_disclosed) continue;
    snap.slots[g] = ChainState{true, slot.counter, *slot.last_disclosed,
                               slot.chain->key_at(*slot.last_disclosed)};
  }
  return snap;
}

}  // namespace trudi
