#include "trudi/receiver.hpp"

#include <algorithm>
#include <stdexcept>

namespace trudi {

namespace {

// Hashes `key` at most `steps` times, counting invocations, and compares with `target`.
bool walks_to(const Key& key, std::uint64_t steps, const Key& target, const HashConfig& hash,
              std::uint64_t& calls) {
  Key k = key;
  for (std::uint64_t s = 0; s < steps; ++s) {
    k = hash_step(k, hash);
    ++calls;
  }
  return k == target;
}

}  // namespace

const char* to_string(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::accepted: return "accepted";
    case OutcomeKind::rejected_integrity: return "rejected_integrity";
    case OutcomeKind::rejected_replay: return "rejected_replay";
    case OutcomeKind::rejected_origin: return "rejected_origin";
    case OutcomeKind::dropped_recovery_pending: return "dropped_recovery_pending";
  }
  return "unknown";
}

ReceiverConfig receiver_config_for(const StrategyConfig& strategy, const ScKey& sc_key,
                                   Duration t_to) {
  ReceiverConfig rc;
  rc.slots = slot_count(strategy.strategy);
  rc.hash = strategy.hash;
  rc.sc_key = sc_key;
  rc.t_to = t_to;
  rc.period = t_to;
  rc.chain_length = chain_length(strategy.strategy);
  rc.backtrack_cap = rc.chain_length;
  return rc;
}

Receiver::Receiver(ReceiverConfig config, const Snapshot& init) : config_(std::move(config)) {
  config_.hash.validate();
  if (config_.slots == 0 || config_.slots > max_slots) {
    throw std::invalid_argument("receiver: G must be in [1, 8]");
  }
  if (config_.t_to.count() <= 0) throw std::invalid_argument("receiver: T_to must be positive");
  load(init);
}

void Receiver::load(const Snapshot& snap) {
  if (snap.slots.size() != config_.slots) {
    throw std::invalid_argument("snapshot slot count does not match G");
  }
  slots_ = snap.slots;
  last_freshness_ = snap.freshness;
}

Validation Receiver::validate(std::span<const AuthEntry> entries) const {
  Validation out;
  if (entries.size() != slots_.size()) return out;

  struct Candidate {
    std::uint64_t gap;
    unsigned g;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(entries.size());
  for (unsigned g = 0; g < entries.size(); ++g) {
    const AuthEntry& e = entries[g];
    const ChainState& s = slots_[g];
    if (!e.tau || !s.rho || e.counter != s.c_hat || e.index <= s.iota_hat) continue;
    candidates.push_back({static_cast<std::uint64_t>(e.index - s.iota_hat), g});
  }
  if (config_.order == CandidateOrder::shortest_gap) {
    std::stable_sort(candidates.begin(), candidates.end(),
                     [](const Candidate& x, const Candidate& y) { return x.gap < y.gap; });
  }

  for (const Candidate& c : candidates) {
    if (c.gap > config_.backtrack_cap) continue;  // treated as a failed test
    if (walks_to(entries[c.g].key, c.gap, slots_[c.g].kappa_hat, config_.hash, out.hash_calls)) {
      out.valid = true;
      out.via_slot = c.g + 1;
      return out;
    }
  }
  return out;
}

Duration Receiver::timeout_length() const {
  if (config_.timeout_policy == TimeoutPolicy::fixed) return config_.t_to;
  std::optional<std::uint32_t> remaining;
  for (const ChainState& s : slots_) {
    if (!s.rho || s.iota_hat > config_.chain_length) continue;
    const std::uint32_t left = config_.chain_length - s.iota_hat + 1;
    remaining = remaining ? std::min(*remaining, left) : left;
  }
  return config_.period * static_cast<std::int64_t>(remaining.value_or(1));
}

Outcome Receiver::process(std::span<const std::uint8_t> bytes, Duration now) {
  Outcome out;
  if (recovery_pending_) {
    ++dropped_;
    out.kind = OutcomeKind::dropped_recovery_pending;
    return out;
  }

  auto frame = decode_frame(bytes, config_.sc_key, config_.hash.key_bits);
  if (!frame || frame->entries.size() != slots_.size()) {
    out.kind = OutcomeKind::rejected_integrity;
    return out;
  }
  if (frame->freshness <= last_freshness_) {
    out.kind = OutcomeKind::rejected_replay;
    return out;
  }

  const Validation v = validate(frame->entries);
  out.hash_calls = v.hash_calls;
  if (!v.valid) {
    if (!deadline_) deadline_ = now + timeout_length();
    out.kind = OutcomeKind::rejected_origin;
    return out;
  }

  last_freshness_ = frame->freshness;
  deadline_.reset();
  for (std::size_t g = 0; g < slots_.size(); ++g) {
    const AuthEntry& e = frame->entries[g];
    if (!e.tau) continue;
    if (e.omega) {
      slots_[g].rho = false;
    } else {
      slots_[g] = ChainState{true, e.counter, e.index, e.key};
    }
  }
  out.kind = OutcomeKind::accepted;
  out.message = std::move(frame->message);
  out.via_slot = v.via_slot;
  return out;
}

RecoveryNeeded Receiver::on_timer_expiry(Duration now) {
  if (!deadline_ || now < *deadline_) {
    throw std::logic_error("timer expiry without an elapsed deadline");
  }
  const RecoveryNeeded ev{*deadline_};
  deadline_.reset();
  recovery_pending_ = true;
  return ev;
}

void Receiver::apply_recovery(const Snapshot& snap) {
  load(snap);
  deadline_.reset();
  recovery_pending_ = false;
}

// ---------------------------------------------------------------------------

RefResult validate_single_ref(const ChainState& state, std::uint8_t c, std::uint32_t i,
                              const Key& key, const HashConfig& hash) {
  RefResult r;
  if (c != state.c_hat) return r;
  if (i <= state.iota_hat) return r;
  Key k = key;
  for (std::uint32_t s = 0; s < i - state.iota_hat; ++s) {
    k = hash_step(k, hash);
    ++r.hash_calls;
  }
  r.valid = k == state.kappa_hat;
  return r;
}

RefResult validate_dual_ref(const ChainState& a, const ChainState& b, std::uint8_t c_a,
                            std::uint32_t i_a, const Key& key_a, const Key& key_b,
                            std::uint32_t offset, const HashConfig& hash) {
  RefResult first = validate_single_ref(a, c_a, i_a, key_a, hash);
  if (first.valid) return first;
  const DualIndices d = derive_dual_indices(i_a, c_a, offset);
  RefResult second = validate_single_ref(b, d.counter, d.index, key_b, hash);
  second.hash_calls += first.hash_calls;
  return second;
}

}  // namespace trudi
