#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "trudi/keychain.hpp"
#include "trudi/transmitter.hpp"
#include "trudi/wire.hpp"

namespace trudi {

/// Simulated time, measured from the start of a run.
using Duration = std::chrono::microseconds;

enum class CandidateOrder {
  shortest_gap,  // ascending (i - iota_hat), ties by lower g
  by_identifier  // plain g order; only for differential tests
};

/// How T_to is chosen when an origin-invalid frame starts the timer.
enum class TimeoutPolicy {
  fixed,           // T_to as configured
  remaining_chain  // (n - iota_hat + 1) * period over the live slot closest to its junction
};

struct ReceiverConfig {
  unsigned slots = 2;  // G
  HashConfig hash;
  ScKey sc_key{};
  Duration t_to{10000};
  TimeoutPolicy timeout_policy = TimeoutPolicy::fixed;
  Duration period{10000};         // only used by remaining_chain
  std::uint32_t chain_length = 0;  // n; only used by remaining_chain
  std::uint64_t backtrack_cap = 0;  // 0 also means "no candidate may backtrack"
  CandidateOrder order = CandidateOrder::shortest_gap;
};

/// Receiver configuration matching a strategy: G, hash geometry, cap = n.
ReceiverConfig receiver_config_for(const StrategyConfig& strategy, const ScKey& sc_key,
                                   Duration t_to);

enum class OutcomeKind {
  accepted,
  rejected_integrity,
  rejected_replay,
  rejected_origin,
  dropped_recovery_pending
};

const char* to_string(OutcomeKind kind);

struct Outcome {
  OutcomeKind kind = OutcomeKind::rejected_integrity;
  std::vector<std::uint8_t> message;  // only for accepted
  std::uint64_t hash_calls = 0;
  std::optional<unsigned> via_slot;  // identifier that validated the frame
};

struct Validation {
  bool valid = false;
  std::uint64_t hash_calls = 0;
  std::optional<unsigned> via_slot;
};

/// Raised when the origin timer expires.
struct RecoveryNeeded {
  Duration deadline;
};

class Receiver {
 public:
  Receiver(ReceiverConfig config, const Snapshot& init);

  /// Full receive pipeline: codec, freshness, origin validation, state update.
  Outcome process(std::span<const std::uint8_t> bytes, Duration now);

  /// Disjunction over slots of the per-chain backtracking test. Pure.
  Validation validate(std::span<const AuthEntry> entries) const;

  std::optional<Duration> deadline() const { return deadline_; }
  bool recovery_pending() const { return recovery_pending_; }

  /// Precondition: a deadline is set and now >= deadline. Freezes the receiver.
  RecoveryNeeded on_timer_expiry(Duration now);

  /// Overwrites slots and freshness from a certified snapshot and unfreezes.
  void apply_recovery(const Snapshot& snap);

  const std::vector<ChainState>& state() const { return slots_; }
  std::uint64_t last_freshness() const { return last_freshness_; }
  std::uint64_t dropped_while_pending() const { return dropped_; }
  const ReceiverConfig& config() const { return config_; }

 private:
  Duration timeout_length() const;
  void load(const Snapshot& snap);

  ReceiverConfig config_;
  std::vector<ChainState> slots_;
  std::uint64_t last_freshness_ = 0;
  std::optional<Duration> deadline_;
  bool recovery_pending_ = false;
  std::uint64_t dropped_ = 0;
};

// ---------------------------------------------------------------------------
// Literal single- and dual-chain tests, kept separate from the receiver so that
// they can serve as independent references.

struct RefResult {
  bool valid = false;
  std::uint64_t hash_calls = 0;
};

/// c == c_hat, then i > iota_hat, then H^(i - iota_hat)(K) == kappa_hat, left to right.
RefResult validate_single_ref(const ChainState& state, std::uint8_t c, std::uint32_t i,
                              const Key& key, const HashConfig& hash);

/// Two-chain disjunction: the a-chain test, else the b-chain test with (i_b, c_b)
/// derived from (i_a, c_a) and the chain offset.
RefResult validate_dual_ref(const ChainState& a, const ChainState& b, std::uint8_t c_a,
                            std::uint32_t i_a, const Key& key_a, const Key& key_b,
                            std::uint32_t offset, const HashConfig& hash);

}  // namespace trudi
