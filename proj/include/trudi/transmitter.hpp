#pragma once

#include <boost/rational.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trudi/keychain.hpp"
#include "trudi/wire.hpp"

namespace trudi {

using Rational = boost::rational<std::int64_t>;

std::string to_string(const Rational& r);

// ---------------------------------------------------------------------------
// Strategy configuration

/// Single keychain of n keys; one J-frame per chain.
struct Basic {
  std::uint16_t n = 127;
};

/// Single keychains overlapping by Q back-to-back J-frames.
struct Overlapped {
  std::uint16_t n = 127;
  std::uint16_t q = 3;
};

/// Two fully interleaved keychains displaced by half a period.
/// junction_keys = 2 gives chains of 2N-1 keys, 3 gives chains of 2N keys.
struct DualFull {
  std::uint16_t half = 64;  // N
  unsigned junction_keys = 2;
};

/// Two sparsely interleaved keychains: blocks of m-1 A-frames and one D-frame,
/// repeated r = (n+1)/(m+1) times per half, the last D replaced by a J-frame.
struct DualSparse {
  std::uint16_t n = 127;
  std::uint16_t m = 3;
};

using Strategy = std::variant<Basic, Overlapped, DualFull, DualSparse>;

struct StrategyConfig {
  Strategy strategy = Basic{};
  HashConfig hash;
};

std::string strategy_name(const Strategy& s);

/// Throws std::invalid_argument when the configuration is not realizable.
void validate(const StrategyConfig& config);

/// Keys per chain, excluding the root (n).
std::uint32_t chain_length(const Strategy& s);
/// Number of keychain identifiers G the strategy needs.
unsigned slot_count(const Strategy& s);
bool is_dual(const Strategy& s);
/// Frames between two consecutive junctions of the same chain role, in steady state.
std::uint32_t period_frames(const Strategy& s);
/// Frames between two consecutive root disclosures (half a period for dual strategies).
std::uint32_t junction_spacing(const Strategy& s);
/// Ordinal (1-based) of the first frame disclosing a new root.
std::uint32_t first_junction_ordinal(const Strategy& s);
/// Index offset between the two chains of a dual strategy (what derive_dual_indices calls N).
std::uint32_t dual_offset(const Strategy& s);
/// DualSparse repetition count r.
std::uint32_t sparse_repetitions(const DualSparse& s);

/// Closed-form key transmission efficiency (frames per key sent).
Rational theoretical_efficiency(const StrategyConfig& config);

/// Index bookkeeping between the two halves of a dual period.
struct DualIndices {
  std::uint32_t index;
  std::uint8_t counter;
  friend bool operator==(const DualIndices&, const DualIndices&) = default;
};
DualIndices derive_dual_indices(std::uint32_t index_a, std::uint8_t counter_a, std::uint32_t half);

// ---------------------------------------------------------------------------
// Snapshots shared with receivers

/// Receiver-side state S^g of one keychain identifier.
struct ChainState {
  bool rho = false;
  std::uint8_t c_hat = 0;
  std::uint16_t iota_hat = 0;
  Key kappa_hat;

  friend bool operator==(const ChainState& a, const ChainState& b) {
    if (!a.rho && !b.rho) return true;
    return a.rho == b.rho && a.c_hat == b.c_hat && a.iota_hat == b.iota_hat &&
           a.kappa_hat == b.kappa_hat;
  }
};

/// Certified keychain status handed to receivers out of band, at SC
/// initialization or on recovery. `slots[g-1]` is identifier g.
struct Snapshot {
  std::vector<ChainState> slots;
  std::uint64_t freshness = 0;  // last freshness value emitted by the transmitter

  friend bool operator==(const Snapshot&, const Snapshot&) = default;
};

/// Persistent identity of a chain lineage within a strategy. Single-chain
/// strategies only use `a`; dual strategies join `b` at mid-period, `a` at the end.
enum class ChainRole { a, b };

// ---------------------------------------------------------------------------
// Transmitter

class Transmitter {
 public:
  Transmitter(const StrategyConfig& config, std::uint64_t seed, LinkInfo link = {});

  /// Trusted initial state for the receivers (what SC initialization distributes).
  const Snapshot& init_snapshot() const { return init_snapshot_; }

  /// Next frame of the strategy pattern; advances the state.
  UFrame emit(std::span<const std::uint8_t> message);

  /// Current view of every live chain: the most recently disclosed tuple.
  Snapshot handle_recovery_request() const;

  const StrategyConfig& config() const { return config_; }
  unsigned slots() const { return static_cast<unsigned>(slots_.size()); }
  std::uint64_t frames_emitted() const { return freshness_; }
  /// Role of the chain most recently bound to identifier g (1-based).
  ChainRole role_of(unsigned g) const { return slots_.at(g - 1).role; }
  /// Role of every entry of the last emitted frame, indexed like its entries.
  const std::vector<ChainRole>& last_roles() const { return last_roles_; }
  /// Chain currently bound to identifier g, if any (for white-box tests).
  const Keychain* chain_of(unsigned g) const;

 private:
  struct Slot {
    std::optional<Keychain> chain;
    std::uint8_t counter = 0;
    ChainRole role = ChainRole::a;
    bool terminated = false;  // omega already emitted
    std::optional<std::uint16_t> last_disclosed;
  };

  Keychain fresh_chain();
  unsigned vacant_slot() const;
  unsigned bind_new_chain(unsigned old_slot);
  AuthEntry disclose(unsigned g, std::uint32_t index, bool omega);
  void emit_single(UFrame& frame);
  void emit_dual(UFrame& frame);

  StrategyConfig config_;
  Rng rng_;
  LinkInfo link_;
  std::uint64_t freshness_ = 0;
  std::vector<Slot> slots_;
  std::optional<Keychain> pending_;
  Snapshot init_snapshot_;
  std::vector<ChainRole> last_roles_;

  // single-chain position
  unsigned current_ = 1;
  unsigned next_slot_ = 0;
  std::uint32_t next_index_ = 1;

  // dual position
  unsigned startup_ = 1;  // chain joined at the start of this half
  unsigned settled_ = 2;  // chain joined at the end of this half
  std::uint32_t frame_in_half_ = 0;
};

/// Frame ordinals (1-based, within a lossless run) at which chains of the two
/// roles are joined: convenience for tests and sweeps.
std::vector<std::uint64_t> junction_ordinals(const Strategy& s, std::uint64_t frame_count);

}  // namespace trudi
