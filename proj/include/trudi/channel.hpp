#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "trudi/adversary.hpp"
#include "trudi/receiver.hpp"
#include "trudi/transmitter.hpp"

namespace trudi {

struct Bernoulli {
  double p = 0.0;
};

/// Two-state burst channel; the chain starts in the good state.
struct GilbertElliott {
  double p_gb = 0.01;
  double p_bg = 0.3;
  double e_g = 0.001;
  double e_b = 0.9;
};

/// Explicit 1-based ordinals of the licit frames that never reach the receiver.
struct Schedule {
  std::set<std::uint64_t> dropped;
};

using LossModel = std::variant<Bernoulli, GilbertElliott, Schedule>;

enum class Arrival { periodic, exponential };

struct Scenario {
  StrategyConfig strategy;
  LossModel loss = Bernoulli{};
  std::uint64_t frame_count = 1024;
  Duration period{10000};  // T, or the mean inter-arrival time for exponential arrivals
  Arrival arrival = Arrival::periodic;
  Duration recovery_latency{0};
  std::optional<Duration> t_to;  // defaults to the period
  TimeoutPolicy timeout_policy = TimeoutPolicy::fixed;
  std::uint64_t seed = 1;
  std::optional<AdversaryConfig> adversary;
  std::uint32_t message_size = 8;
  bool stop_at_first_false_negative = false;
};

void validate(const Scenario& scenario);
Duration effective_t_to(const Scenario& scenario);

struct Metrics {
  std::uint64_t frames_sent = 0;
  std::uint64_t frames_delivered = 0;
  std::uint64_t accepted = 0;
  std::uint64_t rejected_origin = 0;
  std::uint64_t rejected_integrity = 0;
  std::uint64_t rejected_replay = 0;
  std::uint64_t dropped_recovery_pending = 0;
  std::uint64_t forged_injected = 0;
  std::uint64_t false_negatives = 0;  // delivered licit frames rejected
  std::uint64_t false_positives = 0;  // forged frames accepted
  std::uint64_t recoveries = 0;
  Duration recovery_downtime{0};
  std::vector<Duration> recovery_requests;  // when each recovery was requested
  std::uint64_t keys_sent = 0;
  std::uint64_t hash_calls = 0;
  Rational measured_eta_kt{0};
  std::uint64_t max_survived_burst = 0;  // longest loss run followed by an accepted frame
  std::optional<std::uint64_t> first_false_negative;  // ordinal of the licit frame

  friend bool operator==(const Metrics&, const Metrics&) = default;
};

struct TraceEvent {
  enum class Kind { frame, recovery_requested, recovery_applied };
  Kind kind = Kind::frame;
  Duration time{0};
  std::uint64_t ordinal = 0;  // licit frame ordinal; 0 for forged frames and recovery events
  const UFrame* frame = nullptr;
  bool delivered = false;
  bool forged = false;
  std::optional<Outcome> outcome;      // frames that reached the receiver
  const Snapshot* snapshot = nullptr;  // recovery_applied
};

using TraceObserver = std::function<void(const TraceEvent&)>;

/// Deterministic discrete-event run. At equal times a frame is processed before
/// a timer or recovery that is due at that instant.
Metrics run(const Scenario& scenario, const TraceObserver& observer = {});

/// Worst case over burst start positions of the longest loss burst that causes
/// no false negative.
std::uint64_t max_tolerated_burst(const StrategyConfig& config);

struct SweepRow {
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  bool survived = false;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  std::uint64_t first_start = 0;
  std::uint64_t period = 0;
  std::uint64_t frames_per_run = 0;
  /// min over starts of the longest prefix of lengths 1..L that all survive
  std::uint64_t tolerance = 0;
};

struct SweepOptions {
  Duration period{10000};
  unsigned threads = 1;
};

/// Every burst start in one steady-state period, every length up to the period.
SweepTable burst_sweep(const StrategyConfig& config, std::uint64_t horizon,
                       const SweepOptions& options = {});

}  // namespace trudi
