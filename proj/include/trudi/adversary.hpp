#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "trudi/keychain.hpp"
#include "trudi/receiver.hpp"
#include "trudi/wire.hpp"

namespace trudi {

struct Scenario;
struct Metrics;

enum class KeyGuess { random, replay_old_key };

/// Insider that knows K_SC and injects forged frames between licit ones.
struct Masquerade {
  double injection_rate = 1.0;  // forged frames per licit period
  KeyGuess key_guess = KeyGuess::random;
};

/// Masquerade flood meant to trigger needless recoveries.
struct DosSpam {
  double rate = 10.0;    // forged frames per licit period
  Duration tail{0};      // keep spamming this long after the last licit frame
};

/// Pre-image search on every disclosed root.
struct BruteForce {
  double hash_rate = 65536.0;  // simulated hashes per second
  std::uint64_t trials = 300;  // keychain lifetimes to attack
};

using AdversaryConfig = std::variant<Masquerade, DosSpam, BruteForce>;

std::string adversary_name(const AdversaryConfig& config);
void validate(const AdversaryConfig& config);

struct AttackStats {
  std::string kind;
  std::uint64_t attempts = 0;   // N_H for brute force, forged frames otherwise
  std::uint64_t successes = 0;  // compromised chains, or forged frames accepted
  std::uint64_t lifetimes = 0;  // brute force only
  std::uint64_t budget_per_lifetime = 0;
  double simulated_seconds = 0;
  std::optional<double> time_to_compromise;  // mean seconds into a lifetime per success
  std::optional<double> observed_mtbf;       // simulated seconds per success
  std::optional<double> predicted_mtbf;      // 2^|K| / R_H
  std::optional<double> predicted_success;   // 1 - (1 - 2^-|K|)^budget
  std::uint64_t recoveries = 0;              // spam and masquerade runs
  std::uint64_t false_negatives = 0;
};

/// Re-encodes `tmpl` with the next freshness value, every present entry moved to
/// index i+1 and carrying `guess`, omega cleared and the message replaced.
std::vector<std::uint8_t> forge_frame(const ScKey& sc_key, const UFrame& tmpl, const Key& guess);

/// Same as forge_frame but keeps the already disclosed keys and indices.
std::vector<std::uint8_t> forge_replay(const ScKey& sc_key, const UFrame& tmpl);

struct BruteForceResult {
  bool found = false;
  std::uint64_t hash_calls = 0;
  /// chain[0] is the root, chain[j] hashes j times onto it. At most n+1 entries.
  std::vector<Key> chain;
};

/// One lifetime of the pre-image search: a single random walk from a random key,
/// remembering the last n keys, until the root shows up or the budget runs out.
BruteForceResult bruteforce_attack(const Key& root, std::uint32_t n, const HashConfig& hash,
                                   std::uint64_t budget, Rng& rng);

struct Mtbf {
  boost::multiprecision::cpp_rational seconds;
  double seconds_approx = 0;
  double years_approx = 0;  // 365-day years
};

inline constexpr std::int64_t seconds_per_year = 365LL * 24 * 3600;

/// 2^key_bits / hash_rate, exactly. hash_rate must be positive and finite.
Mtbf predicted_mtbf(double hash_rate, unsigned key_bits);

/// Frames between a chain's root disclosure and its last key.
std::uint32_t chain_lifetime_frames(const Strategy& s);

/// Brute force: attacks `trials` roots produced by a real transmitter.
/// Masquerade/DosSpam: runs the scenario with the adversary attached.
AttackStats run_attack_campaign(const AdversaryConfig& config, const Scenario& scenario);

}  // namespace trudi
