#pragma once

// Drives a transmitter and the unified receiver over a lossy trace and replays
// every delivered frame through the literal single- or dual-chain tests.

#include <cstdint>
#include <string>

#include "trudi/transmitter.hpp"

namespace reftrace {

struct Result {
  std::uint64_t frames = 0;
  std::uint64_t compared = 0;
  std::uint64_t divergences = 0;
  std::uint64_t accepted = 0;
  std::uint64_t recoveries = 0;
  std::uint64_t index_mismatches = 0;  // dual frames whose b index is not the derived one
  std::string first_divergence;
};

/// Basic and Overlapped traces use the single-chain test, DualFull traces the dual one.
Result compare(const trudi::StrategyConfig& cfg, double loss_p, std::uint64_t seed,
               std::uint64_t frames);

}  // namespace reftrace
