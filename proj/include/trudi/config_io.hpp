#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>

#include "trudi/adversary.hpp"
#include "trudi/channel.hpp"
#include "trudi/transmitter.hpp"

namespace trudi {

using nlohmann::json;

/// Malformed or out-of-range configuration input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

HashConfig hash_config_from_json(const json& j);
json to_json(const HashConfig& h);

StrategyConfig strategy_from_json(const json& j);
json to_json(const StrategyConfig& s);

LossModel loss_from_json(const json& j);
json to_json(const LossModel& l);

AdversaryConfig adversary_from_json(const json& j);
json to_json(const AdversaryConfig& a);

/// Every field except "strategy" is optional; unknown keys are rejected.
Scenario scenario_from_json(const json& j);
json to_json(const Scenario& s);

/// Reads a scenario file. Comments (// and /* */) are allowed.
Scenario load_scenario(const std::filesystem::path& path);

/// {"decimal": 0.9921875, "exact": "127/128"}
json rational_json(const Rational& r);

json to_json(const Metrics& m);
json to_json(const AttackStats& a);
json to_json(const SweepTable& t);

/// Field-by-field frame rendering; keys and MAC as lowercase hex.
json to_json(const UFrame& f);
UFrame frame_from_json(const json& j);

std::string hex(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> from_hex(const std::string& text);

std::string metrics_csv(const Metrics& m);
std::string sweep_csv(const SweepTable& t);

}  // namespace trudi
