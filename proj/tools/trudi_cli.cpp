// trudi: command-line front-end for the simulator and calculators.

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "trudi/adversary.hpp"
#include "trudi/channel.hpp"
#include "trudi/config_io.hpp"
#include "trudi/transmitter.hpp"
#include "trudi/wire.hpp"

namespace {

using namespace trudi;

struct StrategyFlags {
  std::string kind = "basic";
  unsigned n = 127;
  unsigned q = 3;
  unsigned half = 64;
  unsigned junction_keys = 2;
  unsigned m = 3;
  unsigned key_bits = 128;
  std::string hash = "sha256";

  void attach(CLI::App* app) {
    app->add_option("--strategy", kind, "basic | overlapped | dual-full | dual-sparse")
        ->check(CLI::IsMember({"basic", "overlapped", "dual-full", "dual-sparse"}));
    app->add_option("--n", n, "keys per chain (basic, overlapped, dual-sparse)");
    app->add_option("--q", q, "adjacent J-frames (overlapped)");
    app->add_option("--half", half, "half period N (dual-full)");
    app->add_option("--junction-keys", junction_keys, "2 or 3 (dual-full)");
    app->add_option("--m", m, "frames per sparse block (dual-sparse)");
    app->add_option("--key-bits", key_bits, "key width |K| in bits");
    app->add_option("--hash", hash, "sha256 | sha512 | sha3-256");
  }

  StrategyConfig build() const {
    json j{{"kind", kind}, {"hash", {{"algorithm", hash}, {"key_bits", key_bits}}}};
    if (kind == "basic") {
      j["n"] = n;
    } else if (kind == "overlapped") {
      j["n"] = n;
      j["q"] = q;
    } else if (kind == "dual-full") {
      j["half"] = half;
      j["junction_keys"] = junction_keys;
    } else {
      j["n"] = n;
      j["m"] = m;
    }
    return strategy_from_json(j);
  }
};

struct Output {
  std::string path;
  std::string format = "json";

  void write(const std::string& text) const {
    if (path.empty()) {
      std::cout << text;
      return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path);
    out << text;
  }
  void write(const json& j) const { write(j.dump(2) + "\n"); }
};

void configure_logging() {
  auto logger = spdlog::stderr_color_mt("trudi");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");
  spdlog::set_level(spdlog::level::warn);
  if (const char* env = std::getenv("TRUDI_LOG")) {
    spdlog::set_level(spdlog::level::from_str(env));
  }
}

json vectors_json() {
  ScKey sc_key{};
  for (std::size_t i = 0; i < sc_key.size(); ++i) sc_key[i] = static_cast<std::uint8_t>(0xa0 + i);

  json out{{"sc_key", hex(sc_key)}, {"vectors", json::array()}};
  auto add = [&](const std::string& name, unsigned key_bits, const UFrame& f) {
    const auto bytes = encode_frame(f, sc_key);
    out["vectors"].push_back(
        json{{"name", name}, {"key_bits", key_bits}, {"frame", to_json(f)}, {"encoded", hex(bytes)}});
  };
  auto stream = [&](const std::string& name, const StrategyConfig& cfg, unsigned frames) {
    Transmitter tx(cfg, 7, LinkInfo{0x0102, 0x0304});
    for (unsigned k = 1; k <= frames; ++k) {
      const std::vector<std::uint8_t> msg{static_cast<std::uint8_t>(k), 0x55};
      add(name + "-" + std::to_string(k), cfg.hash.key_bits, tx.emit(msg));
    }
  };

  stream("basic-n3", StrategyConfig{Basic{3}, HashConfig{}}, 4);
  stream("overlapped-n5-q2", StrategyConfig{Overlapped{5, 2}, HashConfig{}}, 5);
  stream("dual-full-n2-j2", StrategyConfig{DualFull{2, 2}, HashConfig{}}, 4);
  stream("dual-full-n2-j3", StrategyConfig{DualFull{2, 3}, HashConfig{}}, 4);
  stream("dual-sparse-n5-m2", StrategyConfig{DualSparse{5, 2}, HashConfig{}}, 4);
  stream("basic-n3-k12", StrategyConfig{Basic{3}, HashConfig{HashAlgorithm::sha256, 12}}, 3);

  UFrame empty;
  empty.entries.resize(3);
  empty.freshness = 42;
  add("all-absent", 128, empty);
  return out;
}

int run_cli(int argc, char** argv) {
  CLI::App app{"Multicast origin authentication with hash keychains: simulator and calculators"};
  app.require_subcommand(1);
  app.fallthrough();

  std::optional<std::uint64_t> seed;
  Output output;
  app.add_option("--seed", seed, "RNG seed; overrides the scenario's seed");
  app.add_option("--output", output.path, "write results to this file instead of stdout");
  app.add_option("--format", output.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));

  auto* simulate = app.add_subcommand("simulate", "run a scenario file");
  std::string scenario_path;
  simulate->add_option("scenario", scenario_path, "scenario file (JSON, comments allowed)")
      ->required();

  auto* sweep = app.add_subcommand("sweep", "exhaustive burst-loss sweep over one period");
  StrategyFlags sweep_flags;
  sweep_flags.attach(sweep);
  std::uint64_t horizon = 0;
  unsigned threads = 1;
  sweep->add_option("--horizon", horizon, "frames per run (at least first junction + 3 periods)");
  sweep->add_option("--threads", threads, "worker threads");

  auto* attack = app.add_subcommand("attack", "run an attack campaign");
  std::string attack_path;
  attack->add_option("scenario", attack_path, "scenario file with an \"adversary\" section")
      ->required();

  auto* efficiency = app.add_subcommand("efficiency", "closed-form key transmission efficiency");
  StrategyFlags eff_flags;
  eff_flags.attach(efficiency);

  auto* mtbf = app.add_subcommand("mtbf", "mean time before a brute-force compromise");
  double rate = 0;
  unsigned bits = 128;
  mtbf->add_option("--rate", rate, "attacker hash rate in H/s")->required();
  mtbf->add_option("--bits", bits, "key width in bits")->check(CLI::Range(0u, 512u));

  app.add_subcommand("vectors", "emit the golden frame-encoding vectors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  configure_logging();
  const bool csv = output.format == "csv";

  try {
    if (simulate->parsed()) {
      Scenario sc = load_scenario(scenario_path);
      if (seed) sc.seed = *seed;
      spdlog::info("simulating {} frames of {}", sc.frame_count, strategy_name(sc.strategy.strategy));
      const Metrics m = run(sc);
      spdlog::info("accepted {} of {} delivered, {} recoveries", m.accepted, m.frames_delivered,
                   m.recoveries);
      if (csv) {
        output.write(metrics_csv(m));
      } else {
        output.write(json{{"scenario", to_json(sc)},
                          {"metrics", to_json(m)},
                          {"theoretical_eta_kt", rational_json(theoretical_efficiency(sc.strategy))}});
      }
    } else if (sweep->parsed()) {
      const StrategyConfig cfg = sweep_flags.build();
      spdlog::info("sweeping {} over {} starts", strategy_name(cfg.strategy), period_frames(cfg.strategy));
      const SweepTable t = burst_sweep(cfg, horizon, SweepOptions{Duration{10000}, threads});
      if (csv) {
        output.write(sweep_csv(t));
      } else {
        output.write(json{{"strategy", to_json(cfg)},
                          {"analytic_tolerance", max_tolerated_burst(cfg)},
                          {"sweep", to_json(t)}});
      }
    } else if (attack->parsed()) {
      Scenario sc = load_scenario(attack_path);
      if (seed) sc.seed = *seed;
      if (!sc.adversary) throw ConfigError("attack: scenario has no \"adversary\" section");
      const AttackStats st = run_attack_campaign(*sc.adversary, sc);
      if (csv) {
        const json j = to_json(st);
        std::ostringstream head, row;
        bool first = true;
        for (const auto& [k, v] : j.items()) {
          head << (first ? "" : ",") << k;
          row << (first ? "" : ",") << (v.is_string() ? v.get<std::string>() : v.dump());
          first = false;
        }
        output.write(head.str() + "\n" + row.str() + "\n");
      } else {
        output.write(json{{"scenario", to_json(sc)}, {"attack", to_json(st)}});
      }
    } else if (efficiency->parsed()) {
      const StrategyConfig cfg = eff_flags.build();
      const Rational eta = theoretical_efficiency(cfg);
      if (csv) {
        const json r = rational_json(eta);
        output.write("decimal,exact\n" + r["decimal"].dump() + "," + to_string(eta) + "\n");
      } else {
        output.write(json{{"strategy", to_json(cfg)}, {"eta_kt", rational_json(eta)}});
      }
    } else if (mtbf->parsed()) {
      const Mtbf r = predicted_mtbf(rate, bits);
      std::ostringstream exact;
      exact << numerator(r.seconds) << "/" << denominator(r.seconds);
      if (csv) {
        output.write("seconds,years\n" + json(r.seconds_approx).dump() + "," +
                     json(r.years_approx).dump() + "\n");
      } else {
        output.write(json{{"hash_rate", rate},
                          {"key_bits", bits},
                          {"seconds", {{"decimal", r.seconds_approx}, {"exact", exact.str()}}},
                          {"years", r.years_approx}});
      }
    } else {
      if (csv) throw ConfigError("vectors: only JSON output is supported");
      output.write(vectors_json());
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_cli(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "fatal: " << e.what() << "\n";
    return 1;
  }
}
