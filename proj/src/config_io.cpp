#include "trudi/config_io.hpp"

#include <fstream>
#include <initializer_list>
#include <limits>
#include <sstream>

namespace trudi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_object(const json& j, const char* what) {
  if (!j.is_object()) throw ConfigError(std::string(what) + ": expected an object");
}

void check_keys(const json& j, const char* what, std::initializer_list<const char*> allowed) {
  require_object(j, what);
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError(std::string(what) + ": unknown key \"" + key + "\"");
  }
}

std::uint64_t get_uint(const json& j, const char* key, std::uint64_t fallback,
                       std::uint64_t max = std::numeric_limits<std::uint64_t>::max()) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0)) {
    throw ConfigError(std::string(key) + ": expected a non-negative integer");
  }
  const auto x = v.get<std::uint64_t>();
  if (x > max) throw ConfigError(std::string(key) + ": value " + std::to_string(x) + " too large");
  return x;
}

double get_double(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(std::string(key) + ": expected a number");
  return v.get<double>();
}

std::string get_string(const json& j, const char* key, const std::string& fallback) {
  if (!j.contains(key)) return fallback;
  const json& v = j.at(key);
  if (!v.is_string()) throw ConfigError(std::string(key) + ": expected a string");
  return v.get<std::string>();
}

Duration get_us(const json& j, const char* key, Duration fallback) {
  return Duration(static_cast<std::int64_t>(
      get_uint(j, key, static_cast<std::uint64_t>(fallback.count()),
               static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))));
}

std::uint16_t get_u16(const json& j, const char* key, std::uint16_t fallback) {
  return static_cast<std::uint16_t>(get_uint(j, key, fallback, 0xffff));
}

template <class F>
auto translating(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

}  // namespace

HashConfig hash_config_from_json(const json& j) {
  return translating([&] {
    check_keys(j, "hash", {"algorithm", "key_bits"});
    HashConfig h;
    h.algorithm = hash_algorithm_from_string(get_string(j, "algorithm", "sha256"));
    h.key_bits = static_cast<unsigned>(get_uint(j, "key_bits", h.key_bits, HashConfig::max_key_bits));
    h.validate();
    return h;
  });
}

json to_json(const HashConfig& h) {
  return json{{"algorithm", std::string(to_string(h.algorithm))}, {"key_bits", h.key_bits}};
}

StrategyConfig strategy_from_json(const json& j) {
  return translating([&] {
    require_object(j, "strategy");
    const std::string kind = get_string(j, "kind", "");
    StrategyConfig cfg;
    if (kind == "basic") {
      check_keys(j, "strategy", {"kind", "n", "hash"});
      cfg.strategy = Basic{get_u16(j, "n", Basic{}.n)};
    } else if (kind == "overlapped") {
      check_keys(j, "strategy", {"kind", "n", "q", "hash"});
      cfg.strategy = Overlapped{get_u16(j, "n", Overlapped{}.n), get_u16(j, "q", Overlapped{}.q)};
    } else if (kind == "dual-full") {
      check_keys(j, "strategy", {"kind", "half", "junction_keys", "hash"});
      cfg.strategy = DualFull{get_u16(j, "half", DualFull{}.half),
                              static_cast<unsigned>(get_uint(j, "junction_keys", 2, 3))};
    } else if (kind == "dual-sparse") {
      check_keys(j, "strategy", {"kind", "n", "m", "hash"});
      cfg.strategy = DualSparse{get_u16(j, "n", DualSparse{}.n), get_u16(j, "m", DualSparse{}.m)};
    } else {
      throw ConfigError("strategy: unknown kind \"" + kind + "\"");
    }
    if (j.contains("hash")) cfg.hash = hash_config_from_json(j.at("hash"));
    validate(cfg);
    return cfg;
  });
}

json to_json(const StrategyConfig& s) {
  json j = std::visit(overloaded{
                          [](const Basic& b) { return json{{"kind", "basic"}, {"n", b.n}}; },
                          [](const Overlapped& o) {
                            return json{{"kind", "overlapped"}, {"n", o.n}, {"q", o.q}};
                          },
                          [](const DualFull& d) {
                            return json{{"kind", "dual-full"},
                                        {"half", d.half},
                                        {"junction_keys", d.junction_keys}};
                          },
                          [](const DualSparse& d) {
                            return json{{"kind", "dual-sparse"}, {"n", d.n}, {"m", d.m}};
                          },
                      },
                      s.strategy);
  j["hash"] = to_json(s.hash);
  return j;
}

LossModel loss_from_json(const json& j) {
  return translating([&]() -> LossModel {
    require_object(j, "loss");
    const std::string kind = get_string(j, "kind", "");
    if (kind == "bernoulli") {
      check_keys(j, "loss", {"kind", "p"});
      return Bernoulli{get_double(j, "p", 0.0)};
    }
    if (kind == "gilbert-elliott") {
      check_keys(j, "loss", {"kind", "p_gb", "p_bg", "e_g", "e_b"});
      const GilbertElliott d;
      return GilbertElliott{get_double(j, "p_gb", d.p_gb), get_double(j, "p_bg", d.p_bg),
                            get_double(j, "e_g", d.e_g), get_double(j, "e_b", d.e_b)};
    }
    if (kind == "schedule") {
      check_keys(j, "loss", {"kind", "dropped"});
      Schedule s;
      if (j.contains("dropped")) {
        const json& list = j.at("dropped");
        if (!list.is_array()) throw ConfigError("loss.dropped: expected an array");
        for (const auto& v : list) {
          if (!v.is_number_unsigned()) throw ConfigError("loss.dropped: expected ordinals");
          s.dropped.insert(v.get<std::uint64_t>());
        }
      }
      return s;
    }
    throw ConfigError("loss: unknown kind \"" + kind + "\"");
  });
}

json to_json(const LossModel& l) {
  return std::visit(overloaded{
                        [](const Bernoulli& b) { return json{{"kind", "bernoulli"}, {"p", b.p}}; },
                        [](const GilbertElliott& g) {
                          return json{{"kind", "gilbert-elliott"},
                                      {"p_gb", g.p_gb},
                                      {"p_bg", g.p_bg},
                                      {"e_g", g.e_g},
                                      {"e_b", g.e_b}};
                        },
                        [](const Schedule& s) {
                          return json{{"kind", "schedule"},
                                      {"dropped", std::vector<std::uint64_t>(s.dropped.begin(),
                                                                             s.dropped.end())}};
                        },
                    },
                    l);
}

AdversaryConfig adversary_from_json(const json& j) {
  return translating([&]() -> AdversaryConfig {
    require_object(j, "adversary");
    const std::string kind = get_string(j, "kind", "");
    AdversaryConfig out;
    if (kind == "masquerade") {
      check_keys(j, "adversary", {"kind", "injection_rate", "key_guess"});
      Masquerade m;
      m.injection_rate = get_double(j, "injection_rate", m.injection_rate);
      const std::string guess = get_string(j, "key_guess", "random");
      if (guess == "random") {
        m.key_guess = KeyGuess::random;
      } else if (guess == "replay-old-key") {
        m.key_guess = KeyGuess::replay_old_key;
      } else {
        throw ConfigError("adversary.key_guess: expected \"random\" or \"replay-old-key\"");
      }
      out = m;
    } else if (kind == "dos-spam") {
      check_keys(j, "adversary", {"kind", "rate", "tail_us"});
      DosSpam d;
      d.rate = get_double(j, "rate", d.rate);
      d.tail = get_us(j, "tail_us", d.tail);
      out = d;
    } else if (kind == "brute-force") {
      check_keys(j, "adversary", {"kind", "hash_rate", "trials"});
      BruteForce b;
      b.hash_rate = get_double(j, "hash_rate", b.hash_rate);
      b.trials = get_uint(j, "trials", b.trials);
      out = b;
    } else {
      throw ConfigError("adversary: unknown kind \"" + kind + "\"");
    }
    validate(out);
    return out;
  });
}

json to_json(const AdversaryConfig& a) {
  return std::visit(
      overloaded{
          [](const Masquerade& m) {
            return json{{"kind", "masquerade"},
                        {"injection_rate", m.injection_rate},
                        {"key_guess", m.key_guess == KeyGuess::random ? "random" : "replay-old-key"}};
          },
          [](const DosSpam& d) {
            return json{{"kind", "dos-spam"}, {"rate", d.rate}, {"tail_us", d.tail.count()}};
          },
          [](const BruteForce& b) {
            return json{{"kind", "brute-force"}, {"hash_rate", b.hash_rate}, {"trials", b.trials}};
          },
      },
      a);
}

Scenario scenario_from_json(const json& j) {
  return translating([&] {
    check_keys(j, "scenario",
               {"strategy", "loss", "frame_count", "period_us", "arrival", "recovery_latency_us",
                "t_to_us", "timeout_policy", "seed", "adversary", "message_size"});
    if (!j.contains("strategy")) throw ConfigError("scenario: missing \"strategy\"");
    Scenario s;
    s.strategy = strategy_from_json(j.at("strategy"));
    if (j.contains("loss")) s.loss = loss_from_json(j.at("loss"));
    s.frame_count = get_uint(j, "frame_count", s.frame_count);
    s.period = get_us(j, "period_us", s.period);
    const std::string arrival = get_string(j, "arrival", "periodic");
    if (arrival == "periodic") {
      s.arrival = Arrival::periodic;
    } else if (arrival == "exponential") {
      s.arrival = Arrival::exponential;
    } else {
      throw ConfigError("scenario.arrival: expected \"periodic\" or \"exponential\"");
    }
    s.recovery_latency = get_us(j, "recovery_latency_us", s.recovery_latency);
    if (j.contains("t_to_us")) s.t_to = get_us(j, "t_to_us", Duration{0});
    const std::string policy = get_string(j, "timeout_policy", "fixed");
    if (policy == "fixed") {
      s.timeout_policy = TimeoutPolicy::fixed;
    } else if (policy == "remaining-chain") {
      s.timeout_policy = TimeoutPolicy::remaining_chain;
    } else {
      throw ConfigError("scenario.timeout_policy: expected \"fixed\" or \"remaining-chain\"");
    }
    s.seed = get_uint(j, "seed", s.seed);
    if (j.contains("adversary")) s.adversary = adversary_from_json(j.at("adversary"));
    s.message_size = static_cast<std::uint32_t>(get_uint(j, "message_size", s.message_size, 0xffff));
    if (!s.adversary || !std::holds_alternative<BruteForce>(*s.adversary)) validate(s);
    return s;
  });
}

json to_json(const Scenario& s) {
  json j{{"strategy", to_json(s.strategy)},
         {"loss", to_json(s.loss)},
         {"frame_count", s.frame_count},
         {"period_us", s.period.count()},
         {"arrival", s.arrival == Arrival::periodic ? "periodic" : "exponential"},
         {"recovery_latency_us", s.recovery_latency.count()},
         {"timeout_policy", s.timeout_policy == TimeoutPolicy::fixed ? "fixed" : "remaining-chain"},
         {"seed", s.seed},
         {"message_size", s.message_size}};
  if (s.t_to) j["t_to_us"] = s.t_to->count();
  if (s.adversary) j["adversary"] = to_json(*s.adversary);
  return j;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return scenario_from_json(j);
}

json rational_json(const Rational& r) {
  return json{{"decimal", static_cast<double>(r.numerator()) / static_cast<double>(r.denominator())},
              {"exact", to_string(r)}};
}

json to_json(const Metrics& m) {
  std::vector<std::int64_t> requests;
  for (const auto& t : m.recovery_requests) requests.push_back(t.count());
  json j{{"frames_sent", m.frames_sent},
         {"frames_delivered", m.frames_delivered},
         {"accepted", m.accepted},
         {"rejected_origin", m.rejected_origin},
         {"rejected_integrity", m.rejected_integrity},
         {"rejected_replay", m.rejected_replay},
         {"dropped_recovery_pending", m.dropped_recovery_pending},
         {"forged_injected", m.forged_injected},
         {"false_negatives", m.false_negatives},
         {"false_positives", m.false_positives},
         {"recoveries", m.recoveries},
         {"recovery_downtime_us", m.recovery_downtime.count()},
         {"recovery_requests_us", requests},
         {"keys_sent", m.keys_sent},
         {"hash_calls", m.hash_calls},
         {"measured_eta_kt", rational_json(m.measured_eta_kt)},
         {"max_survived_burst", m.max_survived_burst}};
  j["first_false_negative"] =
      m.first_false_negative ? json(*m.first_false_negative) : json(nullptr);
  return j;
}

json to_json(const AttackStats& a) {
  auto opt = [](const std::optional<double>& v) { return v ? json(*v) : json(nullptr); };
  return json{{"kind", a.kind},
              {"attempts", a.attempts},
              {"successes", a.successes},
              {"lifetimes", a.lifetimes},
              {"budget_per_lifetime", a.budget_per_lifetime},
              {"simulated_seconds", a.simulated_seconds},
              {"time_to_compromise_s", opt(a.time_to_compromise)},
              {"observed_mtbf_s", opt(a.observed_mtbf)},
              {"predicted_mtbf_s", opt(a.predicted_mtbf)},
              {"predicted_success", opt(a.predicted_success)},
              {"recoveries", a.recoveries},
              {"false_negatives", a.false_negatives}};
}

json to_json(const SweepTable& t) {
  json rows = json::array();
  for (const auto& r : t.rows) {
    rows.push_back(json{{"start", r.start}, {"length", r.length}, {"survived", r.survived}});
  }
  return json{{"first_start", t.first_start},
              {"period", t.period},
              {"frames_per_run", t.frames_per_run},
              {"tolerance", t.tolerance},
              {"rows", rows}};
}

std::string hex(std::span<const std::uint8_t> bytes) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const auto b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0x0f]);
  }
  return out;
}

std::vector<std::uint8_t> from_hex(const std::string& text) {
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  if (text.size() % 2 != 0) throw ConfigError("hex string of odd length");
  std::vector<std::uint8_t> out(text.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const int hi = nibble(text[2 * i]);
    const int lo = nibble(text[2 * i + 1]);
    if (hi < 0 || lo < 0) throw ConfigError("bad hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

json to_json(const UFrame& f) {
  json entries = json::array();
  for (const auto& e : f.entries) {
    if (!e.tau) {
      entries.push_back(json{{"tau", false}});
      continue;
    }
    entries.push_back(json{{"tau", true},
                           {"omega", e.omega},
                           {"c", e.counter},
                           {"i", e.index},
                           {"key", e.key.hex()}});
  }
  return json{{"sc_id", f.link.sc_id},
              {"src_id", f.link.src_id},
              {"freshness", f.freshness},
              {"entries", entries},
              {"message", hex(f.message)}};
}

UFrame frame_from_json(const json& j) {
  return translating([&] {
    check_keys(j, "frame", {"sc_id", "src_id", "freshness", "entries", "message"});
    UFrame f;
    f.link.sc_id = get_u16(j, "sc_id", 0);
    f.link.src_id = get_u16(j, "src_id", 0);
    f.freshness = get_uint(j, "freshness", 0);
    for (const auto& e : j.at("entries")) {
      AuthEntry a;
      a.tau = e.at("tau").get<bool>();
      if (a.tau) {
        a.omega = e.at("omega").get<bool>();
        a.counter = static_cast<std::uint8_t>(get_uint(e, "c", 0, 0xff));
        a.index = get_u16(e, "i", 0);
        a.key = Key::from_hex(e.at("key").get<std::string>());
      }
      f.entries.push_back(a);
    }
    f.message = from_hex(get_string(j, "message", ""));
    return f;
  });
}

std::string metrics_csv(const Metrics& m) {
  std::ostringstream out;
  out << "frames_sent,frames_delivered,accepted,rejected_origin,rejected_integrity,"
         "rejected_replay,dropped_recovery_pending,forged_injected,false_negatives,"
         "false_positives,recoveries,recovery_downtime_us,keys_sent,hash_calls,eta_exact,"
         "max_survived_burst\n";
  out << m.frames_sent << ',' << m.frames_delivered << ',' << m.accepted << ','
      << m.rejected_origin << ',' << m.rejected_integrity << ',' << m.rejected_replay << ','
      << m.dropped_recovery_pending << ',' << m.forged_injected << ',' << m.false_negatives << ','
      << m.false_positives << ',' << m.recoveries << ',' << m.recovery_downtime.count() << ','
      << m.keys_sent << ',' << m.hash_calls << ',' << to_string(m.measured_eta_kt) << ','
      << m.max_survived_burst << '\n';
  return out.str();
}

std::string sweep_csv(const SweepTable& t) {
  std::ostringstream out;
  out << "start,length,survived\n";
  for (const auto& r : t.rows) out << r.start << ',' << r.length << ',' << (r.survived ? 1 : 0) << '\n';
  return out.str();
}

}  // namespace trudi
