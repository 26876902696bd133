#include "trudi/adversary.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "trudi/channel.hpp"

namespace trudi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

const std::vector<std::uint8_t>& forged_message() {
  static const std::vector<std::uint8_t> msg{'f', 'o', 'r', 'g', 'e', 'd'};
  return msg;
}

}  // namespace

std::string adversary_name(const AdversaryConfig& config) {
  return std::visit(overloaded{
                        [](const Masquerade&) { return std::string("masquerade"); },
                        [](const DosSpam&) { return std::string("dos-spam"); },
                        [](const BruteForce&) { return std::string("brute-force"); },
                    },
                    config);
}

void validate(const AdversaryConfig& config) {
  std::visit(overloaded{
                 [](const Masquerade& m) {
                   if (!(m.injection_rate > 0) || !std::isfinite(m.injection_rate)) {
                     throw std::invalid_argument("masquerade: injection_rate must be positive");
                   }
                 },
                 [](const DosSpam& d) {
                   if (!(d.rate > 0) || !std::isfinite(d.rate)) {
                     throw std::invalid_argument("dos-spam: rate must be positive");
                   }
                   if (d.tail.count() < 0) throw std::invalid_argument("dos-spam: tail must not be negative");
                 },
                 [](const BruteForce& b) {
                   if (!(b.hash_rate > 0) || !std::isfinite(b.hash_rate)) {
                     throw std::invalid_argument("brute-force: hash_rate must be positive");
                   }
                 },
             },
             config);
}

std::vector<std::uint8_t> forge_frame(const ScKey& sc_key, const UFrame& tmpl, const Key& guess) {
  UFrame f = tmpl;
  f.freshness = tmpl.freshness + 1;
  for (auto& e : f.entries) {
    if (!e.tau) continue;
    e.omega = false;
    e.index = static_cast<std::uint16_t>(e.index + 1);
    e.key = guess;
  }
  f.message = forged_message();
  return encode_frame(f, sc_key);
}

std::vector<std::uint8_t> forge_replay(const ScKey& sc_key, const UFrame& tmpl) {
  UFrame f = tmpl;
  f.freshness = tmpl.freshness + 1;
  f.message = forged_message();
  return encode_frame(f, sc_key);
}

BruteForceResult bruteforce_attack(const Key& root, std::uint32_t n, const HashConfig& hash,
                                   std::uint64_t budget, Rng& rng) {
  BruteForceResult res;
  if (budget == 0) return res;

  const std::size_t cap = std::max<std::uint32_t>(n, 1);
  std::vector<Key> ring(cap);
  std::uint64_t appended = 0;

  Key k = random_key(rng, hash);
  while (res.hash_calls < budget) {
    ring[appended % cap] = k;
    ++appended;
    k = hash_step(k, hash);
    ++res.hash_calls;
    if (k == root) {
      res.found = true;
      const std::uint64_t kept = std::min<std::uint64_t>(appended, n);
      res.chain.reserve(kept + 1);
      res.chain.push_back(root);
      // Newest buffered key hashes once onto the root, the oldest `kept` times.
      for (std::uint64_t j = 1; j <= kept; ++j) res.chain.push_back(ring[(appended - j) % cap]);
      return res;
    }
  }
  return res;
}

Mtbf predicted_mtbf(double hash_rate, unsigned key_bits) {
  if (!(hash_rate > 0) || !std::isfinite(hash_rate)) {
    throw std::invalid_argument("hash rate must be positive and finite");
  }
  using boost::multiprecision::cpp_int;
  using boost::multiprecision::cpp_rational;
  const cpp_rational rate(hash_rate);  // exact binary value of the double
  Mtbf out;
  out.seconds = cpp_rational(cpp_int(1) << key_bits) / rate;
  out.seconds_approx = out.seconds.convert_to<double>();
  out.years_approx = cpp_rational(out.seconds / seconds_per_year).convert_to<double>();
  return out;
}

std::uint32_t chain_lifetime_frames(const Strategy& s) {
  return is_dual(s) ? period_frames(s) : chain_length(s);
}

namespace {

AttackStats brute_force_campaign(const BruteForce& bf, const Scenario& scenario) {
  const auto& strategy = scenario.strategy;
  const double lifetime_s = static_cast<double>(chain_lifetime_frames(strategy.strategy)) *
                            static_cast<double>(scenario.period.count()) * 1e-6;

  AttackStats st;
  st.kind = "brute-force";
  st.budget_per_lifetime = static_cast<std::uint64_t>(std::llround(bf.hash_rate * lifetime_s));
  st.predicted_mtbf = predicted_mtbf(bf.hash_rate, strategy.hash.key_bits).seconds_approx;
  st.predicted_success =
      1.0 - std::pow(1.0 - std::ldexp(1.0, -static_cast<int>(strategy.hash.key_bits)),
                     static_cast<double>(st.budget_per_lifetime));

  Rng master(scenario.seed);
  Transmitter tx(strategy, master(), LinkInfo{1, 1});
  Rng attacker(master());
  const std::uint32_t n = chain_length(strategy.strategy);

  double time_sum = 0;
  const std::vector<std::uint8_t> empty;
  while (st.lifetimes < bf.trials) {
    const UFrame f = tx.emit(empty);
    if (!f.carries_root()) continue;
    for (const auto& e : f.entries) {
      if (!e.tau || e.index != 0) continue;
      const BruteForceResult r = bruteforce_attack(e.key, n, strategy.hash, st.budget_per_lifetime,
                                                   attacker);
      ++st.lifetimes;
      st.attempts += r.hash_calls;
      if (r.found) {
        ++st.successes;
        time_sum += static_cast<double>(r.hash_calls) / bf.hash_rate;
      }
    }
  }
  st.simulated_seconds = static_cast<double>(st.lifetimes) * lifetime_s;
  if (st.successes > 0) {
    st.time_to_compromise = time_sum / static_cast<double>(st.successes);
    st.observed_mtbf = st.simulated_seconds / static_cast<double>(st.successes);
  }
  return st;
}

}  // namespace

AttackStats run_attack_campaign(const AdversaryConfig& config, const Scenario& scenario) {
  validate(config);
  if (const auto* bf = std::get_if<BruteForce>(&config)) {
    validate(scenario.strategy);
    return brute_force_campaign(*bf, scenario);
  }
  Scenario sc = scenario;
  sc.adversary = config;
  const Metrics m = run(sc);
  AttackStats st;
  st.kind = adversary_name(config);
  st.attempts = m.forged_injected;
  st.successes = m.false_positives;
  st.recoveries = m.recoveries;
  st.false_negatives = m.false_negatives;
  const Duration end = sc.frame_count > 0 ? sc.period * static_cast<std::int64_t>(sc.frame_count)
                                          : Duration{0};
  st.simulated_seconds = static_cast<double>(end.count()) * 1e-6;
  if (st.successes > 0) st.observed_mtbf = st.simulated_seconds / static_cast<double>(st.successes);
  return st;
}

}  // namespace trudi
