#include "trudi/channel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace trudi {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

// Same value on every platform, unlike std::uniform_real_distribution.
double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

class LossProcess {
 public:
  LossProcess(const LossModel& model, std::uint64_t seed) : model_(model), rng_(seed) {}

  bool lost(std::uint64_t ordinal) {
    return std::visit(overloaded{
                          [&](const Bernoulli& b) { return uniform01(rng_) < b.p; },
                          [&](const GilbertElliott& ge) {
                            const bool drop = uniform01(rng_) < (bad_ ? ge.e_b : ge.e_g);
                            const double u = uniform01(rng_);
                            bad_ = bad_ ? !(u < ge.p_bg) : u < ge.p_gb;
                            return drop;
                          },
                          [&](const Schedule& s) { return s.dropped.count(ordinal) != 0; },
                      },
                      model_);
  }

 private:
  const LossModel& model_;
  Rng rng_;
  bool bad_ = false;
};

std::vector<Duration> licit_times(const Scenario& s, Rng& rng) {
  std::vector<Duration> times;
  times.reserve(s.frame_count);
  Duration t{0};
  for (std::uint64_t j = 0; j < s.frame_count; ++j) {
    if (s.arrival == Arrival::periodic) {
      t += s.period;
    } else {
      const double gap = -std::log(1.0 - uniform01(rng)) * static_cast<double>(s.period.count());
      t += Duration(std::max<std::int64_t>(1, std::llround(gap)));
    }
    times.push_back(t);
  }
  return times;
}

std::vector<std::uint8_t> licit_message(std::uint64_t ordinal, std::uint32_t size) {
  std::vector<std::uint8_t> msg(size);
  for (std::uint32_t b = 0; b < size; ++b) {
    msg[b] = static_cast<std::uint8_t>(ordinal >> (8 * (b % 8)));
  }
  return msg;
}

}  // namespace

void validate(const Scenario& s) {
  validate(s.strategy);
  std::visit(overloaded{
                 [](const Bernoulli& b) {
                   if (!is_probability(b.p)) throw std::invalid_argument("loss: p must be in [0,1]");
                 },
                 [](const GilbertElliott& g) {
                   if (!is_probability(g.p_gb) || !is_probability(g.p_bg) ||
                       !is_probability(g.e_g) || !is_probability(g.e_b)) {
                     throw std::invalid_argument("loss: Gilbert-Elliott probabilities must be in [0,1]");
                   }
                 },
                 [](const Schedule& sch) {
                   if (sch.dropped.count(0) != 0) {
                     throw std::invalid_argument("loss: frame ordinals start at 1");
                   }
                 },
             },
             s.loss);
  if (s.frame_count < period_frames(s.strategy.strategy)) {
    throw std::invalid_argument("scenario: frame_count must cover one keychain period");
  }
  if (s.period.count() <= 0) throw std::invalid_argument("scenario: period must be positive");
  if (s.recovery_latency.count() < 0) {
    throw std::invalid_argument("scenario: recovery_latency must not be negative");
  }
  if (s.t_to && s.t_to->count() <= 0) throw std::invalid_argument("scenario: t_to must be positive");
  if (s.message_size > 0xffff) throw std::invalid_argument("scenario: message_size too large");
  if (s.adversary) {
    validate(*s.adversary);
    if (std::holds_alternative<BruteForce>(*s.adversary)) {
      throw std::invalid_argument("scenario: brute force is run as an attack campaign, not in-band");
    }
  }
}

Duration effective_t_to(const Scenario& s) { return s.t_to.value_or(s.period); }

Metrics run(const Scenario& s, const TraceObserver& observer) {
  validate(s);

  Rng master(s.seed);
  const std::uint64_t tx_seed = master();
  ScKey sc_key{};
  for (std::size_t b = 0; b < sc_key.size(); b += 8) {
    std::uint64_t w = master();
    for (std::size_t k = b; k < b + 8; ++k, w >>= 8) sc_key[k] = static_cast<std::uint8_t>(w);
  }
  LossProcess loss(s.loss, master());
  Rng arrival_rng(master());
  Rng adversary_rng(master());

  Transmitter tx(s.strategy, tx_seed, LinkInfo{1, 1});
  ReceiverConfig rc = receiver_config_for(s.strategy, sc_key, effective_t_to(s));
  rc.timeout_policy = s.timeout_policy;
  rc.period = s.period;
  Receiver rx(rc, tx.init_snapshot());

  const std::vector<Duration> times = licit_times(s, arrival_rng);

  // Forged traffic schedule.
  double forge_interval = 0;
  Duration forge_end{0};
  bool replay_guess = false;
  if (s.adversary) {
    std::visit(overloaded{
                   [&](const Masquerade& m) {
                     forge_interval = static_cast<double>(s.period.count()) / m.injection_rate;
                     forge_end = times.back();
                     replay_guess = m.key_guess == KeyGuess::replay_old_key;
                   },
                   [&](const DosSpam& d) {
                     forge_interval = static_cast<double>(s.period.count()) / d.rate;
                     forge_end = times.back() + d.tail;
                   },
                   [](const BruteForce&) {},
               },
               *s.adversary);
  }
  std::uint64_t forge_k = 0;
  auto next_forge_time = [&]() -> std::optional<Duration> {
    if (forge_interval <= 0) return std::nullopt;
    const Duration t(std::llround((static_cast<double>(forge_k) + 0.5) * forge_interval));
    if (t >= forge_end) return std::nullopt;
    return t;
  };

  Metrics m;
  Duration apply_at{0};  // meaningful while the receiver waits for recovery
  std::optional<UFrame> last_licit;

  auto emit_event = [&](const TraceEvent& ev) {
    if (observer) observer(ev);
  };

  // Fires due timers and recovery answers; `inclusive` also fires those due exactly at t.
  auto advance = [&](Duration t, bool inclusive) {
    auto due = [&](Duration d) { return inclusive ? d <= t : d < t; };
    for (;;) {
      if (rx.recovery_pending()) {
        if (!due(apply_at)) return;
        const Snapshot snap = tx.handle_recovery_request();
        rx.apply_recovery(snap);
        m.recovery_downtime += s.recovery_latency;
        TraceEvent ev;
        ev.kind = TraceEvent::Kind::recovery_applied;
        ev.time = apply_at;
        ev.snapshot = &snap;
        emit_event(ev);
        continue;
      }
      const auto deadline = rx.deadline();
      if (!deadline || !due(*deadline)) return;
      const RecoveryNeeded need = rx.on_timer_expiry(*deadline);
      ++m.recoveries;
      m.recovery_requests.push_back(need.deadline);
      apply_at = need.deadline + s.recovery_latency;
      TraceEvent ev;
      ev.kind = TraceEvent::Kind::recovery_requested;
      ev.time = need.deadline;
      emit_event(ev);
    }
  };

  // Efficiency window: from the first root-carrying frame up to (excluding) the last one.
  std::optional<std::uint64_t> window_frames, window_keys;
  std::uint64_t committed_frames = 0, committed_keys = 0;
  std::uint64_t loss_run = 0;

  std::size_t next_licit = 0;
  bool stop = false;
  while (!stop) {
    const std::optional<Duration> ft = next_forge_time();
    const bool have_licit = next_licit < times.size();
    if (!have_licit && !ft) break;
    const bool licit_first = have_licit && (!ft || times[next_licit] <= *ft);
    const Duration now = licit_first ? times[next_licit] : *ft;
    advance(now, false);

    if (licit_first) {
      const std::uint64_t ordinal = ++next_licit;
      UFrame frame = tx.emit(licit_message(ordinal, s.message_size));
      ++m.frames_sent;
      m.keys_sent += frame.key_count();
      if (frame.carries_root()) {
        if (window_frames) {
          committed_frames = *window_frames;
          committed_keys = *window_keys;
        } else {
          window_frames = 0;
          window_keys = 0;
        }
      }
      if (window_frames) {
        ++*window_frames;
        *window_keys += frame.key_count();
      }

      TraceEvent ev;
      ev.time = now;
      ev.ordinal = ordinal;
      ev.frame = &frame;
      if (loss.lost(ordinal)) {
        ++loss_run;
      } else {
        ++m.frames_delivered;
        const auto bytes = encode_frame(frame, sc_key);
        Outcome out = rx.process(bytes, now);
        m.hash_calls += out.hash_calls;
        switch (out.kind) {
          case OutcomeKind::accepted:
            ++m.accepted;
            m.max_survived_burst = std::max(m.max_survived_burst, loss_run);
            break;
          case OutcomeKind::rejected_origin: ++m.rejected_origin; break;
          case OutcomeKind::rejected_integrity: ++m.rejected_integrity; break;
          case OutcomeKind::rejected_replay: ++m.rejected_replay; break;
          case OutcomeKind::dropped_recovery_pending: ++m.dropped_recovery_pending; break;
        }
        if (out.kind != OutcomeKind::accepted && out.kind != OutcomeKind::dropped_recovery_pending) {
          ++m.false_negatives;
          if (!m.first_false_negative) m.first_false_negative = ordinal;
          if (s.stop_at_first_false_negative) stop = true;
        }
        loss_run = 0;
        ev.delivered = true;
        ev.outcome = std::move(out);
      }
      emit_event(ev);
      last_licit = std::move(frame);
    } else {
      ++forge_k;
      if (!last_licit) continue;  // nothing observed yet to imitate
      const Key guess = random_key(adversary_rng, s.strategy.hash);
      const auto bytes =
          replay_guess ? forge_replay(sc_key, *last_licit) : forge_frame(sc_key, *last_licit, guess);
      ++m.forged_injected;
      Outcome out = rx.process(bytes, now);
      m.hash_calls += out.hash_calls;
      switch (out.kind) {
        case OutcomeKind::accepted:
          ++m.accepted;
          ++m.false_positives;
          break;
        case OutcomeKind::rejected_origin: ++m.rejected_origin; break;
        case OutcomeKind::rejected_integrity: ++m.rejected_integrity; break;
        case OutcomeKind::rejected_replay: ++m.rejected_replay; break;
        case OutcomeKind::dropped_recovery_pending: ++m.dropped_recovery_pending; break;
      }
      TraceEvent ev;
      ev.time = now;
      ev.forged = true;
      ev.delivered = true;
      ev.outcome = std::move(out);
      emit_event(ev);
    }
  }
  if (!stop) advance(Duration::max(), true);

  if (committed_keys > 0) {
    m.measured_eta_kt = Rational(static_cast<std::int64_t>(committed_frames),
                                 static_cast<std::int64_t>(committed_keys));
  } else if (m.keys_sent > 0) {
    m.measured_eta_kt = Rational(static_cast<std::int64_t>(m.frames_sent),
                                 static_cast<std::int64_t>(m.keys_sent));
  }
  return m;
}

std::uint64_t max_tolerated_burst(const StrategyConfig& config) {
  validate(config);
  return std::visit(overloaded{
                        // The J-frame is the only bridge to the next chain; a burst
                        // starting on it breaks the stream.
                        [](const Basic&) -> std::uint64_t { return 0; },
                        [](const Overlapped& o) -> std::uint64_t { return o.q - 1u; },
                        [](const DualFull& d) -> std::uint64_t { return d.half; },
                        [](const DualSparse& d) -> std::uint64_t {
                          const std::uint64_t r = sparse_repetitions(d);
                          return d.m == 1 ? r : (r - 1) * d.m;
                        },
                    },
                    config.strategy);
}

SweepTable burst_sweep(const StrategyConfig& config, std::uint64_t horizon,
                       const SweepOptions& options) {
  validate(config);
  SweepTable table;
  table.first_start = first_junction_ordinal(config.strategy);
  table.period = period_frames(config.strategy);
  table.frames_per_run = std::max<std::uint64_t>(horizon, table.first_start + 3 * table.period);

  const std::uint64_t P = table.period;
  table.rows.resize(P * P);
  auto work = [&](std::uint64_t first, std::uint64_t step) {
    for (std::uint64_t si = first; si < P; si += step) {
      const std::uint64_t start = table.first_start + si;
      for (std::uint64_t len = 1; len <= P; ++len) {
        Scenario sc;
        sc.strategy = config;
        Schedule sch;
        for (std::uint64_t o = start; o < start + len; ++o) sch.dropped.insert(o);
        sc.loss = std::move(sch);
        sc.frame_count = table.frames_per_run;
        sc.period = options.period;
        sc.stop_at_first_false_negative = true;
        sc.message_size = 0;
        const Metrics m = run(sc);
        table.rows[si * P + (len - 1)] =
            SweepRow{start, len, m.false_negatives == 0 && m.recoveries == 0};
      }
    }
  };

  const unsigned threads = std::max(1u, options.threads);
  if (threads == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work, t, threads);
    for (auto& th : pool) th.join();
  }

  std::uint64_t tolerance = std::numeric_limits<std::uint64_t>::max();
  for (std::uint64_t si = 0; si < P; ++si) {
    std::uint64_t prefix = 0;
    while (prefix < P && table.rows[si * P + prefix].survived) ++prefix;
    tolerance = std::min(tolerance, prefix);
  }
  table.tolerance = tolerance;
  return table;
}

}  // namespace trudi
