#include <doctest.h>

#include <map>
#include <set>

#include "trudi/transmitter.hpp"

using namespace trudi;

namespace {

std::vector<UFrame> emit_n(Transmitter& tx, std::size_t count) {
  std::vector<UFrame> out;
  for (std::size_t k = 0; k < count; ++k) out.push_back(tx.emit(std::vector<std::uint8_t>{}));
  return out;
}

std::vector<unsigned> present(const UFrame& f) {
  std::vector<unsigned> g;
  for (unsigned i = 0; i < f.entries.size(); ++i) {
    if (f.entries[i].tau) g.push_back(i + 1);
  }
  return g;
}

const std::vector<StrategyConfig>& small_configs() {
  static const std::vector<StrategyConfig> configs = {
      {Basic{3}, {}},         {Basic{7}, {}},          {Overlapped{7, 1}, {}},
      {Overlapped{7, 2}, {}}, {Overlapped{9, 5}, {}},  {DualFull{2, 2}, {}},
      {DualFull{4, 2}, {}},   {DualFull{1, 3}, {}},    {DualFull{4, 3}, {}},
      {DualSparse{7, 1}, {}}, {DualSparse{11, 2}, {}}, {DualSparse{15, 3}, {}},
      {DualSparse{3, 3}, {}},
  };
  return configs;
}

}  // namespace

TEST_CASE("closed-form efficiency") {
  CHECK(theoretical_efficiency({Basic{127}, {}}) == Rational(127, 128));
  CHECK(theoretical_efficiency({Basic{255}, {}}) == Rational(255, 256));
  CHECK(theoretical_efficiency({Overlapped{127, 3}, {}}) == Rational(125, 128));
  CHECK(theoretical_efficiency({Overlapped{127, 16}, {}}) == Rational(7, 8));
  CHECK(theoretical_efficiency({DualSparse{127, 3}, {}}) == Rational(3, 4));
  CHECK(theoretical_efficiency({DualSparse{127, 7}, {}}) == Rational(7, 8));
  CHECK(theoretical_efficiency({DualFull{64, 2}, {}}) == Rational(1, 2));
  CHECK(theoretical_efficiency({DualFull{64, 3}, {}}) == Rational(64, 129));
  CHECK(theoretical_efficiency({Overlapped{127, 1}, {}}) == theoretical_efficiency({Basic{127}, {}}));
  CHECK(to_string(Rational(127, 128)) == "127/128");
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_AS(validate({Basic{0}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate({Overlapped{7, 0}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate({Overlapped{7, 5}, {}}), std::invalid_argument);
  CHECK_NOTHROW(validate({Overlapped{7, 4}, {}}));
  CHECK_THROWS_AS(validate({DualFull{4, 4}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate({DualFull{1, 2}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(validate({DualSparse{126, 3}, {}}), std::invalid_argument);
  CHECK_THROWS_AS(Transmitter({DualSparse{127, 0}, {}}, 1), std::invalid_argument);
  CHECK_THROWS_AS(validate({Basic{7}, HashConfig{HashAlgorithm::sha256, 0}}), std::invalid_argument);
}

TEST_CASE("dual index derivation") {
  CHECK(derive_dual_indices(1, 0, 64) == DualIndices{65, 0});
  CHECK(derive_dual_indices(65, 0, 64) == DualIndices{1, 1});
  CHECK(derive_dual_indices(64, 5, 64) == DualIndices{128, 5});
  CHECK(derive_dual_indices(128, 255, 64) == DualIndices{64, 0});
  CHECK_THROWS_AS(derive_dual_indices(0, 0, 64), std::invalid_argument);
  CHECK_THROWS_AS(derive_dual_indices(129, 0, 64), std::invalid_argument);
}

TEST_CASE("initial snapshots") {
  const Transmitter basic({Basic{127}, {}}, 1);
  const Snapshot& s = basic.init_snapshot();
  REQUIRE(s.slots.size() == 2);
  CHECK(s.slots[0].rho);
  CHECK(s.slots[0].iota_hat == 0);
  CHECK(s.slots[0].c_hat == 0);
  CHECK(s.slots[0].kappa_hat == basic.chain_of(1)->root());
  CHECK_FALSE(s.slots[1].rho);

  const Transmitter dual({DualFull{64, 2}, {}}, 1);
  const Snapshot& d = dual.init_snapshot();
  REQUIRE(d.slots.size() == 3);
  CHECK(d.slots[0].iota_hat == 0);
  CHECK(d.slots[1].iota_hat == 63);
  CHECK(d.slots[1].kappa_hat == dual.chain_of(2)->key_at(63));
  CHECK_FALSE(d.slots[2].rho);

  CHECK(Transmitter({DualFull{64, 3}, {}}, 1).init_snapshot().slots[1].iota_hat == 64);
  CHECK(Transmitter({DualSparse{127, 3}, {}}, 1).init_snapshot().slots[1].iota_hat == 31);

  CHECK(Transmitter({DualFull{8, 2}, {}}, 9).init_snapshot() ==
        Transmitter({DualFull{8, 2}, {}}, 9).init_snapshot());
  CHECK_FALSE(Transmitter({DualFull{8, 2}, {}}, 9).init_snapshot() ==
              Transmitter({DualFull{8, 2}, {}}, 10).init_snapshot());
}

TEST_CASE("basic pattern: A, A, J, A ...") {
  Transmitter tx({Basic{3}, {}}, 1);
  const Keychain first = *tx.chain_of(1);
  const auto f = emit_n(tx, 5);
  CHECK(present(f[0]) == std::vector<unsigned>{1});
  CHECK(f[0].entries[0].index == 1);
  CHECK(f[0].entries[0].key == first.key_at(1));
  CHECK(f[1].entries[0].key == first.key_at(2));
  REQUIRE(present(f[2]) == std::vector<unsigned>{1, 2});
  CHECK(f[2].entries[0].omega);
  CHECK(f[2].entries[0].key == first.key_at(3));
  CHECK(f[2].entries[1].index == 0);
  CHECK(f[2].entries[1].counter == 1);
  CHECK_FALSE(f[2].entries[1].omega);
  CHECK(present(f[3]) == std::vector<unsigned>{2});
  CHECK(f[3].entries[1].index == 1);
  CHECK(hash_step(f[3].entries[1].key, {}) == f[2].entries[1].key);
  for (std::size_t k = 0; k < f.size(); ++k) CHECK(f[k].freshness == k + 1);
}

TEST_CASE("overlapped pattern pairs shifting keys") {
  Transmitter tx({Overlapped{7, 3}, {}}, 1);
  const Keychain first = *tx.chain_of(1);
  const auto f = emit_n(tx, 12);
  for (int k = 0; k < 4; ++k) CHECK(present(f[k]).size() == 1);
  for (int k = 0; k < 3; ++k) {
    const UFrame& j = f[4 + k];
    REQUIRE(present(j) == std::vector<unsigned>{1, 2});
    CHECK(j.entries[0].omega);
    CHECK(j.entries[0].index == 5 + k);
    CHECK(j.entries[0].key == first.key_at(5 + k));
    CHECK(j.entries[1].index == k);
    CHECK(j.entries[1].counter == 1);
  }
  // next chain resumes at Q and hands over again after n-Q+1 frames
  CHECK(f[7].entries[1].index == 3);
  CHECK(present(f[7]) == std::vector<unsigned>{2});
  CHECK(present(f[9]) == std::vector<unsigned>{1, 2});
  CHECK(f[9].entries[0].index == 0);
  CHECK(f[9].entries[0].counter == 2);
}

TEST_CASE("2-key dual J-frame has two entries") {
  Transmitter tx({DualFull{2, 2}, {}}, 1);
  const auto f = emit_n(tx, 2);
  CHECK(present(f[0]) == std::vector<unsigned>{1, 2});
  REQUIRE(present(f[1]) == std::vector<unsigned>{2, 3});
  CHECK(f[1].entries[1].omega);
  CHECK(f[1].entries[1].index == 3);
  CHECK(f[1].entries[2].index == 0);
  CHECK_FALSE(f[1].entries[0].tau);
}

TEST_CASE("3-key dual J-frame also carries the other chain") {
  Transmitter tx({DualFull{2, 3}, {}}, 1);
  const auto f = emit_n(tx, 2);
  REQUIRE(present(f[1]) == std::vector<unsigned>{1, 2, 3});
  CHECK(f[1].entries[0].index == 2);
  CHECK(f[1].entries[1].index == 4);
  CHECK(f[1].entries[1].omega);
}

TEST_CASE("sparse pattern per half is (A,A,D) x (r-1) then (A,A,J)") {
  Transmitter tx({DualSparse{127, 3}, {}}, 1);
  const auto f = emit_n(tx, 96 * 4);
  for (std::size_t k = 0; k < f.size(); ++k) {
    const std::size_t pos = k % 96 + 1;
    const auto keys = present(f[k]).size();
    const bool root = f[k].carries_root();
    if (pos == 96) {
      CHECK((keys == 2 && root));
    } else if (pos % 3 == 0) {
      CHECK((keys == 2 && !root));
    } else {
      CHECK(keys == 1);
    }
  }
}

TEST_CASE("identifier rotation follows the six-step cycle") {
  for (const StrategyConfig& cfg :
       {StrategyConfig{DualFull{3, 2}, {}}, StrategyConfig{DualFull{3, 3}, {}},
        StrategyConfig{DualSparse{11, 2}, {}}}) {
    Transmitter tx(cfg, 1);
    const std::uint32_t half = junction_spacing(cfg.strategy);
    std::vector<std::pair<unsigned, unsigned>> seen;
    auto mapping = [&] {
      unsigned ga = 0, gb = 0;
      for (unsigned g = 1; g <= 3; ++g) {
        if (!tx.chain_of(g)) continue;
        (tx.role_of(g) == ChainRole::a ? ga : gb) = g;
      }
      return std::make_pair(ga, gb);
    };
    seen.push_back(mapping());
    for (int h = 0; h < 12; ++h) {
      emit_n(tx, half);
      seen.push_back(mapping());
    }
    const std::vector<std::pair<unsigned, unsigned>> cycle = {{1, 2}, {1, 3}, {2, 3},
                                                              {2, 1}, {3, 1}, {3, 2}};
    for (std::size_t k = 0; k < seen.size(); ++k) CHECK(seen[k] == cycle[k % 6]);
  }
}

TEST_CASE("key order, commitment before disclosure, identifier reuse") {
  for (const auto& cfg : small_configs()) {
    CAPTURE(strategy_name(cfg.strategy));
    Transmitter tx(cfg, 3);
    // (slot, counter) identifies a chain while it is bound
    std::map<std::pair<unsigned, int>, int> last_index;
    std::set<unsigned> live;
    const Snapshot& init = tx.init_snapshot();
    for (unsigned g = 1; g <= init.slots.size(); ++g) {
      if (!init.slots[g - 1].rho) continue;
      last_index[{g, init.slots[g - 1].c_hat}] = init.slots[g - 1].iota_hat;
      live.insert(g);
    }
    for (int k = 0; k < 10 * static_cast<int>(period_frames(cfg.strategy)); ++k) {
      const UFrame f = tx.emit(std::vector<std::uint8_t>{});
      std::set<unsigned> ending;
      for (unsigned g = 1; g <= f.entries.size(); ++g) {
        const auto& e = f.entries[g - 1];
        if (!e.tau) continue;
        const auto id = std::make_pair(g, static_cast<int>(e.counter));
        if (e.index == 0) {
          REQUIRE(live.count(g) == 0);  // identifier must be free before reuse
          REQUIRE(last_index.count(id) == 0);
          last_index[id] = 0;
          live.insert(g);
          continue;
        }
        REQUIRE(last_index.count(id) == 1);  // root committed earlier
        REQUIRE(e.index == last_index[id] + 1);
        last_index[id] = e.index;
        REQUIRE(e.index <= static_cast<int>(chain_length(cfg.strategy)));
        // omega marks the closing zone; the chain is released at its last key
        const int zone = static_cast<int>(is_dual(cfg.strategy) ? chain_length(cfg.strategy)
                                                                : junction_spacing(cfg.strategy));
        REQUIRE(e.omega == (e.index >= zone));
        if (e.index == static_cast<int>(chain_length(cfg.strategy))) ending.insert(g);
      }
      for (unsigned g : ending) {
        live.erase(g);
        for (auto it = last_index.begin(); it != last_index.end();) {
          it = it->first.first == g && it->second == static_cast<int>(chain_length(cfg.strategy))
                   ? last_index.erase(it)
                   : std::next(it);
        }
      }
    }
  }
}

TEST_CASE("lossless efficiency over whole periods equals the closed form") {
  for (const auto& cfg : small_configs()) {
    CAPTURE(strategy_name(cfg.strategy));
    Transmitter tx(cfg, 5);
    const auto f = emit_n(tx, first_junction_ordinal(cfg.strategy) + 3 * period_frames(cfg.strategy));
    std::int64_t frames = 0, keys = 0;
    for (std::size_t k = first_junction_ordinal(cfg.strategy) - 1;
         k < first_junction_ordinal(cfg.strategy) - 1 + 3 * period_frames(cfg.strategy); ++k) {
      ++frames;
      keys += static_cast<std::int64_t>(f[k].key_count());
    }
    CHECK(Rational(frames, keys) == theoretical_efficiency(cfg));
  }
}

TEST_CASE("sparse start-up disclosures are at most m frames apart") {
  Transmitter tx({DualSparse{127, 3}, {}}, 1);
  std::map<unsigned, std::uint64_t> last_seen;  // slot -> ordinal of the previous disclosure
  for (std::uint64_t k = 1; k <= 96 * 6; ++k) {
    const UFrame f = tx.emit(std::vector<std::uint8_t>{});
    for (unsigned g = 1; g <= 3; ++g) {
      const auto& e = f.entries[g - 1];
      if (!e.tau) continue;
      if (e.index == 0) {
        last_seen[g] = k;
        continue;
      }
      if (e.index <= 31 && last_seen.count(g)) CHECK(k - last_seen[g] <= 3);
      last_seen[g] = k;
    }
  }
}

TEST_CASE("recovery snapshot reflects the last disclosure") {
  Transmitter tx({Basic{7}, {}}, 1);
  CHECK(tx.handle_recovery_request() == tx.init_snapshot());
  emit_n(tx, 4);
  Snapshot s = tx.handle_recovery_request();
  CHECK(s.slots[0].iota_hat == 4);
  CHECK(s.slots[0].kappa_hat == tx.chain_of(1)->key_at(4));
  CHECK(s.freshness == 4);
  emit_n(tx, 3);  // frame 7 is the J-frame
  s = tx.handle_recovery_request();
  CHECK_FALSE(s.slots[0].rho);
  REQUIRE(s.slots[1].rho);
  CHECK(s.slots[1].iota_hat == 0);
  CHECK(s.slots[1].c_hat == 1);
}

TEST_CASE("counter wraps modulo 256") {
  Transmitter tx({Basic{1}, {}}, 1);
  std::uint8_t expected = 1;
  for (int k = 0; k < 600; ++k) {
    const UFrame f = tx.emit(std::vector<std::uint8_t>{});
    for (const auto& e : f.entries) {
      if (e.tau && e.index == 0) {
        CHECK(e.counter == expected);
        expected = static_cast<std::uint8_t>(expected + 1);
      }
    }
  }
}

TEST_CASE("oversized message") {
  Transmitter tx({Basic{7}, {}}, 1);
  CHECK_THROWS_AS(tx.emit(std::vector<std::uint8_t>(70000)), std::invalid_argument);
}
