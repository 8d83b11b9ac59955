#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "ltpc/sched.hpp"
#include "support.hpp"

using namespace ltpc;
using namespace ltpc::sched;

namespace {

Schedule sched_of(std::initializer_list<const char*> rows) {
  Schedule s;
  for (const char* r : rows) s.push_back(RetrainHistory::parse(r));
  return s;
}

StrategyConfig st(Strategy kind, int n_bar = 1, int k_bar = 1) {
  StrategyConfig c;
  c.kind = kind;
  c.n_bar = n_bar;
  c.k_bar = k_bar;
  return c;
}

std::set<std::string> histories(const Schedule& s) {
  std::set<std::string> out;
  for (const auto& h : s) out.insert(h.to_string());
  return out;
}

// Joint (matrix) form of each objective, written independently of the
// per-slot implementation.
double joint_score(const StrategyConfig& c, const Schedule& s, int i) {
  double total = 0.0;
  for (const auto& h : s) {
    double ones = 0.0, last = 0.0, dot = 0.0;
    for (int j = 0; j < i; ++j) {
      const double b = h.bit(static_cast<std::size_t>(j)) ? 1.0 : 0.0;
      ones += b;
      if (j == i - 1) last = b;
      dot += b * std::exp(-std::abs(c.k_bar - (j + 1)));
    }
    switch (c.kind) {
      case Strategy::ST1: total += last + ones / (1.0 + i); break;
      case Strategy::ST2: total += -std::abs(ones - c.n_bar) + ones / (1.0 + i); break;
      case Strategy::ST3: total += (ones == 1.0) ? dot : 0.0; break;
    }
  }
  return total;
}

}  // namespace

TEST_CASE("weight vector") {
  const auto w = weight_vector(1, 4);
  REQUIRE(w.size() == 4);
  CHECK(w[0] == 1.0);
  CHECK(w[1] == doctest::Approx(std::exp(-1.0)));
  CHECK(w[2] == doctest::Approx(std::exp(-2.0)));
  CHECK(w[3] == doctest::Approx(std::exp(-3.0)));
  const auto w2 = weight_vector(2, 4);
  CHECK(w2[0] == doctest::Approx(std::exp(-1.0)));
  CHECK(w2[1] == 1.0);
  CHECK(w2[2] == doctest::Approx(std::exp(-1.0)));
  CHECK(w2[3] == doctest::Approx(std::exp(-2.0)));
  for (int j = 1; j <= 6; ++j) CHECK(weight_vector(j, 6)[j - 1] == 1.0);
  CHECK(test::error_code_of([] { weight_vector(5, 4); }) == Errc::invalid_range);
  CHECK(test::error_code_of([] { weight_vector(0, 4); }) == Errc::invalid_range);
}

TEST_CASE("score hand examples") {
  // (1 + 2/3) + (1 + 1/3)
  CHECK(score(st(Strategy::ST1), sched_of({"11", "01"}), 2) == doctest::Approx(3.0));
  CHECK(score(st(Strategy::ST2, 1), sched_of({"10", "01"}), 2) == doctest::Approx(2.0 / 3.0));
  CHECK(score(st(Strategy::ST3, 1, 1), sched_of({"1000"}), 4) == doctest::Approx(1.0));
  CHECK(score(st(Strategy::ST3, 1, 1), sched_of({"1100"}), 4) == 0.0);
  CHECK(test::error_code_of([] { score(st(Strategy::ST1), sched_of({"11", "0"}), 2); }) ==
        Errc::dimension_mismatch);
}

TEST_CASE("score decomposes over slots") {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 1000; ++t) {
    const int i = 1 + static_cast<int>(rng() % 8);
    const std::size_t slots = 1 + rng() % 4;
    Schedule s;
    for (std::size_t k = 0; k < slots; ++k) {
      std::vector<std::uint8_t> bits(static_cast<std::size_t>(i));
      for (auto& b : bits) b = rng() & 1u;
      s.emplace_back(bits);
    }
    const StrategyConfig c = st(static_cast<Strategy>(t % 3), static_cast<int>(rng() % 4),
                                1 + static_cast<int>(rng() % static_cast<unsigned>(i)));
    double per_slot = 0.0;
    for (const auto& h : s) per_slot += slot_score(c, h, i);
    CHECK(score(c, s, i) == doctest::Approx(per_slot).epsilon(1e-12));
    CHECK(score(c, s, i) == doctest::Approx(joint_score(c, s, i)).epsilon(1e-12));
  }
}

TEST_CASE("feasible extensions") {
  const auto m1 = feasible_extensions({}, 1, 4);
  REQUIRE(m1.size() == 2);
  CHECK(concat_bits(m1[0]) == "0");
  CHECK(concat_bits(m1[1]) == "1");

  const auto m2 = feasible_extensions(sched_of({"1"}), 2, 4);
  REQUIRE(m2.size() == 4);
  std::set<std::string> got;
  for (const auto& s : m2) {
    REQUIRE(s.size() == 2);
    CHECK(s[0].bit(0));
    CHECK_FALSE(s[1].bit(0));
    got.insert(concat_bits(s));
  }
  CHECK(got == std::set<std::string>{"1000", "1001", "1100", "1101"});

  const auto sat = feasible_extensions(sched_of({"1"}), 2, 1);
  REQUIRE(sat.size() == 2);
  CHECK(concat_bits(sat[0]) == "10");
  CHECK(concat_bits(sat[1]) == "11");
}

TEST_CASE("four-mission schedules") {
  CHECK(histories(plan(st(Strategy::ST2, 1), 4, 4).back().schedule) ==
        std::set<std::string>{"1000", "0100", "0010", "0001"});
  CHECK(histories(plan(st(Strategy::ST1), 4, 4).back().schedule) ==
        std::set<std::string>{"1111", "0111", "0011", "0001"});
  for (int k = 1; k <= 4; ++k)
    CHECK(histories(plan(st(Strategy::ST3, 1, k), 4, 4).back().schedule) ==
          std::set<std::string>{"1000", "0100", "0010", "0001"});
}

TEST_CASE("mission-1 decisions") {
  const auto d1 = next_schedule_bruteforce(st(Strategy::ST1), {}, 1, 4);
  CHECK(concat_bits(d1.schedule) == "1");
  CHECK(d1.spawned_slot == std::optional<std::size_t>{0});
  const auto d0 = next_schedule_bruteforce(st(Strategy::ST2, 0), {}, 1, 4);
  CHECK(concat_bits(d0.schedule) == "0");
}

TEST_CASE("greedy equals brute force on every reachable schedule") {
  std::vector<StrategyConfig> configs{st(Strategy::ST1)};
  for (int n = 0; n <= 3; ++n) configs.push_back(st(Strategy::ST2, n));
  for (int k = 1; k <= 6; ++k) configs.push_back(st(Strategy::ST3, 1, k));

  std::mt19937_64 rng(2);
  for (int cap = 1; cap <= 4; ++cap) {
    for (const auto& c : configs) {
      // Walk the greedy trajectory and also random feasible predecessors.
      for (int trial = 0; trial < 6; ++trial) {
        Schedule prev;
        for (int i = 1; i <= 6; ++i) {
          const auto g = next_schedule(c, prev, i, cap);
          const auto b = next_schedule_bruteforce(c, prev, i, cap);
          CHECK(g.schedule == b.schedule);
          CHECK(score(c, g.schedule, i) == score(c, b.schedule, i));
          CHECK(g.retrain_mask == b.retrain_mask);
          CHECK(g.spawned_slot == b.spawned_slot);

          const auto ext = feasible_extensions(prev, i, cap);
          CHECK(std::find(ext.begin(), ext.end(), g.schedule) != ext.end());
          for (std::size_t k = 0; k < prev.size(); ++k)
            for (std::size_t j = 0; j < prev[k].length(); ++j)
              CHECK(g.schedule[k].bit(j) == prev[k].bit(j));

          prev = trial == 0 ? g.schedule : ext[rng() % ext.size()];
        }
      }
    }
  }
}

TEST_CASE("strategy properties") {
  for (int cap = 1; cap <= 4; ++cap) {
    Schedule prev;
    for (int i = 1; i <= 8; ++i) {
      prev = next_schedule(st(Strategy::ST1), prev, i, cap).schedule;
      for (const auto& h : prev) CHECK(h.last_bit());
    }
    for (const auto& d : plan(st(Strategy::ST2, 1), 8, cap))
      for (const auto& h : d.schedule) CHECK(ones_count(h) <= 1);
    const auto full = plan(st(Strategy::ST2, 1), cap, cap);
    for (const auto& h : full.back().schedule) CHECK(ones_count(h) == 1);
  }
}

TEST_CASE("brute force enumeration bound") {
  Schedule prev;
  for (int i = 1; i <= 12; ++i) prev = next_schedule(st(Strategy::ST1), prev, i, 2).schedule;
  CHECK(test::error_code_of([&] { next_schedule_bruteforce(st(Strategy::ST1), prev, 13, 2); }) ==
        Errc::enumeration_bound);
}

TEST_CASE("ST3 fusion filter") {
  const Schedule diag = sched_of({"1000", "0100", "0010", "0001"});
  CHECK(st3_fusion_filter(diag, 1) == std::vector<std::size_t>{0});
  CHECK(st3_fusion_filter(diag, 3) == std::vector<std::size_t>{2});
  CHECK(st3_fusion_filter(sched_of({"1100", "0111"}), 1).empty());
}

TEST_CASE("strategy config validation") {
  CHECK(test::error_code_of([] { st(Strategy::ST3, 1, 5).validate(4); }) == Errc::bad_parameter);
  CHECK(test::error_code_of([] { st(Strategy::ST2, -1).validate(4); }) == Errc::bad_parameter);
  CHECK_NOTHROW(st(Strategy::ST3, 1, 4).validate(4));
  CHECK(parse_strategy("st2") == Strategy::ST2);
  CHECK(st(Strategy::ST2, 1).describe() == "ST2(n=1)");
}
