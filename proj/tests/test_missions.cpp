#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <random>

#include "ltpc/missions.hpp"
#include "ltpc/state_io.hpp"
#include "ltpc/synth.hpp"
#include "support.hpp"

using namespace ltpc;
using namespace ltpc::missions;

namespace {

data::SynthConfig small_synth(std::uint64_t seed = 1) {
  data::SynthConfig c;
  c.n_places = 8;
  c.loop_length = 160;
  c.images_per_place = 6;
  c.feature_dim = 8;
  c.n_seasons = 4;
  c.seed = seed;
  return c;
}

MissionConfig small_config(sched::Strategy kind = sched::Strategy::ST2, int n_bar = 1) {
  MissionConfig cfg;
  cfg.strategy.kind = kind;
  cfg.strategy.n_bar = n_bar;
  cfg.train.epochs = 5;
  cfg.train.hidden_width = 8;
  cfg.train.learning_rate = 0.2;
  return cfg;
}

EnsembleState run_n(const std::vector<TrainingSet>& seasons, const MissionConfig& cfg, int n) {
  EnsembleState s = EnsembleState::initial(seasons[0].feature_dim(), cfg.capacity, cfg.train);
  for (int i = 0; i < n; ++i) s = run_adaptation(s, seasons[static_cast<std::size_t>(i)], cfg);
  return s;
}

std::size_t model_bytes(const classify::ModelParams& m) {
  return 3 * 8 + 4 * 8 + 8 * m.parameter_count();
}

// Partition header plus fixed-size per-class summary (ids, counts, two poses).
std::size_t partition_bytes(std::size_t K) { return 4 + 1 + 8 + K * (4 + 8 + 8 + 8 + 6 * 8); }

}  // namespace

TEST_CASE("initial ensemble") {
  const auto s = EnsembleState::initial(8, 4, classify::TrainConfig{});
  CHECK(s.mission == 0);
  CHECK(s.classifiers.size() == 1);
  CHECK_FALSE(s.classifiers[0].trained());
  CHECK(s.schedule().empty());
}

TEST_CASE("first mission under ST1") {
  const auto seasons = data::synth_generate(small_synth());
  const auto s = run_n(seasons, small_config(sched::Strategy::ST1), 1);
  CHECK(s.mission == 1);
  REQUIRE(s.classifiers.size() == 1);
  CHECK(s.classifiers[0].history.to_string() == "1");
  CHECK(s.classifiers[0].trained());
  CHECK(s.classifiers[0].partition.source_season == 1);
  CHECK(s.classifiers[0].model.n_classes == s.classifiers[0].partition.size());
}

TEST_CASE("ST2 with n_bar = 1 fine-tunes each slot once, in season order") {
  const auto seasons = data::synth_generate(small_synth());
  const auto s = run_n(seasons, small_config(), 4);
  REQUIRE(s.classifiers.size() == 4);
  for (std::size_t k = 0; k < 4; ++k) {
    std::string want(4, '0');
    want[k] = '1';
    CHECK(s.classifiers[k].history.to_string() == want);
    CHECK(s.classifiers[k].partition.source_season == static_cast<int>(k + 1));
  }
}

TEST_CASE("ensemble size follows the capacity rule") {
  const auto seasons = data::synth_generate(small_synth());
  for (int cap = 1; cap <= 4; ++cap) {
    MissionConfig cfg = small_config(sched::Strategy::ST1);
    cfg.capacity = cap;
    EnsembleState s = EnsembleState::initial(8, cap, cfg.train);
    for (int i = 1; i <= 4; ++i) {
      s = run_adaptation(s, seasons[static_cast<std::size_t>(i - 1)], cfg);
      CHECK(s.classifiers.size() == static_cast<std::size_t>(std::min(i, cap)));
      for (const auto& rec : s.classifiers) CHECK(rec.history.length() == static_cast<std::size_t>(i));
    }
  }
}

TEST_CASE("untouched slots are byte-identical across a mission") {
  const auto seasons = data::synth_generate(small_synth());
  const MissionConfig cfg = small_config();
  EnsembleState before = run_n(seasons, cfg, 2);
  const EnsembleState after = run_adaptation(before, seasons[2], cfg);
  for (std::size_t k = 0; k < before.classifiers.size(); ++k) {
    REQUIRE_FALSE(after.classifiers[k].history.last_bit());
    EnsembleState a, b;
    a.classifiers = {before.classifiers[k]};
    b.classifiers = {after.classifiers[k]};
    a.classifiers[0].history = b.classifiers[0].history;
    CHECK(serialize_state(a) == serialize_state(b));
  }
}

TEST_CASE("a slot spawned at mission 3 and fine-tuned again carries history 0011") {
  const auto seasons = data::synth_generate(small_synth());
  const MissionConfig cfg = small_config(sched::Strategy::ST2, 2);
  const EnsembleState m3 = run_n(seasons, cfg, 3);
  const EnsembleState m4 = run_adaptation(m3, seasons[3], cfg);
  REQUIRE(m4.classifiers.size() == 4);
  CHECK(m4.classifiers[2].history.to_string() == "0011");
  CHECK(m3.classifiers[2].history.to_string() == "001");
  CHECK(m4.classifiers[2].model.body_w != m3.classifiers[2].model.body_w);
  CHECK(m4.classifiers[2].partition.source_season == 4);
}

TEST_CASE("adaptation errors") {
  const auto seasons = data::synth_generate(small_synth());
  const MissionConfig cfg = small_config();
  const EnsembleState s0 = EnsembleState::initial(8, 4, cfg.train);
  CHECK(test::error_code_of([&] { run_adaptation(s0, seasons[1], cfg); }) == Errc::season_mismatch);
  const EnsembleState wrong = EnsembleState::initial(9, 4, cfg.train);
  CHECK(test::error_code_of([&] { run_adaptation(wrong, seasons[0], cfg); }) ==
        Errc::dimension_mismatch);
}

TEST_CASE("parallel and sequential adaptation agree") {
  const auto seasons = data::synth_generate(small_synth());
  MissionConfig par = small_config(sched::Strategy::ST1), seq = par;
  seq.parallel = false;
  CHECK(run_n(seasons, par, 4) == run_n(seasons, seq, 4));
}

TEST_CASE("VPC") {
  const auto seasons = data::synth_generate(small_synth());
  const MissionConfig cfg = small_config(sched::Strategy::ST1);
  const EnsembleState s1 = run_n(seasons, cfg, 1);
  const auto queries = queries_from(seasons[1]);
  CHECK(queries.front().id == "2:0");

  SUBCASE("a single classifier ranks like its own top-X") {
    const auto res = run_vpc(s1, queries, cfg);
    REQUIRE(res.size() == queries.size());
    for (std::size_t q = 0; q < queries.size(); ++q) {
      const auto own = fusion::top_x(classify::predict(s1.classifiers[0].model, queries[q].feature),
                                     s1.classifiers[0].partition, cfg.fusion_x, 0);
      CHECK(res[q].ranked == own);
    }
  }
  SUBCASE("identical classifiers produce duplicated candidates") {
    EnsembleState twin = s1;
    twin.classifiers.push_back(twin.classifiers[0]);
    MissionConfig two = cfg;
    two.fusion_x = 4;
    const auto res = run_vpc(twin, queries, two);
    for (const auto& r : res) {
      REQUIRE(r.ranked.size() == 4);
      CHECK(r.ranked[0].class_id == r.ranked[1].class_id);
      CHECK(r.ranked[0].probability == r.ranked[1].probability);
      CHECK(r.ranked[0].source_classifier == 0);
      CHECK(r.ranked[1].source_classifier == 1);
    }
  }
  SUBCASE("empty query list") {
    CHECK(run_vpc(s1, std::span<const VPCQuery>{}, cfg).empty());
  }
  SUBCASE("deterministic and side-effect free") {
    const EnsembleState copy = s1;
    const auto a = run_vpc(s1, queries, cfg);
    const auto b = run_vpc(s1, queries, cfg);
    CHECK(s1 == copy);
    REQUIRE(a.size() == b.size());
    for (std::size_t q = 0; q < a.size(); ++q) CHECK(a[q].ranked == b[q].ranked);
  }
  SUBCASE("an untrained-only ensemble yields empty rankings that count as misses") {
    const EnsembleState s0 = EnsembleState::initial(8, 4, cfg.train);
    EnsembleState idle = s0;
    idle.mission = 1;
    idle.classifiers[0].history = RetrainHistory::parse("0");
    const auto res = run_vpc(idle, queries, cfg);
    CHECK(res.front().ranked.empty());
    CHECK(success_ratio(res, queries, 1e9, SuccessMode::topx) == 0.0);
    CHECK(test::error_code_of([&] { run_vpc(s0, queries, cfg); }) == Errc::bad_parameter);
  }
}

TEST_CASE("success ratio") {
  std::vector<VPCQuery> q(4);
  std::vector<fusion::FusedResult> r(4);
  for (std::size_t i = 0; i < 4; ++i) {
    q[i].ground_truth = Viewpoint{10.0 * static_cast<double>(i), 0, 0};
    r[i].ranked.push_back({0, 0, 0.6, q[i].ground_truth});
  }
  CHECK(success_ratio(r, q, 10.0, SuccessMode::rank1) == 1.0);

  for (std::size_t i = 0; i < 4; ++i) {
    r[i].ranked[0].location.y = 15.0;
    r[i].ranked.push_back({0, 1, 0.3, Viewpoint{q[i].ground_truth.x, 5.0 * static_cast<double>(i), 0}});
  }
  CHECK(success_ratio(r, q, 10.0, SuccessMode::rank1) == 0.0);
  // Second candidates sit 0, 5, 10 and 15 m from ground truth.
  CHECK(success_ratio(r, q, 10.0, SuccessMode::topx) == 0.75);
  CHECK(success_ratio(r, q, 15.0, SuccessMode::rank1) == 1.0);
  CHECK(success_ratio(r, q, 14.9, SuccessMode::rank1) == 0.0);

  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> u(0.0, 60.0);
  for (int t = 0; t < 50; ++t) {
    for (auto& res : r)
      for (auto& c : res.ranked) c.location = Viewpoint{u(rng), u(rng), 0};
    double prev = 0.0;
    for (double e = 0.0; e <= 80.0; e += 5.0) {
      const double r1 = success_ratio(r, q, e, SuccessMode::rank1);
      CHECK(r1 >= prev);
      CHECK(success_ratio(r, q, e, SuccessMode::topx) >= r1);
      prev = r1;
    }
  }
  CHECK(test::error_code_of([] { success_ratio({}, {}, 10.0, SuccessMode::rank1); }) ==
        Errc::empty_input);
}

TEST_CASE("precomputed predictions drive the same pipeline") {
  const auto seasons = data::synth_generate(small_synth());
  const MissionConfig cfg = small_config(sched::Strategy::ST1);
  const EnsembleState s1 = run_n(seasons, cfg, 1);
  const std::size_t K = s1.classifiers[0].partition.size();
  const auto queries = queries_from(seasons[1]);
  std::string csv = "query_id,class_id,prob\n";
  char buf[64];
  for (const auto& q : queries) {
    const auto p = classify::predict(s1.classifiers[0].model, q.feature);
    REQUIRE(p.probs.size() == K);
    for (std::size_t k = 0; k < K; ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", p.probs[k]);
      csv += q.id + "," + std::to_string(k) + "," + buf + "\n";
    }
  }
  const auto store = classify::PrecomputedPredictions::parse(csv);
  const auto replay = run_vpc_with(s1, queries, cfg, [&](std::size_t, const VPCQuery& q) {
    return store.predict(q.id);
  });
  const auto live = run_vpc(s1, queries, cfg);
  for (std::size_t i = 0; i < queries.size(); ++i) CHECK(replay[i].ranked == live[i].ranked);
}

TEST_CASE("state file") {
  const auto seasons = data::synth_generate(small_synth());
  const MissionConfig cfg = small_config(sched::Strategy::ST1);
  const EnsembleState s = run_n(seasons, cfg, 4);
  test::TempDir dir("state");

  SUBCASE("round trip") {
    save_state(s, dir.file("s.bin"));
    const EnsembleState back = load_state(dir.file("s.bin"));
    CHECK(back == s);
    CHECK(serialize_state(back) == serialize_state(s));
  }
  SUBCASE("tamper detection") {
    auto bytes = serialize_state(s);
    auto flipped = bytes;
    flipped[kStateHeaderBytes + 100] ^= 0x10;
    CHECK(test::error_code_of([&] { deserialize_state(flipped); }) == Errc::checksum);
    auto wrong_version = bytes;
    wrong_version[8] = 9;
    CHECK(test::error_code_of([&] { deserialize_state(wrong_version); }) == Errc::version_mismatch);
    auto bad_magic = bytes;
    bad_magic[0] = 'X';
    CHECK(test::error_code_of([&] { deserialize_state(bad_magic); }) == Errc::header_mismatch);
    bytes.pop_back();
    CHECK(test::error_code_of([&] { deserialize_state(bytes); }) == Errc::truncated);
    CHECK(test::error_code_of([&] { load_state(dir.file("missing.bin")); }) == Errc::io);
  }
  SUBCASE("size bound") {
    std::size_t max_model = 0, max_k = 0;
    for (const auto& rec : s.classifiers) {
      max_model = std::max(max_model, model_bytes(rec.model));
      max_k = std::max(max_k, rec.partition.size());
    }
    const std::size_t per_slot = max_model + partition_bytes(max_k) + 8 + 4;
    const std::size_t bound = kStateHeaderBytes + 4 + 4 + model_bytes(s.base) + 8 +
                              static_cast<std::size_t>(s.capacity) * per_slot;
    const std::size_t size = serialize_state(s).size();
    CHECK(size <= bound);
    CHECK(size == bound);  // every slot is at the maximum here, so the bound is tight
  }
}

TEST_CASE("state size does not depend on how much data was seen") {
  data::SynthConfig c = small_synth();
  MissionConfig cfg = small_config(sched::Strategy::ST1);
  const auto a = run_n(data::synth_generate(c), cfg, 4);
  c.images_per_place *= 2;
  const auto b = run_n(data::synth_generate(c), cfg, 4);
  for (std::size_t k = 0; k < 4; ++k)
    REQUIRE(a.classifiers[k].partition.size() == b.classifiers[k].partition.size());
  CHECK(serialize_state(a).size() == serialize_state(b).size());
}

TEST_CASE("run missions under both protocols") {
  auto seasons = data::synth_generate(small_synth());
  const TrainingSet test_set = seasons.back();
  seasons.pop_back();
  const MissionConfig cfg = small_config();
  const auto next = run_missions(seasons, &test_set, cfg, TestProtocol::next_season);
  REQUIRE(next.missions.size() == 3);
  for (const auto& m : next.missions) {
    REQUIRE(m.success.size() == 2);
    CHECK(m.success[0] <= m.success[1]);
  }
  const auto fixed = run_missions(seasons, &test_set, cfg, TestProtocol::fixed_test);
  CHECK(fixed.missions.size() == 3);
  CHECK(fixed.final_state == next.final_state);
  CHECK(fixed.missions.back().success == next.missions.back().success);

  CHECK(parse_test_protocol("test:ex") == TestProtocol::fixed_test);
  CHECK(parse_test_protocol("next-season") == TestProtocol::next_season);
}
