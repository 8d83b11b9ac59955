#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "ltpc/kmeans.hpp"
#include "ltpc/placedef.hpp"
#include "support.hpp"

using namespace ltpc;
using namespace ltpc::placedef;

namespace {

std::vector<std::vector<std::size_t>> members_of(const PlacePartition& p) {
  std::vector<std::vector<std::size_t>> out;
  for (const auto& c : p.classes) out.push_back(c.members);
  return out;
}

using Groups = std::vector<std::vector<std::size_t>>;

// Two blobs at distance ~100 with radius ~1.
std::vector<FeatureVector> two_blobs(std::mt19937_64& rng, std::size_t per_blob,
                                     std::vector<int>* truth) {
  std::normal_distribution<double> g(0.0, 0.3);
  std::vector<FeatureVector> pts;
  for (std::size_t i = 0; i < 2 * per_blob; ++i) {
    const int blob = static_cast<int>(i % 2);
    const double cx = blob == 0 ? 0.0 : 100.0;
    pts.push_back({cx + g(rng), g(rng), g(rng)});
    truth->push_back(blob);
  }
  return pts;
}

double purity(const std::vector<std::size_t>& labels, const std::vector<int>& truth, std::size_t k) {
  std::size_t correct = 0;
  for (std::size_t c = 0; c < k; ++c) {
    std::size_t counts[2] = {0, 0};
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == c) ++counts[truth[i]];
    correct += std::max(counts[0], counts[1]);
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

}  // namespace

TEST_CASE("location partition examples") {
  const auto p = partition_by_location(test::line_set(7, 3.0), 18.0);
  CHECK(members_of(p) == Groups{{0, 1, 2, 3, 4, 5}, {6}});
  CHECK(p.classes[0].keyframe == 0);
  CHECK(p.classes[1].keyframe == 6);

  CHECK(partition_by_location(test::line_set(1, 3.0), 18.0).size() == 1);
  CHECK(partition_by_location(test::line_set(50, 0.0), 18.0).size() == 1);
  CHECK(test::error_code_of([] { partition_by_location(TrainingSet{}, 18.0); }) ==
        Errc::empty_input);
}

TEST_CASE("location partition properties on random trajectories") {
  std::mt19937_64 rng(123);
  for (int t = 0; t < 100; ++t) {
    const TrainingSet s = test::random_walk(rng, 20 + rng() % 200, 0.2, 5.0);
    double max_step = 0.0;
    for (std::size_t i = 1; i < s.size(); ++i)
      max_step = std::max(max_step, viewpoint_distance(s.images[i - 1].viewpoint, s.images[i].viewpoint));
    const auto p = partition_by_location(s, 18.0);
    p.validate(s.size());
    std::size_t next = 0;
    for (std::size_t k = 0; k < p.size(); ++k) {
      for (std::size_t m : p.classes[k].members) CHECK(m == next++);
      if (k + 1 < p.size()) {
        const double len = path_length(s.images, p.classes[k].members.front(),
                                       p.classes[k + 1].members.front());
        CHECK(len >= 18.0);
        CHECK(len < 18.0 + max_step);
      }
    }
    CHECK(next == s.size());
  }
}

TEST_CASE("l2 normalize") {
  const auto v = l2_normalize(std::vector<double>{3.0, 4.0});
  CHECK(v[0] == doctest::Approx(0.6));
  CHECK(v[1] == doctest::Approx(0.8));
  const auto u = l2_normalize(std::vector<double>{0.0, 1.0, 0.0});
  CHECK(u == std::vector<double>{0.0, 1.0, 0.0});
  CHECK(test::error_code_of([] { l2_normalize(std::vector<double>{0.0, 0.0}); }) ==
        Errc::zero_vector);
}

TEST_CASE("kmeans with k = n") {
  std::vector<FeatureVector> pts{{0, 0}, {1, 0}, {5, 5}, {9, 1}};
  const auto a = kmeans(pts, 4, 10, 3);
  CHECK(distortion(pts, a) == 0.0);
  std::vector<std::size_t> sorted = a.labels;
  std::sort(sorted.begin(), sorted.end());
  CHECK(sorted == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(test::error_code_of([&] { kmeans(pts, 5, 10, 3); }) == Errc::too_few_points);
}

TEST_CASE("kmeans separates blobs and never increases distortion") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    std::mt19937_64 rng(seed);
    std::vector<int> truth;
    const auto pts = two_blobs(rng, 50, &truth);
    const auto a = kmeans(pts, 2, 50, seed);
    CHECK(purity(a.labels, truth, 2) >= 0.99);
    for (std::size_t it = 1; it < a.distortion_history.size(); ++it)
      CHECK(a.distortion_history[it] <= a.distortion_history[it - 1] + 1e-9);
  }
}

TEST_CASE("kmeans distortion is monotone on unstructured data") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  for (int t = 0; t < 20; ++t) {
    std::vector<FeatureVector> pts(200, FeatureVector(4));
    for (auto& p : pts)
      for (auto& x : p) x = g(rng);
    const auto a = kmeans(pts, 7, 100, static_cast<std::uint64_t>(t));
    REQUIRE(!a.distortion_history.empty());
    for (std::size_t it = 1; it < a.distortion_history.size(); ++it)
      CHECK(a.distortion_history[it] <= a.distortion_history[it - 1] + 1e-9);
    CHECK(distortion(pts, a) == doctest::Approx(a.distortion_history.back()));
    for (auto l : a.labels) CHECK(l < 7);
  }
}

TEST_CASE("kmeans is deterministic") {
  std::mt19937_64 rng(1);
  std::vector<int> truth;
  const auto pts = two_blobs(rng, 30, &truth);
  const auto a = kmeans(pts, 3, 50, 42), b = kmeans(pts, 3, 50, 42);
  CHECK(a.labels == b.labels);
  CHECK(a.centroids == b.centroids);
}

TEST_CASE("location-appearance partition") {
  SUBCASE("k = 1 reduces to location partitioning") {
    std::mt19937_64 rng(4);
    for (int t = 0; t < 10; ++t) {
      const TrainingSet s = test::random_walk(rng, 80, 0.5, 4.0);
      PartitionConfig cfg;
      cfg.method = PartitionMethod::location_appearance;
      cfg.k = 1;
      CHECK(members_of(partition_location_appearance(s, cfg)) ==
            members_of(partition_by_location(s, 18.0)));
    }
  }
  SUBCASE("interleaved appearance clusters split independently") {
    // Alternating appearance A (even ids) and B (odd ids), 3 m apart on a
    // line. Consecutive members of one cluster are 6 m apart along the
    // trajectory, so each cluster splits after three members.
    TrainingSet s = test::line_set(14, 3.0);
    std::mt19937_64 rng(0);
    std::uniform_real_distribution<double> jitter(-0.01, 0.01);
    for (auto& img : s.images)
      img.feature = img.id % 2 == 0 ? std::vector<double>{10 + jitter(rng), jitter(rng)}
                                    : std::vector<double>{jitter(rng), 10 + jitter(rng)};
    PartitionConfig cfg;
    cfg.method = PartitionMethod::location_appearance;
    cfg.k = 2;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      cfg.seed = seed;
      const auto p = partition_location_appearance(s, cfg);
      p.validate(s.size());
      CHECK(members_of(p) ==
            Groups{{0, 2, 4}, {1, 3, 5}, {6, 8, 10}, {7, 9, 11}, {12}, {13}});
    }
  }
}

TEST_CASE("default k") {
  CHECK(default_k(200, 18.0) == 9);  // ceil(200*3/18/4) = ceil(8.33)
  CHECK(default_k(1, 18.0) == 1);
  CHECK(default_k(3, 0.5) == 3);
}

TEST_CASE("incremental partition examples") {
  PartitionConfig cfg;
  cfg.method = PartitionMethod::incremental;
  TrainingSet s = test::line_set(1, 0.0);
  CHECK(partition_incremental(s, cfg).size() == 1);

  s = test::line_set(2, 0.0);
  CHECK(members_of(partition_incremental(s, cfg)) == Groups{{0, 1}});

  s = test::line_set(2, 31.0);
  const auto r = partition_incremental_traced(s, cfg);
  CHECK(members_of(r.partition) == Groups{{0}, {1}});
  CHECK(r.log[1].created);
  CHECK(r.log[1].position_distance == doctest::Approx(31.0));

  s = test::line_set(2, 30.0);
  CHECK(partition_incremental(s, cfg).size() == 2);  // strict inequality

  s = test::line_set(2, 1.0);
  s.images[1].viewpoint.theta = kPi / 5;
  CHECK(partition_incremental(s, cfg).size() == 2);

  s = test::line_set(2, 1.0);
  s.images[1].feature = {1.0, -1.0};  // normalized distance sqrt(2)
  CHECK(partition_incremental(s, cfg).size() == 2);

  s = test::line_set(2, 1.0);
  s.images[1].feature = {0.0, 0.0};
  CHECK(test::error_code_of([&] { partition_incremental(s, cfg); }) == Errc::zero_vector);
}

TEST_CASE("incremental members satisfy thresholds against their keyframe") {
  std::mt19937_64 rng(77);
  std::normal_distribution<double> g(0.0, 0.15);
  PartitionConfig cfg;
  cfg.method = PartitionMethod::incremental;
  for (int t = 0; t < 50; ++t) {
    TrainingSet s = test::random_walk(rng, 150, 0.5, 6.0, 4);
    // Smoothly varying features so that some images join existing classes.
    std::vector<double> f{1.0, 0.0, 0.0, 0.0};
    for (auto& img : s.images) {
      for (auto& x : f) x += g(rng);
      img.feature = f;
    }
    const auto r = partition_incremental_traced(s, cfg);
    r.partition.validate(s.size());
    std::size_t joined = 0;
    for (const auto& c : r.partition.classes) {
      const auto& key = s.images[c.keyframe];
      CHECK(c.members.front() == c.keyframe);
      const auto kf = l2_normalize(key.feature);
      for (std::size_t m : c.members) {
        if (m == c.keyframe) continue;
        ++joined;
        const auto& img = s.images[m];
        CHECK(viewpoint_distance(key.viewpoint, img.viewpoint) < 30.0);
        CHECK(angle_difference(key.viewpoint.theta, img.viewpoint.theta) < kPi / 6);
        CHECK(std::sqrt(squared_distance(kf, l2_normalize(img.feature))) < 0.8);
      }
    }
    CHECK(joined > 0);
    for (const auto& ins : r.log) {
      if (ins.created) continue;
      CHECK(ins.position_distance < cfg.thresholds.pos_max);
      CHECK(ins.angle_distance < cfg.thresholds.ang_max);
      CHECK(ins.feature_distance < cfg.thresholds.feat_max);
    }
  }
}

TEST_CASE("partitions are deterministic") {
  std::mt19937_64 rng(3);
  const TrainingSet s = test::random_walk(rng, 120, 0.5, 4.0);
  for (auto m : {PartitionMethod::location, PartitionMethod::location_appearance,
                 PartitionMethod::incremental}) {
    PartitionConfig cfg;
    cfg.method = m;
    cfg.seed = 9;
    cfg.thresholds.feat_max = 2.0;
    const auto a = define_places(s, cfg), b = define_places(s, cfg);
    CHECK(a == b);
    a.validate(s.size());
  }
}

TEST_CASE("T_d search") {
  const TrainingSet s = test::line_set(40, 1.0);
  const auto cands = t_d_candidates(30.0);
  CHECK(cands == std::vector<double>{3, 6, 9, 12, 15, 18, 21, 24, 27, 30});
  CHECK(search_t_d(s, cands, [](const PlacePartition&, double) { return 1.0; }) == 3.0);
  CHECK(search_t_d(s, cands, [](const PlacePartition&, double t) { return -std::abs(t - 18.0); }) ==
        18.0);
  const std::vector<double> one{12.0};
  CHECK(search_t_d(s, one, [](const PlacePartition&, double) { return 0.0; }) == 12.0);
  CHECK(test::error_code_of([] { t_d_candidates(2.0); }) == Errc::empty_input);
}
