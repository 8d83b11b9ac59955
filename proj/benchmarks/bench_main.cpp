#include <benchmark/benchmark.h>

#include <random>

#include "ltpc/classify.hpp"
#include "ltpc/fusion.hpp"
#include "ltpc/kmeans.hpp"
#include "ltpc/missions.hpp"
#include "ltpc/placedef.hpp"
#include "ltpc/sched.hpp"
#include "ltpc/synth.hpp"

using namespace ltpc;

static void BM_KMeans(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  std::vector<placedef::FeatureVector> pts(n, placedef::FeatureVector(32));
  for (auto& p : pts)
    for (auto& x : p) x = g(rng);
  for (auto _ : state) benchmark::DoNotOptimize(placedef::kmeans(pts, 16, 50, 3));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(n));
}
BENCHMARK(BM_KMeans)->Arg(200)->Arg(1000)->Arg(4000);

static void BM_NextScheduleGreedy(benchmark::State& state) {
  sched::StrategyConfig st;
  st.kind = sched::Strategy::ST1;
  const int i = static_cast<int>(state.range(0));
  sched::Schedule prev;
  for (int m = 1; m < i; ++m) prev = sched::next_schedule(st, prev, m, 4).schedule;
  for (auto _ : state) benchmark::DoNotOptimize(sched::next_schedule(st, prev, i, 4));
}
BENCHMARK(BM_NextScheduleGreedy)->Arg(4)->Arg(12)->Arg(64);

static void BM_NextScheduleBruteForce(benchmark::State& state) {
  sched::StrategyConfig st;
  st.kind = sched::Strategy::ST1;
  const int i = static_cast<int>(state.range(0));
  sched::Schedule prev;
  for (int m = 1; m < i; ++m) prev = sched::next_schedule(st, prev, m, 4).schedule;
  for (auto _ : state) benchmark::DoNotOptimize(sched::next_schedule_bruteforce(st, prev, i, 4));
}
BENCHMARK(BM_NextScheduleBruteForce)->Arg(4)->Arg(12);

static void BM_TrainSeason(benchmark::State& state) {
  data::SynthConfig sc;
  sc.n_seasons = 1;
  const TrainingSet s = data::synth_generate(sc).front();
  const PlacePartition p = placedef::partition_by_location(s, 18.0);
  const auto ex = classify::examples_from(s, p);
  classify::TrainConfig cfg;
  cfg.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(classify::train(ex, p.size(), cfg));
}
BENCHMARK(BM_TrainSeason)->Arg(10)->Arg(60)->Unit(benchmark::kMillisecond);

static void BM_Fuse(benchmark::State& state) {
  const auto slots = static_cast<std::size_t>(state.range(0));
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u;
  std::vector<std::vector<fusion::GlobalCandidate>> lists(slots);
  for (std::size_t s = 0; s < slots; ++s)
    for (int k = 0; k < 10; ++k) lists[s].push_back({s, k, u(rng), Viewpoint{}});
  for (auto _ : state) benchmark::DoNotOptimize(fusion::fuse(lists, 10));
}
BENCHMARK(BM_Fuse)->Arg(1)->Arg(4)->Arg(16);

static void BM_Mission(benchmark::State& state) {
  data::SynthConfig sc;
  const auto seasons = data::synth_generate(sc);
  missions::MissionConfig cfg;
  cfg.train.epochs = 10;
  cfg.parallel = state.range(0) != 0;
  cfg.strategy.kind = sched::Strategy::ST1;
  EnsembleState s3 = EnsembleState::initial(sc.feature_dim, 4, cfg.train);
  for (int i = 0; i < 3; ++i) s3 = missions::run_adaptation(s3, seasons[static_cast<std::size_t>(i)], cfg);
  for (auto _ : state) benchmark::DoNotOptimize(missions::run_adaptation(s3, seasons[3], cfg));
}
BENCHMARK(BM_Mission)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
