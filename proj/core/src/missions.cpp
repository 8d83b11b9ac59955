#include "ltpc/missions.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

#include "ltpc/error.hpp"

namespace ltpc {

EnsembleState EnsembleState::initial(std::size_t feature_dim, int capacity,
                                     const classify::TrainConfig& train) {
  if (capacity < 1) throw Error(Errc::bad_parameter, "capacity must be >= 1");
  EnsembleState s;
  s.capacity = capacity;
  s.base = classify::init_model(feature_dim, train.hidden_width, 1, train.weight_scale, train.seed);
  s.classifiers.push_back(ClassifierRecord{RetrainHistory{}, PlacePartition{}, s.base});
  return s;
}

sched::Schedule EnsembleState::schedule() const {
  sched::Schedule out;
  if (mission == 0) return out;
  out.reserve(classifiers.size());
  for (const ClassifierRecord& c : classifiers) out.push_back(c.history);
  return out;
}

namespace missions {

std::string_view to_string(SuccessMode m) noexcept {
  return m == SuccessMode::rank1 ? "rank1" : "topx";
}

SuccessMode parse_success_mode(std::string_view name) {
  if (name == "rank1") return SuccessMode::rank1;
  if (name == "topx") return SuccessMode::topx;
  throw Error(Errc::bad_parameter, "unknown success mode '" + std::string(name) + "'");
}

void MissionConfig::validate() const {
  partition.validate();
  train.validate();
  if (fusion_x == 0) throw Error(Errc::bad_parameter, "fusion X must be >= 1");
  if (capacity < 1) throw Error(Errc::bad_parameter, "capacity must be >= 1");
  for (double e : error_thresholds)
    if (!(e > 0.0)) throw Error(Errc::bad_parameter, "error thresholds must be positive");
}

std::vector<VPCQuery> queries_from(const TrainingSet& set) {
  std::vector<VPCQuery> out;
  out.reserve(set.size());
  for (const MappedImage& img : set.images)
    out.push_back(VPCQuery{std::to_string(set.season_id) + ":" + std::to_string(img.id),
                           img.feature, img.viewpoint});
  return out;
}

namespace {

std::uint64_t slot_seed(std::uint64_t seed, int mission, std::size_t slot) {
  std::uint64_t z = seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(mission + 1));
  z += 0xbf58476d1ce4e5b9ULL * static_cast<std::uint64_t>(slot + 1);
  z = (z ^ (z >> 31)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 29);
}

}  // namespace

EnsembleState run_adaptation(const EnsembleState& state, const TrainingSet& d,
                             const MissionConfig& cfg, AdaptationReport* report) {
  cfg.validate();
  if (d.season_id != state.mission + 1)
    throw Error(Errc::season_mismatch, "training set season " + std::to_string(d.season_id) +
                                           " but ensemble is at mission " +
                                           std::to_string(state.mission));
  d.validate();
  if (d.images.empty()) throw Error(Errc::empty_input, "training set '" + d.label + "' is empty");
  if (d.feature_dim() != state.base.input_dim)
    throw Error(Errc::dimension_mismatch, "dataset feature dimension " +
                                              std::to_string(d.feature_dim()) + ", ensemble " +
                                              std::to_string(state.base.input_dim));

  const int i = state.mission + 1;
  sched::ScheduleDecision decision =
      sched::next_schedule(cfg.strategy, state.schedule(), i, state.capacity);

  placedef::PartitionConfig pcfg = cfg.partition;
  pcfg.seed = slot_seed(cfg.partition.seed, i, 0);
  const PlacePartition partition = placedef::define_places(d, pcfg);
  partition.validate(d.size());
  const std::vector<classify::Example> examples = classify::examples_from(d, partition);
  const PlacePartition summary = partition.summarized();

  EnsembleState next;
  next.mission = i;
  next.capacity = state.capacity;
  next.base = state.base;
  const std::size_t n_slots = decision.schedule.size();
  next.classifiers.resize(n_slots);

  std::vector<double> losses(n_slots, std::numeric_limits<double>::quiet_NaN());
  std::vector<std::future<classify::TrainResult>> jobs(n_slots);
  for (std::size_t k = 0; k < n_slots; ++k) {
    const bool spawned = decision.spawned_slot && *decision.spawned_slot == k;
    const classify::ModelParams& source = spawned ? state.base : state.classifiers[k].model;
    ClassifierRecord& rec = next.classifiers[k];
    rec.history = decision.schedule[k];
    if (!decision.retrain_mask[k]) {
      rec.partition = spawned ? PlacePartition{} : state.classifiers[k].partition;
      rec.model = source;
      continue;
    }
    rec.partition = summary;
    classify::TrainConfig tcfg = cfg.train;
    tcfg.seed = slot_seed(cfg.train.seed, i, k);
    auto job = [src = &source, &examples, K = partition.size(), tcfg] {
      return classify::fine_tune(*src, examples, K, tcfg);
    };
    jobs[k] = std::async(cfg.parallel ? std::launch::async : std::launch::deferred, job);
  }
  for (std::size_t k = 0; k < n_slots; ++k) {
    if (!jobs[k].valid()) continue;
    classify::TrainResult r = jobs[k].get();
    losses[k] = r.final_loss;
    next.classifiers[k].model = std::move(r.model);
  }

  if (report) {
    report->decision = std::move(decision);
    report->n_classes = partition.size();
    report->final_losses = std::move(losses);
  }
  return next;
}

std::vector<std::size_t> fusion_slots(const EnsembleState& state, const MissionConfig& cfg) {
  std::vector<std::size_t> trained;
  for (std::size_t k = 0; k < state.classifiers.size(); ++k)
    if (state.classifiers[k].trained()) trained.push_back(k);
  if (cfg.strategy.kind == sched::Strategy::ST3 && cfg.strategy.st3_filter_fusion) {
    std::vector<std::size_t> filtered;
    for (std::size_t k : sched::st3_fusion_filter(state.schedule(), cfg.strategy.k_bar))
      if (state.classifiers[k].trained()) filtered.push_back(k);
    if (!filtered.empty()) return filtered;
  }
  return trained;
}

std::vector<fusion::FusedResult> run_vpc_with(const EnsembleState& state,
                                              std::span<const VPCQuery> queries,
                                              const MissionConfig& cfg,
                                              const Predictor& predictor) {
  if (state.mission < 1) throw Error(Errc::bad_parameter, "VPC needs an ensemble at mission >= 1");
  if (cfg.fusion_x == 0) throw Error(Errc::bad_parameter, "fusion X must be >= 1");
  const std::vector<std::size_t> slots = fusion_slots(state, cfg);
  std::vector<fusion::FusedResult> out;
  out.reserve(queries.size());
  std::vector<std::vector<fusion::GlobalCandidate>> lists;
  for (const VPCQuery& q : queries) {
    lists.clear();
    for (std::size_t k : slots)
      lists.push_back(fusion::top_x(predictor(k, q), state.classifiers[k].partition, cfg.fusion_x, k));
    out.push_back(lists.empty() ? fusion::FusedResult{} : fusion::fuse(lists, cfg.fusion_x));
  }
  return out;
}

std::vector<fusion::FusedResult> run_vpc(const EnsembleState& state,
                                         std::span<const VPCQuery> queries,
                                         const MissionConfig& cfg) {
  return run_vpc_with(state, queries, cfg, [&](std::size_t slot, const VPCQuery& q) {
    return classify::predict(state.classifiers[slot].model, q.feature);
  });
}

double success_ratio(std::span<const fusion::FusedResult> results,
                     std::span<const VPCQuery> queries, double error, SuccessMode mode) {
  if (results.empty() || results.size() != queries.size())
    throw Error(Errc::empty_input, "success ratio needs equally many (non-zero) results and queries");
  std::size_t hits = 0;
  for (std::size_t q = 0; q < results.size(); ++q) {
    const auto& ranked = results[q].ranked;
    const std::size_t depth = mode == SuccessMode::rank1 ? std::min<std::size_t>(1, ranked.size())
                                                         : ranked.size();
    for (std::size_t r = 0; r < depth; ++r) {
      if (viewpoint_distance(ranked[r].location, queries[q].ground_truth) <= error) {
        ++hits;
        break;
      }
    }
  }
  return static_cast<double>(hits) / static_cast<double>(results.size());
}

std::string_view to_string(TestProtocol p) noexcept {
  return p == TestProtocol::next_season ? "next-season" : "fixed-test";
}

TestProtocol parse_test_protocol(std::string_view name) {
  if (name == "next-season") return TestProtocol::next_season;
  if (name == "fixed-test" || name == "test:ex") return TestProtocol::fixed_test;
  throw Error(Errc::bad_parameter, "unknown test protocol '" + std::string(name) + "'");
}

RunOutcome run_missions(const std::vector<TrainingSet>& seasons, const TrainingSet* test,
                        const MissionConfig& cfg, TestProtocol protocol) {
  cfg.validate();
  if (seasons.empty()) throw Error(Errc::empty_input, "no training seasons");
  if (protocol == TestProtocol::fixed_test && test == nullptr)
    throw Error(Errc::bad_parameter, "fixed-test protocol needs a test set");
  cfg.strategy.validate(static_cast<int>(seasons.size()));

  RunOutcome run;
  run.final_state = EnsembleState::initial(seasons.front().feature_dim(), cfg.capacity, cfg.train);
  std::vector<VPCQuery> fixed_queries;
  if (protocol == TestProtocol::fixed_test) fixed_queries = queries_from(*test);

  for (std::size_t m = 0; m < seasons.size(); ++m) {
    AdaptationReport report;
    run.final_state = run_adaptation(run.final_state, seasons[m], cfg, &report);

    const TrainingSet* eval = nullptr;
    std::vector<VPCQuery> next_queries;
    if (protocol == TestProtocol::fixed_test) {
      eval = test;
    } else if (m + 1 < seasons.size()) {
      eval = &seasons[m + 1];
    } else if (test != nullptr) {
      eval = test;
    }
    if (eval == nullptr) continue;
    if (protocol == TestProtocol::next_season) next_queries = queries_from(*eval);
    const std::vector<VPCQuery>& queries =
        protocol == TestProtocol::fixed_test ? fixed_queries : next_queries;

    MissionOutcome out;
    out.mission = run.final_state.mission;
    out.schedule = run.final_state.schedule();
    out.n_classes = report.n_classes;
    out.fused_slots = fusion_slots(run.final_state, cfg);
    const std::vector<fusion::FusedResult> results = run_vpc(run.final_state, queries, cfg);
    for (double e : cfg.error_thresholds)
      out.success.push_back(success_ratio(results, queries, e, cfg.mode));
    run.missions.push_back(std::move(out));
  }
  return run;
}

}  // namespace missions
}  // namespace ltpc
