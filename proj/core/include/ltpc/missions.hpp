#pragma once

// The exploration/adaptation loop: each mission schedules retraining over
// the ensemble, defines places on the new season's data, fine-tunes the
// selected slots, and evaluates place classification against the ensemble.

#include <cstddef>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "ltpc/classify.hpp"
#include "ltpc/fusion.hpp"
#include "ltpc/placedef.hpp"
#include "ltpc/sched.hpp"
#include "ltpc/types.hpp"

namespace ltpc {

/// A trained model, the slot's retraining history, and the (summarized)
/// place partition its outputs index into. The never-fine-tuned base has an
/// empty partition.
struct ClassifierRecord {
  RetrainHistory history;
  PlacePartition partition;
  classify::ModelParams model;

  bool trained() const noexcept { return !partition.empty(); }
  friend bool operator==(const ClassifierRecord&, const ClassifierRecord&) = default;
};

/// Everything carried from one season to the next. Holds models and place
/// metadata only, never training features.
struct EnsembleState {
  int mission = 0;
  int capacity = 4;
  classify::ModelParams base;  // C_1^0, the source of spawned slots
  std::vector<ClassifierRecord> classifiers;

  /// Mission-0 state holding only the untrained base classifier.
  static EnsembleState initial(std::size_t feature_dim, int capacity,
                               const classify::TrainConfig& train);

  /// Slot histories, empty at mission 0.
  sched::Schedule schedule() const;

  friend bool operator==(const EnsembleState&, const EnsembleState&) = default;
};

namespace missions {

enum class SuccessMode { rank1, topx };
std::string_view to_string(SuccessMode m) noexcept;
SuccessMode parse_success_mode(std::string_view name);

struct MissionConfig {
  sched::StrategyConfig strategy;
  placedef::PartitionConfig partition;
  classify::TrainConfig train;
  std::size_t fusion_x = fusion::kDefaultX;
  int capacity = 4;
  std::vector<double> error_thresholds{10.0, 20.0};
  SuccessMode mode = SuccessMode::rank1;
  bool parallel = true;  // fine-tune retrained slots concurrently

  void validate() const;
};

struct VPCQuery {
  std::string id;
  std::vector<double> feature;
  Viewpoint ground_truth;
};

/// Queries built from a season's mapped images, with their poses as ground
/// truth. Ids are "<season>:<image id>".
std::vector<VPCQuery> queries_from(const TrainingSet& set);

struct AdaptationReport {
  sched::ScheduleDecision decision;
  std::size_t n_classes = 0;
  std::vector<double> final_losses;  // per slot; NaN where not retrained
};

EnsembleState run_adaptation(const EnsembleState& state, const TrainingSet& d,
                             const MissionConfig& cfg, AdaptationReport* report = nullptr);

/// Slots that take part in fusion: trained slots, narrowed by the ST3 filter
/// when that strategy and flag are active and the filter is non-empty.
std::vector<std::size_t> fusion_slots(const EnsembleState& state, const MissionConfig& cfg);

using Predictor = std::function<classify::Prediction(std::size_t slot, const VPCQuery& query)>;

std::vector<fusion::FusedResult> run_vpc(const EnsembleState& state,
                                         std::span<const VPCQuery> queries,
                                         const MissionConfig& cfg);

/// Same pipeline with predictions from an arbitrary backend.
std::vector<fusion::FusedResult> run_vpc_with(const EnsembleState& state,
                                              std::span<const VPCQuery> queries,
                                              const MissionConfig& cfg,
                                              const Predictor& predictor);

/// Fraction of queries whose rank-1 (or any top-X) candidate lies within
/// `error` meters of ground truth. An empty result list counts as a miss.
double success_ratio(std::span<const fusion::FusedResult> results,
                     std::span<const VPCQuery> queries, double error, SuccessMode mode);

enum class TestProtocol { next_season, fixed_test };
std::string_view to_string(TestProtocol p) noexcept;
TestProtocol parse_test_protocol(std::string_view name);

struct MissionOutcome {
  int mission = 0;
  sched::Schedule schedule;
  std::size_t n_classes = 0;
  std::vector<std::size_t> fused_slots;
  std::vector<double> success;  // one per cfg.error_thresholds entry
};

struct RunOutcome {
  std::vector<MissionOutcome> missions;
  EnsembleState final_state;
};

/// Runs one mission per training season in order. After mission i the
/// ensemble is evaluated on seasons[i] (next_season; the last mission then
/// has no test set and is skipped unless `test` is given) or on `test`
/// (fixed_test).
RunOutcome run_missions(const std::vector<TrainingSet>& seasons, const TrainingSet* test,
                        const MissionConfig& cfg, TestProtocol protocol);

}  // namespace missions
}  // namespace ltpc
