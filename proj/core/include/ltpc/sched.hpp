#pragma once

// Retraining scheduling: which ensemble slots are fine-tuned with the
// current mission's training set. Each strategy is an argmax over feasible
// slot histories of a per-slot objective.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ltpc/types.hpp"

namespace ltpc::sched {

enum class Strategy { ST1, ST2, ST3 };

std::string_view to_string(Strategy s) noexcept;
Strategy parse_strategy(std::string_view name);

struct StrategyConfig {
  Strategy kind = Strategy::ST2;
  int n_bar = 1;  // ST2: target number of fine-tunings per slot
  int k_bar = 1;  // ST3: 1-based id of the preferred training set
  bool st3_filter_fusion = true;

  /// Throws bad_parameter for negative n_bar or k_bar outside [1, max_mission].
  void validate(int max_mission) const;
  std::string describe() const;  // e.g. "ST2(n=1)"
};

/// One history per ensemble slot, ordered by spawn index. All histories have
/// the same length (the mission index).
using Schedule = std::vector<RetrainHistory>;

struct ScheduleDecision {
  Schedule schedule;
  std::vector<std::uint8_t> retrain_mask;  // last bit of each slot
  std::optional<std::size_t> spawned_slot;
};

/// Element j (1-based) is exp(-|k_bar - j|).
std::vector<double> weight_vector(int k_bar, int i);

/// Objective contribution of a single slot history at mission i.
double slot_score(const StrategyConfig& strategy, const RetrainHistory& h, int i);

/// Joint objective: sum of slot scores. Throws dimension_mismatch unless
/// every history has length i.
double score(const StrategyConfig& strategy, const Schedule& schedule, int i);

/// All schedules reachable at mission i = |previous histories| + 1.
/// Existing slots append 0 or 1; below capacity a fresh slot spawns from the
/// base classifier with history zeros(i-1) followed by 0 or 1.
std::vector<Schedule> feasible_extensions(const Schedule& previous, int i, int capacity);

/// Greedy per-slot maximization. Ties prefer bit 0, which yields the
/// lexicographically smallest concatenated schedule among maximizers.
ScheduleDecision next_schedule(const StrategyConfig& strategy, const Schedule& previous, int i,
                               int capacity);

inline constexpr int kBruteForceMaxMission = 12;

/// Exhaustive enumeration oracle for next_schedule.
ScheduleDecision next_schedule_bruteforce(const StrategyConfig& strategy,
                                          const Schedule& previous, int i, int capacity);

/// Runs next_schedule for missions 1..n_missions from an empty ensemble.
std::vector<ScheduleDecision> plan(const StrategyConfig& strategy, int n_missions, int capacity);

/// Slots with exactly one 1-bit whose B . B_bar is maximal. Empty when no
/// slot has a single fine-tuning.
std::vector<std::size_t> st3_fusion_filter(const Schedule& schedule, int k_bar);

std::string concat_bits(const Schedule& schedule);

}  // namespace ltpc::sched
