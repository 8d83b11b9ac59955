#pragma once

// Command implementations behind the `ltpc` executable. Kept in a library so
// tests can drive them without spawning processes.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltpc/data.hpp"
#include "ltpc/missions.hpp"
#include "ltpc/synth.hpp"

namespace ltpc::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Experiment description, usually read from a JSON spec file:
///
///   {
///     "seed": 7,
///     "synthetic": {"n_places": 20, "n_seasons": 5, ...},   // or
///     "datasets": ["s1/manifest.json", ...], "test_dataset": "...",
///     "protocol": "next-season" | "fixed-test",
///     "strategy": {"kind": "ST2", "n_bar": 1, "k_bar": 1, "st3_filter_fusion": true},
///     "partition": {"method": "location", "t_d": 18, "k": 0, "kmeans_iters": 50,
///                   "pos_max": 30, "ang_max": 0.5236, "feat_max": 0.8},
///     "train": {"learning_rate": 0.2, "epochs": 60, "batch_size": 32,
///               "hidden_width": 64, "weight_scale": 0.1},
///     "fusion_x": 10, "capacity": 4, "error_thresholds": [10, 20], "mode": "rank1",
///     "out": "out"
///   }
///
/// With a synthetic block, seasons 1..n-1 are training seasons and season n
/// is the held-out test season. With datasets, the last manifest plays that
/// role unless "test_dataset" is given.
struct ExperimentSpec {
  std::optional<data::SynthConfig> synthetic;
  std::vector<std::string> datasets;
  std::string test_dataset;
  missions::TestProtocol protocol = missions::TestProtocol::next_season;
  missions::MissionConfig mission;
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  static ExperimentSpec from_json(const nlohmann::json& j, const std::string& base_dir = "");
  nlohmann::json to_json() const;

  /// Propagates `seed` into the synthetic, partition and training seeds.
  void apply_seed(std::uint64_t s);
};

ExperimentSpec load_experiment_spec(const std::string& path);

struct RunFiles {
  std::string results_csv, schedule_csv, schedule_svg, success_svg, summary_json, state_bin;
};

/// Runs every mission and writes results.csv, schedule.csv, schedule.svg,
/// success.svg, summary.json and state.bin under spec.out_dir.
RunFiles cmd_run(const ExperimentSpec& spec);

struct PlacedefFiles {
  std::string partition_csv, partition_svg, insertion_log_csv;  // log only for incremental
  std::size_t n_classes = 0;
};

PlacedefFiles cmd_placedef(const TrainingSet& set, const placedef::PartitionConfig& cfg,
                           const std::string& out_dir);

struct ScheduleFiles {
  std::string grid_text, schedule_csv, schedule_svg;
};

ScheduleFiles cmd_schedule(const sched::StrategyConfig& strategy, int n_missions, int capacity,
                           const std::string& out_dir);

/// Parses argv and dispatches; returns the process exit code.
int run_main(int argc, char** argv);

}  // namespace ltpc::cli
