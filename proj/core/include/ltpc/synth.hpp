#pragma once

// Deterministic synthetic seasons: a closed-loop route revisited once per
// season. The feature of an image at place p in season s is
//
//   place_signal * u_p + season_drift * w_s + noise * eps
//
// with u_p and w_s seeded unit vectors and eps i.i.d. standard normal.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ltpc/types.hpp"

namespace ltpc::data {

struct SynthConfig {
  std::size_t n_places = 20;
  double loop_length = 400.0;  // meters
  std::size_t images_per_place = 10;
  std::size_t feature_dim = 32;
  double place_signal = 1.0;
  double season_drift = 1.3;
  double noise = 0.25;
  std::size_t n_seasons = 5;
  std::uint64_t seed = 0;
  // Correlation between consecutive season directions w_s and w_{s+1};
  // 0 gives independent seasons.
  double drift_persistence = 0.5;
  double place_extent = 0.2;  // fraction of place spacing covered by its images
  double pose_jitter = 0.1;   // meters, lateral

  double place_spacing() const noexcept { return loop_length / static_cast<double>(n_places); }
  void validate() const;
};

using Vectors = std::vector<std::vector<double>>;

/// u_p for every place.
Vectors synth_place_vectors(const SynthConfig& cfg);
/// w_s for every season.
Vectors synth_season_vectors(const SynthConfig& cfg);

/// Waypoint (loop position) of place p.
Viewpoint synth_waypoint(const SynthConfig& cfg, std::size_t place);

/// One TrainingSet per season, season ids 1..n_seasons.
std::vector<TrainingSet> synth_generate(const SynthConfig& cfg);

/// Same, with explicit season direction vectors (one per season).
std::vector<TrainingSet> synth_generate_with(const SynthConfig& cfg, const Vectors& season_vectors);

/// Place index of each image in a generated season.
std::vector<std::size_t> synth_place_labels(const SynthConfig& cfg);

}  // namespace ltpc::data
