#pragma once

// Unsupervised place definition: partitions one season's trajectory into
// place classes by travel distance, by appearance clusters split by travel
// distance, or by incremental keyframe clustering.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "ltpc/kmeans.hpp"
#include "ltpc/types.hpp"

namespace ltpc::placedef {

struct IncrementalThresholds {
  double pos_max = 30.0;          // meters
  double ang_max = kPi / 6.0;     // radians
  double feat_max = 0.8;          // Euclidean, on L2-normalized features
};

struct PartitionConfig {
  PartitionMethod method = PartitionMethod::location;
  double t_d = 18.0;  // meters
  std::size_t k = 0;  // 0 selects default_k()
  int kmeans_iters = 50;
  std::uint64_t seed = 0;
  IncrementalThresholds thresholds;

  void validate() const;
};

/// ceil(n * 3 / t_d / 4), clamped to [1, n].
std::size_t default_k(std::size_t n_images, double t_d);

PlacePartition partition_by_location(const TrainingSet& set, double t_d);

std::vector<double> l2_normalize(std::span<const double> f);

PlacePartition partition_location_appearance(const TrainingSet& set, const PartitionConfig& cfg);

/// Slack record of one image's insertion into an existing class. Distances
/// are measured against the class keyframe at insertion time.
struct Insertion {
  std::size_t image = 0;
  int class_id = 0;
  bool created = false;  // true when the image opened a new class
  // Distances to the nearest open keyframe (all zero for the first image).
  double position_distance = 0.0;
  double angle_distance = 0.0;
  double feature_distance = 0.0;
};

struct IncrementalResult {
  PlacePartition partition;
  std::vector<Insertion> log;  // one entry per image, in sequence order
};

IncrementalResult partition_incremental_traced(const TrainingSet& set, const PartitionConfig& cfg);
PlacePartition partition_incremental(const TrainingSet& set, const PartitionConfig& cfg);

/// Dispatches on cfg.method.
PlacePartition define_places(const TrainingSet& set, const PartitionConfig& cfg);

using PartitionScorer = std::function<double(const PlacePartition&, double t_d)>;

/// Candidates 3, 6, ..., <= bound. Throws empty_input when bound < 3.
std::vector<double> t_d_candidates(double bound);

/// Returns the candidate maximizing scorer(partition_by_location(set, t_d));
/// ties resolve to the smallest t_d.
double search_t_d(const TrainingSet& set, std::span<const double> candidates,
                  const PartitionScorer& scorer);

}  // namespace ltpc::placedef
