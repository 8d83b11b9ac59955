#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace ltpc::placedef {

using FeatureVector = std::vector<double>;

struct ClusterAssignment {
  std::vector<std::size_t> labels;
  std::vector<FeatureVector> centroids;
  // Sum of squared distances after each assignment step; the first entry is
  // the distortion of the initial assignment.
  std::vector<double> distortion_history;
  int iterations = 0;
  bool converged = false;
};

double squared_distance(std::span<const double> a, std::span<const double> b);

/// Lloyd's algorithm. Centroids start at k distinct points drawn uniformly
/// without replacement; clusters that go empty are re-seeded with the point
/// farthest from its centroid. Stops after `iters` updates or when the
/// assignment no longer changes. Deterministic given `seed`.
ClusterAssignment kmeans(std::span<const FeatureVector> features, std::size_t k, int iters,
                         std::uint64_t seed);

double distortion(std::span<const FeatureVector> features, const ClusterAssignment& a);

}  // namespace ltpc::placedef
