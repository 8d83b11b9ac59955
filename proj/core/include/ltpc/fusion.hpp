#pragma once

// Rank fusion over an ensemble: every classifier contributes its top-X
// classes, mapped to global locations; the concatenation is re-ranked by
// raw probability with no calibration and no de-duplication.

#include <cstddef>
#include <span>
#include <vector>

#include "ltpc/classify.hpp"
#include "ltpc/types.hpp"

namespace ltpc::fusion {

inline constexpr std::size_t kDefaultX = 10;

struct GlobalCandidate {
  std::size_t source_classifier = 0;  // ensemble slot
  int class_id = 0;
  double probability = 0.0;
  Viewpoint location;

  friend bool operator==(const GlobalCandidate&, const GlobalCandidate&) = default;
};

struct FusedResult {
  std::vector<GlobalCandidate> ranked;
};

/// The X most probable classes of one prediction, ties to the lower class id.
std::vector<GlobalCandidate> top_x(const classify::Prediction& pred,
                                   const PlacePartition& partition, std::size_t X,
                                   std::size_t slot = 0);

/// Concatenate, stable-sort by probability (ties: slot, then class id),
/// truncate to X.
FusedResult fuse(std::span<const std::vector<GlobalCandidate>> lists, std::size_t X);

}  // namespace ltpc::fusion
