#include "ltpc/fusion.hpp"

#include <algorithm>
#include <numeric>

#include "ltpc/error.hpp"

namespace ltpc::fusion {

std::vector<GlobalCandidate> top_x(const classify::Prediction& pred,
                                   const PlacePartition& partition, std::size_t X,
                                   std::size_t slot) {
  if (X == 0) throw Error(Errc::bad_parameter, "X must be >= 1");
  if (pred.probs.size() != partition.size())
    throw Error(Errc::dimension_mismatch, "prediction has " + std::to_string(pred.probs.size()) +
                                              " classes, partition has " +
                                              std::to_string(partition.size()));
  std::vector<std::size_t> order(pred.probs.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const std::size_t n = std::min(X, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      if (pred.probs[a] != pred.probs[b]) return pred.probs[a] > pred.probs[b];
                      return a < b;
                    });
  std::vector<GlobalCandidate> out;
  out.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    const std::size_t c = order[r];
    out.push_back(GlobalCandidate{slot, static_cast<int>(c), pred.probs[c],
                                  partition.classes[c].representative});
  }
  return out;
}

FusedResult fuse(std::span<const std::vector<GlobalCandidate>> lists, std::size_t X) {
  if (X == 0) throw Error(Errc::bad_parameter, "X must be >= 1");
  FusedResult out;
  for (const auto& l : lists) out.ranked.insert(out.ranked.end(), l.begin(), l.end());
  if (out.ranked.empty()) throw Error(Errc::empty_input, "fusion needs at least one candidate");
  std::stable_sort(out.ranked.begin(), out.ranked.end(),
                   [](const GlobalCandidate& a, const GlobalCandidate& b) {
                     if (a.probability != b.probability) return a.probability > b.probability;
                     if (a.source_classifier != b.source_classifier)
                       return a.source_classifier < b.source_classifier;
                     return a.class_id < b.class_id;
                   });
  if (out.ranked.size() > X) out.ranked.resize(X);
  return out;
}

}  // namespace ltpc::fusion
