#include "ltpc/placedef.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ltpc/error.hpp"

namespace ltpc::placedef {

void PartitionConfig::validate() const {
  if (!(t_d > 0.0)) throw Error(Errc::bad_parameter, "t_d must be positive");
  if (kmeans_iters < 0) throw Error(Errc::bad_parameter, "kmeans_iters must be >= 0");
  if (!(thresholds.pos_max > 0.0) || !(thresholds.ang_max > 0.0) || !(thresholds.feat_max > 0.0))
    throw Error(Errc::bad_parameter, "incremental thresholds must be positive");
}

std::size_t default_k(std::size_t n_images, double t_d) {
  if (n_images == 0) return 1;
  const double k = std::ceil(static_cast<double>(n_images) * 3.0 / t_d / 4.0);
  return std::clamp<std::size_t>(static_cast<std::size_t>(k), 1, n_images);
}

namespace {

void require_images(const TrainingSet& set) {
  if (set.images.empty())
    throw Error(Errc::empty_input, "training set '" + set.label + "' has no images");
}

PlacePartition assemble(const TrainingSet& set, std::vector<std::vector<std::size_t>> groups,
                        PartitionMethod method) {
  std::sort(groups.begin(), groups.end(),
            [](const auto& a, const auto& b) { return a.front() < b.front(); });
  PlacePartition p;
  p.method = method;
  p.source_season = set.season_id;
  p.classes.reserve(groups.size());
  for (auto& g : groups) {
    const std::size_t keyframe = g.front();
    p.classes.push_back(
        make_place_class(static_cast<int>(p.classes.size()), set.images, std::move(g), keyframe));
  }
  return p;
}

// Splits an ordered member list into runs whose travel distance, measured
// along the full trajectory, stays below t_d.
void split_by_distance(const TrainingSet& set, const std::vector<std::size_t>& members, double t_d,
                       std::vector<std::vector<std::size_t>>& out) {
  std::vector<std::size_t> current{members.front()};
  double travelled = 0.0;
  for (std::size_t j = 1; j < members.size(); ++j) {
    travelled += path_length(set.images, members[j - 1], members[j]);
    if (travelled >= t_d) {
      out.push_back(std::move(current));
      current = {members[j]};
      travelled = 0.0;
    } else {
      current.push_back(members[j]);
    }
  }
  out.push_back(std::move(current));
}

}  // namespace

PlacePartition partition_by_location(const TrainingSet& set, double t_d) {
  require_images(set);
  if (!(t_d > 0.0)) throw Error(Errc::bad_parameter, "t_d must be positive");
  std::vector<std::size_t> all(set.images.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<std::vector<std::size_t>> groups;
  split_by_distance(set, all, t_d, groups);
  return assemble(set, std::move(groups), PartitionMethod::location);
}

std::vector<double> l2_normalize(std::span<const double> f) {
  double norm = 0.0;
  for (double v : f) norm += v * v;
  norm = std::sqrt(norm);
  if (!(norm > 0.0)) throw Error(Errc::zero_vector, "cannot L2-normalize a zero vector");
  std::vector<double> out(f.begin(), f.end());
  for (double& v : out) v /= norm;
  return out;
}

PlacePartition partition_location_appearance(const TrainingSet& set, const PartitionConfig& cfg) {
  require_images(set);
  cfg.validate();
  const std::size_t k = cfg.k == 0 ? default_k(set.size(), cfg.t_d) : cfg.k;

  std::vector<FeatureVector> features;
  features.reserve(set.size());
  for (const MappedImage& img : set.images) features.push_back(img.feature);
  const ClusterAssignment clusters = kmeans(features, k, cfg.kmeans_iters, cfg.seed);

  std::vector<std::vector<std::size_t>> by_cluster(k);
  for (std::size_t i = 0; i < set.size(); ++i) by_cluster[clusters.labels[i]].push_back(i);

  std::vector<std::vector<std::size_t>> groups;
  for (const auto& members : by_cluster)
    if (!members.empty()) split_by_distance(set, members, cfg.t_d, groups);
  return assemble(set, std::move(groups), PartitionMethod::location_appearance);
}

IncrementalResult partition_incremental_traced(const TrainingSet& set, const PartitionConfig& cfg) {
  require_images(set);
  cfg.validate();
  const IncrementalThresholds& th = cfg.thresholds;

  struct Open {
    std::size_t keyframe;
    std::vector<double> keyframe_feature;
    std::vector<std::size_t> members;
  };
  std::vector<Open> open;
  IncrementalResult result;
  result.log.reserve(set.size());

  for (const MappedImage& img : set.images) {
    std::vector<double> f = l2_normalize(img.feature);
    Insertion rec;
    rec.image = img.id;

    std::size_t nearest = open.size();
    double nearest_d = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < open.size(); ++c) {
      const double d = viewpoint_distance(set.images[open[c].keyframe].viewpoint, img.viewpoint);
      if (d < nearest_d) {
        nearest_d = d;
        nearest = c;
      }
    }

    bool inserted = false;
    if (nearest < open.size()) {
      const Open& cand = open[nearest];
      rec.position_distance = nearest_d;
      rec.angle_distance =
          angle_difference(set.images[cand.keyframe].viewpoint.theta, img.viewpoint.theta);
      rec.feature_distance = std::sqrt(squared_distance(cand.keyframe_feature, f));
      inserted = rec.position_distance < th.pos_max && rec.angle_distance < th.ang_max &&
                 rec.feature_distance < th.feat_max;
    }
    if (inserted) {
      open[nearest].members.push_back(img.id);
      rec.class_id = static_cast<int>(nearest);
    } else {
      rec.class_id = static_cast<int>(open.size());
      rec.created = true;
      open.push_back(Open{img.id, std::move(f), {img.id}});
    }
    result.log.push_back(rec);
  }

  // Classes are created in order of their first member, so ids already match
  // the order assemble() would produce.
  result.partition.method = PartitionMethod::incremental;
  result.partition.source_season = set.season_id;
  for (std::size_t c = 0; c < open.size(); ++c)
    result.partition.classes.push_back(make_place_class(
        static_cast<int>(c), set.images, std::move(open[c].members), open[c].keyframe));
  return result;
}

PlacePartition partition_incremental(const TrainingSet& set, const PartitionConfig& cfg) {
  return partition_incremental_traced(set, cfg).partition;
}

PlacePartition define_places(const TrainingSet& set, const PartitionConfig& cfg) {
  switch (cfg.method) {
    case PartitionMethod::location:
      return partition_by_location(set, cfg.t_d);
    case PartitionMethod::location_appearance:
      return partition_location_appearance(set, cfg);
    case PartitionMethod::incremental:
      return partition_incremental(set, cfg);
  }
  throw Error(Errc::bad_parameter, "unknown partition method");
}

std::vector<double> t_d_candidates(double bound) {
  std::vector<double> out;
  for (int i = 1; 3.0 * i <= bound; ++i) out.push_back(3.0 * i);
  if (out.empty()) throw Error(Errc::empty_input, "no T_d candidates below bound");
  return out;
}

double search_t_d(const TrainingSet& set, std::span<const double> candidates,
                  const PartitionScorer& scorer) {
  if (candidates.empty()) throw Error(Errc::empty_input, "empty T_d candidate set");
  double best_t = 0.0;
  double best_score = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (double t : candidates) {
    const double s = scorer(partition_by_location(set, t), t);
    if (first || s > best_score || (s == best_score && t < best_t)) {
      best_t = t;
      best_score = s;
      first = false;
    }
  }
  return best_t;
}

}  // namespace ltpc::placedef
