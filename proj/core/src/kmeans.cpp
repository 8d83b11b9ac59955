#include "ltpc/kmeans.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>

#include "ltpc/error.hpp"

namespace ltpc::placedef {

double squared_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return s;
}

namespace {

std::size_t nearest(std::span<const FeatureVector> centroids, std::span<const double> p) {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t c = 0; c < centroids.size(); ++c) {
    const double d = squared_distance(centroids[c], p);
    if (d < best_d) {
      best_d = d;
      best = c;
    }
  }
  return best;
}

void assign(std::span<const FeatureVector> features, const std::vector<FeatureVector>& centroids,
            std::vector<std::size_t>& labels) {
  for (std::size_t i = 0; i < features.size(); ++i) labels[i] = nearest(centroids, features[i]);
}

// Sequential accumulation in point order keeps centroid sums reproducible.
void recompute_centroid(std::span<const FeatureVector> features,
                        const std::vector<std::size_t>& labels, std::size_t c,
                        FeatureVector& centroid) {
  std::fill(centroid.begin(), centroid.end(), 0.0);
  std::size_t count = 0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    if (labels[i] != c) continue;
    for (std::size_t d = 0; d < centroid.size(); ++d) centroid[d] += features[i][d];
    ++count;
  }
  if (count > 0)
    for (double& v : centroid) v /= static_cast<double>(count);
}

}  // namespace

double distortion(std::span<const FeatureVector> features, const ClusterAssignment& a) {
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i)
    total += squared_distance(features[i], a.centroids[a.labels[i]]);
  return total;
}

ClusterAssignment kmeans(std::span<const FeatureVector> features, std::size_t k, int iters,
                         std::uint64_t seed) {
  const std::size_t n = features.size();
  if (k == 0) throw Error(Errc::bad_parameter, "k must be >= 1");
  if (k > n)
    throw Error(Errc::too_few_points,
                "k=" + std::to_string(k) + " exceeds point count " + std::to_string(n));
  const std::size_t dim = features.front().size();
  for (const FeatureVector& f : features)
    if (f.size() != dim) throw Error(Errc::dimension_mismatch, "ragged feature set");

  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});
  std::vector<std::size_t> picked;
  picked.reserve(k);
  std::mt19937_64 rng(seed);
  std::sample(indices.begin(), indices.end(), std::back_inserter(picked), k, rng);

  ClusterAssignment out;
  out.centroids.reserve(k);
  for (std::size_t idx : picked) out.centroids.push_back(features[idx]);
  out.labels.assign(n, 0);
  assign(features, out.centroids, out.labels);
  out.distortion_history.push_back(distortion(features, out));

  std::vector<std::size_t> counts(k);
  for (int it = 0; it < iters; ++it) {
    for (std::size_t c = 0; c < k; ++c) recompute_centroid(features, out.labels, c, out.centroids[c]);

    std::fill(counts.begin(), counts.end(), 0);
    for (std::size_t l : out.labels) ++counts[l];
    for (std::size_t c = 0; c < k; ++c) {
      if (counts[c] > 0) continue;
      // Move the worst-fit point (from a cluster that can spare it) into the
      // empty cluster.
      std::size_t far = n;
      double far_d = -1.0;
      for (std::size_t i = 0; i < n; ++i) {
        if (counts[out.labels[i]] < 2) continue;
        const double d = squared_distance(features[i], out.centroids[out.labels[i]]);
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      if (far == n) break;
      const std::size_t donor = out.labels[far];
      out.labels[far] = c;
      --counts[donor];
      counts[c] = 1;
      out.centroids[c] = features[far];
      recompute_centroid(features, out.labels, donor, out.centroids[donor]);
    }

    std::vector<std::size_t> next(n);
    assign(features, out.centroids, next);
    const bool unchanged = next == out.labels;
    out.labels = std::move(next);
    out.distortion_history.push_back(distortion(features, out));
    out.iterations = it + 1;
    if (unchanged) {
      out.converged = true;
      break;
    }
  }
  return out;
}

}  // namespace ltpc::placedef
