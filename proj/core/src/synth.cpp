#include "ltpc/synth.hpp"

#include <cmath>
#include <random>

#include "ltpc/error.hpp"

namespace ltpc::data {

namespace {

enum Stream : std::uint64_t { kPlaces = 1, kSeasons = 2, kPoses = 3, kNoise = 4 };

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream, std::uint64_t index = 0) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream * 1000003ULL + index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<double> gaussian(std::size_t dim, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> v(dim);
  for (double& x : v) x = n(rng);
  return v;
}

std::vector<double> unit(std::vector<double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  s = std::sqrt(s);
  for (double& x : v) x /= s;
  return v;
}

}  // namespace

void SynthConfig::validate() const {
  if (n_places == 0 || images_per_place == 0 || feature_dim == 0 || n_seasons == 0 ||
      !(loop_length > 0.0) || place_signal < 0.0 || season_drift < 0.0 || noise < 0.0 ||
      drift_persistence < 0.0 || drift_persistence >= 1.0 || place_extent < 0.0 ||
      place_extent >= 1.0 || pose_jitter < 0.0)
    throw Error(Errc::bad_parameter, "invalid synthetic configuration");
}

Vectors synth_place_vectors(const SynthConfig& cfg) {
  std::mt19937_64 rng(stream_seed(cfg.seed, kPlaces));
  Vectors out;
  for (std::size_t p = 0; p < cfg.n_places; ++p) out.push_back(unit(gaussian(cfg.feature_dim, rng)));
  return out;
}

Vectors synth_season_vectors(const SynthConfig& cfg) {
  std::mt19937_64 rng(stream_seed(cfg.seed, kSeasons));
  const double rho = cfg.drift_persistence;
  const double fresh = std::sqrt(1.0 - rho * rho);
  Vectors out;
  for (std::size_t s = 0; s < cfg.n_seasons; ++s) {
    std::vector<double> g = unit(gaussian(cfg.feature_dim, rng));
    if (!out.empty() && rho > 0.0)
      for (std::size_t d = 0; d < g.size(); ++d) g[d] = rho * out.back()[d] + fresh * g[d];
    out.push_back(unit(std::move(g)));
  }
  return out;
}

Viewpoint synth_waypoint(const SynthConfig& cfg, std::size_t place) {
  const double radius = cfg.loop_length / (2.0 * kPi);
  const double a = 2.0 * kPi * static_cast<double>(place) / static_cast<double>(cfg.n_places);
  return Viewpoint::make(radius * std::cos(a), radius * std::sin(a), a + kPi / 2.0);
}

std::vector<std::size_t> synth_place_labels(const SynthConfig& cfg) {
  std::vector<std::size_t> out;
  out.reserve(cfg.n_places * cfg.images_per_place);
  for (std::size_t p = 0; p < cfg.n_places; ++p)
    for (std::size_t j = 0; j < cfg.images_per_place; ++j) out.push_back(p);
  return out;
}

std::vector<TrainingSet> synth_generate_with(const SynthConfig& cfg, const Vectors& season_vectors) {
  cfg.validate();
  if (season_vectors.size() != cfg.n_seasons)
    throw Error(Errc::bad_parameter, "need one season vector per season");
  const Vectors places = synth_place_vectors(cfg);
  const double radius = cfg.loop_length / (2.0 * kPi);
  const double spacing = cfg.place_spacing();
  const double ipp = static_cast<double>(cfg.images_per_place);

  std::vector<TrainingSet> seasons;
  for (std::size_t s = 0; s < cfg.n_seasons; ++s) {
    if (season_vectors[s].size() != cfg.feature_dim)
      throw Error(Errc::dimension_mismatch, "season vector dimension");
    std::mt19937_64 pose_rng(stream_seed(cfg.seed, kPoses, s));
    std::mt19937_64 noise_rng(stream_seed(cfg.seed, kNoise, s));
    std::normal_distribution<double> jitter(0.0, 1.0);

    TrainingSet set;
    set.season_id = static_cast<int>(s + 1);
    set.label = "synthetic-" + std::to_string(s + 1);
    std::size_t id = 0;
    for (std::size_t p = 0; p < cfg.n_places; ++p) {
      for (std::size_t j = 0; j < cfg.images_per_place; ++j) {
        const double arc = static_cast<double>(p) * spacing +
                           ((static_cast<double>(j) + 0.5) / ipp - 0.5) * cfg.place_extent * spacing;
        const double a = arc / radius;
        const double r = radius + cfg.pose_jitter * jitter(pose_rng);
        const double heading = a + kPi / 2.0 + 0.02 * jitter(pose_rng);

        std::vector<double> f(cfg.feature_dim);
        for (std::size_t d = 0; d < cfg.feature_dim; ++d)
          f[d] = cfg.place_signal * places[p][d] + cfg.season_drift * season_vectors[s][d];
        if (cfg.noise > 0.0) {
          const std::vector<double> eps = gaussian(cfg.feature_dim, noise_rng);
          for (std::size_t d = 0; d < cfg.feature_dim; ++d) f[d] += cfg.noise * eps[d];
        }
        const std::int64_t t = static_cast<std::int64_t>(s) * 1'000'000'000LL +
                               static_cast<std::int64_t>(id) * 1'000'000LL;
        set.images.push_back(MappedImage{id, t, Viewpoint::make(r * std::cos(a), r * std::sin(a), heading),
                                         std::move(f)});
        ++id;
      }
    }
    seasons.push_back(std::move(set));
  }
  return seasons;
}

std::vector<TrainingSet> synth_generate(const SynthConfig& cfg) {
  cfg.validate();
  return synth_generate_with(cfg, synth_season_vectors(cfg));
}

}  // namespace ltpc::data
