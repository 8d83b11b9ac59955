#include "ltpc/types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ltpc/error.hpp"

namespace ltpc {

std::string_view to_string(Errc code) noexcept {
  switch (code) {
    case Errc::invalid_range: return "invalid-range";
    case Errc::empty_input: return "empty-input";
    case Errc::zero_vector: return "zero-vector";
    case Errc::too_few_points: return "too-few-points";
    case Errc::label_out_of_range: return "label-out-of-range";
    case Errc::dimension_mismatch: return "dimension-mismatch";
    case Errc::bad_parameter: return "bad-parameter";
    case Errc::enumeration_bound: return "enumeration-bound";
    case Errc::season_mismatch: return "season-mismatch";
    case Errc::schema: return "schema";
    case Errc::missing_query: return "missing-query";
    case Errc::malformed_row: return "malformed-row";
    case Errc::non_monotone: return "non-monotone";
    case Errc::header_mismatch: return "header-mismatch";
    case Errc::truncated: return "truncated";
    case Errc::count_mismatch: return "count-mismatch";
    case Errc::unmatched: return "unmatched";
    case Errc::io: return "io";
    case Errc::version_mismatch: return "version-mismatch";
    case Errc::checksum: return "checksum";
  }
  return "unknown";
}

bool is_data_error(Errc code) noexcept {
  switch (code) {
    case Errc::schema:
    case Errc::missing_query:
    case Errc::malformed_row:
    case Errc::non_monotone:
    case Errc::header_mismatch:
    case Errc::truncated:
    case Errc::count_mismatch:
    case Errc::unmatched:
    case Errc::io:
    case Errc::version_mismatch:
    case Errc::checksum:
    case Errc::empty_input:
    case Errc::zero_vector:
    case Errc::dimension_mismatch:
    case Errc::season_mismatch:
      return true;
    default:
      return false;
  }
}

double normalize_angle(double theta) noexcept {
  double r = std::remainder(theta, 2.0 * kPi);
  if (r <= -kPi) r += 2.0 * kPi;
  if (r > kPi) r = kPi;
  return r;
}

Viewpoint Viewpoint::make(double x, double y, double theta) {
  if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(theta))
    throw Error(Errc::bad_parameter, "viewpoint components must be finite");
  return Viewpoint{x, y, normalize_angle(theta)};
}

std::size_t TrainingSet::feature_dim() const noexcept {
  return images.empty() ? 0 : images.front().feature.size();
}

void TrainingSet::validate() const {
  const std::size_t dim = feature_dim();
  for (std::size_t i = 0; i < images.size(); ++i) {
    const MappedImage& img = images[i];
    if (img.id != i)
      throw Error(Errc::schema, "image ids must equal their sequence index (image " +
                                    std::to_string(i) + ")");
    if (i > 0 && img.timestamp <= images[i - 1].timestamp)
      throw Error(Errc::non_monotone,
                  "timestamps not strictly increasing at image " + std::to_string(i));
    if (img.feature.size() != dim)
      throw Error(Errc::dimension_mismatch,
                  "image " + std::to_string(i) + " has feature dimension " +
                      std::to_string(img.feature.size()) + ", expected " + std::to_string(dim));
    const Viewpoint& v = img.viewpoint;
    if (!std::isfinite(v.x) || !std::isfinite(v.y) || !std::isfinite(v.theta))
      throw Error(Errc::schema, "non-finite viewpoint at image " + std::to_string(i));
    for (double f : img.feature)
      if (!std::isfinite(f))
        throw Error(Errc::schema, "non-finite feature at image " + std::to_string(i));
  }
}

RetrainHistory::RetrainHistory(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {
  for (auto& b : bits_) b = b ? 1 : 0;
}

RetrainHistory RetrainHistory::parse(std::string_view bits) {
  std::vector<std::uint8_t> out;
  out.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1')
      throw Error(Errc::bad_parameter, "history must contain only 0/1, got '" +
                                           std::string(bits) + "'");
    out.push_back(c == '1');
  }
  return RetrainHistory(std::move(out));
}

RetrainHistory RetrainHistory::zeros(std::size_t length) {
  return RetrainHistory(std::vector<std::uint8_t>(length, 0));
}

RetrainHistory RetrainHistory::extended(bool retrained) const {
  RetrainHistory next = *this;
  next.bits_.push_back(retrained ? 1 : 0);
  return next;
}

std::string RetrainHistory::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (auto b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

std::size_t ones_count(const RetrainHistory& h) noexcept {
  const auto bits = h.bits();
  return static_cast<std::size_t>(std::count(bits.begin(), bits.end(), std::uint8_t{1}));
}

double viewpoint_distance(const Viewpoint& a, const Viewpoint& b) noexcept {
  return std::hypot(a.x - b.x, a.y - b.y);
}

double angle_difference(double a, double b) noexcept {
  return std::abs(normalize_angle(a - b));
}

double path_length(std::span<const MappedImage> images, std::size_t from, std::size_t to) {
  if (from > to || to >= images.size())
    throw Error(Errc::invalid_range, "path range [" + std::to_string(from) + ", " +
                                         std::to_string(to) + "] over " +
                                         std::to_string(images.size()) + " images");
  double total = 0.0;
  for (std::size_t i = from; i < to; ++i)
    total += viewpoint_distance(images[i].viewpoint, images[i + 1].viewpoint);
  return total;
}

std::string_view to_string(PartitionMethod m) noexcept {
  switch (m) {
    case PartitionMethod::location: return "location";
    case PartitionMethod::location_appearance: return "location-appearance";
    case PartitionMethod::incremental: return "incremental";
  }
  return "location";
}

PartitionMethod parse_partition_method(std::string_view name) {
  if (name == "location" || name == "1") return PartitionMethod::location;
  if (name == "location-appearance" || name == "2") return PartitionMethod::location_appearance;
  if (name == "incremental" || name == "3") return PartitionMethod::incremental;
  throw Error(Errc::bad_parameter, "unknown place-definition method '" + std::string(name) + "'");
}

std::vector<int> PlacePartition::labels(std::size_t n_images) const {
  std::vector<int> out(n_images, -1);
  for (const PlaceClass& c : classes)
    for (std::size_t m : c.members)
      if (m < n_images) out[m] = c.class_id;
  return out;
}

void PlacePartition::validate(std::size_t n_images) const {
  std::vector<int> seen(n_images, 0);
  for (std::size_t k = 0; k < classes.size(); ++k) {
    const PlaceClass& c = classes[k];
    if (c.class_id != static_cast<int>(k))
      throw Error(Errc::schema, "class ids are not dense at position " + std::to_string(k));
    if (c.members.empty()) throw Error(Errc::schema, "class " + std::to_string(k) + " is empty");
    if (std::find(c.members.begin(), c.members.end(), c.keyframe) == c.members.end())
      throw Error(Errc::schema, "keyframe of class " + std::to_string(k) + " is not a member");
    for (std::size_t m : c.members) {
      if (m >= n_images) throw Error(Errc::schema, "member id out of range");
      if (seen[m]++) throw Error(Errc::schema, "image " + std::to_string(m) + " in two classes");
    }
  }
  for (std::size_t i = 0; i < n_images; ++i)
    if (!seen[i]) throw Error(Errc::schema, "image " + std::to_string(i) + " unassigned");
}

PlacePartition PlacePartition::summarized() const {
  PlacePartition out = *this;
  for (PlaceClass& c : out.classes) {
    c.members.clear();
    c.members.shrink_to_fit();
  }
  return out;
}

Viewpoint centroid_viewpoint(std::span<const MappedImage> images,
                             std::span<const std::size_t> members) {
  double sx = 0.0, sy = 0.0, ss = 0.0, sc = 0.0;
  for (std::size_t m : members) {
    const Viewpoint& v = images[m].viewpoint;
    sx += v.x;
    sy += v.y;
    ss += std::sin(v.theta);
    sc += std::cos(v.theta);
  }
  const double n = static_cast<double>(members.size());
  const double theta = (ss == 0.0 && sc == 0.0) ? 0.0 : std::atan2(ss, sc);
  return Viewpoint{sx / n, sy / n, normalize_angle(theta)};
}

PlaceClass make_place_class(int class_id, std::span<const MappedImage> images,
                            std::vector<std::size_t> members, std::size_t keyframe) {
  PlaceClass c;
  c.class_id = class_id;
  c.keyframe = keyframe;
  c.keyframe_viewpoint = images[keyframe].viewpoint;
  c.representative = centroid_viewpoint(images, members);
  c.member_count = members.size();
  c.members = std::move(members);
  return c;
}

}  // namespace ltpc
