#pragma once

// Domain types shared by every module: viewpoints, mapped images, training
// sets, retraining histories and place partitions.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ltpc {

inline constexpr double kPi = 3.14159265358979323846;

/// Maps any finite angle into (-pi, pi]. Idempotent.
double normalize_angle(double theta) noexcept;

/// Planar camera pose in the global map frame. Construct through make() to
/// get the angle normalized.
struct Viewpoint {
  double x = 0.0;      // meters
  double y = 0.0;      // meters
  double theta = 0.0;  // radians, (-pi, pi]

  static Viewpoint make(double x, double y, double theta);

  friend bool operator==(const Viewpoint&, const Viewpoint&) = default;
};

struct MappedImage {
  std::size_t id = 0;          // 0-based sequence index
  std::int64_t timestamp = 0;  // microseconds
  Viewpoint viewpoint;
  std::vector<double> feature;

  friend bool operator==(const MappedImage&, const MappedImage&) = default;
};

/// One season's exploration output D^i.
struct TrainingSet {
  int season_id = 1;
  std::string label;
  std::vector<MappedImage> images;

  std::size_t size() const noexcept { return images.size(); }
  std::size_t feature_dim() const noexcept;

  /// Throws if timestamps are not strictly increasing, dimensions disagree,
  /// or any value is non-finite.
  void validate() const;
};

/// Bit string recording, per mission, whether a classifier was fine-tuned
/// with that mission's training set. Values are immutable; extended()
/// returns a new history one bit longer.
class RetrainHistory {
 public:
  RetrainHistory() = default;
  explicit RetrainHistory(std::vector<std::uint8_t> bits);

  /// Parses "0110"-style strings.
  static RetrainHistory parse(std::string_view bits);
  static RetrainHistory zeros(std::size_t length);

  RetrainHistory extended(bool retrained) const;

  std::size_t length() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  bool bit(std::size_t j) const { return bits_.at(j) != 0; }
  bool last_bit() const noexcept { return !bits_.empty() && bits_.back() != 0; }
  std::span<const std::uint8_t> bits() const noexcept { return bits_; }
  std::string to_string() const;

  friend auto operator<=>(const RetrainHistory&, const RetrainHistory&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

std::size_t ones_count(const RetrainHistory& h) noexcept;

double viewpoint_distance(const Viewpoint& a, const Viewpoint& b) noexcept;

/// Smallest absolute difference between two angles on the circle, in [0, pi].
double angle_difference(double a, double b) noexcept;

/// Travel distance along images[from..to] (inclusive).
double path_length(std::span<const MappedImage> images, std::size_t from, std::size_t to);

enum class PartitionMethod { location, location_appearance, incremental };

std::string_view to_string(PartitionMethod m) noexcept;
PartitionMethod parse_partition_method(std::string_view name);

struct PlaceClass {
  int class_id = 0;
  std::size_t keyframe = 0;          // image id of the keyframe
  std::vector<std::size_t> members;  // image ids; empty once summarized
  std::size_t member_count = 0;
  Viewpoint keyframe_viewpoint;
  Viewpoint representative;  // centroid of member positions, circular-mean heading

  friend bool operator==(const PlaceClass&, const PlaceClass&) = default;
};

struct PlacePartition {
  std::vector<PlaceClass> classes;
  int source_season = 0;
  PartitionMethod method = PartitionMethod::location;

  std::size_t size() const noexcept { return classes.size(); }
  bool empty() const noexcept { return classes.empty(); }

  /// Per-image class label, indexed by image id.
  std::vector<int> labels(std::size_t n_images) const;

  /// Checks that every image 0..n_images-1 is in exactly one class, class
  /// ids are dense, and keyframes are members.
  void validate(std::size_t n_images) const;

  /// Copy without member lists. Classifier records keep only this form so
  /// persisted state does not grow with the training set length.
  PlacePartition summarized() const;

  friend bool operator==(const PlacePartition&, const PlacePartition&) = default;
};

/// Builds a class from member ids of `set`, filling keyframe pose and the
/// representative location.
PlaceClass make_place_class(int class_id, std::span<const MappedImage> images,
                            std::vector<std::size_t> members, std::size_t keyframe);

Viewpoint centroid_viewpoint(std::span<const MappedImage> images,
                             std::span<const std::size_t> members);

}  // namespace ltpc
