#pragma once

// Dataset ingestion: pose CSV files, feature files, and their association
// into a TrainingSet.
//
// Feature binary layout (little-endian):
//   bytes 0-3   magic "LTPF"
//   bytes 4-7   u32 version (1)
//   bytes 8-11  u32 feature dimension F
//   bytes 12-15 u32 row count
//   then count * F float32 values, row-major.
// Any file not starting with the magic is read as CSV: one row per line with
// either F values, or F+1 values where the first is a timestamp in
// microseconds.

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "ltpc/types.hpp"

namespace ltpc::data {

inline constexpr std::uint32_t kFeatureFormatVersion = 1;
inline constexpr std::size_t kFeatureHeaderBytes = 16;
inline constexpr std::int64_t kDefaultAssociationWindowUs = 500'000;

struct PoseRecord {
  std::int64_t timestamp = 0;  // microseconds
  Viewpoint viewpoint;
};

/// CSV `timestamp,x,y,theta`, optional header line. Theta is normalized.
std::vector<PoseRecord> load_poses(const std::string& path);
std::vector<PoseRecord> parse_poses(const std::string& csv_text);

/// NCLT ground-truth CSV `utime,x,y,z,roll,pitch,yaw` (no header). Rows with
/// non-finite x, y or yaw are skipped; yaw becomes theta.
std::vector<PoseRecord> load_poses_nclt(const std::string& path);
std::vector<PoseRecord> parse_poses_nclt(const std::string& csv_text);

void write_poses_csv(const std::string& path, const std::vector<PoseRecord>& poses);

struct FeatureTable {
  std::size_t dim = 0;
  std::vector<std::vector<double>> rows;
  std::vector<std::int64_t> timestamps;  // empty unless the source had them
};

/// Reads binary or CSV features. `expected_dim` of 0 accepts any dimension.
FeatureTable load_features(const std::string& path, std::size_t expected_dim = 0);
FeatureTable parse_features(const std::vector<std::uint8_t>& bytes, std::size_t expected_dim = 0);

void write_features_binary(const std::string& path, const FeatureTable& table);
void write_features_csv(const std::string& path, const FeatureTable& table);

enum class Association { strict, loose };

/// strict: equal counts, positional pairing. loose: each feature row takes
/// the pose nearest in time, which must lie within `window_us`.
TrainingSet associate(const std::vector<PoseRecord>& poses, const FeatureTable& features,
                      Association mode, int season_id, std::string label,
                      std::int64_t window_us = kDefaultAssociationWindowUs);

/// JSON manifest:
///   {"poses": "...", "features": "...", "label": "...", "season_id": 1,
///    "F": 32, "pose_format": "plain"|"nclt", "association": "strict"|"loose"}
/// Relative paths resolve against the manifest's directory.
struct DatasetManifest {
  std::string poses;
  std::string features;
  std::string label;
  int season_id = 1;
  std::size_t feature_dim = 0;
  std::string pose_format = "plain";
  Association association = Association::strict;
};

DatasetManifest load_manifest(const std::string& path);
void write_manifest(const std::string& path, const DatasetManifest& manifest);
TrainingSet load_dataset(const DatasetManifest& manifest);

/// Writes poses.csv, features.bin and manifest.json for `set` under `dir`.
/// Returns the manifest path.
std::string export_dataset(const TrainingSet& set, const std::string& dir);

}  // namespace ltpc::data
