#include "ltpc/data.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>

#include <json.hpp>

#include "ltpc/error.hpp"

namespace ltpc::data {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr char kFeatureMagic[4] = {'L', 'T', 'P', 'F'};

std::vector<std::uint8_t> read_bytes(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::io, "cannot open '" + path + "'");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_text(const std::string& path) {
  const std::vector<std::uint8_t> b = read_bytes(path);
  return {b.begin(), b.end()};
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(sep, start);
    out.push_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// nan/inf are not accepted by from_chars on every library; handle them here.
bool parse_real(std::string_view s, double& out) {
  const std::string_view t = trim(s);
  if (t == "nan" || t == "NaN" || t == "-nan") {
    out = std::nan("");
    return true;
  }
  return parse_number(t, out);
}

template <typename RowFn>
void for_each_line(const std::string& text, RowFn&& fn) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view v = trim(line);
    if (v.empty() || v.front() == '#') continue;
    fn(v, line_no);
  }
}

void check_monotone(const std::vector<PoseRecord>& poses) {
  for (std::size_t i = 1; i < poses.size(); ++i)
    if (poses[i].timestamp <= poses[i - 1].timestamp)
      throw Error(Errc::non_monotone, "pose timestamps not strictly increasing at row " +
                                          std::to_string(i));
}

}  // namespace

std::vector<PoseRecord> parse_poses(const std::string& csv_text) {
  std::vector<PoseRecord> out;
  for_each_line(csv_text, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    std::int64_t t = 0;
    double x = 0, y = 0, th = 0;
    if (f.size() == 4 && !parse_number(f[0], t) && out.empty() && line_no == 1) return;  // header
    if (f.size() != 4 || !parse_number(f[0], t) || !parse_real(f[1], x) || !parse_real(f[2], y) ||
        !parse_real(f[3], th) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(th))
      throw Error(Errc::malformed_row, "pose line " + std::to_string(line_no) + ": '" +
                                           std::string(line) + "'");
    out.push_back(PoseRecord{t, Viewpoint::make(x, y, th)});
  });
  check_monotone(out);
  return out;
}

std::vector<PoseRecord> load_poses(const std::string& path) { return parse_poses(read_text(path)); }

std::vector<PoseRecord> parse_poses_nclt(const std::string& csv_text) {
  std::vector<PoseRecord> out;
  for_each_line(csv_text, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    std::int64_t t = 0;
    double v[6];
    bool ok = f.size() == 7 && parse_number(f[0], t);
    for (std::size_t k = 0; ok && k < 6; ++k) ok = parse_real(f[k + 1], v[k]);
    if (!ok)
      throw Error(Errc::malformed_row, "NCLT pose line " + std::to_string(line_no) + ": '" +
                                           std::string(line) + "'");
    if (!std::isfinite(v[0]) || !std::isfinite(v[1]) || !std::isfinite(v[5])) return;
    out.push_back(PoseRecord{t, Viewpoint::make(v[0], v[1], v[5])});
  });
  check_monotone(out);
  return out;
}

std::vector<PoseRecord> load_poses_nclt(const std::string& path) {
  return parse_poses_nclt(read_text(path));
}

void write_poses_csv(const std::string& path, const std::vector<PoseRecord>& poses) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out << "timestamp,x,y,theta\n";
  out.precision(17);
  for (const PoseRecord& p : poses)
    out << p.timestamp << ',' << p.viewpoint.x << ',' << p.viewpoint.y << ',' << p.viewpoint.theta
        << '\n';
}

FeatureTable parse_features(const std::vector<std::uint8_t>& bytes, std::size_t expected_dim) {
  FeatureTable table;
  if (bytes.size() >= 4 && std::memcmp(bytes.data(), kFeatureMagic, 4) == 0) {
    if (bytes.size() < kFeatureHeaderBytes)
      throw Error(Errc::truncated, "feature header shorter than 16 bytes");
    auto u32 = [&](std::size_t off) {
      std::uint32_t v = 0;
      for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(bytes[off + b]) << (8 * b);
      return v;
    };
    const std::uint32_t version = u32(4), dim = u32(8), count = u32(12);
    if (version != kFeatureFormatVersion)
      throw Error(Errc::header_mismatch, "feature format version " + std::to_string(version));
    if (dim == 0 || (expected_dim != 0 && dim != expected_dim))
      throw Error(Errc::header_mismatch, "feature header F=" + std::to_string(dim) +
                                             ", expected " + std::to_string(expected_dim));
    const std::size_t need = kFeatureHeaderBytes + std::size_t{count} * dim * 4;
    if (bytes.size() < need)
      throw Error(Errc::truncated, "feature payload has " +
                                       std::to_string(bytes.size() - kFeatureHeaderBytes) +
                                       " bytes, header promises " +
                                       std::to_string(need - kFeatureHeaderBytes));
    if (bytes.size() > need) throw Error(Errc::header_mismatch, "trailing bytes after features");
    table.dim = dim;
    table.rows.assign(count, std::vector<double>(dim));
    std::size_t off = kFeatureHeaderBytes;
    for (auto& row : table.rows)
      for (double& v : row) {
        v = static_cast<double>(std::bit_cast<float>(u32(off)));
        off += 4;
      }
    return table;
  }

  const std::string text(bytes.begin(), bytes.end());
  bool with_time = false;
  for_each_line(text, [&](std::string_view line, std::size_t line_no) {
    const auto f = split(line, ',');
    if (table.rows.empty()) {
      if (expected_dim != 0 && f.size() == expected_dim + 1)
        with_time = true;
      else if (expected_dim != 0 && f.size() != expected_dim)
        throw Error(Errc::header_mismatch, "feature CSV has " + std::to_string(f.size()) +
                                               " columns, expected " + std::to_string(expected_dim));
      table.dim = with_time ? f.size() - 1 : f.size();
    }
    if (f.size() != table.dim + (with_time ? 1 : 0))
      throw Error(Errc::malformed_row, "feature line " + std::to_string(line_no) + " has " +
                                           std::to_string(f.size()) + " columns");
    std::size_t k = 0;
    if (with_time) {
      std::int64_t t = 0;
      if (!parse_number(f[0], t))
        throw Error(Errc::malformed_row, "bad timestamp on feature line " + std::to_string(line_no));
      table.timestamps.push_back(t);
      k = 1;
    }
    std::vector<double> row(table.dim);
    for (std::size_t d = 0; d < table.dim; ++d)
      if (!parse_real(f[k + d], row[d]) || !std::isfinite(row[d]))
        throw Error(Errc::malformed_row, "bad value on feature line " + std::to_string(line_no));
    table.rows.push_back(std::move(row));
  });
  return table;
}

FeatureTable load_features(const std::string& path, std::size_t expected_dim) {
  return parse_features(read_bytes(path), expected_dim);
}

void write_features_binary(const std::string& path, const FeatureTable& table) {
  std::vector<std::uint8_t> out;
  out.reserve(kFeatureHeaderBytes + table.rows.size() * table.dim * 4);
  auto put = [&](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  };
  out.insert(out.end(), kFeatureMagic, kFeatureMagic + 4);
  put(kFeatureFormatVersion);
  put(static_cast<std::uint32_t>(table.dim));
  put(static_cast<std::uint32_t>(table.rows.size()));
  for (const auto& row : table.rows) {
    if (row.size() != table.dim) throw Error(Errc::dimension_mismatch, "ragged feature table");
    for (double v : row) put(std::bit_cast<std::uint32_t>(static_cast<float>(v)));
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error(Errc::io, "cannot write '" + path + "'");
  f.write(reinterpret_cast<const char*>(out.data()), static_cast<std::streamsize>(out.size()));
}

void write_features_csv(const std::string& path, const FeatureTable& table) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out.precision(9);
  const bool with_time = table.timestamps.size() == table.rows.size() && !table.rows.empty();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    if (with_time) out << table.timestamps[r] << ',';
    for (std::size_t d = 0; d < table.rows[r].size(); ++d)
      out << (d ? "," : "") << table.rows[r][d];
    out << '\n';
  }
}

TrainingSet associate(const std::vector<PoseRecord>& poses, const FeatureTable& features,
                      Association mode, int season_id, std::string label, std::int64_t window_us) {
  TrainingSet set;
  set.season_id = season_id;
  set.label = std::move(label);
  const std::size_t n = features.rows.size();

  if (mode == Association::strict) {
    if (poses.size() != n)
      throw Error(Errc::count_mismatch, std::to_string(poses.size()) + " poses vs " +
                                            std::to_string(n) + " feature rows");
    set.images.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
      set.images.push_back(MappedImage{i, poses[i].timestamp, poses[i].viewpoint, features.rows[i]});
  } else {
    if (features.timestamps.size() != n)
      throw Error(Errc::schema, "loose association needs timestamped feature rows");
    if (poses.empty() && n > 0) throw Error(Errc::unmatched, "no poses to match against");
    set.images.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      const std::int64_t t = features.timestamps[i];
      auto it = std::lower_bound(poses.begin(), poses.end(), t,
                                 [](const PoseRecord& p, std::int64_t v) { return p.timestamp < v; });
      const PoseRecord* best = nullptr;
      std::int64_t best_dt = 0;
      auto consider = [&](const PoseRecord& p) {
        const std::int64_t dt = p.timestamp > t ? p.timestamp - t : t - p.timestamp;
        if (!best || dt < best_dt) {
          best = &p;
          best_dt = dt;
        }
      };
      if (it != poses.end()) consider(*it);
      if (it != poses.begin()) consider(*std::prev(it));
      if (best_dt > window_us)
        throw Error(Errc::unmatched, "feature row " + std::to_string(i) + " has no pose within " +
                                         std::to_string(window_us) + " us");
      set.images.push_back(MappedImage{i, t, best->viewpoint, features.rows[i]});
    }
  }
  set.validate();
  return set;
}

DatasetManifest load_manifest(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& e) {
    throw Error(Errc::schema, "manifest '" + path + "': " + e.what());
  }
  DatasetManifest m;
  try {
    const fs::path dir = fs::path(path).parent_path();
    auto resolve = [&](const std::string& p) {
      const fs::path fp(p);
      return (fp.is_absolute() ? fp : dir / fp).string();
    };
    m.poses = resolve(j.at("poses").get<std::string>());
    m.features = resolve(j.at("features").get<std::string>());
    m.label = j.value("label", std::string{});
    m.season_id = j.value("season_id", 1);
    m.feature_dim = j.value("F", std::size_t{0});
    m.pose_format = j.value("pose_format", std::string{"plain"});
    const std::string assoc = j.value("association", std::string{"strict"});
    if (assoc == "strict")
      m.association = Association::strict;
    else if (assoc == "loose")
      m.association = Association::loose;
    else
      throw Error(Errc::schema, "manifest '" + path + "': unknown association '" + assoc + "'");
  } catch (const json::exception& e) {
    throw Error(Errc::schema, "manifest '" + path + "': " + e.what());
  }
  if (m.pose_format != "plain" && m.pose_format != "nclt")
    throw Error(Errc::schema, "manifest '" + path + "': unknown pose_format '" + m.pose_format + "'");
  return m;
}

void write_manifest(const std::string& path, const DatasetManifest& m) {
  json j = {{"poses", m.poses},
            {"features", m.features},
            {"label", m.label},
            {"season_id", m.season_id},
            {"F", m.feature_dim},
            {"pose_format", m.pose_format},
            {"association", m.association == Association::strict ? "strict" : "loose"}};
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out << j.dump(2) << '\n';
}

TrainingSet load_dataset(const DatasetManifest& m) {
  const std::vector<PoseRecord> poses =
      m.pose_format == "nclt" ? load_poses_nclt(m.poses) : load_poses(m.poses);
  const FeatureTable features = load_features(m.features, m.feature_dim);
  return associate(poses, features, m.association, m.season_id, m.label);
}

std::string export_dataset(const TrainingSet& set, const std::string& dir) {
  fs::create_directories(dir);
  std::vector<PoseRecord> poses;
  FeatureTable table;
  table.dim = set.feature_dim();
  for (const MappedImage& img : set.images) {
    poses.push_back(PoseRecord{img.timestamp, img.viewpoint});
    table.rows.push_back(img.feature);
  }
  write_poses_csv((fs::path(dir) / "poses.csv").string(), poses);
  write_features_binary((fs::path(dir) / "features.bin").string(), table);
  DatasetManifest m;
  m.poses = "poses.csv";
  m.features = "features.bin";
  m.label = set.label;
  m.season_id = set.season_id;
  m.feature_dim = table.dim;
  const std::string manifest = (fs::path(dir) / "manifest.json").string();
  write_manifest(manifest, m);
  return manifest;
}

}  // namespace ltpc::data
