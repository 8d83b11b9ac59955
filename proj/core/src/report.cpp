#include "ltpc/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <set>

#include "ltpc/error.hpp"

namespace ltpc::report {

namespace {

std::string fmt(double v, int precision = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  std::string s(buf);
  if (s == "-0.000000" || s.find_first_not_of("-0.") == std::string::npos) {
    if (!s.empty() && s.front() == '-') s.erase(0, 1);
  }
  return s;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Evenly spaced hues, fixed saturation/lightness.
std::string class_color(int id, int n) {
  const int hue = n > 0 ? (id * 360 / std::max(n, 1) * 7) % 360 : 0;
  return "hsl(" + std::to_string(hue) + ",70%,45%)";
}

const char* kSeriesColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

}  // namespace

std::string results_csv(const std::vector<ResultRow>& rows) {
  std::string out = std::string(kResultsHeader) + "\n";
  for (const ResultRow& r : rows)
    out += std::to_string(r.mission) + "," + r.strategy + "," + r.upd + "," + fmt(r.error, 1) + "," +
           r.mode + "," + fmt(r.success_ratio) + "\n";
  return out;
}

std::string schedule_csv(const sched::Schedule& schedule) {
  const std::size_t n = schedule.empty() ? 0 : schedule.front().length();
  std::string out = "slot";
  for (std::size_t m = 1; m <= n; ++m) out += ",m" + std::to_string(m);
  out += "\n";
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    out += std::to_string(k);
    for (std::size_t m = 0; m < n; ++m) out += schedule[k].bit(m) ? ",1" : ",0";
    out += "\n";
  }
  return out;
}

std::string schedule_text(const sched::Schedule& schedule) {
  std::string out;
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    out += "C" + std::to_string(k + 1) + "  ";
    for (std::size_t m = 0; m < schedule[k].length(); ++m) out += schedule[k].bit(m) ? "[#]" : "[ ]";
    out += "  " + schedule[k].to_string() + "\n";
  }
  return out;
}

std::string schedule_svg(const sched::Schedule& schedule, const std::string& title) {
  const int cell = 40, left = 60, top = 50;
  const std::size_t n = schedule.empty() ? 0 : schedule.front().length();
  const int width = left + static_cast<int>(n) * cell + 20;
  const int height = top + static_cast<int>(schedule.size()) * cell + 20;
  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
  out += "<text x=\"10\" y=\"20\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  for (std::size_t m = 0; m < n; ++m)
    out += "<text x=\"" + std::to_string(left + static_cast<int>(m) * cell + cell / 2 - 4) +
           "\" y=\"" + std::to_string(top - 8) + "\" font-size=\"11\">" + std::to_string(m + 1) +
           "</text>\n";
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const int y = top + static_cast<int>(k) * cell;
    out += "<text x=\"10\" y=\"" + std::to_string(y + cell / 2 + 4) + "\" font-size=\"11\">C" +
           std::to_string(k + 1) + "</text>\n";
    for (std::size_t m = 0; m < n; ++m) {
      const int x = left + static_cast<int>(m) * cell;
      out += "<rect x=\"" + std::to_string(x) + "\" y=\"" + std::to_string(y) + "\" width=\"" +
             std::to_string(cell - 4) + "\" height=\"" + std::to_string(cell - 4) + "\" fill=\"" +
             (schedule[k].bit(m) ? "#3b6fb6" : "#f2f2f2") + "\" stroke=\"#888\"/>\n";
    }
  }
  out += "</svg>\n";
  return out;
}

std::string partition_csv(const PlacePartition& partition, std::size_t n_images) {
  std::string out = "image_id,class_id\n";
  const std::vector<int> labels = partition.labels(n_images);
  for (std::size_t i = 0; i < n_images; ++i)
    out += std::to_string(i) + "," + std::to_string(labels[i]) + "\n";
  return out;
}

std::string partition_svg(const TrainingSet& set, const PlacePartition& partition,
                          const std::string& title) {
  const int size = 600, margin = 30;
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin, ymin = xmin, ymax = -xmin;
  for (const MappedImage& img : set.images) {
    xmin = std::min(xmin, img.viewpoint.x);
    xmax = std::max(xmax, img.viewpoint.x);
    ymin = std::min(ymin, img.viewpoint.y);
    ymax = std::max(ymax, img.viewpoint.y);
  }
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-9});
  const double scale = (size - 2 * margin) / span;
  auto px = [&](double x) { return fmt(margin + (x - xmin) * scale, 2); };
  auto py = [&](double y) { return fmt(size - margin - (y - ymin) * scale, 2); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(size) +
                    "\" height=\"" + std::to_string(size + 20) + "\" font-family=\"sans-serif\">\n";
  out += "<text x=\"10\" y=\"16\" font-size=\"13\">" + xml_escape(title) + " (" +
         std::to_string(partition.size()) + " classes)</text>\n";
  if (!set.images.empty()) {
    out += "<polyline fill=\"none\" stroke=\"#ccc\" stroke-width=\"1\" points=\"";
    for (const MappedImage& img : set.images) out += px(img.viewpoint.x) + "," + py(img.viewpoint.y) + " ";
    out += "\"/>\n";
  }
  const std::vector<int> labels = partition.labels(set.size());
  const int n = static_cast<int>(partition.size());
  for (std::size_t i = 0; i < set.size(); ++i) {
    const Viewpoint& v = set.images[i].viewpoint;
    out += "<circle cx=\"" + px(v.x) + "\" cy=\"" + py(v.y) + "\" r=\"3\" fill=\"" +
           class_color(labels[i], n) + "\"/>\n";
  }
  for (const PlaceClass& c : partition.classes)
    out += "<circle cx=\"" + px(c.keyframe_viewpoint.x) + "\" cy=\"" + py(c.keyframe_viewpoint.y) +
           "\" r=\"6\" fill=\"none\" stroke=\"" + class_color(c.class_id, n) + "\"/>\n";
  out += "</svg>\n";
  return out;
}

std::string insertion_log_csv(const std::vector<placedef::Insertion>& log) {
  std::string out = "image_id,class_id,created,position_distance,angle_distance,feature_distance\n";
  for (const placedef::Insertion& r : log)
    out += std::to_string(r.image) + "," + std::to_string(r.class_id) + "," +
           (r.created ? "1" : "0") + "," + fmt(r.position_distance) + "," +
           fmt(r.angle_distance) + "," + fmt(r.feature_distance) + "\n";
  return out;
}

namespace {

std::string candidate_cells(std::size_t rank, const fusion::GlobalCandidate& c) {
  return std::to_string(rank) + "," + std::to_string(c.source_classifier) + "," +
         std::to_string(c.class_id) + "," + fmt(c.probability) + "," + fmt(c.location.x, 3) + "," +
         fmt(c.location.y, 3) + "," + fmt(c.location.theta, 4);
}

}  // namespace

std::string fused_result_csv(const fusion::FusedResult& result) {
  std::string out = "rank,slot,class_id,prob,x,y,theta\n";
  for (std::size_t r = 0; r < result.ranked.size(); ++r)
    out += candidate_cells(r + 1, result.ranked[r]) + "\n";
  return out;
}

std::string fused_csv(const std::vector<std::string>& query_ids,
                      const std::vector<fusion::FusedResult>& results) {
  std::string out = "query,rank,slot,class_id,prob,x,y,theta\n";
  for (std::size_t q = 0; q < results.size(); ++q)
    for (std::size_t r = 0; r < results[q].ranked.size(); ++r)
      out += query_ids.at(q) + "," + candidate_cells(r + 1, results[q].ranked[r]) + "\n";
  return out;
}

std::string success_svg(const std::vector<ResultRow>& rows, const std::string& title) {
  const int width = 520, height = 360, left = 60, right = 140, top = 40, bottom = 50;
  const int pw = width - left - right, ph = height - top - bottom;
  int max_mission = 1;
  std::map<std::string, std::vector<std::pair<int, double>>> series;
  for (const ResultRow& r : rows) {
    max_mission = std::max(max_mission, r.mission);
    series[r.strategy + " " + fmt(r.error, 0) + "m " + r.mode].emplace_back(r.mission, r.success_ratio);
  }
  auto sx = [&](int m) {
    return fmt(left + (max_mission == 1 ? pw / 2.0 : (m - 1) * double(pw) / (max_mission - 1)), 2);
  };
  auto sy = [&](double v) { return fmt(top + (1.0 - v) * ph, 2); };

  std::string out = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + std::to_string(width) +
                    "\" height=\"" + std::to_string(height) + "\" font-family=\"sans-serif\">\n";
  out += "<text x=\"10\" y=\"20\" font-size=\"14\">" + xml_escape(title) + "</text>\n";
  out += "<rect x=\"" + std::to_string(left) + "\" y=\"" + std::to_string(top) + "\" width=\"" +
         std::to_string(pw) + "\" height=\"" + std::to_string(ph) +
         "\" fill=\"none\" stroke=\"#444\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = t / 4.0;
    out += "<text x=\"" + std::to_string(left - 36) + "\" y=\"" + sy(v) + "\" font-size=\"10\">" +
           fmt(v, 2) + "</text>\n";
  }
  for (int m = 1; m <= max_mission; ++m)
    out += "<text x=\"" + sx(m) + "\" y=\"" + std::to_string(top + ph + 16) +
           "\" font-size=\"10\">" + std::to_string(m) + "</text>\n";
  out += "<text x=\"" + std::to_string(left + pw / 2 - 30) + "\" y=\"" +
         std::to_string(height - 10) + "\" font-size=\"11\">mission ID</text>\n";
  out += "<text x=\"12\" y=\"" + std::to_string(top + ph / 2 + 40) +
         "\" font-size=\"11\" transform=\"rotate(-90 12," + std::to_string(top + ph / 2 + 40) +
         ")\">success ratio</text>\n";

  std::size_t s = 0;
  for (const auto& [name, pts] : series) {
    const char* color = kSeriesColors[s % std::size(kSeriesColors)];
    out += "<polyline fill=\"none\" stroke=\"" + std::string(color) + "\" stroke-width=\"2\" points=\"";
    for (const auto& [m, v] : pts) out += sx(m) + "," + sy(v) + " ";
    out += "\"/>\n";
    for (const auto& [m, v] : pts)
      out += "<circle cx=\"" + sx(m) + "\" cy=\"" + sy(v) + "\" r=\"3\" fill=\"" + color + "\"/>\n";
    const int ly = top + 14 * static_cast<int>(s);
    out += "<text x=\"" + std::to_string(left + pw + 8) + "\" y=\"" + std::to_string(ly + 10) +
           "\" font-size=\"10\" fill=\"" + color + "\">" + xml_escape(name) + "</text>\n";
    ++s;
  }
  out += "</svg>\n";
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(Errc::io, "cannot write '" + path + "'");
  out << text;
  if (!out) throw Error(Errc::io, "write failed for '" + path + "'");
}

}  // namespace ltpc::report
