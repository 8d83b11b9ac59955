#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "ltpc/error.hpp"
#include "ltpc/types.hpp"

namespace ltpc::test {

// Images on the x axis, `step` meters apart, with a constant feature.
inline TrainingSet line_set(std::size_t n, double step, std::size_t F = 2) {
  TrainingSet s;
  s.season_id = 1;
  s.label = "line";
  for (std::size_t i = 0; i < n; ++i) {
    MappedImage img;
    img.id = i;
    img.timestamp = static_cast<std::int64_t>(i) * 1000;
    img.viewpoint = Viewpoint::make(step * static_cast<double>(i), 0.0, 0.0);
    img.feature.assign(F, 1.0);
    s.images.push_back(std::move(img));
  }
  return s;
}

// A random planar walk with steps in [min_step, max_step].
inline TrainingSet random_walk(std::mt19937_64& rng, std::size_t n, double min_step,
                               double max_step, std::size_t F = 3) {
  std::uniform_real_distribution<double> step(min_step, max_step), turn(-0.6, 0.6), f(-1.0, 1.0);
  TrainingSet s;
  double x = 0.0, y = 0.0, heading = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    MappedImage img;
    img.id = i;
    img.timestamp = static_cast<std::int64_t>(i) * 1000;
    img.viewpoint = Viewpoint::make(x, y, heading);
    for (std::size_t d = 0; d < F; ++d) img.feature.push_back(f(rng));
    s.images.push_back(std::move(img));
    heading += turn(rng);
    const double len = step(rng);
    x += len * std::cos(heading);
    y += len * std::sin(heading);
  }
  return s;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("ltpc_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  std::string str() const { return path_.string(); }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

template <class F>
Errc error_code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  throw std::logic_error("expected ltpc::Error");
}

}  // namespace ltpc::test
