#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace ltpc {

enum class Errc {
  invalid_range,
  empty_input,
  zero_vector,
  too_few_points,
  label_out_of_range,
  dimension_mismatch,
  bad_parameter,
  enumeration_bound,
  season_mismatch,
  schema,
  missing_query,
  malformed_row,
  non_monotone,
  header_mismatch,
  truncated,
  count_mismatch,
  unmatched,
  io,
  version_mismatch,
  checksum,
};

std::string_view to_string(Errc code) noexcept;

// True for errors caused by input files or datasets rather than by caller
// arguments; the CLI maps these to exit code 2.
bool is_data_error(Errc code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace ltpc
