#pragma once

// CSV and SVG renderings of schedules, partitions, fused rankings and
// success-ratio curves. All functions return the document text; numbers are
// printed with fixed precision so reruns are byte-identical.

#include <string>
#include <vector>

#include "ltpc/fusion.hpp"
#include "ltpc/placedef.hpp"
#include "ltpc/sched.hpp"
#include "ltpc/types.hpp"

namespace ltpc::report {

struct ResultRow {
  int mission = 0;
  std::string strategy;
  std::string upd;
  double error = 0.0;
  std::string mode;
  double success_ratio = 0.0;
};

inline constexpr const char* kResultsHeader = "mission,strategy,upd,error,mode,success_ratio";

std::string results_csv(const std::vector<ResultRow>& rows);

/// One row per slot: `slot,m1,...,mN` with 0/1 cells.
std::string schedule_csv(const sched::Schedule& schedule);
std::string schedule_text(const sched::Schedule& schedule);
std::string schedule_svg(const sched::Schedule& schedule, const std::string& title);

/// `image_id,class_id`
std::string partition_csv(const PlacePartition& partition, std::size_t n_images);
/// Trajectory points colored by class, keyframes outlined.
std::string partition_svg(const TrainingSet& set, const PlacePartition& partition,
                          const std::string& title);

/// `image_id,class_id,created,position_distance,angle_distance,feature_distance`
std::string insertion_log_csv(const std::vector<placedef::Insertion>& log);

/// `rank,slot,class_id,prob,x,y,theta` for one fused ranking; rank is 1-based.
std::string fused_result_csv(const fusion::FusedResult& result);

/// The same columns prefixed with a `query` id, for a batch of queries.
std::string fused_csv(const std::vector<std::string>& query_ids,
                      const std::vector<fusion::FusedResult>& results);

/// Success ratio (vertical) against mission id (horizontal), one series per
/// error threshold.
std::string success_svg(const std::vector<ResultRow>& rows, const std::string& title);

void write_text(const std::string& path, const std::string& text);

}  // namespace ltpc::report
