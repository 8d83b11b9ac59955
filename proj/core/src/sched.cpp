#include "ltpc/sched.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "ltpc/error.hpp"

namespace ltpc::sched {

std::string_view to_string(Strategy s) noexcept {
  switch (s) {
    case Strategy::ST1: return "ST1";
    case Strategy::ST2: return "ST2";
    case Strategy::ST3: return "ST3";
  }
  return "ST2";
}

Strategy parse_strategy(std::string_view name) {
  if (name == "ST1" || name == "st1" || name == "1") return Strategy::ST1;
  if (name == "ST2" || name == "st2" || name == "2") return Strategy::ST2;
  if (name == "ST3" || name == "st3" || name == "3") return Strategy::ST3;
  throw Error(Errc::bad_parameter, "unknown strategy '" + std::string(name) + "'");
}

void StrategyConfig::validate(int max_mission) const {
  if (kind == Strategy::ST2 && n_bar < 0)
    throw Error(Errc::bad_parameter, "n_bar must be >= 0");
  if (kind == Strategy::ST3 && (k_bar < 1 || k_bar > max_mission))
    throw Error(Errc::bad_parameter, "k_bar=" + std::to_string(k_bar) + " outside [1, " +
                                         std::to_string(max_mission) + "]");
}

std::string StrategyConfig::describe() const {
  switch (kind) {
    case Strategy::ST1: return "ST1";
    case Strategy::ST2: return "ST2(n=" + std::to_string(n_bar) + ")";
    case Strategy::ST3: return "ST3(k=" + std::to_string(k_bar) + ")";
  }
  return "?";
}

std::vector<double> weight_vector(int k_bar, int i) {
  if (i < 1 || k_bar < 1 || k_bar > i)
    throw Error(Errc::invalid_range,
                "k_bar=" + std::to_string(k_bar) + " outside [1, " + std::to_string(i) + "]");
  std::vector<double> w(static_cast<std::size_t>(i));
  for (int j = 1; j <= i; ++j) w[static_cast<std::size_t>(j - 1)] = std::exp(-std::abs(k_bar - j));
  return w;
}

double slot_score(const StrategyConfig& strategy, const RetrainHistory& h, int i) {
  const double n = static_cast<double>(ones_count(h));
  switch (strategy.kind) {
    case Strategy::ST1:
      return (h.last_bit() ? 1.0 : 0.0) + n / (1.0 + i);
    case Strategy::ST2:
      return -std::abs(n - strategy.n_bar) + n / (1.0 + i);
    case Strategy::ST3: {
      if (ones_count(h) != 1) return 0.0;
      // k_bar may exceed the current mission early in a run; the weight is
      // still well defined.
      double dot = 0.0;
      for (std::size_t j = 0; j < h.length(); ++j)
        if (h.bit(j)) dot += std::exp(-std::abs(strategy.k_bar - static_cast<int>(j + 1)));
      return dot;
    }
  }
  return 0.0;
}

double score(const StrategyConfig& strategy, const Schedule& schedule, int i) {
  double total = 0.0;
  for (const RetrainHistory& h : schedule) {
    if (h.length() != static_cast<std::size_t>(i))
      throw Error(Errc::dimension_mismatch, "history '" + h.to_string() + "' has length " +
                                                std::to_string(h.length()) + ", mission is " +
                                                std::to_string(i));
    total += slot_score(strategy, h, i);
  }
  return total;
}

namespace {

void check_previous(const Schedule& previous, int i, int capacity) {
  if (i < 1) throw Error(Errc::invalid_range, "mission index must be >= 1");
  if (capacity < 1) throw Error(Errc::bad_parameter, "capacity must be >= 1");
  if (previous.size() > static_cast<std::size_t>(capacity))
    throw Error(Errc::bad_parameter, "previous schedule exceeds capacity");
  for (const RetrainHistory& h : previous)
    if (h.length() != static_cast<std::size_t>(i - 1))
      throw Error(Errc::dimension_mismatch, "previous history '" + h.to_string() +
                                                "' does not have length " + std::to_string(i - 1));
}

ScheduleDecision make_decision(Schedule schedule, const Schedule& previous) {
  ScheduleDecision d;
  d.retrain_mask.reserve(schedule.size());
  for (const RetrainHistory& h : schedule) d.retrain_mask.push_back(h.last_bit() ? 1 : 0);
  if (schedule.size() > previous.size()) d.spawned_slot = previous.size();
  d.schedule = std::move(schedule);
  return d;
}

}  // namespace

std::vector<Schedule> feasible_extensions(const Schedule& previous, int i, int capacity) {
  check_previous(previous, i, capacity);
  std::vector<RetrainHistory> slots = previous;
  if (previous.size() < static_cast<std::size_t>(capacity))
    slots.push_back(RetrainHistory::zeros(static_cast<std::size_t>(i - 1)));

  const std::size_t n = slots.size();
  std::vector<Schedule> out;
  out.reserve(std::size_t{1} << n);
  // Bit (n-1-k) of `choice` is the new bit of slot k, so increasing `choice`
  // enumerates schedules in lexicographic order of their concatenation.
  for (std::size_t choice = 0; choice < (std::size_t{1} << n); ++choice) {
    Schedule s;
    s.reserve(n);
    for (std::size_t k = 0; k < n; ++k) s.push_back(slots[k].extended((choice >> (n - 1 - k)) & 1));
    out.push_back(std::move(s));
  }
  return out;
}

ScheduleDecision next_schedule(const StrategyConfig& strategy, const Schedule& previous, int i,
                               int capacity) {
  check_previous(previous, i, capacity);
  Schedule next;
  auto extend_best = [&](const RetrainHistory& h) {
    RetrainHistory idle = h.extended(false);
    RetrainHistory busy = h.extended(true);
    next.push_back(slot_score(strategy, busy, i) > slot_score(strategy, idle, i) ? std::move(busy)
                                                                                 : std::move(idle));
  };
  for (const RetrainHistory& h : previous) extend_best(h);
  if (previous.size() < static_cast<std::size_t>(capacity))
    extend_best(RetrainHistory::zeros(static_cast<std::size_t>(i - 1)));
  return make_decision(std::move(next), previous);
}

ScheduleDecision next_schedule_bruteforce(const StrategyConfig& strategy,
                                          const Schedule& previous, int i, int capacity) {
  if (i > kBruteForceMaxMission || capacity > 16)
    throw Error(Errc::enumeration_bound, "brute force limited to mission <= " +
                                             std::to_string(kBruteForceMaxMission) +
                                             " and capacity <= 16");
  const std::vector<Schedule> candidates = feasible_extensions(previous, i, capacity);
  const Schedule* best = nullptr;
  double best_score = 0.0;
  std::string best_bits;
  for (const Schedule& s : candidates) {
    const double v = score(strategy, s, i);
    const double tol = 1e-9 * std::max(1.0, std::abs(best_score));
    const std::string bits = concat_bits(s);
    if (best == nullptr || v > best_score + tol ||
        (std::abs(v - best_score) <= tol && bits < best_bits)) {
      best = &s;
      best_score = v;
      best_bits = bits;
    }
  }
  return make_decision(*best, previous);
}

std::vector<ScheduleDecision> plan(const StrategyConfig& strategy, int n_missions, int capacity) {
  if (n_missions < 1) throw Error(Errc::bad_parameter, "n_missions must be >= 1");
  strategy.validate(n_missions);
  std::vector<ScheduleDecision> out;
  Schedule current;
  for (int i = 1; i <= n_missions; ++i) {
    out.push_back(next_schedule(strategy, current, i, capacity));
    current = out.back().schedule;
  }
  return out;
}

std::vector<std::size_t> st3_fusion_filter(const Schedule& schedule, int k_bar) {
  std::vector<std::size_t> out;
  double best = 0.0;
  StrategyConfig cfg{Strategy::ST3, 0, k_bar, true};
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    const RetrainHistory& h = schedule[k];
    if (ones_count(h) != 1) continue;
    const double v = slot_score(cfg, h, static_cast<int>(h.length()));
    if (out.empty() || v > best) {
      out.assign(1, k);
      best = v;
    } else if (v == best) {
      out.push_back(k);
    }
  }
  return out;
}

std::string concat_bits(const Schedule& schedule) {
  std::string s;
  for (const RetrainHistory& h : schedule) s += h.to_string();
  return s;
}

}  // namespace ltpc::sched
