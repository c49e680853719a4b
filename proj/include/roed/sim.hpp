// Rolling-horizon simulation platform and gamma sweeps.
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>
#include <vector>

#include "roed/ccg.hpp"
#include "roed/uncertainty.hpp"

namespace roed {

enum class PolicyKind { kLookAhead, kReserveLookAhead, kRobust };
PolicyKind policy_from_string(const std::string& s);
const char* to_string(PolicyKind p);

struct SimConfig {
  int horizon_T = 9;  // periods per solve, 10-minute each
  int days = 1;       // simulated days, 144 intervals per day
  PolicyKind policy = PolicyKind::kLookAhead;
  SetSpec set_spec;          // robust policy
  double res_factor = 0.05;  // reserve policy
  bool reserve_hard = false;
  DispatchCosts costs;
  int reestimate_every = 144;
  int fit_lags = 6;
  std::optional<int> estimation_window;  // periods of history; absent = all
  double demand_rel_std = 0.05;
  CcgOptions ccg;
};

struct IntervalRecord {
  int t = 0;
  double cost = 0.0, penalty = 0.0;
  double s_plus = 0.0, s_minus = 0.0;
  double thermal_mw = 0.0, wind_mw = 0.0;
  int solver_iters = 0;
  double solve_ms = 0.0;
  bool fallback = false;
};

struct SimMetrics {
  std::vector<IntervalRecord> intervals;
  double cost_avg = 0.0, cost_std = 0.0;  // population std per 10-min interval
  double penalty_avg = 0.0, penalty_freq_pct = 0.0;
  double thermal_avg = 0.0, wind_avg = 0.0;
  int fallback_count = 0;

  void finalize();
  void write_intervals_csv(const std::string& path) const;
  static std::string metrics_header();
  std::string metrics_row(const std::string& label) const;
  void write_metrics_csv(const std::string& path, const std::string& label) const;
};

// cost and penalty, in dollars per 10-minute interval, of an implemented
// first-period dispatch
std::pair<double, double> interval_cost(const Grid& grid, const DispatchSchedule& stage1,
                                        const DispatchCosts& costs);

// per-load truncated normal draws around the mean profile; deterministic per
// seed
Eigen::MatrixXd generate_demand(const Eigen::MatrixXd& mean_profile, double rel_std,
                                uint64_t seed);

// Replays the wind series and realized demand through the configured policy.
// wind must cover warmup + days*144 rows; demand rows align with the
// dispatched intervals (row k is interval k, absolute period
// wind.start_index + warmup + k).
SimMetrics run_rolling_horizon(const Grid& grid, const WindSeries& wind, int warmup,
                               const Eigen::MatrixXd& demand, const SimConfig& cfg);

struct SweepCell {
  std::string variant;
  double gamma_w = 0.0, gamma_d = 0.0;
  bool failed = false;
  SimMetrics metrics;
};

// One rolling-horizon run per (variant, gamma_w, gamma_d) over identical
// input series; failed cells are reported, not fatal.
std::vector<SweepCell> sweep_gamma(const Grid& grid, const WindSeries& wind, int warmup,
                                   const Eigen::MatrixXd& demand,
                                   const std::vector<double>& gamma_w_list,
                                   const std::vector<double>& gamma_d_list,
                                   const std::vector<SetSpec::Kind>& variants,
                                   const SimConfig& base_cfg);

void write_frontier_csv(const std::string& path, const std::vector<SweepCell>& cells);

}  // namespace roed
