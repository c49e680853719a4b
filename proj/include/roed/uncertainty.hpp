// Builders for demand and wind trajectory uncertainty sets.
#pragma once

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "roed/polyhedron.hpp"
#include "roed/power_curve.hpp"
#include "roed/wind_stats.hpp"

namespace roed {

struct SetSpec {
  enum class Kind { kDus, kSus1, kSus2 };
  Kind kind = Kind::kDus;
  double gamma_w = 0.5;
  double gamma_d = 0.0;
  std::optional<double> gamma_t;  // time budget; absent means no coupling
  int lags = 6;                   // VAR order used when fitting for this set
  int pieces = 4;                 // power curve pieces
};

SetSpec::Kind variant_from_string(const std::string& s);
const char* to_string(SetSpec::Kind k);

// Per-period budgeted demand set around d_bar with half-width gamma_d * d_hat
// and an l1 budget gamma_d * sqrt(N^d) per period. Matrices are
// (periods x loads) for periods t = 2..T.
Polyhedron build_demand_set(const Eigen::MatrixXd& d_bar, const Eigen::MatrixXd& d_hat,
                            double gamma_d);

// Wind trajectory set over periods t = 2..T. recent_speeds holds realized
// speeds up to and including the current period t1 (newest last); at least
// var.lag rows are required for the dynamic variant. For SUS variants the lag
// memory is dropped and the nominal path is persistence-adjusted by the
// current residual; SUS2 additionally replaces B by its diagonal.
Polyhedron build_wind_trajectory_set(const SeasonalModel& seasonal, const VarModel& var,
                                     const Eigen::MatrixXd& recent_speeds, long t1,
                                     const SetSpec& spec,
                                     const std::vector<PowerCurvePWL>& curves,
                                     int horizon_T);

// Singleton-or-box set given explicitly in xi space, with enumerated
// vertices. Used by tiny-scale oracles and tests.
Polyhedron make_box_xi_set(const Eigen::MatrixXd& d_lo, const Eigen::MatrixXd& d_hi,
                           const Eigen::MatrixXd& w_lo, const Eigen::MatrixXd& w_hi);

}  // namespace roed
