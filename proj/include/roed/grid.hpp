// Power system model: buses, lines, units, incidence and DC shift factors.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "roed/power_curve.hpp"

namespace roed {

// All "from"/"to"/"bus" members are bus indices (0-based) after loading;
// external bus ids live in Grid::bus_ids.
struct Line {
  int from = 0, to = 0;
  double reactance = 0.0;   // per-unit on the system base
  double flow_limit = 0.0;  // MW
};

struct ThermalGen {
  int bus = 0;
  double pmin = 0.0, pmax = 0.0;          // MW
  double ramp_up = 0.0, ramp_down = 0.0;  // MW per 10-min interval
  double cost = 0.0;                      // $/MWh
};

struct WindFarm {
  int bus = 0;
  double pwmax = 0.0;                     // MW, cut-off plateau
  double ramp_up = 0.0, ramp_down = 0.0;  // MW per 10-min interval
  double cost = 0.0;                      // $/MWh
  PowerCurvePWL curve;
};

struct Load {
  int bus = 0;
  double base_mw = 0.0;
};

struct Grid {
  std::vector<int> bus_ids;
  std::vector<Line> lines;
  std::vector<ThermalGen> gens;
  std::vector<WindFarm> farms;
  std::vector<Load> loads;
  int slack_bus = 0;  // index
  double base_mva = 100.0;

  Eigen::MatrixXd shift_factors;  // lines x buses; empty until computed
  Eigen::MatrixXd inc_gen, inc_wind, inc_load;  // buses x units, 0/1

  std::vector<double> load_profile;  // per-period multipliers, default flat

  int n_buses() const { return static_cast<int>(bus_ids.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }
  int n_gens() const { return static_cast<int>(gens.size()); }
  int n_farms() const { return static_cast<int>(farms.size()); }
  int n_loads() const { return static_cast<int>(loads.size()); }

  double total_pmin() const;
  double total_pmax() const;
  double profile_at(long period) const;  // wraps around the profile length
  // nominal demand vector (per load) at an absolute period index
  Eigen::VectorXd nominal_demand(long period) const;
};

// Parses and validates a grid file (JSON). Shift factors are computed and
// cached when with_ptdf is set, using the file's slack bus.
Grid load_grid(const std::string& path, bool with_ptdf = true);
Grid parse_grid(const std::string& json_text, bool with_ptdf = true);

// DC power transfer distribution factors relative to a slack bus. One row per
// line, one column per bus; the slack column is zero. Throws if the network
// is disconnected.
Eigen::MatrixXd compute_ptdf(const Grid& grid, int slack_index);

// alpha * (E^g pg + E^w pw - E^d d), MW per line
Eigen::VectorXd line_flow(const Grid& grid, const Eigen::VectorXd& pg,
                          const Eigen::VectorXd& pw, const Eigen::VectorXd& d);

}  // namespace roed
