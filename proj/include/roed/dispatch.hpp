// Dispatch model building blocks: first-stage region, compact second-stage
// matrices G y >= h - E x - M xi, and the deterministic look-ahead solvers.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <optional>
#include <span>
#include <vector>

#include "roed/grid.hpp"
#include "roed/lp.hpp"

namespace roed {

struct DispatchCosts {
  double c_under = 6000.0;  // $/MWh, under-generation slack
  double c_over = 600.0;    // $/MWh, over-generation slack
};

// Observations fixing the first stage: realized demand/available wind at the
// current period and the dispatch implemented in the previous one. Empty
// prev vectors disable ramp coupling (used for the simulation warm start).
struct Stage1Obs {
  Eigen::VectorXd demand;
  Eigen::VectorXd avail_wind;
  Eigen::VectorXd prev_gen;
  Eigen::VectorXd prev_wind;
};

// One realization of the uncertain trajectory for periods 2..T.
struct Scenario {
  Eigen::MatrixXd demand;  // (T-1) x loads
  Eigen::MatrixXd avail;   // (T-1) x farms
};

Scenario scenario_from_xi(const Eigen::VectorXd& xi, int periods, int n_loads, int n_farms);
Eigen::VectorXd xi_from_scenario(const Scenario& s);

struct DispatchSchedule {
  Eigen::MatrixXd gen;   // periods x gens, MW
  Eigen::MatrixXd wind;  // periods x farms, MW
  Eigen::VectorXd s_plus, s_minus;  // per period, MW
  double objective = 0.0;           // LP objective, raw $/MWh weighting

  int periods() const { return static_cast<int>(gen.rows()); }
  double thermal(int t) const { return gen.row(t).sum(); }
  double wind_total(int t) const { return wind.row(t).sum(); }
};

// First-stage feasible region over x = (pg, pw, s+, s-): merged variable
// bounds plus the balance equality and line-limit rows.
struct Stage1Region {
  int n_gens = 0, n_farms = 0;
  std::vector<double> lo, hi, cost;
  struct Row {
    double lo, hi;
    std::vector<std::pair<int, double>> terms;
    bool lazy = false;  // line rows are activated on demand
  };
  std::vector<Row> rows;
  Eigen::VectorXd obs_demand, obs_avail;

  int x_dim() const { return static_cast<int>(lo.size()); }
  int x_pg(int i) const { return i; }
  int x_pw(int i) const { return n_gens + i; }
  int x_splus() const { return n_gens + n_farms; }
  int x_sminus() const { return n_gens + n_farms + 1; }
};

Stage1Region build_first_stage(const Grid& grid, const Stage1Obs& obs,
                               const DispatchCosts& costs);

// Second-stage dispatch constraints for periods 2..T in the compact
// inequality form G y >= h - E x - M xi, with equalities split into row
// pairs. y = (pg_t, pw_t, s+_t, s-_t) stacked over t; xi = (d, p_bar^w)
// period-major, demand block first.
struct CompactStage2 {
  enum class RowKind { kBox, kAvail, kRamp, kLine, kBalance, kSlack };
  struct RowInfo {
    RowKind kind;
    int period;  // t in 2..T
    int unit;    // gen/farm/line index, -1 when not applicable
  };

  int T = 0;
  int n_gens = 0, n_farms = 0, n_loads = 0, n_lines = 0;
  Eigen::SparseMatrix<double> g, e, m;  // rows x (n_y | n_x | n_xi)
  Eigen::VectorXd h;
  Eigen::VectorXd b;  // cost on y
  std::vector<RowInfo> row_info;

  int periods() const { return T - 1; }
  int block() const { return n_gens + n_farms + 2; }
  int n_y() const { return periods() * block(); }
  int n_x() const { return n_gens + n_farms + 2; }
  int n_xi() const { return periods() * (n_loads + n_farms); }
  int y_pg(int t, int i) const { return (t - 2) * block() + i; }
  int y_pw(int t, int i) const { return (t - 2) * block() + n_gens + i; }
  int y_splus(int t) const { return (t - 2) * block() + n_gens + n_farms; }
  int y_sminus(int t) const { return (t - 2) * block() + n_gens + n_farms + 1; }
  int xi_d(int t, int j) const { return (t - 2) * n_loads + j; }
  int xi_avail(int t, int i) const { return periods() * n_loads + (t - 2) * n_farms + i; }
};

CompactStage2 build_second_stage(const Grid& grid, int T, const DispatchCosts& costs);

// Optional spinning-reserve extension for the look-ahead model.
struct ReserveSpec {
  Eigen::VectorXd requirement;  // per period t = 1..T, MW
  Eigen::VectorXd caps;         // per generator, MW
  bool hard = false;            // infeasible when unmet instead of slacked
};

// Multi-period dispatch LP: first stage plus one y block per scenario and an
// epigraph variable eta >= b'y_l. Line rows start deactivated and are added
// by solve() until none are violated.
struct EdModel {
  LpProblem lp;
  struct LazyRow {
    double lo, hi;
    std::vector<std::pair<int, double>> terms;
  };
  std::vector<LazyRow> lazy;
  int n_x = 0;
  int eta_col = -1;
  int T = 1;
  std::vector<int> y_base;  // column offset per scenario block
  const CompactStage2* stage2 = nullptr;

  LpSolution solve(const LpBasis* warm = nullptr, int* lazy_added = nullptr) const;
  Eigen::VectorXd x_of(const LpSolution& sol) const;
  // full schedule using scenario block `scen` for periods 2..T
  DispatchSchedule schedule_of(const LpSolution& sol, const Stage1Region& s1,
                               int scen = 0) const;
};

EdModel build_ed_model(const Stage1Region& s1, const CompactStage2* s2,
                       std::span<const Scenario> scenarios);

// Appends reserve variables R_it in [0, caps_i], capacity rows
// pg_it + R_it <= pmax_i, and per-period requirement rows to a single-scenario
// look-ahead model.
void add_reserve(EdModel& model, const Grid& grid, const ReserveSpec& spec,
                 const DispatchCosts& costs);

// Deterministic look-ahead ED over T periods with nominal forecasts. The
// forecast matrices cover periods 2..T; T = 1 degenerates to the
// single-period problem over the first-stage region.
DispatchSchedule solve_la_ed(const Grid& grid, const Stage1Obs& obs,
                             const DispatchCosts& costs, int T,
                             const Eigen::MatrixXd& forecast_demand,
                             const Eigen::MatrixXd& forecast_avail);

// Look-ahead ED with a reserve requirement of res_factor times the forecast
// net load per period; caps default to each generator's 10-min ramp-up.
DispatchSchedule solve_res_la_ed(const Grid& grid, const Stage1Obs& obs,
                                 const DispatchCosts& costs, int T,
                                 const Eigen::MatrixXd& forecast_demand,
                                 const Eigen::MatrixXd& forecast_avail,
                                 double res_factor,
                                 const Eigen::VectorXd* caps = nullptr,
                                 bool hard = false);

// min b'y s.t. G y >= h - E x - M xi, solved directly; used by oracles and
// duality checks. Returns the LP solution (row duals are the pi vector).
LpSolution second_stage_recourse(const CompactStage2& s2, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xi);

}  // namespace roed
