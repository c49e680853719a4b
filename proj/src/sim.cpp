#include "roed/sim.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

#include "roed/csv.hpp"

namespace roed {

PolicyKind policy_from_string(const std::string& s) {
  if (s == "la") return PolicyKind::kLookAhead;
  if (s == "res-la") return PolicyKind::kReserveLookAhead;
  if (s == "rob") return PolicyKind::kRobust;
  throw std::runtime_error("unknown policy: " + s);
}

const char* to_string(PolicyKind p) {
  switch (p) {
    case PolicyKind::kLookAhead: return "la";
    case PolicyKind::kReserveLookAhead: return "res-la";
    case PolicyKind::kRobust: return "rob";
  }
  return "?";
}

void SimMetrics::finalize() {
  const double n = static_cast<double>(intervals.size());
  cost_avg = cost_std = penalty_avg = penalty_freq_pct = thermal_avg = wind_avg = 0.0;
  fallback_count = 0;
  if (intervals.empty()) return;
  for (const auto& r : intervals) {
    cost_avg += r.cost;
    penalty_avg += r.penalty;
    thermal_avg += r.thermal_mw;
    wind_avg += r.wind_mw;
    if (r.penalty > 0.0) penalty_freq_pct += 1.0;
    if (r.fallback) ++fallback_count;
  }
  cost_avg /= n;
  penalty_avg /= n;
  thermal_avg /= n;
  wind_avg /= n;
  penalty_freq_pct *= 100.0 / n;
  for (const auto& r : intervals) cost_std += (r.cost - cost_avg) * (r.cost - cost_avg);
  cost_std = std::sqrt(cost_std / n);
}

void SimMetrics::write_intervals_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "t,cost,penalty,s_plus,s_minus,thermal_mw,wind_mw,solver_iters,solve_ms\n";
  for (const auto& r : intervals) {
    out << r.t << "," << csv_num(r.cost) << "," << csv_num(r.penalty) << ","
        << csv_num(r.s_plus) << "," << csv_num(r.s_minus) << "," << csv_num(r.thermal_mw)
        << "," << csv_num(r.wind_mw) << "," << r.solver_iters << "," << csv_num(r.solve_ms)
        << "\n";
  }
}

std::string SimMetrics::metrics_header() {
  return "label,intervals,cost_avg,cost_std,penalty_avg,penalty_freq_pct,thermal_avg_mw,"
         "wind_avg_mw,fallbacks";
}

std::string SimMetrics::metrics_row(const std::string& label) const {
  std::string s = label;
  s += "," + std::to_string(intervals.size());
  s += "," + csv_num(cost_avg) + "," + csv_num(cost_std) + "," + csv_num(penalty_avg);
  s += "," + csv_num(penalty_freq_pct) + "," + csv_num(thermal_avg) + "," + csv_num(wind_avg);
  s += "," + std::to_string(fallback_count);
  return s;
}

void SimMetrics::write_metrics_csv(const std::string& path, const std::string& label) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << metrics_header() << "\n" << metrics_row(label) << "\n";
}

std::pair<double, double> interval_cost(const Grid& grid, const DispatchSchedule& stage1,
                                        const DispatchCosts& costs) {
  double gen_cost = 0.0;
  for (int i = 0; i < grid.n_gens(); ++i) gen_cost += grid.gens[i].cost * stage1.gen(0, i);
  for (int i = 0; i < grid.n_farms(); ++i) gen_cost += grid.farms[i].cost * stage1.wind(0, i);
  const double penalty = costs.c_under * stage1.s_plus[0] + costs.c_over * stage1.s_minus[0];
  // $/MWh at a 10-minute interval
  return {(gen_cost + penalty) / 6.0, penalty / 6.0};
}

Eigen::MatrixXd generate_demand(const Eigen::MatrixXd& mean_profile, double rel_std,
                                uint64_t seed) {
  if ((mean_profile.array() < 0.0).any())
    throw std::runtime_error("generate_demand: negative means");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(mean_profile.rows(), mean_profile.cols());
  for (int i = 0; i < out.rows(); ++i)
    for (int j = 0; j < out.cols(); ++j) {
      const double mu = mean_profile(i, j);
      out(i, j) = std::max(0.0, mu + rel_std * mu * normal(rng));
    }
  return out;
}

namespace {

struct FittedModels {
  SeasonalModel seasonal;
  VarModel var;
};

FittedModels fit_models(const WindSeries& wind, int upto_row, const SimConfig& cfg) {
  const int lo = cfg.estimation_window ? std::max(0, upto_row - *cfg.estimation_window) : 0;
  WindSeries train;
  train.start_index = wind.start_index + lo;
  train.speeds = wind.speeds.middleRows(lo, upto_row - lo);
  FittedModels f;
  f.seasonal = fit_seasonal(train);
  Eigen::MatrixXd resid = seasonal_residuals(train, f.seasonal);
  f.var = fit_var(resid, cfg.fit_lags);
  return f;
}

}  // namespace

SimMetrics run_rolling_horizon(const Grid& grid, const WindSeries& wind, int warmup,
                               const Eigen::MatrixXd& demand, const SimConfig& cfg) {
  const int n_int = cfg.days * 144;
  const int nw = grid.n_farms();
  if (wind.sites() != nw) throw std::runtime_error("sim: wind series width != farm count");
  if (wind.length() < warmup + n_int) throw std::runtime_error("sim: wind series too short");
  if (demand.rows() < n_int || demand.cols() != grid.n_loads())
    throw std::runtime_error("sim: demand series shape");
  if (cfg.horizon_T < 2) throw std::runtime_error("sim: horizon must be at least 2");

  std::vector<PowerCurvePWL> curves;
  for (const auto& f : grid.farms) curves.push_back(f.curve);

  auto observed_avail = [&](int row) {
    Eigen::VectorXd a(nw);
    for (int i = 0; i < nw; ++i) a[i] = curves[i].available(wind.speeds(row, i));
    return a;
  };

  // initial condition: single-period dispatch against the first observation
  // with ramps disabled
  Eigen::VectorXd p0g, p0w;
  {
    Stage1Obs obs0;
    obs0.demand = demand.row(0).transpose();
    obs0.avail_wind = observed_avail(warmup);
    DispatchSchedule ed0 = solve_la_ed(grid, obs0, cfg.costs, 1, {}, {});
    p0g = ed0.gen.row(0).transpose();
    p0w = ed0.wind.row(0).transpose();
  }

  FittedModels models = fit_models(wind, warmup, cfg);
  CompactStage2 s2 = build_second_stage(grid, cfg.horizon_T, cfg.costs);
  AdWorkspace ws;
  const int P = cfg.horizon_T - 1;

  SimMetrics out;
  out.intervals.reserve(n_int);

  for (int k = 0; k < n_int; ++k) {
    const int row = warmup + k;
    const long period = wind.start_index + row;
    if (k > 0 && cfg.reestimate_every > 0 && k % cfg.reestimate_every == 0)
      models = fit_models(wind, row, cfg);

    Stage1Obs obs;
    obs.demand = demand.row(k).transpose();
    obs.avail_wind = observed_avail(row);
    obs.prev_gen = p0g;
    obs.prev_wind = p0w;

    // operator forecasts for periods 2..T
    Eigen::MatrixXd fc_demand(P, grid.n_loads());
    Eigen::MatrixXd d_hat(P, grid.n_loads());
    for (int p = 0; p < P; ++p) {
      fc_demand.row(p) = grid.nominal_demand(period + 1 + p).transpose();
      d_hat.row(p) = cfg.demand_rel_std * fc_demand.row(p);
    }
    const int hist_rows = std::max(models.var.lag, 1);
    Eigen::MatrixXd recent = wind.speeds.middleRows(row - hist_rows + 1, hist_rows);
    Eigen::MatrixXd resid_hist(hist_rows, nw);
    for (int r = 0; r < hist_rows; ++r)
      resid_hist.row(r) =
          recent.row(r) - models.seasonal.eval_all(period - hist_rows + 1 + r).transpose();
    Eigen::MatrixXd fc_speed =
        nominal_forecast(models.seasonal, models.var, resid_hist, period, P);
    Eigen::MatrixXd fc_avail(P, nw);
    for (int p = 0; p < P; ++p)
      for (int i = 0; i < nw; ++i) fc_avail(p, i) = curves[i].envelope(fc_speed(p, i));

    IntervalRecord rec;
    rec.t = k;
    DispatchSchedule stage1;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (cfg.policy) {
        case PolicyKind::kLookAhead: {
          DispatchSchedule full =
              solve_la_ed(grid, obs, cfg.costs, cfg.horizon_T, fc_demand, fc_avail);
          stage1 = full;
          rec.solver_iters = 1;
          break;
        }
        case PolicyKind::kReserveLookAhead: {
          DispatchSchedule full =
              solve_res_la_ed(grid, obs, cfg.costs, cfg.horizon_T, fc_demand, fc_avail,
                              cfg.res_factor, nullptr, cfg.reserve_hard);
          stage1 = full;
          rec.solver_iters = 1;
          break;
        }
        case PolicyKind::kRobust: {
          Polyhedron dset = build_demand_set(fc_demand, d_hat, cfg.set_spec.gamma_d);
          Polyhedron wset = build_wind_trajectory_set(
              models.seasonal, models.var, recent, period, cfg.set_spec, curves,
              cfg.horizon_T);
          Polyhedron xi_set = product_set(dset, wset);
          CcgResult res =
              solve_robust_ed(grid, obs, cfg.costs, s2, xi_set, cfg.ccg, &ws);
          rec.solver_iters = res.iterations;
          if (!res.converged && !res.stalled)
            throw std::runtime_error("robust solve did not converge");
          stage1 = res.stage1;
          break;
        }
      }
    } catch (const std::exception&) {
      // policy failed this interval: record it and fall back to the
      // deterministic look-ahead dispatch
      DispatchSchedule full =
          solve_la_ed(grid, obs, cfg.costs, cfg.horizon_T, fc_demand, fc_avail);
      stage1 = full;
      rec.fallback = true;
    }
    const auto t1 = std::chrono::steady_clock::now();
    rec.solve_ms = std::chrono::duration<double, std::milli>(t1 - t0).count();

    auto [cost, penalty] = interval_cost(grid, stage1, cfg.costs);
    rec.cost = cost;
    rec.penalty = penalty;
    rec.s_plus = stage1.s_plus[0];
    rec.s_minus = stage1.s_minus[0];
    rec.thermal_mw = stage1.thermal(0);
    rec.wind_mw = stage1.wind_total(0);
    out.intervals.push_back(rec);

    p0g = stage1.gen.row(0).transpose();
    p0w = stage1.wind.row(0).transpose();
  }
  out.finalize();
  return out;
}

std::vector<SweepCell> sweep_gamma(const Grid& grid, const WindSeries& wind, int warmup,
                                   const Eigen::MatrixXd& demand,
                                   const std::vector<double>& gamma_w_list,
                                   const std::vector<double>& gamma_d_list,
                                   const std::vector<SetSpec::Kind>& variants,
                                   const SimConfig& base_cfg) {
  if (gamma_w_list.empty() || gamma_d_list.empty() || variants.empty())
    throw std::runtime_error("sweep: empty grid");
  std::vector<SweepCell> cells;
  for (const auto& variant : variants)
    for (double gd : gamma_d_list)
      for (double gw : gamma_w_list) {
        SweepCell cell;
        cell.variant = to_string(variant);
        cell.gamma_w = gw;
        cell.gamma_d = gd;
        SimConfig cfg = base_cfg;
        cfg.policy = PolicyKind::kRobust;
        cfg.set_spec.kind = variant;
        cfg.set_spec.gamma_w = gw;
        cfg.set_spec.gamma_d = gd;
        try {
          cell.metrics = run_rolling_horizon(grid, wind, warmup, demand, cfg);
        } catch (const std::exception&) {
          cell.failed = true;
        }
        cells.push_back(std::move(cell));
      }
  return cells;
}

void write_frontier_csv(const std::string& path, const std::vector<SweepCell>& cells) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "variant,gamma_w,gamma_d,cost_avg,cost_std,penalty_avg,penalty_freq_pct,"
         "thermal_avg_mw,wind_avg_mw,fallbacks,failed\n";
  for (const auto& c : cells) {
    const auto& m = c.metrics;
    out << c.variant << "," << csv_num(c.gamma_w) << "," << csv_num(c.gamma_d) << ","
        << csv_num(m.cost_avg) << "," << csv_num(m.cost_std) << "," << csv_num(m.penalty_avg)
        << "," << csv_num(m.penalty_freq_pct) << "," << csv_num(m.thermal_avg) << ","
        << csv_num(m.wind_avg) << "," << m.fallback_count << "," << (c.failed ? 1 : 0)
        << "\n";
  }
}

}  // namespace roed
