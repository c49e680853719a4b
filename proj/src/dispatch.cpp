#include "roed/dispatch.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roed {

namespace {

[[noreturn]] void fail(const std::string& what) { throw std::runtime_error("dispatch: " + what); }

double snap_nonneg(double v) { return v < 1e-7 ? 0.0 : v; }

}  // namespace

Scenario scenario_from_xi(const Eigen::VectorXd& xi, int periods, int n_loads, int n_farms) {
  if (xi.size() != periods * (n_loads + n_farms)) fail("scenario_from_xi: size mismatch");
  Scenario s;
  s.demand.resize(periods, n_loads);
  s.avail.resize(periods, n_farms);
  for (int p = 0; p < periods; ++p)
    for (int j = 0; j < n_loads; ++j) s.demand(p, j) = xi[p * n_loads + j];
  const int off = periods * n_loads;
  for (int p = 0; p < periods; ++p)
    for (int i = 0; i < n_farms; ++i) s.avail(p, i) = xi[off + p * n_farms + i];
  return s;
}

Eigen::VectorXd xi_from_scenario(const Scenario& s) {
  const int periods = static_cast<int>(s.demand.rows());
  const int n_loads = static_cast<int>(s.demand.cols());
  const int n_farms = static_cast<int>(s.avail.cols());
  Eigen::VectorXd xi(periods * (n_loads + n_farms));
  for (int p = 0; p < periods; ++p)
    for (int j = 0; j < n_loads; ++j) xi[p * n_loads + j] = s.demand(p, j);
  const int off = periods * n_loads;
  for (int p = 0; p < periods; ++p)
    for (int i = 0; i < n_farms; ++i) xi[off + p * n_farms + i] = s.avail(p, i);
  return xi;
}

Stage1Region build_first_stage(const Grid& grid, const Stage1Obs& obs,
                               const DispatchCosts& costs) {
  const int ng = grid.n_gens();
  const int nw = grid.n_farms();
  if (obs.demand.size() != grid.n_loads() || obs.avail_wind.size() != nw)
    fail("build_first_stage: observation dimensions");
  if ((obs.demand.array() < 0).any() || (obs.avail_wind.array() < 0).any())
    fail("build_first_stage: negative observations");
  const bool ramps = obs.prev_gen.size() > 0;
  if (ramps && (obs.prev_gen.size() != ng || obs.prev_wind.size() != nw))
    fail("build_first_stage: previous dispatch dimensions");

  Stage1Region s;
  s.n_gens = ng;
  s.n_farms = nw;
  s.obs_demand = obs.demand;
  s.obs_avail = obs.avail_wind;

  for (int i = 0; i < ng; ++i) {
    const auto& g = grid.gens[i];
    double lo = g.pmin, hi = g.pmax;
    if (ramps) {
      lo = std::max(lo, obs.prev_gen[i] - g.ramp_down);
      hi = std::min(hi, obs.prev_gen[i] + g.ramp_up);
    }
    s.lo.push_back(lo);
    s.hi.push_back(hi);
    s.cost.push_back(g.cost);
  }
  for (int i = 0; i < nw; ++i) {
    const auto& w = grid.farms[i];
    double lo = 0.0;
    double hi = std::min(w.pwmax, obs.avail_wind[i]);
    if (ramps) {
      lo = std::max(lo, obs.prev_wind[i] - w.ramp_down);
      hi = std::min(hi, obs.prev_wind[i] + w.ramp_up);
    }
    s.lo.push_back(lo);
    s.hi.push_back(hi);
    s.cost.push_back(w.cost);
  }
  s.lo.push_back(0.0);
  s.hi.push_back(kInf);
  s.cost.push_back(costs.c_under);
  s.lo.push_back(0.0);
  s.hi.push_back(kInf);
  s.cost.push_back(costs.c_over);

  // energy balance with slacks
  Stage1Region::Row bal;
  bal.lo = bal.hi = obs.demand.sum();
  for (int i = 0; i < ng; ++i) bal.terms.emplace_back(s.x_pg(i), 1.0);
  for (int i = 0; i < nw; ++i) bal.terms.emplace_back(s.x_pw(i), 1.0);
  bal.terms.emplace_back(s.x_splus(), 1.0);
  bal.terms.emplace_back(s.x_sminus(), -1.0);
  s.rows.push_back(std::move(bal));

  // line limits on the observed net injection; slacked power bypasses the grid
  if (grid.shift_factors.rows() == grid.n_lines()) {
    Eigen::VectorXd base = grid.shift_factors * (grid.inc_load * obs.demand);
    Eigen::MatrixXd ag = grid.shift_factors * grid.inc_gen;   // lines x gens
    Eigen::MatrixXd aw = grid.shift_factors * grid.inc_wind;  // lines x farms
    for (int l = 0; l < grid.n_lines(); ++l) {
      Stage1Region::Row row;
      row.lazy = true;
      row.lo = -grid.lines[l].flow_limit + base[l];
      row.hi = grid.lines[l].flow_limit + base[l];
      for (int i = 0; i < ng; ++i)
        if (ag(l, i) != 0.0) row.terms.emplace_back(s.x_pg(i), ag(l, i));
      for (int i = 0; i < nw; ++i)
        if (aw(l, i) != 0.0) row.terms.emplace_back(s.x_pw(i), aw(l, i));
      s.rows.push_back(std::move(row));
    }
  }
  return s;
}

CompactStage2 build_second_stage(const Grid& grid, int T, const DispatchCosts& costs) {
  if (T < 2) fail("build_second_stage: T must be at least 2");
  CompactStage2 s;
  s.T = T;
  s.n_gens = grid.n_gens();
  s.n_farms = grid.n_farms();
  s.n_loads = grid.n_loads();
  s.n_lines = grid.n_lines();

  std::vector<Eigen::Triplet<double>> tg, te, tm;
  std::vector<double> h;
  auto row = [&](CompactStage2::RowKind kind, int t, int unit, double rhs) {
    s.row_info.push_back({kind, t, unit});
    h.push_back(rhs);
    return static_cast<int>(h.size()) - 1;
  };

  const Eigen::MatrixXd ag = grid.shift_factors * grid.inc_gen;
  const Eigen::MatrixXd aw = grid.shift_factors * grid.inc_wind;
  const Eigen::MatrixXd ad = grid.shift_factors * grid.inc_load;

  for (int t = 2; t <= T; ++t) {
    for (int i = 0; i < s.n_gens; ++i) {  // thermal box
      const auto& g = grid.gens[i];
      int r = row(CompactStage2::RowKind::kBox, t, i, g.pmin);
      tg.emplace_back(r, s.y_pg(t, i), 1.0);
      r = row(CompactStage2::RowKind::kBox, t, i, -g.pmax);
      tg.emplace_back(r, s.y_pg(t, i), -1.0);
    }
    for (int i = 0; i < s.n_farms; ++i) {  // wind box and availability
      const auto& w = grid.farms[i];
      int r = row(CompactStage2::RowKind::kBox, t, i, 0.0);
      tg.emplace_back(r, s.y_pw(t, i), 1.0);
      r = row(CompactStage2::RowKind::kBox, t, i, -w.pwmax);
      tg.emplace_back(r, s.y_pw(t, i), -1.0);
      // pw <= pbar: -pw >= -pbar, pbar entering through M
      r = row(CompactStage2::RowKind::kAvail, t, i, 0.0);
      tg.emplace_back(r, s.y_pw(t, i), -1.0);
      tm.emplace_back(r, s.xi_avail(t, i), 1.0);
    }
    for (int i = 0; i < s.n_gens; ++i) {  // thermal ramps
      const auto& g = grid.gens[i];
      int r = row(CompactStage2::RowKind::kRamp, t, i, -g.ramp_up);
      tg.emplace_back(r, s.y_pg(t, i), -1.0);
      if (t == 2) te.emplace_back(r, i, 1.0);
      else tg.emplace_back(r, s.y_pg(t - 1, i), 1.0);
      r = row(CompactStage2::RowKind::kRamp, t, i, -g.ramp_down);
      tg.emplace_back(r, s.y_pg(t, i), 1.0);
      if (t == 2) te.emplace_back(r, i, -1.0);
      else tg.emplace_back(r, s.y_pg(t - 1, i), -1.0);
    }
    for (int i = 0; i < s.n_farms; ++i) {  // wind ramps
      const auto& w = grid.farms[i];
      int r = row(CompactStage2::RowKind::kRamp, t, i, -w.ramp_up);
      tg.emplace_back(r, s.y_pw(t, i), -1.0);
      if (t == 2) te.emplace_back(r, s.n_gens + i, 1.0);
      else tg.emplace_back(r, s.y_pw(t - 1, i), 1.0);
      r = row(CompactStage2::RowKind::kRamp, t, i, -w.ramp_down);
      tg.emplace_back(r, s.y_pw(t, i), 1.0);
      if (t == 2) te.emplace_back(r, s.n_gens + i, -1.0);
      else tg.emplace_back(r, s.y_pw(t - 1, i), -1.0);
    }
    for (int l = 0; l < s.n_lines; ++l) {  // line limits, both signs
      const double f = grid.lines[l].flow_limit;
      int r = row(CompactStage2::RowKind::kLine, t, l, -f);
      for (int i = 0; i < s.n_gens; ++i)
        if (ag(l, i) != 0.0) tg.emplace_back(r, s.y_pg(t, i), -ag(l, i));
      for (int i = 0; i < s.n_farms; ++i)
        if (aw(l, i) != 0.0) tg.emplace_back(r, s.y_pw(t, i), -aw(l, i));
      for (int j = 0; j < s.n_loads; ++j)
        if (ad(l, j) != 0.0) tm.emplace_back(r, s.xi_d(t, j), ad(l, j));
      r = row(CompactStage2::RowKind::kLine, t, l, -f);
      for (int i = 0; i < s.n_gens; ++i)
        if (ag(l, i) != 0.0) tg.emplace_back(r, s.y_pg(t, i), ag(l, i));
      for (int i = 0; i < s.n_farms; ++i)
        if (aw(l, i) != 0.0) tg.emplace_back(r, s.y_pw(t, i), aw(l, i));
      for (int j = 0; j < s.n_loads; ++j)
        if (ad(l, j) != 0.0) tm.emplace_back(r, s.xi_d(t, j), -ad(l, j));
    }
    {  // balance equality as a row pair
      int r = row(CompactStage2::RowKind::kBalance, t, -1, 0.0);
      for (int i = 0; i < s.n_gens; ++i) tg.emplace_back(r, s.y_pg(t, i), 1.0);
      for (int i = 0; i < s.n_farms; ++i) tg.emplace_back(r, s.y_pw(t, i), 1.0);
      tg.emplace_back(r, s.y_splus(t), 1.0);
      tg.emplace_back(r, s.y_sminus(t), -1.0);
      for (int j = 0; j < s.n_loads; ++j) tm.emplace_back(r, s.xi_d(t, j), -1.0);
      r = row(CompactStage2::RowKind::kBalance, t, -1, 0.0);
      for (int i = 0; i < s.n_gens; ++i) tg.emplace_back(r, s.y_pg(t, i), -1.0);
      for (int i = 0; i < s.n_farms; ++i) tg.emplace_back(r, s.y_pw(t, i), -1.0);
      tg.emplace_back(r, s.y_splus(t), -1.0);
      tg.emplace_back(r, s.y_sminus(t), 1.0);
      for (int j = 0; j < s.n_loads; ++j) tm.emplace_back(r, s.xi_d(t, j), 1.0);
    }
    {  // slack nonnegativity
      int r = row(CompactStage2::RowKind::kSlack, t, -1, 0.0);
      tg.emplace_back(r, s.y_splus(t), 1.0);
      r = row(CompactStage2::RowKind::kSlack, t, -1, 0.0);
      tg.emplace_back(r, s.y_sminus(t), 1.0);
    }
  }

  const int rows = static_cast<int>(h.size());
  s.g.resize(rows, s.n_y());
  s.g.setFromTriplets(tg.begin(), tg.end());
  s.e.resize(rows, s.n_x());
  s.e.setFromTriplets(te.begin(), te.end());
  s.m.resize(rows, s.n_xi());
  s.m.setFromTriplets(tm.begin(), tm.end());
  s.h = Eigen::Map<Eigen::VectorXd>(h.data(), rows);

  s.b.resize(s.n_y());
  for (int t = 2; t <= T; ++t) {
    for (int i = 0; i < s.n_gens; ++i) s.b[s.y_pg(t, i)] = grid.gens[i].cost;
    for (int i = 0; i < s.n_farms; ++i) s.b[s.y_pw(t, i)] = grid.farms[i].cost;
    s.b[s.y_splus(t)] = costs.c_under;
    s.b[s.y_sminus(t)] = costs.c_over;
  }
  return s;
}

EdModel build_ed_model(const Stage1Region& s1, const CompactStage2* s2,
                       std::span<const Scenario> scenarios) {
  EdModel m;
  m.stage2 = s2;
  m.n_x = s1.x_dim();
  m.T = s2 ? s2->T : 1;
  if (!scenarios.empty() && !s2) fail("build_ed_model: scenarios without stage-2 matrices");

  for (int j = 0; j < s1.x_dim(); ++j) m.lp.add_col(s1.lo[j], s1.hi[j], s1.cost[j]);
  for (const auto& row : s1.rows) {
    if (row.lazy) {
      m.lazy.push_back({row.lo, row.hi, row.terms});
    } else {
      m.lp.add_row(row.lo, row.terms, row.hi);
    }
  }

  if (scenarios.empty()) return m;
  m.eta_col = m.lp.add_col(-kInf, kInf, 1.0);

  // column-compressed views of the compact matrices are not needed: walk rows
  Eigen::SparseMatrix<double, Eigen::RowMajor> gr = s2->g;
  Eigen::SparseMatrix<double, Eigen::RowMajor> er = s2->e;
  Eigen::SparseMatrix<double, Eigen::RowMajor> mr = s2->m;

  for (const auto& scen : scenarios) {
    const Eigen::VectorXd xi = xi_from_scenario(scen);
    if (xi.size() != s2->n_xi()) fail("build_ed_model: scenario dimension");
    const Eigen::VectorXd mxi = s2->m * xi;
    const int base = m.lp.num_cols();
    m.y_base.push_back(base);
    for (int c = 0; c < s2->n_y(); ++c) m.lp.add_col(-kInf, kInf, 0.0);

    for (int r = 0; r < s2->g.rows(); ++r) {
      const double rhs = s2->h[r] - mxi[r];
      const auto kind = s2->row_info[r].kind;
      // singleton rows without x coupling become variable bounds
      int y_nnz = 0, y_col = -1;
      double y_coef = 0.0;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, r); it; ++it) {
        ++y_nnz;
        y_col = static_cast<int>(it.col());
        y_coef = it.value();
      }
      const bool has_x = er.row(r).nonZeros() > 0;
      if (y_nnz == 1 && !has_x) {
        const int col = base + y_col;
        if (y_coef > 0.0)
          m.lp.col_lo[col] = std::max(m.lp.col_lo[col], rhs / y_coef);
        else
          m.lp.col_hi[col] = std::min(m.lp.col_hi[col], rhs / y_coef);
        continue;
      }
      std::vector<std::pair<int, double>> terms;
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(gr, r); it; ++it)
        terms.emplace_back(base + static_cast<int>(it.col()), it.value());
      for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(er, r); it; ++it)
        terms.emplace_back(static_cast<int>(it.col()), it.value());
      if (kind == CompactStage2::RowKind::kLine) {
        m.lazy.push_back({rhs, kInf, std::move(terms)});
      } else {
        m.lp.add_row(rhs, terms, kInf);
      }
    }
    // eta >= b' y_l
    std::vector<std::pair<int, double>> eta_terms;
    eta_terms.emplace_back(m.eta_col, 1.0);
    for (int c = 0; c < s2->n_y(); ++c)
      if (s2->b[c] != 0.0) eta_terms.emplace_back(base + c, -s2->b[c]);
    m.lp.add_row(0.0, eta_terms, kInf);
  }
  return m;
}

void add_reserve(EdModel& m, const Grid& grid, const ReserveSpec& spec,
                 const DispatchCosts& costs) {
  if (m.y_base.size() > 1) fail("add_reserve: reserve applies to the look-ahead model only");
  const int ng = grid.n_gens();
  const int T = m.T;
  if (spec.requirement.size() != T) fail("add_reserve: requirement length");
  if (spec.caps.size() != ng) fail("add_reserve: caps length");

  std::vector<int> rcol(ng * T);
  for (int t = 1; t <= T; ++t)
    for (int i = 0; i < ng; ++i)
      rcol[(t - 1) * ng + i] = m.lp.add_col(0.0, spec.caps[i], 0.0);

  auto pg_col = [&](int t, int i) {
    return t == 1 ? i : m.y_base.at(0) + m.stage2->y_pg(t, i);
  };
  for (int t = 1; t <= T; ++t) {
    for (int i = 0; i < ng; ++i) {  // pg + R <= pmax
      std::vector<std::pair<int, double>> terms = {{pg_col(t, i), 1.0},
                                                   {rcol[(t - 1) * ng + i], 1.0}};
      m.lp.add_row(-kInf, terms, grid.gens[i].pmax);
    }
    std::vector<std::pair<int, double>> req;
    for (int i = 0; i < ng; ++i) req.emplace_back(rcol[(t - 1) * ng + i], 1.0);
    if (!spec.hard) {
      const int slack = m.lp.add_col(0.0, kInf, costs.c_under);
      req.emplace_back(slack, 1.0);
    }
    m.lp.add_row(spec.requirement[t - 1], req, kInf);
  }
}

LpSolution EdModel::solve(const LpBasis* warm, int* lazy_added) const {
  LpProblem work = lp;
  std::vector<bool> active(lazy.size(), false);
  LpBasis basis;
  if (warm) basis = *warm;
  int added = 0;
  while (true) {
    LpSolution sol = lp_solve(work, basis.empty() ? nullptr : &basis);
    if (sol.status != LpStatus::kOptimal) {
      if (lazy_added) *lazy_added = added;
      return sol;
    }
    int new_rows = 0;
    for (size_t k = 0; k < lazy.size(); ++k) {
      if (active[k]) continue;
      double act = 0.0;
      for (const auto& [c, v] : lazy[k].terms) act += v * sol.x[c];
      const double tol = 1e-7 * (1.0 + std::abs(act));
      if (act < lazy[k].lo - tol || act > lazy[k].hi + tol) {
        work.add_row(lazy[k].lo, lazy[k].terms, lazy[k].hi);
        active[k] = true;
        ++new_rows;
      }
    }
    if (new_rows == 0) {
      if (lazy_added) *lazy_added = added;
      return sol;
    }
    added += new_rows;
    // keep the old basis; appended logicals start basic
    basis = sol.basis;
    const int n = work.num_cols();
    for (int r = work.num_rows() - new_rows; r < work.num_rows(); ++r) {
      basis.state.push_back(LpBasis::kBasic);
      basis.basic.push_back(n + r);
    }
  }
}

Eigen::VectorXd EdModel::x_of(const LpSolution& sol) const { return sol.x.head(n_x); }

DispatchSchedule EdModel::schedule_of(const LpSolution& sol, const Stage1Region& s1,
                                      int scen) const {
  DispatchSchedule d;
  const int periods = stage2 && !y_base.empty() ? T : 1;
  d.gen.resize(periods, s1.n_gens);
  d.wind.resize(periods, s1.n_farms);
  d.s_plus.resize(periods);
  d.s_minus.resize(periods);
  for (int i = 0; i < s1.n_gens; ++i) d.gen(0, i) = sol.x[s1.x_pg(i)];
  for (int i = 0; i < s1.n_farms; ++i) d.wind(0, i) = sol.x[s1.x_pw(i)];
  d.s_plus[0] = snap_nonneg(sol.x[s1.x_splus()]);
  d.s_minus[0] = snap_nonneg(sol.x[s1.x_sminus()]);
  if (periods > 1) {
    const int base = y_base.at(scen);
    for (int t = 2; t <= T; ++t) {
      for (int i = 0; i < s1.n_gens; ++i) d.gen(t - 1, i) = sol.x[base + stage2->y_pg(t, i)];
      for (int i = 0; i < s1.n_farms; ++i) d.wind(t - 1, i) = sol.x[base + stage2->y_pw(t, i)];
      d.s_plus[t - 1] = snap_nonneg(sol.x[base + stage2->y_splus(t)]);
      d.s_minus[t - 1] = snap_nonneg(sol.x[base + stage2->y_sminus(t)]);
    }
  }
  d.objective = sol.objective;
  return d;
}

DispatchSchedule solve_la_ed(const Grid& grid, const Stage1Obs& obs, const DispatchCosts& costs,
                             int T, const Eigen::MatrixXd& forecast_demand,
                             const Eigen::MatrixXd& forecast_avail) {
  Stage1Region s1 = build_first_stage(grid, obs, costs);
  if (T <= 1) {
    EdModel m = build_ed_model(s1, nullptr, {});
    LpSolution sol = m.solve();
    if (sol.status != LpStatus::kOptimal) fail("solve_la_ed: LP not optimal");
    return m.schedule_of(sol, s1);
  }
  if (forecast_demand.rows() != T - 1 || forecast_avail.rows() != T - 1)
    fail("solve_la_ed: forecast must cover periods 2..T");
  CompactStage2 s2 = build_second_stage(grid, T, costs);
  Scenario nominal{forecast_demand, forecast_avail};
  EdModel m = build_ed_model(s1, &s2, std::span<const Scenario>(&nominal, 1));
  LpSolution sol = m.solve();
  if (sol.status != LpStatus::kOptimal) fail("solve_la_ed: LP not optimal");
  return m.schedule_of(sol, s1);
}

DispatchSchedule solve_res_la_ed(const Grid& grid, const Stage1Obs& obs,
                                 const DispatchCosts& costs, int T,
                                 const Eigen::MatrixXd& forecast_demand,
                                 const Eigen::MatrixXd& forecast_avail, double res_factor,
                                 const Eigen::VectorXd* caps, bool hard) {
  if (res_factor < 0.0) fail("solve_res_la_ed: negative reserve factor");
  if (res_factor == 0.0)  // inactive requirement: same model as LA-ED
    return solve_la_ed(grid, obs, costs, T, forecast_demand, forecast_avail);

  Stage1Region s1 = build_first_stage(grid, obs, costs);
  CompactStage2 s2 = build_second_stage(grid, T, costs);
  Scenario nominal{forecast_demand, forecast_avail};
  EdModel m = build_ed_model(s1, &s2, std::span<const Scenario>(&nominal, 1));

  ReserveSpec spec;
  spec.hard = hard;
  spec.caps.resize(grid.n_gens());
  for (int i = 0; i < grid.n_gens(); ++i)
    spec.caps[i] = caps ? (*caps)[i] : grid.gens[i].ramp_up;
  spec.requirement.resize(T);
  spec.requirement[0] =
      res_factor * std::max(0.0, obs.demand.sum() - obs.avail_wind.sum());
  for (int t = 2; t <= T; ++t)
    spec.requirement[t - 1] = res_factor * std::max(0.0, forecast_demand.row(t - 2).sum() -
                                                             forecast_avail.row(t - 2).sum());
  add_reserve(m, grid, spec, costs);
  LpSolution sol = m.solve();
  if (sol.status != LpStatus::kOptimal) fail("solve_res_la_ed: LP " + std::string(to_string(sol.status)));
  return m.schedule_of(sol, s1);
}

LpSolution second_stage_recourse(const CompactStage2& s2, const Eigen::VectorXd& x,
                                 const Eigen::VectorXd& xi) {
  if (x.size() != s2.n_x() || xi.size() != s2.n_xi())
    fail("second_stage_recourse: dimension mismatch");
  LpProblem p;
  for (int c = 0; c < s2.n_y(); ++c) p.add_col(-kInf, kInf, s2.b[c]);
  const Eigen::VectorXd rhs = s2.h - s2.e * x - s2.m * xi;
  for (int r = 0; r < s2.g.rows(); ++r) p.add_row(rhs[r], kInf);
  for (int k = 0; k < s2.g.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(s2.g, k); it; ++it)
      p.add_entry(static_cast<int>(it.row()), static_cast<int>(it.col()), it.value());
  return lp_solve(p);
}

}  // namespace roed
