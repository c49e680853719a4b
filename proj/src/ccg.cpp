#include "roed/ccg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <random>
#include <stdexcept>

namespace roed {

namespace {

LpProblem build_pi_problem(const CompactStage2& s2) {
  // Pi = { pi >= 0 : G' pi = b }, objective filled in per alternation
  LpProblem p;
  const int rows = static_cast<int>(s2.g.rows());
  p.maximize = true;
  for (int r = 0; r < rows; ++r) p.add_col(0.0, kInf, 0.0);
  for (int c = 0; c < s2.n_y(); ++c) p.add_row(s2.b[c], s2.b[c]);
  for (int k = 0; k < s2.g.outerSize(); ++k)
    for (Eigen::SparseMatrix<double>::InnerIterator it(s2.g, k); it; ++it)
      p.add_entry(static_cast<int>(it.col()), static_cast<int>(it.row()), it.value());
  return p;
}

AdResult run_alternation(const CompactStage2& s2, const Eigen::VectorXd& x,
                         const Polyhedron& xi_set, const AdOptions& opt, AdWorkspace* ws,
                         LpProblem& pi_lp, const Eigen::VectorXd& xi_start) {
  AdResult res;
  const Eigen::VectorXd hex = s2.h - s2.e * x;
  Eigen::VectorXd xi = xi_start;

  for (int alt = 1; alt <= opt.max_alternations; ++alt) {
    // C <- max over Pi at fixed xi
    const Eigen::VectorXd q = hex - s2.m * xi;
    for (int r = 0; r < pi_lp.num_cols(); ++r) pi_lp.obj[r] = q[r];
    LpSolution sp = lp_solve(pi_lp, ws && !ws->pi_basis.empty() ? &ws->pi_basis : nullptr);
    if (sp.status == LpStatus::kUnbounded) {
      res.value = kInf;
      res.bounded = false;
      res.alternations = alt;
      res.xi = xi;
      return res;
    }
    if (sp.status != LpStatus::kOptimal)
      throw std::runtime_error("eval_q_ad: dual subproblem " +
                               std::string(to_string(sp.status)));
    if (ws) ws->pi_basis = sp.basis;
    const double c_val = sp.objective;
    res.values.push_back(c_val);
    res.pi = sp.x;

    // C' <- max over the set at fixed pi
    const Eigen::VectorXd xi_obj = -(s2.m.transpose() * res.pi);
    LpSolution sx =
        xi_set.maximize_xi(xi_obj, ws && !ws->xi_basis.empty() ? &ws->xi_basis : nullptr);
    if (sx.status != LpStatus::kOptimal)
      throw std::runtime_error("eval_q_ad: adversary subproblem " +
                               std::string(to_string(sx.status)));
    if (ws) ws->xi_basis = sx.basis;
    const double c_prime = res.pi.dot(hex) + sx.objective;
    res.values.push_back(c_prime);
    xi = xi_set.xi_of(sx.x);
    res.value = c_prime;
    res.alternations = alt;
    if (c_prime - c_val <= opt.delta_rel * std::max(1.0, std::abs(c_prime))) {
      res.converged = true;
      break;
    }
  }
  res.xi = xi;
  return res;
}

}  // namespace

AdResult eval_q_ad(const CompactStage2& s2, const Eigen::VectorXd& x, const Polyhedron& xi_set,
                   const AdOptions& opt, AdWorkspace* ws, const Eigen::VectorXd* xi_start) {
  if (x.size() != s2.n_x()) throw std::runtime_error("eval_q_ad: x dimension");
  if (xi_set.xi_dim() != s2.n_xi()) throw std::runtime_error("eval_q_ad: xi dimension");
  LpProblem pi_lp = build_pi_problem(s2);

  Eigen::VectorXd start = xi_start ? *xi_start : xi_set.seed_xi();
  AdResult best = run_alternation(s2, x, xi_set, opt, ws, pi_lp, start);
  if (!best.bounded) return best;

  if (opt.vertex_restart) {
    std::mt19937_64 rng(opt.restart_seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd w(xi_set.xi_dim());
    for (int k = 0; k < w.size(); ++k) w[k] = normal(rng);
    // available-wind directions must stay nonpositive to keep the set bounded
    const int d_dim = xi_set.periods * xi_set.n_loads;
    for (int k = d_dim; k < w.size(); ++k) w[k] = -std::abs(w[k]);
    LpSolution v = xi_set.maximize_xi(w);
    if (v.status == LpStatus::kOptimal) {
      Eigen::VectorXd alt_start = xi_set.xi_of(v.x);
      AdResult second = run_alternation(s2, x, xi_set, opt, ws, pi_lp, alt_start);
      if (!second.bounded) return second;
      if (second.value > best.value) best = second;
    }
  }
  return best;
}

EnumResult exact_q_enum(const CompactStage2& s2, const Eigen::VectorXd& x,
                        const Polyhedron& xi_set) {
  if (!xi_set.vertices || xi_set.vertices->empty())
    throw std::runtime_error("exact_q_enum: set has no enumerated vertices");
  EnumResult best;
  bool first = true;
  for (const auto& v : *xi_set.vertices) {
    LpSolution rec = second_stage_recourse(s2, x, v);
    if (rec.status != LpStatus::kOptimal)
      throw std::runtime_error("exact_q_enum: recourse LP " +
                               std::string(to_string(rec.status)));
    if (first || rec.objective > best.value) {
      best.value = rec.objective;
      best.xi = v;
      first = false;
    }
  }
  return best;
}

void write_trace_header(std::ostream& os) {
  os << "iteration,lb,ub,alternations,worst_demand_mean,worst_avail_mean\n";
}

CcgResult solve_robust_ed(const Grid& grid, const Stage1Obs& obs, const DispatchCosts& costs,
                          const CompactStage2& s2, const Polyhedron& xi_set,
                          const CcgOptions& opt, AdWorkspace* ws) {
  if (opt.eps_rel <= 0.0) throw std::runtime_error("solve_robust_ed: eps must be positive");
  Stage1Region s1 = build_first_stage(grid, obs, costs);

  struct MasterState {
    std::vector<Scenario> scenarios;
    std::vector<Eigen::VectorXd> xis;
    double lb = -kInf, ub = kInf;
    Eigen::VectorXd best_x;
  } st;

  // seed the master with the nominal trajectory
  st.xis.push_back(xi_set.seed_xi());
  st.scenarios.push_back(
      scenario_from_xi(st.xis.back(), s2.periods(), s2.n_loads, s2.n_farms));

  CcgResult out;
  AdWorkspace local_ws;
  if (!ws) ws = &local_ws;

  for (int it = 1; it <= opt.max_iter; ++it) {
    EdModel master = build_ed_model(s1, &s2, st.scenarios);
    LpSolution sol = master.solve();
    if (sol.status != LpStatus::kOptimal)
      throw std::runtime_error("solve_robust_ed: master LP " +
                               std::string(to_string(sol.status)));
    st.lb = sol.objective;
    out.lb_history.push_back(st.lb);
    Eigen::VectorXd xhat = master.x_of(sol);

    double q_value = 0.0;
    Eigen::VectorXd worst_xi;
    int alternations = 0;
    if (opt.use_enum_oracle) {
      EnumResult er = exact_q_enum(s2, xhat, xi_set);
      q_value = er.value;
      worst_xi = er.xi;
    } else {
      AdResult ar = eval_q_ad(s2, xhat, xi_set, opt.ad, ws);
      if (!ar.bounded)
        throw std::runtime_error(
            "solve_robust_ed: unbounded dual subproblem (recourse hole)");
      q_value = ar.value;
      worst_xi = ar.xi;
      alternations = ar.alternations;
    }
    out.total_alternations += alternations;

    double cx = 0.0;
    for (int j = 0; j < s1.x_dim(); ++j) cx += s1.cost[j] * xhat[j];
    const double ub_cand = cx + q_value;
    if (ub_cand < st.ub) {
      st.ub = ub_cand;
      st.best_x = xhat;
    }
    out.iterations = it;

    if (opt.trace) {
      Scenario w = scenario_from_xi(worst_xi, s2.periods(), s2.n_loads, s2.n_farms);
      *opt.trace << it << "," << st.lb << "," << st.ub << "," << alternations << ","
                 << w.demand.mean() << "," << w.avail.mean() << "\n";
    }

    if (st.ub - st.lb <= opt.eps_rel * std::max(1.0, std::abs(st.ub))) {
      out.converged = true;
      break;
    }
    bool duplicate = false;
    for (const auto& xi : st.xis)
      if ((xi - worst_xi).cwiseAbs().maxCoeff() <= 1e-8) {
        duplicate = true;
        break;
      }
    if (duplicate) {
      out.stalled = true;
      break;
    }
    st.xis.push_back(worst_xi);
    st.scenarios.push_back(
        scenario_from_xi(worst_xi, s2.periods(), s2.n_loads, s2.n_farms));
  }

  out.x = st.best_x;
  out.ub = st.ub;
  out.lb = st.lb;
  out.scenario_xis = st.xis;

  // implemented single-period schedule from the first-stage vector
  DispatchSchedule d;
  d.gen.resize(1, s1.n_gens);
  d.wind.resize(1, s1.n_farms);
  d.s_plus.resize(1);
  d.s_minus.resize(1);
  for (int i = 0; i < s1.n_gens; ++i) d.gen(0, i) = st.best_x[s1.x_pg(i)];
  for (int i = 0; i < s1.n_farms; ++i) d.wind(0, i) = st.best_x[s1.x_pw(i)];
  d.s_plus[0] = std::max(0.0, st.best_x[s1.x_splus()]);
  d.s_minus[0] = std::max(0.0, st.best_x[s1.x_sminus()]);
  if (d.s_plus[0] < 1e-7) d.s_plus[0] = 0.0;
  if (d.s_minus[0] < 1e-7) d.s_minus[0] = 0.0;
  d.objective = st.ub;
  out.stage1 = d;
  return out;
}

double all_vertex_objective(const Grid& grid, const Stage1Obs& obs, const DispatchCosts& costs,
                            const CompactStage2& s2, const Polyhedron& xi_set) {
  if (!xi_set.vertices || xi_set.vertices->empty())
    throw std::runtime_error("all_vertex_objective: set has no enumerated vertices");
  Stage1Region s1 = build_first_stage(grid, obs, costs);
  std::vector<Scenario> scen;
  for (const auto& v : *xi_set.vertices)
    scen.push_back(scenario_from_xi(v, s2.periods(), s2.n_loads, s2.n_farms));
  EdModel master = build_ed_model(s1, &s2, scen);
  LpSolution sol = master.solve();
  if (sol.status != LpStatus::kOptimal)
    throw std::runtime_error("all_vertex_objective: LP " + std::string(to_string(sol.status)));
  return sol.objective;
}

}  // namespace roed
