#include <doctest.h>

#include <Eigen/Dense>
#include <random>
#include <sstream>

#include "roed/ccg.hpp"
#include "roed/uncertainty.hpp"

using namespace roed;

namespace {

// 2 generators, 1 farm, 1 load: the tiny instance family used by the oracle
// comparisons. Box uncertainty over (d, pbar) for T=3 gives 16 vertices.
struct Tiny {
  Grid grid;
  DispatchCosts costs;
  CompactStage2 s2;
  Stage1Obs obs;
  Polyhedron xi_set;

  explicit Tiny(uint64_t seed, int T = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::string txt = R"({
      "buses": [1, 2],
      "slack_bus": 1,
      "lines": [{"from":1,"to":2,"reactance":0.1,"flow_limit_mw":400}],
      "generators": [
        {"bus":1,"pmax_mw":80,"pmin_mw":10,"ramp_up_mw":)" +
                      std::to_string(5.0 + 10.0 * u(rng)) + R"(,"cost_per_mwh":20},
        {"bus":2,"pmax_mw":60,"pmin_mw":5,"ramp_up_mw":)" +
                      std::to_string(5.0 + 10.0 * u(rng)) + R"(,"cost_per_mwh":45}],
      "windfarms": [{"bus":2,"pwmax_mw":60,"cost_per_mwh":0,
        "power_curve":{"pieces":2,"samples":[[0,0],[10,30],[20,60]]}}],
      "loads": [{"bus":2,"base_mw":100}]
    })";
    grid = parse_grid(txt);
    s2 = build_second_stage(grid, T, costs);
    obs.demand = Eigen::VectorXd::Constant(1, 90.0 + 20.0 * u(rng));
    obs.avail_wind = Eigen::VectorXd::Constant(1, 25.0 + 20.0 * u(rng));
    obs.prev_gen = Eigen::VectorXd(2);
    obs.prev_gen << 40.0 + 10.0 * u(rng), 20.0 + 10.0 * u(rng);
    obs.prev_wind = Eigen::VectorXd::Constant(1, 20.0);

    Eigen::MatrixXd d_lo(T - 1, 1), d_hi(T - 1, 1), w_lo(T - 1, 1), w_hi(T - 1, 1);
    for (int p = 0; p < T - 1; ++p) {
      const double dm = 90.0 + 25.0 * u(rng);
      d_lo(p, 0) = dm - 10.0 * u(rng);
      d_hi(p, 0) = dm + 10.0 * u(rng);
      const double wm = 20.0 + 15.0 * u(rng);
      w_lo(p, 0) = std::max(0.0, wm - 15.0 * u(rng));
      w_hi(p, 0) = wm + 10.0 * u(rng);
    }
    xi_set = make_box_xi_set(d_lo, d_hi, w_lo, w_hi);
  }

  Eigen::VectorXd mid_x() const {
    Eigen::VectorXd x(s2.n_x());
    x << 45.0, 25.0, 22.0, 0.0, 0.0;  // pg1, pg2, pw, s+, s-
    return x;
  }
};

}  // namespace

TEST_SUITE("ccg") {

TEST_CASE("singleton set converges in one alternation to the LP value") {
  Tiny t(1);
  Eigen::MatrixXd fix_d = Eigen::MatrixXd::Constant(2, 1, 100.0);
  Eigen::MatrixXd fix_w = Eigen::MatrixXd::Constant(2, 1, 30.0);
  Polyhedron singleton = make_box_xi_set(fix_d, fix_d, fix_w, fix_w);
  Eigen::VectorXd x = t.mid_x();
  AdResult r = eval_q_ad(t.s2, x, singleton);
  CHECK(r.converged);
  CHECK(r.alternations == 1);
  LpSolution rec = second_stage_recourse(t.s2, x, singleton.seed_xi());
  REQUIRE(rec.status == LpStatus::kOptimal);
  CHECK(r.value == doctest::Approx(rec.objective).epsilon(1e-8));
}

TEST_CASE("alternation values never decrease") {
  for (uint64_t seed : {2, 3, 4, 5, 6}) {
    Tiny t(seed);
    AdResult r = eval_q_ad(t.s2, t.mid_x(), t.xi_set);
    REQUIRE(r.values.size() >= 2);
    for (size_t k = 1; k < r.values.size(); ++k)
      CHECK(r.values[k] >= r.values[k - 1] - 1e-7 * (1.0 + std::abs(r.values[k])));
  }
}

TEST_CASE("AD is bounded above by exact enumeration over 100 seeds") {
  int equal = 0;
  const int n = 100;
  for (int seed = 0; seed < n; ++seed) {
    Tiny t(1000 + seed);
    Eigen::VectorXd x = t.mid_x();
    AdResult ad = eval_q_ad(t.s2, x, t.xi_set);
    EnumResult ex = exact_q_enum(t.s2, x, t.xi_set);
    CHECK(ad.value <= ex.value + 1e-6 * std::max(1.0, std::abs(ex.value)));
    if (std::abs(ad.value - ex.value) <= 1e-6 * std::max(1.0, std::abs(ex.value))) ++equal;
  }
  MESSAGE("AD matched the exact oracle on ", equal, " of ", n, " instances");
  CHECK(equal > n / 2);
}

TEST_CASE("AD fixed point: restarting from the incumbent moves at most delta") {
  for (uint64_t seed : {11, 12, 13}) {
    Tiny t(seed);
    Eigen::VectorXd x = t.mid_x();
    AdOptions opt;
    AdResult r1 = eval_q_ad(t.s2, x, t.xi_set, opt);
    REQUIRE(r1.converged);
    AdResult r2 = eval_q_ad(t.s2, x, t.xi_set, opt, nullptr, &r1.xi);
    CHECK(std::abs(r2.value - r1.value) <=
          10 * opt.delta_rel * std::max(1.0, std::abs(r1.value)));
  }
}

TEST_CASE("worst case returned by AD is a member of the set") {
  Tiny t(21);
  AdResult r = eval_q_ad(t.s2, t.mid_x(), t.xi_set);
  CHECK(t.xi_set.contains_xi(r.xi, 1e-8));
}

TEST_CASE("ccg with the enumeration oracle equals the all-vertex LP") {
  for (uint64_t seed : {31, 32, 33, 34, 35}) {
    Tiny t(seed);
    CcgOptions opt;
    opt.use_enum_oracle = true;
    opt.eps_rel = 1e-9;
    CcgResult r = solve_robust_ed(t.grid, t.obs, t.costs, t.s2, t.xi_set, opt);
    const double det = all_vertex_objective(t.grid, t.obs, t.costs, t.s2, t.xi_set);
    CHECK(r.converged);
    CHECK(r.ub == doctest::Approx(det).epsilon(1e-7));
    // master lower bounds never decrease
    for (size_t k = 1; k < r.lb_history.size(); ++k)
      CHECK(r.lb_history[k] >= r.lb_history[k - 1] - 1e-7 * (1.0 + std::abs(r.lb_history[k])));
  }
}

TEST_CASE("ccg with AD never beats the exact objective and usually matches") {
  int matched = 0;
  const int n = 40;
  for (int seed = 0; seed < n; ++seed) {
    Tiny t(500 + seed);
    CcgOptions exact;
    exact.use_enum_oracle = true;
    exact.eps_rel = 1e-9;
    const double det = all_vertex_objective(t.grid, t.obs, t.costs, t.s2, t.xi_set);
    CcgOptions heur;
    heur.eps_rel = 1e-7;
    CcgResult r = solve_robust_ed(t.grid, t.obs, t.costs, t.s2, t.xi_set, heur);
    // the heuristic upper bound cannot be better than the exact worst case
    // value of its own x, hence never below det minus tolerance
    CHECK(r.ub >= det - 1e-6 * std::max(1.0, std::abs(det)));
    AdWorkspace ws;
    EnumResult true_q = exact_q_enum(t.s2, r.x, t.xi_set);
    double cx = 0.0;
    Stage1Region s1 = build_first_stage(t.grid, t.obs, t.costs);
    for (int j = 0; j < s1.x_dim(); ++j) cx += s1.cost[j] * r.x[j];
    if (std::abs(cx + true_q.value - det) <= 1e-6 * std::max(1.0, det)) ++matched;
  }
  MESSAGE("CCG-with-AD reached the exact optimum on ", matched, " of ", n, " instances");
  CHECK(matched > n / 2);
}

TEST_CASE("zero-budget robust solve terminates immediately at the LA-ED value") {
  Tiny t(77);
  Eigen::MatrixXd fc_d = Eigen::MatrixXd::Constant(2, 1, 105.0);
  Eigen::MatrixXd fc_w = Eigen::MatrixXd::Constant(2, 1, 28.0);
  Polyhedron singleton = make_box_xi_set(fc_d, fc_d, fc_w, fc_w);
  CcgResult r = solve_robust_ed(t.grid, t.obs, t.costs, t.s2, singleton);
  CHECK(r.converged);
  CHECK(r.iterations == 1);
  DispatchSchedule la = solve_la_ed(t.grid, t.obs, t.costs, 3, fc_d, fc_w);
  CHECK(r.ub == doctest::Approx(la.objective).epsilon(1e-6));
  CHECK(r.lb == doctest::Approx(la.objective).epsilon(1e-6));
}

TEST_CASE("exit contract: converged implies the gap is closed") {
  for (uint64_t seed : {41, 42, 43, 44}) {
    Tiny t(seed);
    CcgOptions opt;
    CcgResult r = solve_robust_ed(t.grid, t.obs, t.costs, t.s2, t.xi_set, opt);
    if (r.converged)
      CHECK(r.ub - r.lb <= opt.eps_rel * std::max(1.0, std::abs(r.ub)) + 1e-9);
    CHECK(r.ub >= r.lb - 1e-6 * std::max(1.0, std::abs(r.ub)));
  }
}

TEST_CASE("trace log captures one row per iteration") {
  Tiny t(55);
  std::ostringstream trace;
  write_trace_header(trace);
  CcgOptions opt;
  opt.trace = &trace;
  CcgResult r = solve_robust_ed(t.grid, t.obs, t.costs, t.s2, t.xi_set, opt);
  int lines = -1;  // header
  std::string line;
  std::istringstream is(trace.str());
  while (std::getline(is, line)) ++lines;
  CHECK(lines == r.iterations);
}

TEST_CASE("vertex restart cannot worsen the AD value") {
  for (uint64_t seed : {61, 62, 63}) {
    Tiny t(seed);
    AdOptions plain;
    AdOptions restart;
    restart.vertex_restart = true;
    restart.restart_seed = seed;
    AdResult a = eval_q_ad(t.s2, t.mid_x(), t.xi_set, plain);
    AdResult b = eval_q_ad(t.s2, t.mid_x(), t.xi_set, restart);
    CHECK(b.value >= a.value - 1e-9);
  }
}

}  // TEST_SUITE
