// Two-stage robust dispatch: constraint-and-column generation on the master
// with an alternating-direction heuristic for the inner bilinear problem.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "roed/dispatch.hpp"
#include "roed/polyhedron.hpp"

namespace roed {

struct AdOptions {
  double delta_rel = 1e-6;   // stop when C' - C <= delta_rel * max(1, |C'|)
  int max_alternations = 100;
  bool vertex_restart = false;  // one extra run from a random vertex
  uint64_t restart_seed = 1;
};

struct AdResult {
  double value = 0.0;  // C', the estimate of Q(x)
  bool bounded = true;  // false: the dual ray certifies a recourse hole
  bool converged = false;
  int alternations = 0;
  Eigen::VectorXd xi;  // worst-case realization found
  Eigen::VectorXd pi;  // dual vertex
  std::vector<double> values;  // C, C', C, C', ... nondecreasing
};

// Bases kept across evaluations whose LP shapes are unchanged.
struct AdWorkspace {
  LpBasis pi_basis;
  LpBasis xi_basis;
};

AdResult eval_q_ad(const CompactStage2& s2, const Eigen::VectorXd& x,
                   const Polyhedron& xi_set, const AdOptions& opt = {},
                   AdWorkspace* ws = nullptr, const Eigen::VectorXd* xi_start = nullptr);

struct EnumResult {
  double value = 0.0;
  Eigen::VectorXd xi;
};

// Exact worst case by enumerating the set's vertices; each vertex costs one
// recourse LP. Requires an enumerable set.
EnumResult exact_q_enum(const CompactStage2& s2, const Eigen::VectorXd& x,
                        const Polyhedron& xi_set);

struct CcgOptions {
  double eps_rel = 1e-4;
  int max_iter = 50;
  bool use_enum_oracle = false;
  AdOptions ad;
  std::ostream* trace = nullptr;  // per-iteration CSV when set
};

struct CcgResult {
  Eigen::VectorXd x;        // first-stage decision at the best upper bound
  DispatchSchedule stage1;  // single implemented period
  double ub = kInf, lb = -kInf;
  int iterations = 0;
  bool converged = false;
  bool stalled = false;  // repeated worst case before the gap closed
  int total_alternations = 0;
  std::vector<double> lb_history;
  std::vector<Eigen::VectorXd> scenario_xis;
};

CcgResult solve_robust_ed(const Grid& grid, const Stage1Obs& obs, const DispatchCosts& costs,
                          const CompactStage2& s2, const Polyhedron& xi_set,
                          const CcgOptions& opt = {}, AdWorkspace* ws = nullptr);

// Deterministic equivalent with every vertex added upfront; oracle for the
// converged CCG objective on tiny sets.
double all_vertex_objective(const Grid& grid, const Stage1Obs& obs, const DispatchCosts& costs,
                            const CompactStage2& s2, const Polyhedron& xi_set);

void write_trace_header(std::ostream& os);

}  // namespace roed
