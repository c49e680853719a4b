// Constraint-matrix representation of uncertainty sets.
#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "roed/lp.hpp"

namespace roed {

// A polyhedral uncertainty set over named internal variables. The uncertain
// vector xi = (d, p_bar^w) is a selection of internal columns given by
// xi_vars; auxiliary columns (residuals, split error terms) keep the dynamics
// and the l1 budgets linear. xi ordering is period-major: all demand entries
// for t = 2..T, then all available-wind entries for t = 2..T.
struct Polyhedron {
  LpProblem cons;  // bounds and rows; the objective member is unused
  std::vector<std::string> var_names;
  std::vector<int> xi_vars;
  int periods = 0;  // second-stage periods (T - 1)
  int n_loads = 0, n_farms = 0;
  Eigen::VectorXd seed_point;  // feasible full-space point at the nominal path
  std::optional<std::vector<Eigen::VectorXd>> vertices;  // xi space, tiny sets only

  int xi_dim() const { return static_cast<int>(xi_vars.size()); }
  int dim() const { return cons.num_cols(); }

  Eigen::VectorXd xi_of(const Eigen::VectorXd& full) const;
  Eigen::VectorXd seed_xi() const { return xi_of(seed_point); }

  // worst bound/row violation of a full-space point
  double max_violation(const Eigen::VectorXd& full) const;
  // membership of a xi value, decided by a feasibility LP over the auxiliaries
  bool contains_xi(const Eigen::VectorXd& xi, double tol = 1e-7) const;

  // maximize xi_obj' xi over the set (full-space solution returned)
  LpSolution maximize_xi(const Eigen::VectorXd& xi_obj, const LpBasis* warm = nullptr) const;

  // plain-text LP-style listing for inspection
  void write_listing(std::ostream& os) const;
};

// Cartesian product with disjoint variable blocks; demand block first, so the
// combined xi keeps the global (d, p_bar^w) ordering.
Polyhedron product_set(const Polyhedron& demand, const Polyhedron& wind);

}  // namespace roed
