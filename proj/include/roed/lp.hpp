// Bounded-variable revised simplex with primal and dual values.
#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace roed {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class LpStatus { kOptimal, kInfeasible, kUnbounded, kIterLimit };

const char* to_string(LpStatus s);

// LP in row-activity form:
//   optimize c'x  subject to  row_lo <= A x <= row_hi,  col_lo <= x <= col_hi.
// Equality rows have row_lo == row_hi; one-sided rows use +-inf.
struct LpProblem {
  bool maximize = false;
  std::vector<double> obj;
  std::vector<double> col_lo, col_hi;
  std::vector<double> row_lo, row_hi;
  std::vector<Eigen::Triplet<double>> entries;

  int num_cols() const { return static_cast<int>(obj.size()); }
  int num_rows() const { return static_cast<int>(row_lo.size()); }

  int add_col(double lo, double hi, double cost = 0.0) {
    col_lo.push_back(lo);
    col_hi.push_back(hi);
    obj.push_back(cost);
    return num_cols() - 1;
  }
  int add_row(double lo, double hi) {
    row_lo.push_back(lo);
    row_hi.push_back(hi);
    return num_rows() - 1;
  }
  int add_row(double lo, std::span<const std::pair<int, double>> terms, double hi) {
    const int r = add_row(lo, hi);
    for (const auto& [c, v] : terms) add_entry(r, c, v);
    return r;
  }
  void add_entry(int row, int col, double v) {
    if (v != 0.0) entries.emplace_back(row, col, v);
  }
};

// Simplex basis snapshot. Column order is structurals 0..n-1 followed by one
// logical per row. Usable to warm start a later solve with the same shape.
struct LpBasis {
  enum State : uint8_t { kAtLower = 0, kAtUpper = 1, kBasic = 2, kFree = 3 };
  std::vector<uint8_t> state;  // size n + m
  std::vector<int> basic;      // size m, column index of each basic slot
  bool empty() const { return basic.empty(); }
};

struct LpSolution {
  LpStatus status = LpStatus::kIterLimit;
  double objective = 0.0;
  Eigen::VectorXd x;             // structural values
  Eigen::VectorXd row_activity;  // A x
  Eigen::VectorXd row_dual;      // marginal objective change per unit of row rhs
  Eigen::VectorXd reduced_cost;
  int iterations = 0;
  double primal_residual = 0.0;  // worst bound/row violation at the returned point
  double dual_residual = 0.0;    // worst sign violation among reduced costs
  LpBasis basis;

  bool optimal() const { return status == LpStatus::kOptimal; }
};

struct LpOptions {
  double feas_tol = 1e-9;
  double opt_tol = 1e-9;
  double pivot_tol = 1e-9;
  int max_iters = 0;  // 0: scaled with problem size
  int refactor_every = 64;
};

// Deterministic for identical (problem, warm, options) input. An invalid or
// mismatched warm basis is ignored.
LpSolution lp_solve(const LpProblem& problem, const LpBasis* warm = nullptr,
                    const LpOptions& options = {});

}  // namespace roed
