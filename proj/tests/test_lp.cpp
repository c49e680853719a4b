#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <vector>

#include "roed/lp.hpp"

using namespace roed;

namespace {

// Brute-force oracle for tiny box-bounded LPs: enumerate all candidate
// vertices as intersections of d active constraints (rows or bounds taken at
// either end), keep feasible ones, return the best objective.
struct TinyLp {
  Eigen::MatrixXd a;  // rows x d
  Eigen::VectorXd row_lo, row_hi;
  Eigen::VectorXd col_lo, col_hi;
  Eigen::VectorXd c;
};

bool tiny_feasible(const TinyLp& p, const Eigen::VectorXd& x, double tol = 1e-7) {
  for (int j = 0; j < x.size(); ++j)
    if (x[j] < p.col_lo[j] - tol || x[j] > p.col_hi[j] + tol) return false;
  Eigen::VectorXd act = p.a * x;
  for (int i = 0; i < act.size(); ++i)
    if (act[i] < p.row_lo[i] - tol || act[i] > p.row_hi[i] + tol) return false;
  return true;
}

bool tiny_enumerate(const TinyLp& p, double* best) {
  const int d = static_cast<int>(p.c.size());
  const int nr = static_cast<int>(p.row_lo.size());
  const int total = nr + d;  // rows then coordinate bounds
  std::vector<int> idx(d, 0);
  bool found = false;
  // choose d constraints and a side for each
  std::vector<int> comb(d);
  std::function<void(int, int)> rec = [&](int start, int k) {
    if (k == d) {
      for (int mask = 0; mask < (1 << d); ++mask) {
        Eigen::MatrixXd m(d, d);
        Eigen::VectorXd rhs(d);
        for (int q = 0; q < d; ++q) {
          const int ci = comb[q];
          const bool up = mask & (1 << q);
          if (ci < nr) {
            m.row(q) = p.a.row(ci);
            rhs[q] = up ? p.row_hi[ci] : p.row_lo[ci];
          } else {
            m.row(q).setZero();
            m(q, ci - nr) = 1.0;
            rhs[q] = up ? p.col_hi[ci - nr] : p.col_lo[ci - nr];
          }
          if (!std::isfinite(rhs[q])) goto next_mask;
        }
        {
          Eigen::FullPivLU<Eigen::MatrixXd> lu(m);
          if (!lu.isInvertible()) goto next_mask;
          Eigen::VectorXd x = lu.solve(rhs);
          if (tiny_feasible(p, x)) {
            const double v = p.c.dot(x);
            if (!found || v < *best) *best = v;
            found = true;
          }
        }
      next_mask:;
      }
      return;
    }
    for (int i = start; i <= total - (d - k); ++i) {
      comb[k] = i;
      rec(i + 1, k + 1);
    }
  };
  rec(0, 0);
  return found;
}

LpProblem to_problem(const TinyLp& p) {
  LpProblem lp;
  for (int j = 0; j < p.c.size(); ++j) lp.add_col(p.col_lo[j], p.col_hi[j], p.c[j]);
  for (int i = 0; i < p.row_lo.size(); ++i) {
    lp.add_row(p.row_lo[i], p.row_hi[i]);
    for (int j = 0; j < p.c.size(); ++j) lp.add_entry(i, j, p.a(i, j));
  }
  return lp;
}

}  // namespace

TEST_SUITE("lp") {

TEST_CASE("max x subject to x <= 3") {
  LpProblem p;
  p.maximize = true;
  p.add_col(-kInf, kInf, 1.0);
  p.add_row(-kInf, 3.0);
  p.add_entry(0, 0, 1.0);
  auto s = lp_solve(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(3.0));
  CHECK(s.x[0] == doctest::Approx(3.0));
  CHECK(s.row_dual[0] == doctest::Approx(1.0));
}

TEST_CASE("contradictory bounds give infeasible status") {
  LpProblem p;
  p.add_col(0.0, kInf, 1.0);
  p.add_row(5.0, kInf);
  p.add_entry(0, 0, 1.0);
  p.add_row(-kInf, 3.0);
  p.add_entry(1, 0, 1.0);
  auto s = lp_solve(p);
  CHECK(s.status == LpStatus::kInfeasible);

  LpProblem q;
  q.add_col(4.0, 2.0, 1.0);  // crossed column bounds
  auto sq = lp_solve(q);
  CHECK(sq.status == LpStatus::kInfeasible);
}

TEST_CASE("unbounded detection") {
  LpProblem p;
  p.add_col(0.0, kInf, -1.0);
  auto s = lp_solve(p);
  CHECK(s.status == LpStatus::kUnbounded);
}

TEST_CASE("equality rows and free variables") {
  // min x + 2y  s.t.  x + y = 4,  x - y = 0  => x = y = 2
  LpProblem p;
  p.add_col(-kInf, kInf, 1.0);
  p.add_col(-kInf, kInf, 2.0);
  p.add_row(4.0, 4.0);
  p.add_entry(0, 0, 1.0);
  p.add_entry(0, 1, 1.0);
  p.add_row(0.0, 0.0);
  p.add_entry(1, 0, 1.0);
  p.add_entry(1, 1, -1.0);
  auto s = lp_solve(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(6.0));
  CHECK(s.x[0] == doctest::Approx(2.0));
  CHECK(s.x[1] == doctest::Approx(2.0));
}

TEST_CASE("degenerate tie keeps objective unique") {
  // Two optimal vertices share the objective value.
  LpProblem p;
  p.add_col(0.0, 1.0, 1.0);
  p.add_col(0.0, 1.0, 1.0);
  p.add_row(1.0, kInf);
  p.add_entry(0, 0, 1.0);
  p.add_entry(0, 1, 1.0);
  auto s = lp_solve(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(1.0));
}

TEST_CASE("range rows") {
  // min -x  s.t.  1 <= x + y <= 2, 0 <= x,y <= 5
  LpProblem p;
  p.add_col(0.0, 5.0, -1.0);
  p.add_col(0.0, 5.0, 0.0);
  p.add_row(1.0, 2.0);
  p.add_entry(0, 0, 1.0);
  p.add_entry(0, 1, 1.0);
  auto s = lp_solve(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.x[0] == doctest::Approx(2.0));
}

TEST_CASE("duals price an active equality") {
  // min 2x + 3y  s.t.  x + y = 10, x <= 6, y <= 6
  LpProblem p;
  p.add_col(0.0, 6.0, 2.0);
  p.add_col(0.0, 6.0, 3.0);
  p.add_row(10.0, 10.0);
  p.add_entry(0, 0, 1.0);
  p.add_entry(0, 1, 1.0);
  auto s = lp_solve(p);
  REQUIRE(s.status == LpStatus::kOptimal);
  CHECK(s.objective == doctest::Approx(24.0));
  // marginal unit of demand is served by y at cost 3
  CHECK(s.row_dual[0] == doctest::Approx(3.0));
}

TEST_CASE("random tiny LPs match vertex enumeration") {
  std::mt19937_64 rng(20240517);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  std::uniform_int_distribution<int> dims(2, 3);
  std::uniform_int_distribution<int> rows(1, 5);
  int solved = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const int d = dims(rng);
    const int nr = rows(rng);
    TinyLp t;
    t.a.resize(nr, d);
    for (int i = 0; i < nr; ++i)
      for (int j = 0; j < d; ++j) t.a(i, j) = coef(rng);
    t.row_lo.resize(nr);
    t.row_hi.resize(nr);
    for (int i = 0; i < nr; ++i) {
      double v1 = coef(rng), v2 = coef(rng);
      t.row_lo[i] = std::min(v1, v2) - 0.2;
      t.row_hi[i] = std::max(v1, v2);
      if (trial % 3 == 0) t.row_lo[i] = -kInf;  // mix in one-sided rows
    }
    t.col_lo = Eigen::VectorXd::Constant(d, -3.0);
    t.col_hi = Eigen::VectorXd::Constant(d, 3.0);
    t.c.resize(d);
    for (int j = 0; j < d; ++j) t.c[j] = coef(rng);

    double best = 0.0;
    const bool feas = tiny_enumerate(t, &best);
    auto s = lp_solve(to_problem(t));
    if (feas) {
      REQUIRE_MESSAGE(s.status == LpStatus::kOptimal, "trial ", trial);
      CHECK_MESSAGE(s.objective == doctest::Approx(best).epsilon(1e-6), "trial ", trial);
      CHECK(s.primal_residual < 1e-6);
      CHECK(s.dual_residual < 1e-5);
      ++solved;
    } else {
      CHECK_MESSAGE(s.status == LpStatus::kInfeasible, "trial ", trial);
      ++infeasible;
    }
  }
  CHECK(solved > 100);
  CHECK(infeasible > 10);
}

TEST_CASE("warm start accepts a prior basis and agrees with cold") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  LpProblem p;
  const int d = 20, nr = 12;
  for (int j = 0; j < d; ++j) p.add_col(0.0, 10.0, coef(rng));
  for (int i = 0; i < nr; ++i) {
    p.add_row(-5.0, 5.0);
    for (int j = 0; j < d; ++j)
      if ((i + j) % 3 == 0) p.add_entry(i, j, coef(rng));
  }
  auto cold = lp_solve(p);
  REQUIRE(cold.status == LpStatus::kOptimal);

  // new objective, warm from the previous basis
  for (int j = 0; j < d; ++j) p.obj[j] = coef(rng);
  auto cold2 = lp_solve(p);
  auto warm2 = lp_solve(p, &cold.basis);
  REQUIRE(cold2.status == LpStatus::kOptimal);
  REQUIRE(warm2.status == LpStatus::kOptimal);
  CHECK(warm2.objective == doctest::Approx(cold2.objective).epsilon(1e-9));
  CHECK(warm2.iterations <= cold2.iterations);
}

TEST_CASE("determinism: identical input gives identical output") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coef(-1.0, 1.0);
  LpProblem p;
  for (int j = 0; j < 15; ++j) p.add_col(-2.0, 2.0, coef(rng));
  for (int i = 0; i < 10; ++i) {
    p.add_row(-1.0, 1.5);
    for (int j = 0; j < 15; ++j) p.add_entry(i, j, coef(rng));
  }
  auto s1 = lp_solve(p);
  auto s2 = lp_solve(p);
  REQUIRE(s1.status == LpStatus::kOptimal);
  REQUIRE(s2.status == LpStatus::kOptimal);
  CHECK(s1.objective == s2.objective);
  CHECK((s1.x - s2.x).cwiseAbs().maxCoeff() == 0.0);
  CHECK(s1.iterations == s2.iterations);
}

}  // TEST_SUITE
