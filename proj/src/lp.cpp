#include "roed/lp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace roed {

const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::kOptimal: return "optimal";
    case LpStatus::kInfeasible: return "infeasible";
    case LpStatus::kUnbounded: return "unbounded";
    case LpStatus::kIterLimit: return "iter_limit";
  }
  return "?";
}

namespace {

struct NumericalTrouble {};

// Revised simplex over the computational form
//   minimize c'x_s  s.t.  [A | -I] (x_s, w) = 0,  bounds on x_s and w,
// where the logical w of each row equals the row activity. The basis inverse
// is kept as a sparse LU of B plus a list of product-form eta updates.
class Simplex {
 public:
  Simplex(const LpProblem& p, const LpOptions& opt) : opt_(opt) {
    n_ = p.num_cols();
    m_ = p.num_rows();
    N_ = n_ + m_;
    A_.resize(m_, n_);
    A_.setFromTriplets(p.entries.begin(), p.entries.end());
    A_.makeCompressed();

    lo_.resize(N_);
    hi_.resize(N_);
    cost_.assign(N_, 0.0);
    const double sign = p.maximize ? -1.0 : 1.0;
    for (int j = 0; j < n_; ++j) {
      lo_[j] = p.col_lo[j];
      hi_[j] = p.col_hi[j];
      cost_[j] = sign * p.obj[j];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[n_ + i] = p.row_lo[i];
      hi_[n_ + i] = p.row_hi[i];
    }
    cmax_ = 1.0;
    for (int j = 0; j < n_; ++j) cmax_ = std::max(cmax_, std::abs(cost_[j]));
    if (opt_.max_iters <= 0) opt_.max_iters = 5000 + 20 * (N_);
  }

  LpStatus run(const LpBasis* warm) {
    if (!bounds_consistent()) return LpStatus::kInfeasible;
    for (int attempt = 0; attempt < 2; ++attempt) {
      if (attempt == 0) {
        if (!init_basis(warm)) continue;
      } else {
        if (!init_basis(nullptr)) return LpStatus::kIterLimit;
      }
      try {
        return iterate();
      } catch (const NumericalTrouble&) {
        // fall through to a cold restart
      }
    }
    return LpStatus::kIterLimit;
  }

  // --- result extraction -------------------------------------------------

  Eigen::VectorXd structural_x() const { return x_.head(n_); }
  Eigen::VectorXd row_activity() const { return x_.tail(m_); }
  int iterations() const { return iterations_; }

  Eigen::VectorXd duals() {
    Eigen::VectorXd cb(m_);
    for (int k = 0; k < m_; ++k) cb[k] = cost_[basic_[k]];
    btran(cb);
    return cb;
  }

  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& y) const {
    Eigen::VectorXd d(n_);
    for (int j = 0; j < n_; ++j) d[j] = cost_[j] - col_dot(j, y);
    return d;
  }

  LpBasis basis() const {
    LpBasis b;
    b.state = state_;
    b.basic = basic_;
    return b;
  }

  double primal_residual() const {
    double v = 0.0;
    for (int j = 0; j < N_; ++j) {
      v = std::max(v, lo_[j] - x_[j]);
      v = std::max(v, x_[j] - hi_[j]);
    }
    // row equations A x - w = 0
    if (m_ > 0) {
      Eigen::VectorXd r = A_ * x_.head(n_) - x_.tail(m_);
      v = std::max(v, r.cwiseAbs().maxCoeff());
    }
    return std::max(v, 0.0);
  }

  double dual_residual() {
    Eigen::VectorXd y = duals();
    double v = 0.0;
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == LpBasis::kBasic) continue;
      const double d = cost_[j] - col_dot(j, y);
      if (state_[j] == LpBasis::kAtLower) v = std::max(v, -d);
      else if (state_[j] == LpBasis::kAtUpper) v = std::max(v, d);
      else v = std::max(v, std::abs(d));
    }
    return v;
  }

 private:
  // --- data ---------------------------------------------------------------
  LpOptions opt_;
  int n_ = 0, m_ = 0, N_ = 0;
  Eigen::SparseMatrix<double> A_;
  std::vector<double> lo_, hi_, cost_;
  double cmax_ = 1.0;

  std::vector<uint8_t> state_;
  std::vector<int> basic_;
  Eigen::VectorXd x_;

  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu_;
  std::vector<std::pair<int, Eigen::VectorXd>> etas_;

  int iterations_ = 0;
  bool bland_ = false;
  int degen_run_ = 0;

  // --- helpers ------------------------------------------------------------

  bool bounds_consistent() const {
    for (int j = 0; j < N_; ++j)
      if (lo_[j] > hi_[j] + 1e-12 * (1.0 + std::abs(lo_[j]))) return false;
    return true;
  }

  double col_dot(int j, const Eigen::VectorXd& y) const {
    if (j >= n_) return -y[j - n_];
    double s = 0.0;
    for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
      s += it.value() * y[it.row()];
    return s;
  }

  void scatter_col(int j, double mult, Eigen::VectorXd& v) const {
    if (j >= n_) {
      v[j - n_] -= mult;
      return;
    }
    for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
      v[it.row()] += mult * it.value();
  }

  void ftran(Eigen::VectorXd& v) const {
    if (m_ == 0) return;
    Eigen::VectorXd t = lu_.solve(v);
    v.swap(t);
    for (const auto& [r, a] : etas_) {
      const double s = v[r] / a[r];
      if (s != 0.0) {
        v -= s * a;
        v[r] = s;
      } else {
        v[r] = 0.0;
      }
    }
  }

  void btran(Eigen::VectorXd& v) {
    if (m_ == 0) return;
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) {
      const auto& [r, a] = *it;
      v[r] = (v[r] - (a.dot(v) - a[r] * v[r])) / a[r];
    }
    Eigen::VectorXd t = lu_.adjoint().solve(v);
    v.swap(t);
  }

  bool factorize() {
    if (m_ == 0) {
      etas_.clear();
      return true;
    }
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < m_; ++k) {
      const int j = basic_[k];
      if (j >= n_) {
        trips.emplace_back(j - n_, k, -1.0);
      } else {
        for (Eigen::SparseMatrix<double>::InnerIterator it(A_, j); it; ++it)
          trips.emplace_back(it.row(), k, it.value());
      }
    }
    Eigen::SparseMatrix<double> B(m_, m_);
    B.setFromTriplets(trips.begin(), trips.end());
    B.makeCompressed();
    lu_.compute(B);
    etas_.clear();
    return lu_.info() == Eigen::Success;
  }

  void recompute_basics() {
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(m_);
    for (int j = 0; j < N_; ++j) {
      if (state_[j] == LpBasis::kBasic) continue;
      x_[j] = nonbasic_value(j);
      if (x_[j] != 0.0) scatter_col(j, -x_[j], rhs);
    }
    ftran(rhs);
    for (int k = 0; k < m_; ++k) x_[basic_[k]] = rhs[k];
  }

  double nonbasic_value(int j) const {
    switch (state_[j]) {
      case LpBasis::kAtLower: return lo_[j];
      case LpBasis::kAtUpper: return hi_[j];
      default: return 0.0;
    }
  }

  bool init_basis(const LpBasis* warm) {
    state_.assign(N_, LpBasis::kAtLower);
    basic_.resize(m_);
    x_ = Eigen::VectorXd::Zero(N_);
    bool used_warm = false;
    if (warm && !warm->empty() && static_cast<int>(warm->state.size()) == N_ &&
        static_cast<int>(warm->basic.size()) == m_) {
      int nb = 0;
      bool coherent = true;
      for (int k = 0; k < m_; ++k) {
        const int j = warm->basic[k];
        if (j < 0 || j >= N_ || warm->state[j] != LpBasis::kBasic) {
          coherent = false;
          break;
        }
      }
      for (int j = 0; j < N_; ++j) nb += warm->state[j] == LpBasis::kBasic;
      if (coherent && nb == m_) {
        state_ = warm->state;
        basic_ = warm->basic;
        used_warm = true;
      }
    }
    if (!used_warm) {
      for (int i = 0; i < m_; ++i) {
        basic_[i] = n_ + i;
        state_[n_ + i] = LpBasis::kBasic;
      }
      for (int j = 0; j < n_; ++j) {
        if (lo_[j] > -kInf) state_[j] = LpBasis::kAtLower;
        else if (hi_[j] < kInf) state_[j] = LpBasis::kAtUpper;
        else state_[j] = LpBasis::kFree;
      }
    } else {
      for (int j = 0; j < N_; ++j) {
        if (state_[j] == LpBasis::kBasic) continue;
        if (state_[j] == LpBasis::kAtLower && lo_[j] <= -kInf)
          state_[j] = hi_[j] < kInf ? LpBasis::kAtUpper : LpBasis::kFree;
        if (state_[j] == LpBasis::kAtUpper && hi_[j] >= kInf)
          state_[j] = lo_[j] > -kInf ? LpBasis::kAtLower : LpBasis::kFree;
      }
    }
    if (!factorize()) {
      if (used_warm) return false;  // retry cold
      throw NumericalTrouble{};     // identity basis cannot fail
    }
    recompute_basics();
    return true;
  }

  double infeas(int j) const {
    const double tol = opt_.feas_tol * (1.0 + std::abs(x_[j]));
    if (x_[j] < lo_[j] - tol) return lo_[j] - x_[j];
    if (x_[j] > hi_[j] + tol) return x_[j] - hi_[j];
    return 0.0;
  }

  LpStatus iterate() {
    int resumes = 0;
    int since_refactor = 0;
    while (true) {
      if (iterations_ > opt_.max_iters) return LpStatus::kIterLimit;
      if (since_refactor >= opt_.refactor_every ||
          static_cast<int>(etas_.size()) >= opt_.refactor_every) {
        if (!factorize()) throw NumericalTrouble{};
        recompute_basics();
        since_refactor = 0;
      }

      // phase detection and pricing vector
      bool infeasible_basis = false;
      Eigen::VectorXd cb = Eigen::VectorXd::Zero(m_);
      for (int k = 0; k < m_; ++k) {
        const int j = basic_[k];
        if (infeas(j) > 0.0) {
          infeasible_basis = true;
          cb[k] = x_[j] > hi_[j] ? 1.0 : -1.0;
        } else if (cost_[j] != 0.0) {
          cb[k] = cost_[j];
        }
      }
      if (infeasible_basis) {
        // phase-1 pricing replaces the objective entirely
        for (int k = 0; k < m_; ++k) {
          const int j = basic_[k];
          cb[k] = infeas(j) > 0.0 ? (x_[j] > hi_[j] ? 1.0 : -1.0) : 0.0;
        }
      }
      btran(cb);  // cb becomes y

      const double dtol = opt_.opt_tol * (infeasible_basis ? 1.0 : cmax_);
      int enter = -1;
      int dir = 0;
      double best = dtol;
      for (int j = 0; j < N_; ++j) {
        const uint8_t st = state_[j];
        if (st == LpBasis::kBasic) continue;
        if (hi_[j] - lo_[j] <= 0.0) continue;  // fixed
        const double base = infeasible_basis ? 0.0 : cost_[j];
        const double d = base - col_dot(j, cb);
        double score = 0.0;
        int cand_dir = 0;
        if (st == LpBasis::kAtLower && d < -dtol) {
          score = -d;
          cand_dir = +1;
        } else if (st == LpBasis::kAtUpper && d > dtol) {
          score = d;
          cand_dir = -1;
        } else if (st == LpBasis::kFree && std::abs(d) > dtol) {
          score = std::abs(d);
          cand_dir = d < 0 ? +1 : -1;
        }
        if (cand_dir != 0) {
          if (bland_) {
            enter = j;
            dir = cand_dir;
            break;
          }
          if (score > best) {
            best = score;
            enter = j;
            dir = cand_dir;
          }
        }
      }

      if (enter < 0) {
        if (infeasible_basis) return LpStatus::kInfeasible;
        // fresh factorization before declaring victory
        if (!etas_.empty() || since_refactor > 0) {
          if (!factorize()) throw NumericalTrouble{};
          recompute_basics();
          since_refactor = 0;
          if (resumes++ < 3) continue;
        }
        return LpStatus::kOptimal;
      }

      // ratio test
      Eigen::VectorXd alpha = Eigen::VectorXd::Zero(m_);
      scatter_col(enter, 1.0, alpha);
      ftran(alpha);

      int leave_k = -1;
      double theta = kInf;
      double leave_abs = 0.0;
      uint8_t leave_state = LpBasis::kAtLower;
      for (int k = 0; k < m_; ++k) {
        const double a = alpha[k];
        if (std::abs(a) <= opt_.pivot_tol) continue;
        const int b = basic_[k];
        const double g = -dir * a;  // rate of change of x_[b] per unit step
        bool blocks = false;
        double cand = 0.0;
        uint8_t hit = LpBasis::kAtLower;
        const double ftol = opt_.feas_tol * (1.0 + std::abs(x_[b]));
        if (g > 0.0) {
          if (infeasible_basis && x_[b] < lo_[b] - ftol) {
            blocks = true;
            cand = (lo_[b] - x_[b]) / g;
            hit = LpBasis::kAtLower;
          } else if (x_[b] <= hi_[b] + ftol && hi_[b] < kInf) {
            blocks = true;
            cand = (hi_[b] - x_[b]) / g;
            hit = LpBasis::kAtUpper;
          }
        } else {
          if (infeasible_basis && x_[b] > hi_[b] + ftol) {
            blocks = true;
            cand = (x_[b] - hi_[b]) / (-g);
            hit = LpBasis::kAtUpper;
          } else if (x_[b] >= lo_[b] - ftol && lo_[b] > -kInf) {
            blocks = true;
            cand = (x_[b] - lo_[b]) / (-g);
            hit = LpBasis::kAtLower;
          }
        }
        if (!blocks) continue;
        cand = std::max(cand, 0.0);
        const bool better =
            leave_k < 0 || cand < theta - 1e-10 ||
            (cand < theta + 1e-10 &&
             (bland_ ? b < basic_[leave_k] : std::abs(a) > leave_abs));
        if (better) {
          theta = cand;
          leave_k = k;
          leave_abs = std::abs(a);
          leave_state = hit;
        }
      }

      const double range = hi_[enter] - lo_[enter];
      const bool flip = range < theta;
      if (flip) theta = range;

      if (leave_k < 0 && !(range < kInf)) {
        if (infeasible_basis) throw NumericalTrouble{};
        return LpStatus::kUnbounded;
      }

      if (theta > 0.0) {
        x_[enter] += dir * theta;
        for (int k = 0; k < m_; ++k) {
          if (alpha[k] != 0.0) x_[basic_[k]] -= dir * theta * alpha[k];
        }
      }
      ++iterations_;
      if (theta <= 1e-11) {
        if (++degen_run_ > 200) bland_ = true;
      } else {
        degen_run_ = 0;
        if (theta > 1e-9) bland_ = false;
      }

      if (flip) {
        state_[enter] = dir > 0 ? LpBasis::kAtUpper : LpBasis::kAtLower;
        x_[enter] = dir > 0 ? hi_[enter] : lo_[enter];
        continue;
      }

      const int leaving = basic_[leave_k];
      x_[leaving] = leave_state == LpBasis::kAtUpper ? hi_[leaving] : lo_[leaving];
      state_[leaving] = leave_state;
      basic_[leave_k] = enter;
      state_[enter] = LpBasis::kBasic;
      etas_.emplace_back(leave_k, std::move(alpha));
      ++since_refactor;
    }
  }
};

}  // namespace

LpSolution lp_solve(const LpProblem& p, const LpBasis* warm, const LpOptions& options) {
  if (p.col_lo.size() != p.obj.size() || p.col_hi.size() != p.obj.size() ||
      p.row_lo.size() != p.row_hi.size()) {
    throw std::invalid_argument("lp_solve: inconsistent problem dimensions");
  }
  for (const auto& t : p.entries) {
    if (!std::isfinite(t.value())) throw std::invalid_argument("lp_solve: non-finite coefficient");
    if (t.row() < 0 || t.row() >= p.num_rows() || t.col() < 0 || t.col() >= p.num_cols())
      throw std::invalid_argument("lp_solve: entry out of range");
  }
  for (double c : p.obj)
    if (!std::isfinite(c)) throw std::invalid_argument("lp_solve: non-finite objective");

  Simplex s(p, options);
  LpSolution out;
  out.status = s.run(warm);
  out.iterations = s.iterations();
  if (out.status == LpStatus::kOptimal) {
    out.x = s.structural_x();
    out.row_activity = s.row_activity();
    Eigen::VectorXd y = s.duals();
    Eigen::VectorXd d = s.reduced_costs(y);
    const double sign = p.maximize ? -1.0 : 1.0;
    out.row_dual = sign * y;
    out.reduced_cost = sign * d;
    out.objective = 0.0;
    for (int j = 0; j < p.num_cols(); ++j) out.objective += p.obj[j] * out.x[j];
    out.primal_residual = s.primal_residual();
    out.dual_residual = s.dual_residual();
    out.basis = s.basis();
  }
  return out;
}

}  // namespace roed
