#include "roed/uncertainty.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace roed {

SetSpec::Kind variant_from_string(const std::string& s) {
  if (s == "dus") return SetSpec::Kind::kDus;
  if (s == "sus1") return SetSpec::Kind::kSus1;
  if (s == "sus2") return SetSpec::Kind::kSus2;
  throw std::runtime_error("unknown uncertainty variant: " + s);
}

const char* to_string(SetSpec::Kind k) {
  switch (k) {
    case SetSpec::Kind::kDus: return "dus";
    case SetSpec::Kind::kSus1: return "sus1";
    case SetSpec::Kind::kSus2: return "sus2";
  }
  return "?";
}

Polyhedron build_demand_set(const Eigen::MatrixXd& d_bar, const Eigen::MatrixXd& d_hat,
                            double gamma_d) {
  if (gamma_d < 0.0) throw std::runtime_error("demand set: negative budget");
  if (d_bar.rows() != d_hat.rows() || d_bar.cols() != d_hat.cols())
    throw std::runtime_error("demand set: dimension mismatch");
  const int P = static_cast<int>(d_bar.rows());
  const int nd = static_cast<int>(d_bar.cols());
  if (gamma_d > 0.0 && (d_hat.array() <= 0.0).any())
    throw std::runtime_error("demand set: deviations must be positive");

  Polyhedron s;
  s.periods = P;
  s.n_loads = nd;
  s.n_farms = 0;

  auto& c = s.cons;
  // demand variables first (these are the xi components), then the split
  // deviation variables
  for (int p = 0; p < P; ++p)
    for (int j = 0; j < nd; ++j) {
      const double w = gamma_d * d_hat(p, j);
      const int col = c.add_col(d_bar(p, j) - w, d_bar(p, j) + w);
      s.xi_vars.push_back(col);
      s.var_names.push_back("d[t" + std::to_string(p + 2) + "][" + std::to_string(j) + "]");
    }
  const int dev_base = c.num_cols();
  for (const char* tag : {"dp", "dm"})
    for (int p = 0; p < P; ++p)
      for (int j = 0; j < nd; ++j) {
        c.add_col(0.0, gamma_d * d_hat(p, j));
        s.var_names.push_back(std::string(tag) + "[t" + std::to_string(p + 2) + "][" +
                              std::to_string(j) + "]");
      }
  auto dvar = [&](int p, int j) { return p * nd + j; };
  auto dp = [&](int p, int j) { return dev_base + p * nd + j; };
  auto dm = [&](int p, int j) { return dev_base + P * nd + p * nd + j; };

  for (int p = 0; p < P; ++p) {
    for (int j = 0; j < nd; ++j) {
      const int r = c.add_row(d_bar(p, j), d_bar(p, j));  // d - dp + dm = d_bar
      c.add_entry(r, dvar(p, j), 1.0);
      c.add_entry(r, dp(p, j), -1.0);
      c.add_entry(r, dm(p, j), 1.0);
    }
    if (gamma_d > 0.0) {
      const int r = c.add_row(-kInf, gamma_d * std::sqrt(static_cast<double>(nd)));
      for (int j = 0; j < nd; ++j) {
        c.add_entry(r, dp(p, j), 1.0 / d_hat(p, j));
        c.add_entry(r, dm(p, j), 1.0 / d_hat(p, j));
      }
    }
  }

  s.seed_point = Eigen::VectorXd::Zero(s.dim());
  for (int p = 0; p < P; ++p)
    for (int j = 0; j < nd; ++j) s.seed_point[dvar(p, j)] = d_bar(p, j);

  if (gamma_d == 0.0) {
    s.vertices.emplace();
    s.vertices->push_back(s.xi_of(s.seed_point));
  }
  return s;
}

Polyhedron build_wind_trajectory_set(const SeasonalModel& seasonal, const VarModel& var,
                                     const Eigen::MatrixXd& recent_speeds, long t1,
                                     const SetSpec& spec,
                                     const std::vector<PowerCurvePWL>& curves,
                                     int horizon_T) {
  const int w = var.sites();
  if (seasonal.sites() != w || static_cast<int>(curves.size()) != w)
    throw std::runtime_error("wind set: model/curve dimension mismatch");
  if (horizon_T < 2) throw std::runtime_error("wind set: horizon must be at least 2");
  if (spec.gamma_w < 0.0) throw std::runtime_error("wind set: negative budget");
  const bool dynamic = spec.kind == SetSpec::Kind::kDus;
  const int lag = dynamic ? var.lag : 0;
  if (recent_speeds.rows() < std::max(lag, 1) || recent_speeds.cols() != w)
    throw std::runtime_error("wind set: missing realized history");

  const int P = horizon_T - 1;
  const double gw = spec.gamma_w;

  // realized residuals, newest last; row k is absolute period t1 - (rows-1) + k
  const int hrows = static_cast<int>(recent_speeds.rows());
  Eigen::MatrixXd resid_hist(hrows, w);
  for (int k = 0; k < hrows; ++k) {
    const long t = t1 - (hrows - 1) + k;
    resid_hist.row(k) = recent_speeds.row(k) - seasonal.eval_all(t).transpose();
  }
  const Eigen::VectorXd resid_now = resid_hist.row(hrows - 1).transpose();

  Eigen::MatrixXd b_eff = var.b_chol;
  if (spec.kind == SetSpec::Kind::kSus2)
    b_eff = var.sigma.diagonal().cwiseSqrt().asDiagonal();

  // nominal seasonal path over the horizon, persistence-adjusted for the
  // static variants
  Eigen::MatrixXd g_eff(P, w);
  for (int p = 0; p < P; ++p) {
    g_eff.row(p) = seasonal.eval_all(t1 + 1 + p).transpose();
    if (!dynamic) g_eff.row(p) += resid_now.transpose();
  }

  Polyhedron s;
  s.periods = P;
  s.n_farms = w;
  s.n_loads = 0;
  auto& c = s.cons;

  const int per = 5 * w;  // r, rt, up, um, pb per period
  auto rvar = [&](int p, int i) { return p * per + i; };
  auto rtvar = [&](int p, int i) { return p * per + w + i; };
  auto upvar = [&](int p, int i) { return p * per + 2 * w + i; };
  auto umvar = [&](int p, int i) { return p * per + 3 * w + i; };
  auto pbvar = [&](int p, int i) { return p * per + 4 * w + i; };

  for (int p = 0; p < P; ++p) {
    const std::string t = "[t" + std::to_string(p + 2) + "]";
    for (int i = 0; i < w; ++i) {
      c.add_col(0.0, kInf);
      s.var_names.push_back("r" + t + "[" + std::to_string(i) + "]");
    }
    for (int i = 0; i < w; ++i) {
      c.add_col(-kInf, kInf);
      s.var_names.push_back("rres" + t + "[" + std::to_string(i) + "]");
    }
    for (int i = 0; i < w; ++i) {
      c.add_col(0.0, gw);
      s.var_names.push_back("up" + t + "[" + std::to_string(i) + "]");
    }
    for (int i = 0; i < w; ++i) {
      c.add_col(0.0, gw);
      s.var_names.push_back("um" + t + "[" + std::to_string(i) + "]");
    }
    for (int i = 0; i < w; ++i) {
      const int col = c.add_col(0.0, kInf);  // zero power-curve piece
      s.xi_vars.push_back(col);
      s.var_names.push_back("pw_avail" + t + "[" + std::to_string(i) + "]");
    }
  }

  for (int p = 0; p < P; ++p) {
    // r = g + rres
    for (int i = 0; i < w; ++i) {
      const int r = c.add_row(g_eff(p, i), g_eff(p, i));
      c.add_entry(r, rvar(p, i), 1.0);
      c.add_entry(r, rtvar(p, i), -1.0);
    }
    // rres_t = sum_s A_s rres_{t-s} + B u_t, realized lags on the rhs
    for (int i = 0; i < w; ++i) {
      double hist = 0.0;
      for (int sgl = 1; sgl <= lag; ++sgl) {
        if (p - sgl < 0) {
          const int hrow = hrows - 1 + (p + 1 - sgl);  // period t1 + (p+1-s)
          if (hrow < 0) throw std::runtime_error("wind set: missing realized history");
          hist += var.a[sgl - 1].row(i).dot(resid_hist.row(hrow));
        }
      }
      const int r = c.add_row(hist, hist);
      c.add_entry(r, rtvar(p, i), 1.0);
      for (int sgl = 1; sgl <= lag; ++sgl)
        if (p - sgl >= 0)
          for (int i2 = 0; i2 < w; ++i2)
            c.add_entry(r, rtvar(p - sgl, i2), -var.a[sgl - 1](i, i2));
      for (int i2 = 0; i2 < w; ++i2) {
        c.add_entry(r, upvar(p, i2), -b_eff(i, i2));
        c.add_entry(r, umvar(p, i2), b_eff(i, i2));
      }
    }
    // per-period l1 budget and per-site caps
    {
      const int r = c.add_row(-kInf, gw * std::sqrt(static_cast<double>(w)));
      for (int i = 0; i < w; ++i) {
        c.add_entry(r, upvar(p, i), 1.0);
        c.add_entry(r, umvar(p, i), 1.0);
      }
    }
    for (int i = 0; i < w; ++i) {
      const int r = c.add_row(-kInf, gw);
      c.add_entry(r, upvar(p, i), 1.0);
      c.add_entry(r, umvar(p, i), 1.0);
    }
    // power curve support lines
    for (int i = 0; i < w; ++i)
      for (const auto& piece : curves[i].pieces) {
        if (piece.intercept == 0.0 && piece.slope == 0.0) continue;  // the bound
        const int r = c.add_row(piece.intercept, kInf);
        c.add_entry(r, pbvar(p, i), 1.0);
        c.add_entry(r, rvar(p, i), -piece.slope);
      }
  }

  if (spec.gamma_t) {
    const int r = c.add_row(-kInf, *spec.gamma_t * gw * std::sqrt(static_cast<double>(w)) *
                                       std::sqrt(static_cast<double>(P)));
    for (int p = 0; p < P; ++p)
      for (int i = 0; i < w; ++i) {
        c.add_entry(r, upvar(p, i), 1.0);
        c.add_entry(r, umvar(p, i), 1.0);
      }
  }

  // nominal seed: u = 0, residual mean propagation, envelope wind power
  Eigen::MatrixXd rt_nom;
  if (dynamic && lag > 0) {
    rt_nom = propagate_residual_mean(var, resid_hist, P);
  } else {
    rt_nom = Eigen::MatrixXd::Zero(P, w);
  }
  s.seed_point = Eigen::VectorXd::Zero(s.dim());
  for (int p = 0; p < P; ++p)
    for (int i = 0; i < w; ++i) {
      const double r = g_eff(p, i) + rt_nom(p, i);
      s.seed_point[rvar(p, i)] = r;
      s.seed_point[rtvar(p, i)] = rt_nom(p, i);
      s.seed_point[pbvar(p, i)] = curves[i].envelope(r);
    }

  if (s.max_violation(s.seed_point) > 1e-9) {
    // nominal path leaves the set (negative speeds); fall back to any
    // feasible point, or report emptiness
    LpSolution fix = lp_solve(c);
    if (fix.status != LpStatus::kOptimal)
      throw std::runtime_error("wind set: empty uncertainty set");
    Eigen::VectorXd full(s.dim());
    full = fix.x;
    s.seed_point = full;
  }
  return s;
}

Polyhedron make_box_xi_set(const Eigen::MatrixXd& d_lo, const Eigen::MatrixXd& d_hi,
                           const Eigen::MatrixXd& w_lo, const Eigen::MatrixXd& w_hi) {
  if (d_lo.rows() != w_lo.rows()) throw std::runtime_error("box set: period mismatch");
  Polyhedron s;
  s.periods = static_cast<int>(d_lo.rows());
  s.n_loads = static_cast<int>(d_lo.cols());
  s.n_farms = static_cast<int>(w_lo.cols());
  auto add_block = [&](const Eigen::MatrixXd& lo, const Eigen::MatrixXd& hi, const char* tag) {
    for (int p = 0; p < lo.rows(); ++p)
      for (int j = 0; j < lo.cols(); ++j) {
        const int col = s.cons.add_col(lo(p, j), hi(p, j));
        s.xi_vars.push_back(col);
        s.var_names.push_back(std::string(tag) + "[t" + std::to_string(p + 2) + "][" +
                              std::to_string(j) + "]");
      }
  };
  add_block(d_lo, d_hi, "d");
  add_block(w_lo, w_hi, "pw_avail");

  s.seed_point.resize(s.dim());
  for (int j = 0; j < s.dim(); ++j)
    s.seed_point[j] = 0.5 * (s.cons.col_lo[j] + s.cons.col_hi[j]);

  // enumerate corners while the count stays tiny
  std::vector<int> loose;
  for (int j = 0; j < s.dim(); ++j)
    if (s.cons.col_hi[j] > s.cons.col_lo[j]) loose.push_back(j);
  if (loose.size() <= 13) {  // 2^13 ~ 8k corners
    s.vertices.emplace();
    const int n = static_cast<int>(loose.size());
    for (int mask = 0; mask < (1 << n); ++mask) {
      Eigen::VectorXd v(s.dim());
      for (int j = 0; j < s.dim(); ++j) v[j] = s.cons.col_lo[j];
      for (int b = 0; b < n; ++b)
        if (mask & (1 << b)) v[loose[b]] = s.cons.col_hi[loose[b]];
      s.vertices->push_back(v);  // xi == full space here
    }
  }
  return s;
}

}  // namespace roed
