#include "roed/wind_stats.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <stdexcept>

namespace roed {

using nlohmann::json;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Eigen::RowVectorXd harmonic_row(const std::vector<double>& periods, long t) {
  Eigen::RowVectorXd r(1 + 2 * periods.size());
  r[0] = 1.0;
  for (size_t h = 0; h < periods.size(); ++h) {
    const double w = kTwoPi * static_cast<double>(t) / periods[h];
    r[1 + 2 * h] = std::cos(w);
    r[2 + 2 * h] = std::sin(w);
  }
  return r;
}

}  // namespace

double SeasonalModel::eval(int site, long t) const {
  return harmonic_row(harmonic_periods, t).dot(coef.row(site));
}

Eigen::VectorXd SeasonalModel::eval_all(long t) const {
  return coef * harmonic_row(harmonic_periods, t).transpose();
}

SeasonalModel fit_seasonal(const WindSeries& series, const std::vector<double>& periods) {
  const int n = series.length();
  const int p = 1 + 2 * static_cast<int>(periods.size());
  if (n < 2 * p)
    throw std::runtime_error("fit_seasonal: series too short for the harmonic design");

  Eigen::MatrixXd design(n, p);
  for (int k = 0; k < n; ++k)
    design.row(k) = harmonic_row(periods, series.start_index + k);

  SeasonalModel m;
  m.harmonic_periods = periods;
  m.coef.resize(series.sites(), p);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) throw std::runtime_error("fit_seasonal: rank-deficient design");
  for (int s = 0; s < series.sites(); ++s)
    m.coef.row(s) = qr.solve(series.speeds.col(s)).transpose();
  return m;
}

Eigen::MatrixXd seasonal_residuals(const WindSeries& series, const SeasonalModel& m) {
  Eigen::MatrixXd r(series.length(), series.sites());
  for (int k = 0; k < series.length(); ++k)
    r.row(k) = series.speeds.row(k) - m.eval_all(series.start_index + k).transpose();
  return r;
}

Eigen::MatrixXd cholesky_psd(const Eigen::MatrixXd& sigma) {
  if (sigma.rows() != sigma.cols()) throw std::runtime_error("cholesky_psd: not square");
  if ((sigma - sigma.transpose()).cwiseAbs().maxCoeff() >
      1e-8 * (1.0 + sigma.cwiseAbs().maxCoeff()))
    throw std::runtime_error("cholesky_psd: not symmetric");

  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() == Eigen::Success) return llt.matrixL();
  const int n = static_cast<int>(sigma.rows());
  const double jitter = 1e-10 * sigma.trace() / n;
  Eigen::MatrixXd shifted = sigma + jitter * Eigen::MatrixXd::Identity(n, n);
  llt.compute(shifted);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("cholesky_psd: matrix is not positive semidefinite");
  return llt.matrixL();
}

VarModel fit_var(const Eigen::MatrixXd& residuals, int lag) {
  const int n = static_cast<int>(residuals.rows());
  const int w = static_cast<int>(residuals.cols());
  if (lag < 0) throw std::runtime_error("fit_var: negative lag");
  VarModel m;
  m.lag = lag;

  if (lag == 0) {
    m.sigma = residuals.transpose() * residuals / static_cast<double>(n);
    m.b_chol = cholesky_psd(m.sigma);
    return m;
  }

  const int rows = n - lag;
  const int p = lag * w;
  if (rows <= p + w)
    throw std::runtime_error("fit_var: not enough samples for the requested lag");

  Eigen::MatrixXd x(rows, p), y(rows, w);
  for (int k = 0; k < rows; ++k) {
    y.row(k) = residuals.row(k + lag);
    for (int s = 1; s <= lag; ++s)
      x.block(k, (s - 1) * w, 1, w) = residuals.row(k + lag - s);
  }

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
  if (qr.rank() < p) throw std::runtime_error("fit_var: singular regressor matrix");
  Eigen::MatrixXd beta = qr.solve(y);  // p x w

  m.a.resize(lag);
  for (int s = 0; s < lag; ++s) m.a[s] = beta.block(s * w, 0, w, w).transpose();

  Eigen::MatrixXd eps = y - x * beta;
  m.sigma = eps.transpose() * eps / static_cast<double>(rows);
  m.b_chol = cholesky_psd(m.sigma);
  return m;
}

Eigen::MatrixXd propagate_residual_mean(const VarModel& var, const Eigen::MatrixXd& history,
                                        int steps) {
  const int w = var.sites();
  if (history.rows() < var.lag)
    throw std::runtime_error("propagate_residual_mean: history shorter than lag");
  if (var.lag > 0 && history.cols() != w)
    throw std::runtime_error("propagate_residual_mean: history width mismatch");

  // rolling buffer: rows lag..lag+steps-1 are the forecasts
  Eigen::MatrixXd buf(var.lag + steps, w);
  for (int s = 0; s < var.lag; ++s)
    buf.row(s) = history.row(history.rows() - var.lag + s);
  for (int k = 0; k < steps; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(w);
    for (int s = 1; s <= var.lag; ++s)
      v += var.a[s - 1] * buf.row(var.lag + k - s).transpose();
    buf.row(var.lag + k) = v.transpose();
  }
  return buf.bottomRows(steps);
}

Eigen::MatrixXd nominal_forecast(const SeasonalModel& seasonal, const VarModel& var,
                                 const Eigen::MatrixXd& resid_history, long t1, int steps) {
  Eigen::MatrixXd mean = propagate_residual_mean(var, resid_history, steps);
  for (int k = 0; k < steps; ++k) {
    mean.row(k) += seasonal.eval_all(t1 + 1 + k).transpose();
    mean.row(k) = mean.row(k).cwiseMax(0.0);
  }
  return mean;
}

WindSeries simulate_wind(const SeasonalModel& seasonal, const VarModel& var, uint64_t seed,
                         int n, long start_index) {
  const int w = var.sites();
  if (n <= var.lag) throw std::runtime_error("simulate_wind: n must exceed the lag");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  Eigen::MatrixXd resid = Eigen::MatrixXd::Zero(n, w);
  Eigen::VectorXd z(w);
  for (int k = 0; k < n; ++k) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(w);
    for (int s = 1; s <= var.lag && s <= k; ++s) v += var.a[s - 1] * resid.row(k - s).transpose();
    for (int i = 0; i < w; ++i) z[i] = normal(rng);
    resid.row(k) = (v + var.b_chol * z).transpose();
  }

  WindSeries out;
  out.start_index = start_index;
  out.speeds.resize(n, w);
  for (int k = 0; k < n; ++k)
    out.speeds.row(k) =
        (seasonal.eval_all(start_index + k).transpose() + resid.row(k)).cwiseMax(0.0);
  return out;
}

void save_wind_model(const std::string& path, const SeasonalModel& s, const VarModel& v) {
  auto mat = [](const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (int i = 0; i < m.rows(); ++i) {
      json r = json::array();
      for (int j = 0; j < m.cols(); ++j) r.push_back(m(i, j));
      rows.push_back(r);
    }
    return rows;
  };
  json j;
  j["harmonic_periods"] = s.harmonic_periods;
  j["seasonal_coef"] = mat(s.coef);
  j["lag"] = v.lag;
  json as = json::array();
  for (const auto& a : v.a) as.push_back(mat(a));
  j["a"] = as;
  j["sigma"] = mat(v.sigma);
  j["b"] = mat(v.b_chol);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_wind_model: cannot write " + path);
  out << j.dump(1) << "\n";
}

std::pair<SeasonalModel, VarModel> load_wind_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_wind_model: cannot open " + path);
  json j = json::parse(in);
  auto mat = [](const json& rows) {
    Eigen::MatrixXd m(rows.size(), rows.empty() ? 0 : rows[0].size());
    for (size_t i = 0; i < rows.size(); ++i)
      for (size_t k = 0; k < rows[i].size(); ++k) m(i, k) = rows[i][k].get<double>();
    return m;
  };
  SeasonalModel s;
  s.harmonic_periods = j.at("harmonic_periods").get<std::vector<double>>();
  s.coef = mat(j.at("seasonal_coef"));
  VarModel v;
  v.lag = j.at("lag").get<int>();
  for (const auto& a : j.at("a")) v.a.push_back(mat(a));
  v.sigma = mat(j.at("sigma"));
  v.b_chol = mat(j.at("b"));
  if (static_cast<int>(v.a.size()) != v.lag)
    throw std::runtime_error("load_wind_model: lag does not match coefficient count");
  return {s, v};
}

}  // namespace roed
