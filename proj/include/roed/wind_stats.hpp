// Seasonal-plus-VAR wind speed model: estimation, forecasting, simulation.
#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace roed {

// Wind speeds on a uniform 10-minute grid, one column per site. Row k carries
// the absolute period index start_index + k, which fixes the seasonal phase.
struct WindSeries {
  Eigen::MatrixXd speeds;  // time x sites, m/s, nonnegative
  long start_index = 0;

  int length() const { return static_cast<int>(speeds.rows()); }
  int sites() const { return static_cast<int>(speeds.cols()); }
};

// Per-site harmonic regression g_it = a + sum_h (b_h cos(2 pi t / P_h) +
// c_h sin(2 pi t / P_h)). The default periods model daily and semi-daily
// seasonality of 10-minute data.
struct SeasonalModel {
  std::vector<double> harmonic_periods = {144.0, 72.0};
  Eigen::MatrixXd coef;  // sites x (1 + 2 * harmonics)

  int sites() const { return static_cast<int>(coef.rows()); }
  double eval(int site, long t) const;
  Eigen::VectorXd eval_all(long t) const;
};

struct VarModel {
  int lag = 0;
  std::vector<Eigen::MatrixXd> a;  // lag matrices, each sites x sites
  Eigen::MatrixXd sigma;           // innovation covariance, (m/s)^2
  Eigen::MatrixXd b_chol;          // lower triangular, b_chol * b_chol' = sigma

  int sites() const { return static_cast<int>(sigma.rows()); }
};

SeasonalModel fit_seasonal(const WindSeries& series,
                           const std::vector<double>& harmonic_periods = {144.0, 72.0});

// Residual matrix r~ = speeds - g, aligned with the series rows.
Eigen::MatrixXd seasonal_residuals(const WindSeries& series, const SeasonalModel& m);

// Multivariate least squares of r~_t on its lag lags; sigma is the covariance
// of the fit residuals. lag = 0 gives an empty coefficient list with sigma the
// sample covariance of the input.
VarModel fit_var(const Eigen::MatrixXd& residuals, int lag);

// Lower-triangular factor with B B' = sigma. Adds one shot of diagonal jitter
// (1e-10 * trace/n) when the matrix is semidefinite; throws if it stays
// indefinite.
Eigen::MatrixXd cholesky_psd(const Eigen::MatrixXd& sigma);

// Conditional-mean residual propagation over `steps` future periods given the
// last `lag` realized residuals (newest in the last row).
Eigen::MatrixXd propagate_residual_mean(const VarModel& var,
                                        const Eigen::MatrixXd& history,
                                        int steps);

// Speed forecast for periods t1+1 .. t1+steps (clipped at zero):
// r̂ = max(0, g + propagated residual mean).
Eigen::MatrixXd nominal_forecast(const SeasonalModel& seasonal, const VarModel& var,
                                 const Eigen::MatrixXd& resid_history, long t1,
                                 int steps);

// Draws a synthetic series from the model, clipping speeds at zero.
// Deterministic per seed.
WindSeries simulate_wind(const SeasonalModel& seasonal, const VarModel& var,
                         uint64_t seed, int n, long start_index = 0);

void save_wind_model(const std::string& path, const SeasonalModel& s, const VarModel& v);
std::pair<SeasonalModel, VarModel> load_wind_model(const std::string& path);

}  // namespace roed
