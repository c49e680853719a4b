// Small CSV helpers shared by the simulator and the CLI.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "roed/wind_stats.hpp"

namespace roed {

// header: timestamp,site_1,...,site_N; the timestamp column holds the
// absolute 10-minute period index.
WindSeries read_wind_csv(const std::string& path);
void write_wind_csv(const std::string& path, const WindSeries& s);

Eigen::MatrixXd read_matrix_csv(const std::string& path,
                                std::vector<std::string>* header = nullptr);
void write_matrix_csv(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& rows);

// fixed-format float used in every CSV we emit, so identical runs produce
// identical bytes
std::string csv_num(double v);

}  // namespace roed
