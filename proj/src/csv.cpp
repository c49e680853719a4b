#include "roed/csv.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace roed {

std::string csv_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

Eigen::MatrixXd read_matrix_csv(const std::string& path, std::vector<std::string>* header) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty file " + path);
  const auto head = split_line(line);
  if (header) *header = head;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split_line(line);
    if (cells.size() != head.size())
      throw std::runtime_error("csv: ragged row in " + path);
    std::vector<double> r;
    for (const auto& c : cells) r.push_back(std::stod(c));
    rows.push_back(std::move(r));
  }
  Eigen::MatrixXd m(rows.size(), head.size());
  for (size_t i = 0; i < rows.size(); ++i)
    for (size_t j = 0; j < head.size(); ++j) m(i, j) = rows[i][j];
  return m;
}

void write_matrix_csv(const std::string& path, const std::vector<std::string>& header,
                      const Eigen::MatrixXd& rows) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("csv: cannot write " + path);
  for (size_t j = 0; j < header.size(); ++j)
    out << header[j] << (j + 1 < header.size() ? "," : "\n");
  for (int i = 0; i < rows.rows(); ++i)
    for (int j = 0; j < rows.cols(); ++j)
      out << csv_num(rows(i, j)) << (j + 1 < rows.cols() ? "," : "\n");
}

WindSeries read_wind_csv(const std::string& path) {
  std::vector<std::string> header;
  Eigen::MatrixXd m = read_matrix_csv(path, &header);
  if (header.empty() || header[0] != "timestamp")
    throw std::runtime_error("wind csv: first column must be timestamp");
  if (m.cols() < 2) throw std::runtime_error("wind csv: no site columns");
  WindSeries s;
  s.speeds = m.rightCols(m.cols() - 1);
  if ((s.speeds.array() < 0.0).any())
    throw std::runtime_error("wind csv: negative speeds");
  s.start_index = m.rows() > 0 ? static_cast<long>(m(0, 0)) : 0;
  for (int k = 1; k < m.rows(); ++k)
    if (m(k, 0) - m(k - 1, 0) != 1.0)
      throw std::runtime_error("wind csv: timestamps must advance by one period");
  return s;
}

void write_wind_csv(const std::string& path, const WindSeries& s) {
  std::vector<std::string> header = {"timestamp"};
  for (int i = 0; i < s.sites(); ++i) header.push_back("site_" + std::to_string(i + 1));
  Eigen::MatrixXd m(s.length(), s.sites() + 1);
  for (int k = 0; k < s.length(); ++k) {
    m(k, 0) = static_cast<double>(s.start_index + k);
    m.row(k).tail(s.sites()) = s.speeds.row(k);
  }
  write_matrix_csv(path, header, m);
}

}  // namespace roed
