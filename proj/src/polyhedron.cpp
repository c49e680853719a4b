#include "roed/polyhedron.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <set>
#include <stdexcept>

namespace roed {

Eigen::VectorXd Polyhedron::xi_of(const Eigen::VectorXd& full) const {
  Eigen::VectorXd xi(xi_dim());
  for (int k = 0; k < xi_dim(); ++k) xi[k] = full[xi_vars[k]];
  return xi;
}

double Polyhedron::max_violation(const Eigen::VectorXd& full) const {
  if (full.size() != dim()) throw std::runtime_error("polyhedron: point dimension mismatch");
  double v = 0.0;
  for (int j = 0; j < dim(); ++j) {
    v = std::max(v, cons.col_lo[j] - full[j]);
    v = std::max(v, full[j] - cons.col_hi[j]);
  }
  Eigen::SparseMatrix<double> a(cons.num_rows(), cons.num_cols());
  a.setFromTriplets(cons.entries.begin(), cons.entries.end());
  Eigen::VectorXd act = a * full;
  for (int i = 0; i < cons.num_rows(); ++i) {
    v = std::max(v, cons.row_lo[i] - act[i]);
    v = std::max(v, act[i] - cons.row_hi[i]);
  }
  return v;
}

bool Polyhedron::contains_xi(const Eigen::VectorXd& xi, double tol) const {
  if (xi.size() != xi_dim()) throw std::runtime_error("polyhedron: xi dimension mismatch");
  LpProblem p = cons;
  for (int k = 0; k < xi_dim(); ++k) {
    const int j = xi_vars[k];
    p.col_lo[j] = std::max(p.col_lo[j], xi[k] - tol);
    p.col_hi[j] = std::min(p.col_hi[j], xi[k] + tol);
  }
  return lp_solve(p).status == LpStatus::kOptimal;
}

LpSolution Polyhedron::maximize_xi(const Eigen::VectorXd& xi_obj, const LpBasis* warm) const {
  if (xi_obj.size() != xi_dim())
    throw std::runtime_error("polyhedron: objective dimension mismatch");
  LpProblem p = cons;
  p.maximize = true;
  std::fill(p.obj.begin(), p.obj.end(), 0.0);
  for (int k = 0; k < xi_dim(); ++k) p.obj[xi_vars[k]] += xi_obj[k];
  return lp_solve(p, warm);
}

void Polyhedron::write_listing(std::ostream& os) const {
  auto name = [&](int j) {
    return j < static_cast<int>(var_names.size()) ? var_names[j] : "x" + std::to_string(j);
  };
  os << "set with " << dim() << " variables, " << cons.num_rows() << " rows, xi dim "
     << xi_dim() << "\n";
  os << "bounds:\n";
  for (int j = 0; j < dim(); ++j) {
    if (cons.col_lo[j] == -kInf && cons.col_hi[j] == kInf) continue;
    os << "  " << cons.col_lo[j] << " <= " << name(j) << " <= " << cons.col_hi[j] << "\n";
  }
  std::vector<std::vector<std::pair<int, double>>> rows(cons.num_rows());
  for (const auto& t : cons.entries) rows[t.row()].emplace_back(t.col(), t.value());
  os << "rows:\n";
  for (int i = 0; i < cons.num_rows(); ++i) {
    os << "  " << cons.row_lo[i] << " <= ";
    std::sort(rows[i].begin(), rows[i].end());
    bool first = true;
    for (const auto& [c, v] : rows[i]) {
      os << (first ? "" : " + ") << v << " " << name(c);
      first = false;
    }
    os << " <= " << cons.row_hi[i] << "\n";
  }
}

Polyhedron product_set(const Polyhedron& demand, const Polyhedron& wind) {
  if (demand.periods != wind.periods)
    throw std::runtime_error("product_set: period count mismatch");
  {
    std::set<std::string> names(demand.var_names.begin(), demand.var_names.end());
    for (const auto& n : wind.var_names)
      if (!names.insert(n).second)
        throw std::runtime_error("product_set: variable label collision: " + n);
  }

  Polyhedron out;
  out.periods = demand.periods;
  out.n_loads = demand.n_loads;
  out.n_farms = wind.n_farms;
  const int off_col = demand.cons.num_cols();
  const int off_row = demand.cons.num_rows();

  out.cons = demand.cons;
  out.var_names = demand.var_names;
  for (int j = 0; j < wind.cons.num_cols(); ++j)
    out.cons.add_col(wind.cons.col_lo[j], wind.cons.col_hi[j]);
  for (int i = 0; i < wind.cons.num_rows(); ++i)
    out.cons.add_row(wind.cons.row_lo[i], wind.cons.row_hi[i]);
  for (const auto& t : wind.cons.entries)
    out.cons.add_entry(off_row + t.row(), off_col + t.col(), t.value());
  for (const auto& n : wind.var_names) out.var_names.push_back(n);

  out.xi_vars = demand.xi_vars;
  for (int v : wind.xi_vars) out.xi_vars.push_back(off_col + v);

  out.seed_point.resize(out.dim());
  out.seed_point << demand.seed_point, wind.seed_point;

  if (demand.vertices && wind.vertices) {
    const size_t count = demand.vertices->size() * wind.vertices->size();
    if (count > 0 && count <= 10000) {
      out.vertices.emplace();
      for (const auto& dv : *demand.vertices)
        for (const auto& wv : *wind.vertices) {
          Eigen::VectorXd v(dv.size() + wv.size());
          v << dv, wv;
          out.vertices->push_back(v);
        }
    }
  }
  return out;
}

}  // namespace roed
