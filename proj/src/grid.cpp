#include "roed/grid.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <unordered_map>

namespace roed {

using nlohmann::json;

double Grid::total_pmin() const {
  double s = 0.0;
  for (const auto& g : gens) s += g.pmin;
  return s;
}

double Grid::total_pmax() const {
  double s = 0.0;
  for (const auto& g : gens) s += g.pmax;
  return s;
}

double Grid::profile_at(long period) const {
  if (load_profile.empty()) return 1.0;
  const long n = static_cast<long>(load_profile.size());
  long k = period % n;
  if (k < 0) k += n;
  return load_profile[static_cast<size_t>(k)];
}

Eigen::VectorXd Grid::nominal_demand(long period) const {
  Eigen::VectorXd d(n_loads());
  const double f = profile_at(period);
  for (int j = 0; j < n_loads(); ++j) d[j] = loads[j].base_mw * f;
  return d;
}

namespace {

[[noreturn]] void fail(const std::string& what) {
  throw std::runtime_error("grid: " + what);
}

int bus_index(const std::unordered_map<int, int>& map, int id, const char* ctx) {
  auto it = map.find(id);
  if (it == map.end()) fail(std::string(ctx) + " references unknown bus id " + std::to_string(id));
  return it->second;
}

Eigen::MatrixXd incidence(int n_buses, const std::vector<int>& unit_bus) {
  Eigen::MatrixXd e = Eigen::MatrixXd::Zero(n_buses, unit_bus.size());
  for (size_t u = 0; u < unit_bus.size(); ++u) e(unit_bus[u], static_cast<int>(u)) = 1.0;
  return e;
}

}  // namespace

Grid parse_grid(const std::string& text, bool with_ptdf) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(std::string("parse error: ") + e.what());
  }

  Grid g;
  if (!j.contains("buses") || !j["buses"].is_array() || j["buses"].empty())
    fail("missing buses array");
  std::unordered_map<int, int> bus_of;
  for (const auto& b : j["buses"]) {
    const int id = b.get<int>();
    if (bus_of.count(id)) fail("duplicate bus id " + std::to_string(id));
    bus_of[id] = static_cast<int>(g.bus_ids.size());
    g.bus_ids.push_back(id);
  }
  g.base_mva = j.value("base_mva", 100.0);
  g.slack_bus = bus_index(bus_of, j.value("slack_bus", g.bus_ids.front()), "slack_bus");

  for (const auto& e : j.value("lines", json::array())) {
    Line l;
    l.from = bus_index(bus_of, e.at("from").get<int>(), "line");
    l.to = bus_index(bus_of, e.at("to").get<int>(), "line");
    l.reactance = e.at("reactance").get<double>();
    l.flow_limit = e.at("flow_limit_mw").get<double>();
    if (l.reactance <= 0.0) fail("line reactance must be positive");
    if (l.flow_limit <= 0.0) fail("line flow limit must be positive");
    if (l.from == l.to) fail("line endpoints must differ");
    g.lines.push_back(l);
  }

  for (const auto& e : j.value("generators", json::array())) {
    ThermalGen t;
    t.bus = bus_index(bus_of, e.at("bus").get<int>(), "generator");
    t.pmin = e.at("pmin_mw").get<double>();
    t.pmax = e.at("pmax_mw").get<double>();
    t.ramp_up = e.at("ramp_up_mw").get<double>();
    t.ramp_down = e.value("ramp_down_mw", t.ramp_up);
    t.cost = e.at("cost_per_mwh").get<double>();
    if (t.pmin < 0.0 || t.pmin > t.pmax) fail("generator requires 0 <= pmin <= pmax");
    if (t.ramp_up <= 0.0 || t.ramp_down <= 0.0) fail("generator ramps must be positive");
    if (t.cost < 0.0) fail("generator cost must be nonnegative");
    g.gens.push_back(t);
  }

  for (const auto& e : j.value("windfarms", json::array())) {
    WindFarm w;
    w.bus = bus_index(bus_of, e.at("bus").get<int>(), "windfarm");
    w.pwmax = e.at("pwmax_mw").get<double>();
    if (w.pwmax <= 0.0) fail("windfarm pwmax must be positive");
    w.ramp_up = e.value("ramp_up_mw", w.pwmax);
    w.ramp_down = e.value("ramp_down_mw", w.pwmax);
    w.cost = e.value("cost_per_mwh", 0.0);
    if (w.cost < 0.0) fail("windfarm cost must be nonnegative");
    const auto& pc = e.at("power_curve");
    std::vector<std::pair<double, double>> samples;
    for (const auto& s : pc.at("samples"))
      samples.emplace_back(s.at(0).get<double>(), s.at(1).get<double>());
    const int pieces = pc.value("pieces", 4);
    w.curve = pwl_power_curve(samples, pieces, w.pwmax);
    g.farms.push_back(w);
  }

  for (const auto& e : j.value("loads", json::array())) {
    Load l;
    l.bus = bus_index(bus_of, e.at("bus").get<int>(), "load");
    l.base_mw = e.at("base_mw").get<double>();
    if (l.base_mw < 0.0) fail("load base must be nonnegative");
    g.loads.push_back(l);
  }

  if (j.contains("load_profile")) {
    for (const auto& v : j["load_profile"]) g.load_profile.push_back(v.get<double>());
    for (double v : g.load_profile)
      if (v <= 0.0) fail("load profile entries must be positive");
  }

  std::vector<int> gen_bus, wind_bus, load_bus;
  for (const auto& t : g.gens) gen_bus.push_back(t.bus);
  for (const auto& w : g.farms) wind_bus.push_back(w.bus);
  for (const auto& l : g.loads) load_bus.push_back(l.bus);
  g.inc_gen = incidence(g.n_buses(), gen_bus);
  g.inc_wind = incidence(g.n_buses(), wind_bus);
  g.inc_load = incidence(g.n_buses(), load_bus);

  if (with_ptdf) g.shift_factors = compute_ptdf(g, g.slack_bus);
  return g;
}

Grid load_grid(const std::string& path, bool with_ptdf) {
  std::ifstream in(path);
  if (!in) fail("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_grid(ss.str(), with_ptdf);
}

Eigen::MatrixXd compute_ptdf(const Grid& grid, int slack_index) {
  const int nb = grid.n_buses();
  const int nl = grid.n_lines();
  if (slack_index < 0 || slack_index >= nb) fail("slack index out of range");

  // nodal susceptance matrix (per-unit susceptance b = 1/x on base_mva)
  Eigen::MatrixXd bmat = Eigen::MatrixXd::Zero(nb, nb);
  for (const auto& l : grid.lines) {
    const double b = 1.0 / l.reactance;
    bmat(l.from, l.from) += b;
    bmat(l.to, l.to) += b;
    bmat(l.from, l.to) -= b;
    bmat(l.to, l.from) -= b;
  }

  // reduce out the slack bus and invert
  std::vector<int> keep;
  for (int i = 0; i < nb; ++i)
    if (i != slack_index) keep.push_back(i);
  const int nr = static_cast<int>(keep.size());
  Eigen::MatrixXd bred(nr, nr);
  for (int i = 0; i < nr; ++i)
    for (int k = 0; k < nr; ++k) bred(i, k) = bmat(keep[i], keep[k]);

  Eigen::LLT<Eigen::MatrixXd> llt(bred);
  if (llt.info() != Eigen::Success)
    fail("disconnected network: reduced susceptance matrix is singular");
  Eigen::MatrixXd theta = llt.solve(Eigen::MatrixXd::Identity(nr, nr));
  // residual guard: LLT can succeed on nearly singular systems
  if ((bred * theta - Eigen::MatrixXd::Identity(nr, nr)).cwiseAbs().maxCoeff() > 1e-6)
    fail("disconnected network: reduced susceptance matrix is singular");

  std::vector<int> pos(nb, -1);  // bus index -> row in the reduced system
  for (int i = 0; i < nr; ++i) pos[keep[i]] = i;

  Eigen::MatrixXd alpha = Eigen::MatrixXd::Zero(nl, nb);
  for (int l = 0; l < nl; ++l) {
    const auto& ln = grid.lines[l];
    const double b = 1.0 / ln.reactance;
    for (int k = 0; k < nr; ++k) {
      double v = 0.0;
      if (pos[ln.from] >= 0) v += theta(pos[ln.from], k);
      if (pos[ln.to] >= 0) v -= theta(pos[ln.to], k);
      alpha(l, keep[k]) = b * v;
    }
  }
  return alpha;
}

Eigen::VectorXd line_flow(const Grid& grid, const Eigen::VectorXd& pg,
                          const Eigen::VectorXd& pw, const Eigen::VectorXd& d) {
  if (pg.size() != grid.n_gens() || pw.size() != grid.n_farms() || d.size() != grid.n_loads())
    fail("line_flow: dimension mismatch");
  if (grid.shift_factors.rows() != grid.n_lines())
    fail("line_flow: shift factors not computed");
  Eigen::VectorXd inj = grid.inc_gen * pg + grid.inc_wind * pw - grid.inc_load * d;
  return grid.shift_factors * inj;
}

}  // namespace roed
