#include "roed/power_curve.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace roed {

double PowerCurvePWL::envelope(double speed) const {
  double v = 0.0;  // zero piece
  for (const auto& p : pieces) v = std::max(v, p.intercept + p.slope * speed);
  return v;
}

double PowerCurvePWL::available(double speed) const {
  return std::min(envelope(speed), pwmax);
}

namespace {

struct Pt {
  double x, y;
};

double cross(const Pt& o, const Pt& a, const Pt& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

double max_gap_against(const std::vector<Pt>& pts, const std::vector<PwlPiece>& lines) {
  double worst = 0.0;
  for (const auto& p : pts) {
    double env = 0.0;
    for (const auto& l : lines) env = std::max(env, l.intercept + l.slope * p.x);
    worst = std::max(worst, p.y - env);
  }
  return worst;
}

}  // namespace

PowerCurvePWL pwl_power_curve(std::span<const std::pair<double, double>> samples,
                              int k, double pwmax, double* max_gap) {
  if (k < 1) throw std::invalid_argument("pwl_power_curve: need k >= 1");
  if (pwmax <= 0.0) throw std::invalid_argument("pwl_power_curve: pwmax must be positive");
  if (samples.size() < 2) throw std::invalid_argument("pwl_power_curve: need at least 2 samples");
  for (size_t i = 1; i < samples.size(); ++i)
    if (samples[i].first <= samples[i - 1].first)
      throw std::invalid_argument("pwl_power_curve: samples must be sorted by speed");

  // increasing part: from the last zero-power sample through the first sample
  // at (or above) the plateau
  size_t lo = 0;
  for (size_t i = 0; i < samples.size(); ++i)
    if (samples[i].second <= 0.0) lo = i;
  size_t hi = samples.size() - 1;
  for (size_t i = lo; i < samples.size(); ++i) {
    if (samples[i].second >= pwmax - 1e-12) {
      hi = i;
      break;
    }
  }
  if (hi <= lo) throw std::invalid_argument("pwl_power_curve: no increasing segment");
  std::vector<Pt> pts;
  for (size_t i = lo; i <= hi; ++i) {
    if (i > lo && samples[i].second < samples[i - 1].second - 1e-12)
      throw std::invalid_argument("pwl_power_curve: power not increasing after cut-in");
    pts.push_back({samples[i].first, samples[i].second});
  }

  // lower convex hull (monotone chain); its segments support every sample
  std::vector<Pt> hull;
  for (const auto& p : pts) {
    while (hull.size() >= 2 && cross(hull[hull.size() - 2], hull.back(), p) <= 0.0)
      hull.pop_back();
    hull.push_back(p);
  }

  std::vector<PwlPiece> segs;
  for (size_t i = 0; i + 1 < hull.size(); ++i) {
    const double slope = (hull[i + 1].y - hull[i].y) / (hull[i + 1].x - hull[i].x);
    segs.push_back({hull[i].y - slope * hull[i].x, slope});
  }
  if (segs.empty()) segs.push_back({0.0, 0.0});

  // drop segments greedily while more than k remain, each time removing the
  // one whose absence hurts the envelope least
  while (static_cast<int>(segs.size()) > k) {
    double best_gap = 0.0;
    size_t best_i = 0;
    for (size_t i = 0; i < segs.size(); ++i) {
      std::vector<PwlPiece> trial = segs;
      trial.erase(trial.begin() + i);
      const double g = max_gap_against(pts, trial);
      if (i == 0 || g < best_gap) {
        best_gap = g;
        best_i = i;
      }
    }
    segs.erase(segs.begin() + best_i);
  }

  PowerCurvePWL out;
  out.pwmax = pwmax;
  out.pieces = std::move(segs);
  // explicit zero piece keeps the envelope nonnegative below cut-in
  bool has_zero = false;
  for (const auto& p : out.pieces)
    if (p.intercept == 0.0 && p.slope == 0.0) has_zero = true;
  if (!has_zero) out.pieces.push_back({0.0, 0.0});

  if (max_gap) {
    *max_gap = 0.0;
    for (const auto& p : pts)
      *max_gap = std::max(*max_gap, p.y - out.envelope(p.x));
  }
  return out;
}

}  // namespace roed
