// Piecewise-linear lower envelope of a wind turbine power curve.
#pragma once

#include <span>
#include <utility>
#include <vector>

namespace roed {

struct PwlPiece {
  double intercept = 0.0;  // MW
  double slope = 0.0;      // MW per (m/s)
};

// The curve is represented by supporting lines whose pointwise max
// under-approximates the increasing part of the sampled power curve. The
// trivial zero piece is always present so the envelope is nonnegative below
// cut-in speed.
struct PowerCurvePWL {
  std::vector<PwlPiece> pieces;
  double pwmax = 0.0;  // cut-off plateau, MW

  // max_k(h0_k + h_k * speed); >= 0 for speed >= 0
  double envelope(double speed) const;
  // realized available power: envelope capped at the plateau
  double available(double speed) const;
};

// Fits k supporting lines to the increasing part of (speed, power) samples.
// Samples must be sorted by speed. The envelope never exceeds any sample;
// the largest sample-to-envelope gap is written to max_gap when given.
PowerCurvePWL pwl_power_curve(std::span<const std::pair<double, double>> samples,
                              int k, double pwmax, double* max_gap = nullptr);

}  // namespace roed
