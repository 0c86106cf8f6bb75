#pragma once

#include <stdexcept>

namespace agflow {

/// Uniform time grid 0 = t_0 < t_1 < ... < t_N = T with spacing h = T/N.
/// Dyadic refinements share nodes bit-exactly: node(k) on the fine grid equals
/// node(k/f) on the coarse grid whenever f*k_coarse = k_fine (same rounded
/// quotient k*T/N).
struct TimeGrid {
  double horizon = 1.0;  // T
  int steps = 1;         // N

  double dt() const { return horizon / steps; }
  double node(int k) const { return (k * horizon) / steps; }

  // true when every node of `coarse` is a node of this grid
  bool refines(const TimeGrid& coarse) const {
    return horizon == coarse.horizon && coarse.steps >= 1 && steps % coarse.steps == 0;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;
};

inline TimeGrid make_grid(double horizon, int steps) {
  if (!(horizon > 0.0)) throw std::domain_error("make_grid: horizon must be positive");
  if (steps < 1) throw std::domain_error("make_grid: steps must be >= 1");
  return TimeGrid{horizon, steps};
}

}  // namespace agflow
