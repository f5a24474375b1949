#pragma once

#include <cmath>

#include "tmlab/errors.hpp"

namespace tmlab {

// Quintic smoothstep: 0 below 0, 1 above 1, C^2 at both ends.
inline double smoothstep(double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  return x * x * x * (10.0 + x * (-15.0 + 6.0 * x));
}

struct Window {
  double lo = 0.0;
  double hi = 0.0;

  bool contains(double t) const { return t >= lo && t <= hi; }
  double width() const { return hi - lo; }
};

// Cutoff equal to 1 on [core.lo, core.hi], rising smoothly across
// [support.lo, core.lo] and falling across [core.hi, support.hi].
struct Cutoff {
  Window support;
  Window core;

  double operator()(double t) const {
    if (t <= support.lo || t >= support.hi) {
      // degenerate edges where core touches support stay sharp-on
      if (t == support.lo && core.lo == support.lo) return 1.0;
      if (t == support.hi && core.hi == support.hi) return 1.0;
      return 0.0;
    }
    double v = 1.0;
    if (t < core.lo)
      v *= smoothstep((t - support.lo) / (core.lo - support.lo));
    if (t > core.hi)
      v *= smoothstep((support.hi - t) / (support.hi - core.hi));
    return v;
  }
};

}  // namespace tmlab
