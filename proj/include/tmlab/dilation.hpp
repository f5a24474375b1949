#pragma once

#include <cmath>

#include "tmlab/grid.hpp"
#include "tmlab/pchip.hpp"

namespace tmlab {

// The dilation group delta_s u(r) = s^{-1/2} u(r^s), which in log
// coordinates reads (delta_s U)(t) = s^{-1/2} U(s t). Each delta_s is an
// isometry of the radial Dirichlet norm; delta_{1/s} with s -> infinity is
// the blow-up and delta_s the deflation. The result is resampled onto the
// input grid; queries beyond the grid take the boundary value (towers are
// constant past their deepest point, so this loses nothing for them).
inline SampledRadialFunction dilate(const SampledRadialFunction& u, double s) {
  if (!(s > 0.0) || !std::isfinite(s))
    throw SpecError("dilate: scale must be positive and finite");
  if (s == 1.0) return u;
  const PchipInterpolant interp(u);
  const double amp = 1.0 / std::sqrt(s);
  std::vector<double> v(u.size());
  for (std::size_t i = 0; i < u.size(); ++i)
    v[i] = amp * interp(s * u.grid()[i]);
  return SampledRadialFunction(u.grid(), std::move(v));
}

}  // namespace tmlab
