#pragma once

#include <cmath>
#include <limits>

#include "tmlab/grid.hpp"
#include "tmlab/quadrature.hpp"

// The exp-L2 Orlicz norm inf{ lambda > 0 : integral_B (e^{(u/lambda)^2} - 1)
// dx <= 1 }, the norm in which profile-decomposition remainders vanish.

namespace tmlab {

namespace detail {

inline double log_expm1(double x) {
  if (x <= 0.0) return -std::numeric_limits<double>::infinity();
  if (x > 30.0) return x;
  if (x < 1e-8) return std::log(x);
  return std::log(std::expm1(x));
}

// log of 2*pi * integral expm1((a*U/lambda)^2) e^{-2*b*t} dt, trapezoid in
// log space. a and b let the deflated variant reuse the same kernel.
inline double log_orlicz_integral(const SampledRadialFunction& u,
                                  double lambda, double a, double b) {
  const auto& t = u.grid().nodes();
  const auto& v = u.values();
  const std::size_t n = t.size();
  std::vector<double> le(n);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double z = a * v[i] / lambda;
    le[i] = log_expm1(z * z) - 2.0 * b * t[i];
    m = std::max(m, le[i]);
  }
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i)
    sum += 0.5 * (std::exp(le[i] - m) + std::exp(le[i + 1] - m)) *
           (t[i + 1] - t[i]);
  if (sum <= 0.0) return -std::numeric_limits<double>::infinity();
  return m + std::log(sum) + std::log(2.0 * M_PI);
}

inline double orlicz_bisect(const SampledRadialFunction& u, double a, double b,
                            double extra_log_measure) {
  bool all_zero = true;
  for (double v : u.values())
    if (v != 0.0) all_zero = false;
  if (all_zero) return 0.0;

  double lo = 1e-9, hi = 1e3;
  auto exceeds = [&](double lambda) {
    return log_orlicz_integral(u, lambda, a, b) + extra_log_measure > 0.0;
  };
  if (exceeds(hi))
    throw NumericError(
        "orlicz_exp_l2_norm: bracket [1e-9, 1e3] exhausted; function too "
        "large");
  if (!exceeds(lo)) return lo;
  while (hi - lo > 1e-8 * hi) {
    const double mid = std::sqrt(lo * hi);
    if (exceeds(mid))
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

inline double orlicz_exp_l2_norm(const SampledRadialFunction& u) {
  return detail::orlicz_bisect(u, 1.0, 1.0, 0.0);
}

// Orlicz norm of delta_{1/s} v given only the deflated sample v. The area
// element picks up the factor s: integral becomes
// 2*pi*s * integral expm1(s v(eta)^2 / lambda^2) e^{-2 s eta} d eta.
inline double orlicz_exp_l2_norm_deflated(const SampledRadialFunction& v,
                                          double s) {
  if (!(s > 0.0)) throw SpecError("orlicz_exp_l2_norm_deflated: s must be > 0");
  return detail::orlicz_bisect(v, std::sqrt(s), s, std::log(s));
}

}  // namespace tmlab
