#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tmlab/grid.hpp"

// Composite trapezoid quadrature on stored grids, the radial Dirichlet
// energy, and overflow-safe integration of exponentially scaled integrands.

namespace tmlab {

inline double trapezoid(const LogGrid& grid, const std::vector<double>& f) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < grid.size(); ++i)
    sum += 0.5 * (f[i] + f[i + 1]) * (grid[i + 1] - grid[i]);
  return sum;
}

struct EnergyEstimate {
  double value = 0.0;      // quadrature value on the full grid
  double error_est = 0.0;  // Richardson estimate |E_h - E_2h| / 3
};

namespace detail {

// 2*pi * sum of per-cell chord slopes squared. For a function that is affine
// between consecutive nodes this is the Dirichlet integral exactly, which is
// why tower kinks are placed on grid nodes.
inline double dirichlet_chord(const std::vector<double>& t,
                              const std::vector<double>& u,
                              std::size_t stride) {
  double sum = 0.0;
  std::size_t i = 0;
  while (i + stride < t.size()) {
    const double dt = t[i + stride] - t[i];
    const double du = u[i + stride] - u[i];
    sum += du * du / dt;
    i += stride;
  }
  // leftover cell when (size-1) is not a multiple of stride
  if (i + 1 < t.size()) {
    const double dt = t.back() - t[i];
    const double du = u.back() - u[i];
    sum += du * du / dt;
  }
  return 2.0 * M_PI * sum;
}

}  // namespace detail

// Dirichlet energy of a radial function, 2*pi * integral of (dU/dt)^2 dt.
inline EnergyEstimate dirichlet_energy_estimate(const SampledRadialFunction& u) {
  if (u.size() < 3) throw SpecError("dirichlet_energy: need at least 3 nodes");
  const auto& t = u.grid().nodes();
  const auto& v = u.values();
  EnergyEstimate e;
  e.value = detail::dirichlet_chord(t, v, 1);
  const double coarse = detail::dirichlet_chord(t, v, 2);
  e.error_est = std::abs(e.value - coarse) / 3.0;
  return e;
}

inline double dirichlet_energy(const SampledRadialFunction& u) {
  return dirichlet_energy_estimate(u).value;
}

// ---------------------------------------------------------------------------
// ExponentField: a positive integrand stored through its logarithm, so that
// exponents up to ~1e6 integrate without intermediate overflow.

class ExponentField {
public:
  ExponentField(LogGrid grid, std::vector<double> log_values,
                double scale_hint = 0.0)
      : grid_(std::move(grid)),
        log_values_(std::move(log_values)),
        scale_hint_(scale_hint) {
    if (log_values_.size() != grid_.size())
      throw SpecError("ExponentField: value count != node count");
    for (double lv : log_values_)
      if (std::isnan(lv) || lv == std::numeric_limits<double>::infinity())
        throw SpecError("ExponentField: log value must be < +inf and not NaN");
  }

  const LogGrid& grid() const { return grid_; }
  const std::vector<double>& log_values() const { return log_values_; }
  double scale_hint() const { return scale_hint_; }

private:
  LogGrid grid_;
  std::vector<double> log_values_;
  double scale_hint_;
};

// Trapezoid of exp(log_values(t)) * weight(t) dt with max-subtraction.
// Throws NumericError only if the result itself overflows after
// stabilization.
inline double integrate_exp(const ExponentField& field,
                            const SampledRadialFunction& weight) {
  if (!field.grid().same_nodes(weight.grid()))
    throw SpecError("integrate_exp: field and weight on different grids");
  const auto& lv = field.log_values();
  double m = -std::numeric_limits<double>::infinity();
  for (double x : lv) m = std::max(m, x);
  if (m == -std::numeric_limits<double>::infinity()) return 0.0;
  const auto& t = field.grid().nodes();
  const auto& w = weight.values();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double f0 = std::exp(lv[i] - m) * w[i];
    const double f1 = std::exp(lv[i + 1] - m) * w[i + 1];
    sum += 0.5 * (f0 + f1) * (t[i + 1] - t[i]);
  }
  if (sum == 0.0) return 0.0;
  const double log_result = m + std::log(std::abs(sum));
  if (log_result > 709.0)
    throw NumericError("integrate_exp: result overflows after stabilization");
  return std::copysign(std::exp(log_result), sum);
}

// Same stabilized quadrature, returning log of the integral (weight must be
// nonnegative). Used by the Orlicz bisection where the integral itself
// overflows long before the comparison against 1 is decided.
inline double log_integrate_exp(const ExponentField& field,
                                const SampledRadialFunction& weight) {
  if (!field.grid().same_nodes(weight.grid()))
    throw SpecError("log_integrate_exp: field and weight on different grids");
  const auto& lv = field.log_values();
  double m = -std::numeric_limits<double>::infinity();
  for (double x : lv) m = std::max(m, x);
  if (m == -std::numeric_limits<double>::infinity())
    return -std::numeric_limits<double>::infinity();
  const auto& t = field.grid().nodes();
  const auto& w = weight.values();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i) {
    const double f0 = std::exp(lv[i] - m) * w[i];
    const double f1 = std::exp(lv[i + 1] - m) * w[i + 1];
    sum += 0.5 * (f0 + f1) * (t[i + 1] - t[i]);
  }
  if (sum <= 0.0) return -std::numeric_limits<double>::infinity();
  return m + std::log(sum);
}

}  // namespace tmlab
