#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tmlab/grid.hpp"
#include "tmlab/nonlinearity.hpp"
#include "tmlab/quadrature.hpp"

// The semilinear energy J(u) = 1/2 |grad u|^2 - (1/8 pi) integral F(u), its
// nonlinear mass, the scalar residual whose vanishing certifies criticality
// for radial sequences, and gradient-concentration diagnostics. All integrals over the disk
// reduce to 2 pi * integral h(U(t)) e^{-2t} dt.

namespace tmlab {

namespace detail {

// Per-node log of F(U) e^{-2t}, stable for exponents far beyond double
// range.
inline std::vector<double> log_F_weighted(const SampledRadialFunction& u,
                                          const Nonlinearity& nl) {
  const auto& t = u.grid().nodes();
  const auto& v = u.values();
  std::vector<double> lf(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    double lF;
    if (v[i] == 0.0)
      lF = -std::numeric_limits<double>::infinity();
    else
      lF = log_big_F(nl, v[i]);
    lf[i] = lF - 2.0 * t[i];
  }
  return lf;
}

}  // namespace detail

// (1/8 pi) integral_B F(u) dx = (1/4) integral F(U(t)) e^{-2t} dt.
// Throws NumericError when the stabilized integral still overflows (the
// integrand genuinely exceeds double range on a set of positive length).
inline double nonlinear_mass(const SampledRadialFunction& u,
                             const Nonlinearity& nl) {
  const auto lf = detail::log_F_weighted(u, nl);
  double m = -std::numeric_limits<double>::infinity();
  for (double x : lf) m = std::max(m, x);
  if (m == -std::numeric_limits<double>::infinity()) return 0.0;
  const auto& t = u.grid().nodes();
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < t.size(); ++i)
    sum += 0.5 * (std::exp(lf[i] - m) + std::exp(lf[i + 1] - m)) *
           (t[i + 1] - t[i]);
  const double log_result = m + std::log(sum);
  if (log_result > 700.0)
    throw NumericError("nonlinear_mass: integral overflows after stabilization");
  return 0.25 * std::exp(log_result);
}

inline double evaluate_J(const SampledRadialFunction& u,
                         const Nonlinearity& nl) {
  return 0.5 * dirichlet_energy(u) - nonlinear_mass(u, nl);
}

// ---------------------------------------------------------------------------
// Criticality residual: integral_0^1 | r u'(r) + (1/8 pi) integral_0^r
// f(u(rho)) rho d rho |^2 r dr. Its vanishing along a sequence certifies
// criticality for radial sequences. In t coordinates,
//   D(t) = -U'(t) + integral_t^inf g(U) e^{4 pi U^2 - 2 tau} d tau,
//   residual = integral_0^inf D(t)^2 e^{-2t} dt.

inline double ap_residual(const SampledRadialFunction& u,
                          const Nonlinearity& nl) {
  const auto& t = u.grid().nodes();
  const auto& v = u.values();
  const std::size_t n = t.size();

  // signed inner integrand in log space
  std::vector<double> le(n);
  std::vector<double> sgn(n);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double gv = nl.g(v[i]);
    sgn[i] = gv >= 0.0 ? 1.0 : -1.0;
    le[i] = (gv == 0.0 ? -std::numeric_limits<double>::infinity()
                       : std::log(std::abs(gv))) +
            kFourPi * v[i] * v[i] - 2.0 * t[i];
    m = std::max(m, le[i]);
  }
  if (m > 690.0)
    throw NumericError("ap_residual: inner integrand overflows");
  if (m == -std::numeric_limits<double>::infinity()) m = 0.0;

  // reverse cumulative trapezoid of the inner integral
  std::vector<double> inner(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double f0 = sgn[i] * std::exp(le[i] - m);
    const double f1 = sgn[i + 1] * std::exp(le[i + 1] - m);
    inner[i] = inner[i + 1] + 0.5 * (f0 + f1) * (t[i + 1] - t[i]);
  }
  const double scale = std::exp(m);

  // centered slope estimates
  std::vector<double> du(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (i == 0)
      du[i] = (v[1] - v[0]) / (t[1] - t[0]);
    else if (i + 1 == n)
      du[i] = (v[n - 1] - v[n - 2]) / (t[n - 1] - t[n - 2]);
    else
      du[i] = (v[i + 1] - v[i - 1]) / (t[i + 1] - t[i - 1]);
  }

  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double d = -du[i] + scale * inner[i];
    integrand[i] = d * d * std::exp(-2.0 * t[i]);
  }
  return trapezoid(u.grid(), integrand);
}

// ---------------------------------------------------------------------------
// Gradient-mass concentration: fraction of |grad u|^2 inside r < rho.

struct ConcentrationProfileReport {
  std::vector<double> rho_values;
  std::vector<double> mass_fraction;
  bool zero_function = false;
};

inline ConcentrationProfileReport concentration_profile(
    const SampledRadialFunction& u, const std::vector<double>& rhos) {
  for (double r : rhos)
    if (!(r > 0.0) || !(r < 1.0))
      throw SpecError("concentration_profile: probes must lie in (0,1)");
  const auto& t = u.grid().nodes();
  const auto& v = u.values();
  const std::size_t n = t.size();
  std::vector<double> cell(n - 1);
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const double du = v[i + 1] - v[i];
    cell[i] = du * du / (t[i + 1] - t[i]);
    total += cell[i];
  }
  ConcentrationProfileReport rep;
  rep.rho_values = rhos;
  rep.mass_fraction.resize(rhos.size(), 0.0);
  if (total <= 0.0) {
    rep.zero_function = true;
    return rep;
  }
  for (std::size_t k = 0; k < rhos.size(); ++k) {
    const double t_rho = -std::log(rhos[k]);
    double above = 0.0;
    for (std::size_t i = 0; i + 1 < n; ++i) {
      if (t[i] >= t_rho) {
        above += cell[i];
      } else if (t[i + 1] > t_rho) {
        above += cell[i] * (t[i + 1] - t_rho) / (t[i + 1] - t[i]);
      }
    }
    rep.mass_fraction[k] = above / total;
  }
  return rep;
}

}  // namespace tmlab
