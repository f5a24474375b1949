#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tmlab/cutoffs.hpp"
#include "tmlab/grid.hpp"
#include "tmlab/nonlinearity.hpp"
#include "tmlab/towers.hpp"

// Pointwise correction equations. Behind every synthesized critical sequence
// u = delta_{1/s}(mu + v) sits a scalar equation per radius fixing the
// exponent of the nonlinear integrand: near a set point the peak value must
// equal M s (a Laplace peak carrying the flux jump), on a set interval the
// integrand must equal 1/(4 sqrt(2 pi) t^{3/2}) (the absolutely continuous
// part of the weak limit). Both reduce to
//
//   s (8 pi mu v + 4 pi v^2) + log g(sqrt(s)(mu + v)) = rhs(t),
//
// solved per node by safeguarded Newton.

namespace tmlab {

struct CorrectionField {
  LogGrid grid;
  std::vector<double> v;          // zero outside the window
  std::vector<char> converged;    // per node, 1 where Newton met tolerance
  double s = 0.0;
  Window window;
  bool all_converged = true;

  double sup_abs() const {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
  }
};

namespace detail {

struct NodeSolve {
  double v = 0.0;
  bool converged = false;
};

// Solve s(8 pi mu v + 4 pi v^2) + log g(sqrt(s)(mu+v)) = rhs on the branch
// mu + v > 0, where the left side is strictly increasing from -inf. Newton
// from v = 0 with a bisection-safeguarded bracket.
inline NodeSolve solve_correction_node(const Nonlinearity& nl, double s,
                                       double mu, double rhs) {
  const double sqrt_s = std::sqrt(s);
  auto phi = [&](double v) {
    const double arg = sqrt_s * (mu + v);
    const double g = nl.g(arg);
    if (!(g > 0.0)) return -std::numeric_limits<double>::infinity();
    return s * (8.0 * M_PI * mu * v + kFourPi * v * v) + std::log(g) - rhs;
  };
  auto dphi = [&](double v) {
    const double arg = sqrt_s * (mu + v);
    return s * 8.0 * M_PI * (mu + v) + sqrt_s * nl.g_prime(arg) / nl.g(arg);
  };

  double lo = -mu * (1.0 - 1e-14);
  double hi = std::max(mu, 1.0);
  while (phi(hi) < 0.0) {
    hi *= 2.0;
    if (hi > 1e6) return {0.0, false};
  }

  NodeSolve out;
  double v = 0.0;
  if (!(phi(v) > -std::numeric_limits<double>::infinity())) v = 0.5 * (lo + hi);
  for (int it = 0; it < 50; ++it) {
    const double f = phi(v);
    if (std::abs(f) <= 1e-12) {
      out.v = v;
      out.converged = true;
      return out;
    }
    if (f > 0.0)
      hi = v;
    else
      lo = v;
    double step = f / dphi(v);
    double next = v - step;
    if (!(next > lo) || !(next < hi)) next = 0.5 * (lo + hi);
    v = next;
  }
  out.v = v;
  return out;
}

}  // namespace detail

// Correction localizing the Laplace peak at a set point: the solution
// satisfies e^{s psi} = M s exactly, where psi collects the scale and g
// factors of the deflated integrand.
inline CorrectionField solve_point_correction(const TowerProfile& tower,
                                              const Nonlinearity& nl, double s,
                                              double M, Window window,
                                              const LogGrid& grid) {
  if (!(s > 1.0)) throw SpecError("solve_point_correction: need s > 1");
  if (!(M > 0.0))
    throw SpecError("solve_point_correction: peak constant M must be positive");
  CorrectionField out;
  out.grid = grid;
  out.s = s;
  out.window = window;
  out.v.assign(grid.size(), 0.0);
  out.converged.assign(grid.size(), 1);
  const double rhs = std::log(M) - 0.5 * std::log(s);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (!window.contains(t)) continue;
    const double mu = tower.evaluate(t);
    if (!(mu > 0.0))
      throw SpecError("solve_point_correction: profile must be positive on "
                      "the window");
    const auto node = detail::solve_correction_node(nl, s, mu, rhs);
    out.v[i] = node.v;
    out.converged[i] = node.converged ? 1 : 0;
    if (!node.converged) out.all_converged = false;
  }
  return out;
}

// Correction flattening the integrand to 1/(4 sqrt(2 pi) t^{3/2}) on a set
// interval.
inline CorrectionField solve_interval_correction(const TowerProfile& tower,
                                                 const Nonlinearity& nl,
                                                 double s,
                                                 const LogGrid& grid) {
  const auto& iv = tower.set().intervals();
  if (iv.size() != 1 || iv.front().is_point())
    throw SpecError(
        "solve_interval_correction: tower must be built from a single "
        "interval");
  if (!(s > 1.0)) throw SpecError("solve_interval_correction: need s > 1");
  const double t_lo = iv.front().t_lo, t_hi = iv.front().t_hi;
  const double log_4sqrt2pi = std::log(4.0 * std::sqrt(2.0 * M_PI));
  CorrectionField out;
  out.grid = grid;
  out.s = s;
  out.window = {t_lo, t_hi};
  out.v.assign(grid.size(), 0.0);
  out.converged.assign(grid.size(), 1);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid[i];
    if (t < t_lo || t > t_hi) continue;
    const double rhs =
        -1.5 * std::log(s) - log_4sqrt2pi - 1.5 * std::log(t);
    const auto node =
        detail::solve_correction_node(nl, s, envelope(t), rhs);
    out.v[i] = node.v;
    out.converged[i] = node.converged ? 1 : 0;
    if (!node.converged) out.all_converged = false;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Laplace decay rates. On the gap side of a junction the deflated exponent
// behaves like -(s/gamma) |t - t_j|, where 1/gamma = 2 (sigma-1)/(sigma+1)
// and sigma = sqrt(t_deep / t_shallow) of that gap; both boundary gaps (the
// ramp at r = 1 and the plateau reaching r = 0) have rate 2, i.e.
// gamma = 1/2.

inline double gap_gamma(double t_shallow, double t_deep) {
  if (t_shallow <= 0.0 || std::isinf(t_deep)) return 0.5;
  const double sigma = std::sqrt(t_deep / t_shallow);
  return (sigma + 1.0) / (2.0 * (sigma - 1.0));
}

// Peak constants M_j for a finite point set: the Laplace evaluation of the
// peak at t_j yields M_j (gamma_shallow + gamma_deep), which must match the
// flux jump q_j.
inline std::vector<double> compute_M_constants(const TowerProfile& tower) {
  if (!tower.set().is_point_set())
    throw SpecError("compute_M_constants: tower must be a finite point set");
  const auto jumps = flux_jumps(tower);  // t descending
  const std::size_t n = jumps.size();
  std::vector<double> M(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double t_deep_gap =
        j == 0 ? std::numeric_limits<double>::infinity() : jumps[j - 1].t;
    const double t_shallow_gap = j + 1 < n ? jumps[j + 1].t : 0.0;
    const double gamma_deep = gap_gamma(jumps[j].t, t_deep_gap);
    const double gamma_shallow = gap_gamma(t_shallow_gap, jumps[j].t);
    M[j] = jumps[j].q / (gamma_deep + gamma_shallow);
  }
  return M;
}

// ---------------------------------------------------------------------------
// Gluing. Each piece carries a cutoff equal to 1 on its core and smoothly
// vanishing across its blend zones; the output is sum chi_i v_i. Cores must
// be disjoint. Blend zones of different pieces may only coincide exactly
// (complementary seams, where the quintic cutoffs sum to 1).

struct GluePiece {
  CorrectionField field;
  Cutoff cutoff;
};

inline CorrectionField glue_corrections(const std::vector<GluePiece>& pieces,
                                        double s) {
  if (pieces.empty()) throw SpecError("glue_corrections: no pieces");
  const LogGrid& grid = pieces.front().field.grid;
  for (const auto& p : pieces) {
    if (!p.field.grid.same_nodes(grid))
      throw SpecError("glue_corrections: pieces on different grids");
    if (p.field.s != s)
      throw SpecError("glue_corrections: piece scale mismatch");
  }
  // window compatibility
  for (std::size_t a = 0; a < pieces.size(); ++a) {
    for (std::size_t b = a + 1; b < pieces.size(); ++b) {
      const auto& A = pieces[a].cutoff;
      const auto& B = pieces[b].cutoff;
      const double lo = std::max(A.support.lo, B.support.lo);
      const double hi = std::min(A.support.hi, B.support.hi);
      if (lo >= hi) continue;  // disjoint supports
      const auto& L = A.support.lo <= B.support.lo ? A : B;
      const auto& R = A.support.lo <= B.support.lo ? B : A;
      const bool complementary =
          L.core.hi == R.support.lo && L.support.hi == R.core.lo;
      if (!complementary)
        throw SpecError("glue_corrections: overlapping incompatible windows");
    }
  }
  CorrectionField out;
  out.grid = grid;
  out.s = pieces.front().field.s;
  out.v.assign(grid.size(), 0.0);
  out.converged.assign(grid.size(), 1);
  double lo = pieces.front().cutoff.support.lo;
  double hi = pieces.front().cutoff.support.hi;
  for (const auto& p : pieces) {
    lo = std::min(lo, p.cutoff.support.lo);
    hi = std::max(hi, p.cutoff.support.hi);
    if (!p.field.all_converged) out.all_converged = false;
    for (std::size_t i = 0; i < grid.size(); ++i) {
      if (p.field.v[i] == 0.0) continue;
      const double chi = p.cutoff(grid[i]);
      if (chi != 0.0) out.v[i] += chi * p.field.v[i];
      if (!p.field.converged[i]) out.converged[i] = 0;
    }
  }
  out.window = {lo, hi};
  return out;
}

}  // namespace tmlab
