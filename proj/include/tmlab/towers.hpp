#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "tmlab/closed_sets.hpp"
#include "tmlab/grid.hpp"
#include "tmlab/quadrature.hpp"

// Tower profiles: radial functions equal to +-sqrt(t / 2 pi) on the signed
// set and affine in t on the complement gaps, with the deepest gap constant
// and the ramp at t = 0 vanishing. Concentration profiles of the functional
// are exactly these, so everything here is exact piecewise arithmetic; the
// sampled representation exists only to feed quadrature.

namespace tmlab {

inline constexpr double kInv2Pi = 0.15915494309189533577;  // 1/(2 pi)

inline double envelope(double t) { return std::sqrt(t * kInv2Pi); }

struct TowerPiece {
  enum Kind { kSqrt, kLinear };
  Kind kind = kLinear;
  double t_lo = 0.0;
  double t_hi = 0.0;  // +inf on the deepest plateau
  int sign = +1;      // sqrt pieces only
  double a = 0.0;     // linear pieces: U(t) = a + b t
  double b = 0.0;

  double eval(double t) const {
    if (kind == kSqrt) return sign * envelope(t);
    return a + b * t;
  }
  double slope(double t) const {
    if (kind == kSqrt) return sign * 0.5 * kInv2Pi / envelope(t);
    return b;
  }
};

class TowerProfile;
TowerProfile build_tower(const SignedClosedSet& set);

class TowerProfile {
public:
  const SignedClosedSet& set() const { return set_; }
  const std::vector<TowerPiece>& pieces() const { return pieces_; }
  double deepest_t() const { return set_.deepest_t(); }
  double plateau_value() const { return pieces_.back().a; }

  double evaluate(double t) const {
    if (t < 0.0) throw SpecError("TowerProfile::evaluate: negative t");
    if (t == 0.0) return 0.0;
    return piece_at(t).eval(t);
  }

  const TowerPiece& piece_at(double t) const {
    // pieces are ascending and tile (0, inf); binary search on t_lo
    std::size_t lo = 0, hi = pieces_.size() - 1;
    while (lo < hi) {
      const std::size_t mid = (lo + hi + 1) / 2;
      if (pieces_[mid].t_lo <= t)
        lo = mid;
      else
        hi = mid - 1;
    }
    return pieces_[lo];
  }

private:
  friend TowerProfile build_tower(const SignedClosedSet& set);
  TowerProfile(SignedClosedSet set, std::vector<TowerPiece> pieces)
      : set_(std::move(set)), pieces_(std::move(pieces)) {}

  SignedClosedSet set_;
  std::vector<TowerPiece> pieces_;
};

// Linear coefficients through (t0, v0) and (t1, v1).
namespace detail {
inline TowerPiece linear_through(double t0, double v0, double t1, double v1) {
  TowerPiece p;
  p.kind = TowerPiece::kLinear;
  p.t_lo = t0;
  p.t_hi = t1;
  p.b = (v1 - v0) / (t1 - t0);
  p.a = v0 - p.b * t0;
  return p;
}
}  // namespace detail

inline TowerProfile build_tower(const SignedClosedSet& set) {
  const auto& iv = set.intervals();  // descending in t
  std::vector<TowerPiece> pieces;
  pieces.reserve(2 * iv.size() + 1);

  // ramp from (0, 0) to the shallowest set point
  {
    const auto& sh = iv.back();
    pieces.push_back(detail::linear_through(
        0.0, 0.0, sh.t_lo, sh.sign * envelope(sh.t_lo)));
  }
  // alternate set intervals and interior gaps, ascending in t
  for (std::size_t k = iv.size(); k-- > 0;) {
    const auto& s = iv[k];
    if (!s.is_point()) {
      TowerPiece p;
      p.kind = TowerPiece::kSqrt;
      p.t_lo = s.t_lo;
      p.t_hi = s.t_hi;
      p.sign = s.sign;
      pieces.push_back(p);
    }
    if (k > 0) {
      const auto& deeper = iv[k - 1];
      pieces.push_back(detail::linear_through(
          s.t_hi, s.sign * envelope(s.t_hi), deeper.t_lo,
          deeper.sign * envelope(deeper.t_lo)));
    }
  }
  // constant plateau past the deepest point
  {
    const auto& dp = iv.front();
    TowerPiece p;
    p.kind = TowerPiece::kLinear;
    p.t_lo = dp.t_hi;
    p.t_hi = std::numeric_limits<double>::infinity();
    p.a = dp.sign * envelope(dp.t_hi);
    p.b = 0.0;
    pieces.push_back(p);
  }

  // junction continuity guard; the pieces are solved in closed form, so any
  // residual here is a bug
  for (std::size_t i = 0; i + 1 < pieces.size(); ++i) {
    const double left = pieces[i].eval(pieces[i].t_hi);
    const double right = pieces[i + 1].eval(pieces[i + 1].t_lo);
    if (std::abs(left - right) > 1e-12)
      throw NumericError("build_tower: junction continuity violated");
  }
  return TowerProfile(std::move(set), std::move(pieces));
}

// ---------------------------------------------------------------------------
// Closed-form energy. Per gap with deep coordinate t_d and shallow t_s the
// ratio is sigma = sqrt(t_d / t_s); a same-sign gap contributes
// (sigma-1)/(sigma+1), a sign-changing gap (sigma+1)/(sigma-1). Conventions:
// the deepest gap has sigma = 1 (contribution 0), the gap at r = 1 has
// sigma = +inf (contribution 1). The set itself contributes
// (1/4) log(t_hi/t_lo) per interval.

struct EnergyBreakdown {
  double set_term = 0.0;
  std::vector<double> same_sign_terms;    // ascending-t gap order
  std::vector<double> sign_change_terms;  // ascending-t gap order
  double total = 0.0;
};

inline EnergyBreakdown energy_closed_form(const TowerProfile& tower) {
  const auto& iv = tower.set().intervals();  // descending in t
  EnergyBreakdown e;
  for (const auto& s : iv)
    if (!s.is_point()) e.set_term += 0.25 * std::log(s.t_hi / s.t_lo);

  // boundary gap at t = 0
  e.same_sign_terms.push_back(1.0);
  // interior gaps, ascending in t
  for (std::size_t k = iv.size(); k-- > 1;) {
    const auto& shallow = iv[k];
    const auto& deep = iv[k - 1];
    const double sigma = std::sqrt(deep.t_lo / shallow.t_hi);
    if (deep.sign == shallow.sign)
      e.same_sign_terms.push_back((sigma - 1.0) / (sigma + 1.0));
    else
      e.sign_change_terms.push_back((sigma + 1.0) / (sigma - 1.0));
  }
  // deepest gap, sigma = 1 by convention
  e.same_sign_terms.push_back(0.0);

  e.total = e.set_term;
  for (double x : e.same_sign_terms) e.total += x;
  for (double x : e.sign_change_terms) e.total += x;
  return e;
}

// Interior zeros: exactly one per sign-changing linear piece.
inline std::size_t count_zeros(const TowerProfile& tower) {
  std::size_t zeros = 0;
  for (const auto& p : tower.pieces()) {
    if (p.kind != TowerPiece::kLinear) continue;
    if (!(p.t_lo > 0.0) || p.t_hi == std::numeric_limits<double>::infinity())
      continue;
    if (p.eval(p.t_lo) * p.eval(p.t_hi) < 0.0) ++zeros;
  }
  return zeros;
}

// ---------------------------------------------------------------------------
// Flux jumps of a point-set tower: q_j is the jump of the t-derivative
// across t_j (shallow-side slope minus deep-side slope), so that
// integral mu' phi' r dr = sum_j q_j phi(a_j) for smooth radial phi
// vanishing at r = 1.

struct FluxJump {
  double t = 0.0;
  double q = 0.0;
};

inline std::vector<FluxJump> flux_jumps(const TowerProfile& tower) {
  if (!tower.set().is_point_set())
    throw SpecError("flux_jumps: tower must be built from a finite point set");
  std::vector<FluxJump> jumps;
  const auto& pieces = tower.pieces();
  // pieces alternate linear segments between the points; point j sits at the
  // junction of pieces[k] and pieces[k+1]
  for (std::size_t k = 0; k + 1 < pieces.size(); ++k) {
    const double t = pieces[k].t_hi;
    FluxJump j;
    j.t = t;
    j.q = pieces[k].slope(t) - pieces[k + 1].slope(t);
    jumps.push_back(j);
  }
  // canonical set order is t descending
  std::reverse(jumps.begin(), jumps.end());
  return jumps;
}

// ---------------------------------------------------------------------------
// Level design: n points with all interior gap ratios equal to gamma,
// (gamma-1)/(gamma+1) = (target-1)/(n-1), anchored at t_n = 1. The built
// tower's closed-form energy equals the target.

inline SignedClosedSet design_level(std::size_t n, double target) {
  if (n < 2) throw SpecError("design_level: need n >= 2");
  if (!(target > 1.0) || !(target < static_cast<double>(n)))
    throw SpecError("design_level: target must lie in (1, n)");
  const double rho = (target - 1.0) / (static_cast<double>(n) - 1.0);
  const double gamma = (1.0 + rho) / (1.0 - rho);
  std::vector<double> pts(n);
  std::vector<int> signs(n, +1);
  double t = 1.0;
  for (std::size_t j = n; j-- > 0;) {
    pts[j] = t;
    t *= gamma * gamma;
  }
  return SignedClosedSet::from_points(pts, signs);
}

// ---------------------------------------------------------------------------
// Sampling onto a grid. The grid must contain every junction as a node
// (chord quadrature is then exact on the linear pieces) and reach past the
// deepest point.

inline SampledRadialFunction sample(const TowerProfile& tower,
                                    const LogGrid& grid) {
  if (grid.t_max() < tower.deepest_t() + 1.0)
    throw SpecError("sample: grid does not cover the tower support plus margin");
  const auto junctions = tower.set().junctions();
  const auto& nodes = grid.nodes();
  std::size_t at = 0;
  for (double j : junctions) {
    while (at < nodes.size() && nodes[at] < j - 1e-12) ++at;
    if (at >= nodes.size() || std::abs(nodes[at] - j) > 1e-12)
      throw SpecError("sample: grid is missing kink node at t=" +
                      std::to_string(j));
  }
  std::vector<double> v(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i)
    v[i] = tower.evaluate(nodes[i]);
  return SampledRadialFunction(grid, std::move(v));
}

// Default acceptance-grade grid: uniform with t_max = 2 * deepest + 10 and
// 2^18 + 1 nodes, kinks inserted.
inline LogGrid default_tower_grid(const TowerProfile& tower,
                                  std::size_t n = (1u << 18) + 1) {
  const double t_max = 2.0 * tower.deepest_t() + 10.0;
  return grid_with_nodes(t_max, n, tower.set().junctions());
}

}  // namespace tmlab
