#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "tmlab/errors.hpp"

// Canonical representation of the disjoint signed closed sets (C+, C-) in
// (0,1) that index tower profiles, their complement gap structure, and the
// finite boundary-point approximants used by the diagonal construction.
//
// Everything is stored in t = log(1/r). An interval [t_lo, t_hi] with
// t_lo == t_hi is a point. Canonical order is t descending (r ascending).

namespace tmlab {

struct SignedInterval {
  double t_lo = 0.0;
  double t_hi = 0.0;
  int sign = +1;

  bool is_point() const { return t_lo == t_hi; }
  double t_length() const { return t_hi - t_lo; }
  // r-measure of [e^{-t_hi}, e^{-t_lo}]
  double r_measure() const { return std::exp(-t_lo) - std::exp(-t_hi); }
};

// Open complement interval in t. The component reaching r = 0 is stored with
// t_hi = +infinity.
struct Gap {
  double t_lo = 0.0;
  double t_hi = 0.0;

  bool unbounded() const { return std::isinf(t_hi); }
  double r_length() const {
    return std::exp(-t_lo) - (unbounded() ? 0.0 : std::exp(-t_hi));
  }
};

struct GapList {
  std::vector<Gap> gaps;  // ascending in t: boundary gap at t=0 first,
                          // unbounded gap last
};

class SignedClosedSet {
public:
  static constexpr double kMinGap = 1e-9;

  static SignedClosedSet from_intervals(std::vector<SignedInterval> spans) {
    return SignedClosedSet(std::move(spans));
  }

  static SignedClosedSet from_points(const std::vector<double>& t_values,
                                     const std::vector<int>& signs) {
    if (t_values.size() != signs.size())
      throw SpecError("from_points: t and sign lists differ in length");
    std::vector<SignedInterval> spans;
    spans.reserve(t_values.size());
    for (std::size_t i = 0; i < t_values.size(); ++i)
      spans.push_back({t_values[i], t_values[i], signs[i]});
    // duplicate points are an error rather than a merge
    std::vector<double> sorted = t_values;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i + 1 < sorted.size(); ++i)
      if (!(sorted[i + 1] - sorted[i] > 0.0))
        throw SpecError("from_points: duplicate point t=" +
                        std::to_string(sorted[i]));
    return SignedClosedSet(std::move(spans));
  }

  // Middle-thirds iterate in t on [t_lo, t_hi]: 2^depth closed
  // sub-intervals, all sign +1, total t-length (2/3)^depth (t_hi - t_lo).
  // A computable stand-in for a measure-zero compact set.
  static SignedClosedSet cantor(double t_lo, double t_hi, unsigned depth) {
    if (!(t_lo > 0.0) || !(t_hi > t_lo) || !std::isfinite(t_hi))
      throw SpecError("cantor: need 0 < t_lo < t_hi finite");
    std::vector<std::pair<double, double>> pieces{{t_lo, t_hi}};
    for (unsigned d = 0; d < depth; ++d) {
      std::vector<std::pair<double, double>> next;
      next.reserve(pieces.size() * 2);
      for (auto [a, b] : pieces) {
        const double third = (b - a) / 3.0;
        next.emplace_back(a, a + third);
        next.emplace_back(b - third, b);
      }
      pieces = std::move(next);
    }
    std::vector<SignedInterval> spans;
    spans.reserve(pieces.size());
    for (auto [a, b] : pieces) spans.push_back({a, b, +1});
    return SignedClosedSet(std::move(spans));
  }

  // Intervals in canonical order, t descending.
  const std::vector<SignedInterval>& intervals() const { return intervals_; }
  std::size_t size() const { return intervals_.size(); }

  double deepest_t() const { return intervals_.front().t_hi; }
  double shallowest_t() const { return intervals_.back().t_lo; }

  bool is_point_set() const {
    for (const auto& iv : intervals_)
      if (!iv.is_point()) return false;
    return true;
  }

  bool is_sign_definite() const {
    for (const auto& iv : intervals_)
      if (iv.sign != intervals_.front().sign) return false;
    return true;
  }

  double r_measure() const {
    double m = 0.0;
    for (const auto& iv : intervals_) m += iv.r_measure();
    return m;
  }

  // All kink locations of the associated tower (interval endpoints, points
  // once).
  std::vector<double> junctions() const {
    std::vector<double> j;
    for (const auto& iv : intervals_) {
      j.push_back(iv.t_lo);
      if (!iv.is_point()) j.push_back(iv.t_hi);
    }
    std::sort(j.begin(), j.end());
    return j;
  }

private:
  explicit SignedClosedSet(std::vector<SignedInterval> spans)
      : intervals_(std::move(spans)) {
    if (intervals_.empty())
      throw SpecError("SignedClosedSet: set must be nonempty");
    for (const auto& iv : intervals_) {
      if (!(iv.t_lo > 0.0) || !std::isfinite(iv.t_hi) || !(iv.t_hi >= iv.t_lo))
        throw SpecError("SignedClosedSet: intervals need 0 < t_lo <= t_hi < inf");
      if (iv.sign != 1 && iv.sign != -1)
        throw SpecError("SignedClosedSet: sign must be +1 or -1");
    }
    std::sort(intervals_.begin(), intervals_.end(),
              [](const SignedInterval& a, const SignedInterval& b) {
                return a.t_lo > b.t_lo;
              });
    for (std::size_t i = 0; i + 1 < intervals_.size(); ++i) {
      const auto& deep = intervals_[i];
      const auto& shallow = intervals_[i + 1];
      const double gap = deep.t_lo - shallow.t_hi;
      if (gap < kMinGap) {
        if (deep.sign != shallow.sign && gap <= 0.0)
          throw SpecError(
              "SignedClosedSet: touching spans of opposite sign violate "
              "C+ and C- disjointness");
        throw SpecError("SignedClosedSet: spans overlap or touch (gap < 1e-9)");
      }
    }
  }

  std::vector<SignedInterval> intervals_;
};

// Image of the set under t -> lambda t (the dilation delta_{1/lambda} on
// index sets).
inline SignedClosedSet scale_set(const SignedClosedSet& set, double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw SpecError("scale_set: factor must be positive and finite");
  std::vector<SignedInterval> spans;
  for (auto iv : set.intervals()) {
    iv.t_lo *= lambda;
    iv.t_hi *= lambda;
    spans.push_back(iv);
  }
  return SignedClosedSet::from_intervals(spans);
}

// Complement components, ascending in t. Always includes the gap adjacent
// to t = 0 (r = 1) and the unbounded gap adjacent to t = infinity (r = 0).
inline GapList gaps(const SignedClosedSet& set) {
  GapList out;
  const auto& iv = set.intervals();
  out.gaps.push_back({0.0, iv.back().t_lo});
  for (std::size_t i = iv.size(); i-- > 1;)
    out.gaps.push_back({iv[i].t_hi, iv[i - 1].t_lo});
  out.gaps.push_back({iv.front().t_hi,
                      std::numeric_limits<double>::infinity()});
  return out;
}

// Finite boundary-point approximant: select complement gaps greedily by
// decreasing r-length (both boundary gaps forced in) until the selected
// r-length reaches 1 - epsilon, then return the finite endpoints of the
// selected gaps with signs inherited from the adjacent set intervals.
// Fails when the complement cannot reach 1 - epsilon, i.e. the set has
// r-measure above epsilon: that is the positive-measure case where this
// approximation path does not apply.
inline SignedClosedSet finite_approximant(const SignedClosedSet& set,
                                          double epsilon) {
  if (!(epsilon > 0.0) || !(epsilon < 1.0))
    throw SpecError("finite_approximant: need 0 < epsilon < 1");
  const GapList gl = gaps(set);
  const std::size_t ngap = gl.gaps.size();
  std::vector<char> selected(ngap, 0);
  selected.front() = 1;
  selected.back() = 1;
  double covered = gl.gaps.front().r_length() + gl.gaps.back().r_length();
  if (ngap == 2 && covered + 1e-12 < 1.0 - epsilon)
    throw SpecError(
        "finite_approximant: set of positive measure (epsilon below the set's "
        "r-measure); use the interval construction instead");

  std::vector<std::size_t> interior(ngap > 2 ? ngap - 2 : 0);
  for (std::size_t k = 0; k < interior.size(); ++k) interior[k] = k + 1;
  std::sort(interior.begin(), interior.end(),
            [&](std::size_t a, std::size_t b) {
              const double la = gl.gaps[a].r_length();
              const double lb = gl.gaps[b].r_length();
              if (la != lb) return la > lb;
              return gl.gaps[a].t_lo < gl.gaps[b].t_lo;
            });
  std::size_t next = 0;
  while (covered + 1e-12 < 1.0 - epsilon) {
    if (next >= interior.size())
      throw SpecError(
          "finite_approximant: set of positive measure (epsilon below the "
          "set's r-measure); use the interval construction instead");
    selected[interior[next]] = 1;
    covered += gl.gaps[interior[next]].r_length();
    ++next;
  }

  // Map each finite selected-gap endpoint to the sign of the set interval it
  // belongs to.
  const auto& iv = set.intervals();
  auto sign_at = [&](double t) {
    for (const auto& s : iv)
      if (t >= s.t_lo - 1e-12 && t <= s.t_hi + 1e-12) return s.sign;
    throw SpecError("finite_approximant: internal endpoint lookup failure");
  };
  std::vector<double> pts;
  std::vector<int> signs;
  auto push = [&](double t) {
    for (double p : pts)
      if (p == t) return;
    pts.push_back(t);
    signs.push_back(sign_at(t));
  };
  for (std::size_t k = 0; k < ngap; ++k) {
    if (!selected[k]) continue;
    if (gl.gaps[k].t_lo > 0.0) push(gl.gaps[k].t_lo);
    if (!gl.gaps[k].unbounded()) push(gl.gaps[k].t_hi);
  }
  return SignedClosedSet::from_points(pts, signs);
}

// kappa_epsilon = (2 / sqrt(t of sup C)) * sum over unselected gaps of
// (sqrt(t_hi) - sqrt(t_lo)); an upper bound for the energy of
// mu_C - mu_{C_eps}. A gap counts as selected when all of its finite
// endpoints survive into the approximant.
inline double kappa_bound(const SignedClosedSet& set,
                          const SignedClosedSet& approximant) {
  if (!approximant.is_point_set())
    throw SpecError("kappa_bound: approximant must be a finite point set");
  // every approximant point must be a junction of the set
  const std::vector<double> junctions = set.junctions();
  auto is_junction = [&](double t) {
    for (double j : junctions)
      if (std::abs(j - t) <= 1e-12) return true;
    return false;
  };
  for (const auto& p : approximant.intervals())
    if (!is_junction(p.t_lo))
      throw SpecError("kappa_bound: approximant point " +
                      std::to_string(p.t_lo) +
                      " is not a boundary point of the set");
  auto in_approx = [&](double t) {
    for (const auto& p : approximant.intervals())
      if (std::abs(p.t_lo - t) <= 1e-12) return true;
    return false;
  };
  const GapList gl = gaps(set);
  double sum = 0.0;
  for (const auto& g : gl.gaps) {
    const bool lo_ok = g.t_lo == 0.0 || in_approx(g.t_lo);
    const bool hi_ok = g.unbounded() || in_approx(g.t_hi);
    if (lo_ok && hi_ok) continue;
    if (g.unbounded() || g.t_lo == 0.0)
      throw SpecError("kappa_bound: boundary gap missing from approximant");
    sum += std::sqrt(g.t_hi) - std::sqrt(g.t_lo);
  }
  return 2.0 / std::sqrt(set.shallowest_t()) * sum;
}

}  // namespace tmlab
