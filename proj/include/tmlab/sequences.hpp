#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tmlab/corrections.hpp"
#include "tmlab/dilation.hpp"
#include "tmlab/functional.hpp"
#include "tmlab/orlicz.hpp"
#include "tmlab/quadrature.hpp"
#include "tmlab/towers.hpp"

// Synthesis of divergent critical sequences u_s = delta_{1/s}(mu_C + v_s)
// and their per-scale diagnostics. Everything is computed in deflated
// coordinates: the iterate is stored as w = mu + v on a fixed grid together
// with the scale s, the change of variables is exact, and every integral
// carries the bounded exponent s (4 pi w^2 - 2 eta) instead of quantities
// that overflow in r coordinates already at s ~ 10^2.

namespace tmlab {

// A blow-up iterate in deflated coordinates. Deflating delta_{1/s} w back by
// delta_s is the identity on this representation, bit for bit.
struct DeflatedIterate {
  double s = 0.0;
  SampledRadialFunction w;  // mu + v
  SampledRadialFunction v;  // correction alone
  bool corrections_converged = true;
};

// ---------------------------------------------------------------------------
// Deflated evaluators.

// (1/8 pi) integral_B F(u_s) dx = (s/4) integral F(sqrt(s) w) e^{-2 s eta}
// d eta.
inline double deflated_nonlinear_mass(const SampledRadialFunction& w, double s,
                                      const Nonlinearity& nl) {
  const auto& eta = w.grid().nodes();
  std::vector<double> vals(eta.size(), 0.0);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double x = std::sqrt(s) * w.value(i);
    if (x == 0.0) continue;
    const double lf = log_big_F(nl, x) - 2.0 * s * eta[i];
    if (lf > 700.0)
      throw NumericError("deflated_nonlinear_mass: integrand overflows");
    vals[i] = lf < -745.0 ? 0.0 : std::exp(lf);
  }
  return 0.25 * s * trapezoid(w.grid(), vals);
}

// Criticality residual in original coordinates, evaluated through the
// deflated representation:
//   s * integral | -w'(eta)/sqrt(s) + s * inner(eta) |^2 e^{-2 s eta} d eta,
//   inner(eta) = integral_eta^inf g(sqrt(s) w) e^{s(4 pi w^2 - 2 xi)} d xi.
inline double deflated_ap_residual(const SampledRadialFunction& w, double s,
                                   const Nonlinearity& nl) {
  const auto& eta = w.grid().nodes();
  const std::size_t n = eta.size();
  const double sqrt_s = std::sqrt(s);

  std::vector<double> le(n), sgn(n);
  double m = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double g = nl.g(sqrt_s * w.value(i));
    sgn[i] = g >= 0.0 ? 1.0 : -1.0;
    le[i] = (g == 0.0 ? -std::numeric_limits<double>::infinity()
                      : std::log(std::abs(g))) +
            s * (kFourPi * w.value(i) * w.value(i) - 2.0 * eta[i]);
    m = std::max(m, le[i]);
  }
  if (m == -std::numeric_limits<double>::infinity()) m = 0.0;
  if (m > 690.0) throw NumericError("deflated_ap_residual: inner overflow");

  std::vector<double> inner(n, 0.0);
  for (std::size_t i = n - 1; i-- > 0;) {
    const double f0 = sgn[i] * std::exp(le[i] - m);
    const double f1 = sgn[i + 1] * std::exp(le[i + 1] - m);
    inner[i] = inner[i + 1] + 0.5 * (f0 + f1) * (eta[i + 1] - eta[i]);
  }
  const double scale = std::exp(m);

  std::vector<double> integrand(n);
  for (std::size_t i = 0; i < n; ++i) {
    double dw;
    if (i == 0)
      dw = (w.value(1) - w.value(0)) / (eta[1] - eta[0]);
    else if (i + 1 == n)
      dw = (w.value(n - 1) - w.value(n - 2)) / (eta[n - 1] - eta[n - 2]);
    else
      dw = (w.value(i + 1) - w.value(i - 1)) / (eta[i + 1] - eta[i - 1]);
    const double d = -dw / sqrt_s + s * scale * inner[i];
    const double weight = std::exp(-2.0 * s * eta[i]);
    integrand[i] = d * d * weight;
  }
  return s * trapezoid(w.grid(), integrand);
}

// I_s(phi) = integral e^{s(4 pi w^2 - 2 t) + (3/2) log s + log g(sqrt(s) w)}
// phi dt: the pairing whose limit carries the flux jumps and the interval
// density.
inline double deflated_weak_integral(const SampledRadialFunction& w, double s,
                                     const Nonlinearity& nl,
                                     const std::function<double(double)>& phi) {
  const auto& eta = w.grid().nodes();
  std::vector<double> vals(eta.size(), 0.0);
  const double sqrt_s = std::sqrt(s);
  for (std::size_t i = 0; i < eta.size(); ++i) {
    const double g = nl.g(sqrt_s * w.value(i));
    if (!(g > 0.0)) continue;
    const double E = 1.5 * std::log(s) + std::log(g) +
                     s * (kFourPi * w.value(i) * w.value(i) - 2.0 * eta[i]);
    if (E > 700.0)
      throw NumericError("deflated_weak_integral: integrand overflows");
    if (E > -745.0) vals[i] = std::exp(E) * phi(eta[i]);
  }
  return trapezoid(w.grid(), vals);
}

// Fraction of the gradient mass of delta_{1/s} w inside r < rho.
inline double deflated_mass_fraction(const SampledRadialFunction& w, double s,
                                     double rho) {
  const double eta0 = -std::log(rho) / s;
  const auto& eta = w.grid().nodes();
  double total = 0.0, above = 0.0;
  for (std::size_t i = 0; i + 1 < eta.size(); ++i) {
    const double du = w.value(i + 1) - w.value(i);
    const double cell = du * du / (eta[i + 1] - eta[i]);
    total += cell;
    if (eta[i] >= eta0)
      above += cell;
    else if (eta[i + 1] > eta0)
      above += cell * (eta[i + 1] - eta0) / (eta[i + 1] - eta[i]);
  }
  return total > 0.0 ? above / total : 0.0;
}

// ---------------------------------------------------------------------------
// Working grids. The Laplace peaks at set junctions have width gamma/s, far
// below the base spacing at the scales of interest, so the grid is refined
// geometrically around every junction, near eta = 0 (the e^{-2 s eta}
// weight), and across any blend seams.

namespace detail {

// One-sided refinement: uniform sampling out to 10 decay lengths, then a
// gentle geometric fan. The per-decay node count grows like s^{1/4} so the
// trapezoid bias on the peak keeps shrinking along a scale sweep instead of
// saturating at a fixed nodes-per-width floor.
inline void refine_side(std::vector<double>& extra, double center,
                        double decay_length, double max_reach, double sign,
                        double s) {
  const double per_decay =
      std::min(320.0, std::max(24.0, 8.0 * std::pow(s, 0.25)));
  const double h = decay_length / per_decay;
  const int uniform_count = static_cast<int>(10.0 * per_decay);
  double d = 0.0;
  for (int k = 1; k <= uniform_count; ++k) {
    d = h * k;
    if (d > max_reach) return;
    extra.push_back(center + sign * d);
  }
  while (d < max_reach) {
    d *= 1.15;
    extra.push_back(center + sign * d);
  }
}

}  // namespace detail

inline LogGrid sequence_grid(const TowerProfile& tower, double s,
                             std::size_t base_n,
                             const std::vector<Window>& seams = {}) {
  const double t_max = 2.0 * tower.deepest_t() + 10.0;
  const std::vector<double> junctions = tower.set().junctions();
  std::vector<double> extra = junctions;
  // Laplace-peak refinement at every junction, spacing tied to the actual
  // decay rate gamma/s of each side
  for (std::size_t k = 0; k < junctions.size(); ++k) {
    const double t = junctions[k];
    const double left = k > 0 ? junctions[k - 1] : 0.0;
    const double right = k + 1 < junctions.size()
                             ? junctions[k + 1]
                             : std::numeric_limits<double>::infinity();
    const double reach_left =
        0.45 * (t - left);
    const double reach_right =
        std::isinf(right) ? 2.0 : 0.45 * (right - t);
    const double gamma_left = gap_gamma(left, t);
    const double gamma_right = gap_gamma(t, right);
    detail::refine_side(extra, t, gamma_left / s,
                        std::min(reach_left, 60.0 * gamma_left / s), -1.0, s);
    detail::refine_side(extra, t, gamma_right / s,
                        std::min(reach_right, 60.0 * gamma_right / s), +1.0, s);
  }
  // resolve e^{-2 s eta} near the origin
  for (int k = 1; k <= 96; ++k) extra.push_back(k * 0.125 / s);
  // seam windows (interval gluing)
  for (const auto& seam : seams) {
    const double w = seam.width();
    for (int k = 0; k <= 32; ++k)
      extra.push_back(seam.lo + w * k / 32.0);
  }
  return grid_with_nodes(t_max, base_n, extra);
}

// ---------------------------------------------------------------------------
// Iterate assembly.

struct AssemblyOptions {
  std::size_t base_grid_n = (1u << 18) + 1;
  double boundary_scale_exponent = 9.0 / 8.0;  // seam width s^{-bse}
  double window_fraction = 0.4;  // point windows, fraction of adjacent gap
};

// Finite point set: one Laplace-peak correction per point, glued over
// disjoint windows.
inline DeflatedIterate assemble_point_iterate(const TowerProfile& tower,
                                              const Nonlinearity& nl, double s,
                                              const AssemblyOptions& opt = {}) {
  const auto jumps = flux_jumps(tower);  // t descending
  const auto M = compute_M_constants(tower);
  const std::size_t n = jumps.size();
  const LogGrid grid = sequence_grid(tower, s, opt.base_grid_n);

  std::vector<GluePiece> pieces;
  for (std::size_t j = 0; j < n; ++j) {
    const double t = jumps[j].t;
    const double deep_gap =
        j == 0 ? 2.0 / opt.window_fraction : jumps[j - 1].t - t;
    const double shallow_gap = j + 1 < n ? t - jumps[j + 1].t : t;
    const double ext_deep = std::min(opt.window_fraction * deep_gap, 2.0);
    const double ext_shallow = std::min(opt.window_fraction * shallow_gap, 2.0);
    Window support{t - ext_shallow, t + ext_deep};
    Window core{t - 0.5 * ext_shallow, t + 0.5 * ext_deep};
    GluePiece piece{
        solve_point_correction(tower, nl, s, M[j], support, grid),
        Cutoff{support, core}};
    pieces.push_back(std::move(piece));
  }
  const auto v = glue_corrections(pieces, s);

  DeflatedIterate it;
  it.s = s;
  it.corrections_converged = v.all_converged;
  std::vector<double> wv(grid.size()), vv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vv[i] = v.v[i];
    wv[i] = tower.evaluate(grid[i]) + v.v[i];
  }
  it.w = SampledRadialFunction(grid, std::move(wv));
  it.v = SampledRadialFunction(grid, std::move(vv));
  return it;
}

// Single interval: interval correction across the set, peak corrections on
// both adjacent gaps, complementary seams of width s^{-bse} just inside the
// interval endpoints (the gap sides stay pure peak solutions so the full
// Laplace mass is captured; the interval side tolerates the blend).
inline DeflatedIterate assemble_interval_iterate(const TowerProfile& tower,
                                                 const Nonlinearity& nl,
                                                 double s,
                                                 const AssemblyOptions& opt = {}) {
  const auto& iv = tower.set().intervals();
  if (iv.size() != 1 || iv.front().is_point())
    throw SpecError("assemble_interval_iterate: need a single-interval set");
  const double ta = iv.front().t_lo, tb = iv.front().t_hi;

  // one-sided flux jumps at the endpoints
  const double q_a = tower.piece_at(0.5 * ta).slope(ta) -
                     0.5 * kInv2Pi / envelope(ta);
  const double p_b = 0.5 * kInv2Pi / envelope(tb);
  // one-sided Laplace rates: both adjacent gaps are boundary gaps here
  const double M1 = q_a / gap_gamma(0.0, ta);
  const double M2 =
      p_b / gap_gamma(tb, std::numeric_limits<double>::infinity());

  const double seam =
      std::min(std::pow(s, -opt.boundary_scale_exponent), 0.25 * (tb - ta));
  const double d1 = std::min(1.0, 0.4 * ta);
  const double d2 = 1.0;
  Window seam_a{ta, ta + seam}, seam_b{tb - seam, tb};
  const LogGrid grid =
      sequence_grid(tower, s, opt.base_grid_n, {seam_a, seam_b});

  GluePiece shallow{
      solve_point_correction(tower, nl, s, M1,
                             Window{ta - 1.5 * d1, ta + seam}, grid),
      Cutoff{Window{ta - 1.5 * d1, ta + seam}, Window{ta - d1, ta}}};
  GluePiece inside{solve_interval_correction(tower, nl, s, grid),
                   Cutoff{Window{ta, tb}, Window{ta + seam, tb - seam}}};
  GluePiece deep{
      solve_point_correction(tower, nl, s, M2,
                             Window{tb - seam, tb + 1.5 * d2}, grid),
      Cutoff{Window{tb - seam, tb + 1.5 * d2}, Window{tb, tb + d2}}};

  const auto v = glue_corrections({shallow, inside, deep}, s);

  DeflatedIterate it;
  it.s = s;
  it.corrections_converged = v.all_converged;
  std::vector<double> wv(grid.size()), vv(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) {
    vv[i] = v.v[i];
    wv[i] = tower.evaluate(grid[i]) + v.v[i];
  }
  it.w = SampledRadialFunction(grid, std::move(wv));
  it.v = SampledRadialFunction(grid, std::move(vv));
  return it;
}

// ---------------------------------------------------------------------------
// Diagnostics and the sequence driver.

struct ScaleDiagnostics {
  double s = 0.0;
  double J = 0.0;
  double ap_residual = 0.0;
  double nonlinear_mass = 0.0;
  double dirichlet = 0.0;        // |grad u_s|^2 (dilation-invariant)
  double grad_v_sq = 0.0;        // |grad v_s|^2
  double orlicz_remainder = 0.0; // exp-L2 norm of u_s - delta_{1/s} mu_C
  double mass_at_probe = 0.0;    // gradient fraction inside r < 1/e
  std::vector<std::pair<double, double>> mass_profile;  // (rho, fraction)
  double epsilon = 0.0;  // diagonal stages
  double kappa = 0.0;    // diagonal stages
  bool converged = true;
};

struct SequenceSpecification {
  explicit SequenceSpecification(SignedClosedSet set_in)
      : set(std::move(set_in)) {}

  SignedClosedSet set;
  Nonlinearity nl = model_nonlinearity();
  std::vector<double> scales;
  std::vector<double> rho_probes{std::exp(-1.0)};
  std::vector<double> epsilon_schedule;  // diagonal path; default 2^-j
  AssemblyOptions assembly;
  double escalation_cap = 1e8;
};

struct SequenceDiagnostics {
  double target_level = 0.0;  // half the closed-form tower energy
  std::vector<ScaleDiagnostics> stages;
};

namespace detail {

inline ScaleDiagnostics diagnose(const DeflatedIterate& it,
                                 const Nonlinearity& nl,
                                 const std::vector<double>& probes) {
  ScaleDiagnostics d;
  d.s = it.s;
  d.dirichlet = dirichlet_energy(it.w);
  d.grad_v_sq = dirichlet_energy(it.v);
  d.nonlinear_mass = deflated_nonlinear_mass(it.w, it.s, nl);
  d.J = 0.5 * d.dirichlet - d.nonlinear_mass;
  d.ap_residual = deflated_ap_residual(it.w, it.s, nl);
  d.orlicz_remainder = orlicz_exp_l2_norm_deflated(it.v, it.s);
  d.mass_at_probe = deflated_mass_fraction(it.w, it.s, std::exp(-1.0));
  for (double rho : probes)
    d.mass_profile.emplace_back(rho,
                                deflated_mass_fraction(it.w, it.s, rho));
  d.converged = it.corrections_converged;
  return d;
}

// Negative-definite sets are handled through the symmetry u -> -u (odd g).
inline SignedClosedSet positive_mirror(const SignedClosedSet& set) {
  std::vector<SignedInterval> spans;
  for (auto iv : set.intervals()) {
    iv.sign = +1;
    spans.push_back(iv);
  }
  return SignedClosedSet::from_intervals(spans);
}

}  // namespace detail

inline DeflatedIterate assemble_iterate(const TowerProfile& tower,
                                        const Nonlinearity& nl, double s,
                                        const AssemblyOptions& opt = {}) {
  if (tower.set().is_point_set())
    return assemble_point_iterate(tower, nl, s, opt);
  if (tower.set().size() == 1)
    return assemble_interval_iterate(tower, nl, s, opt);
  throw SpecError(
      "assemble_iterate: direct assembly handles point sets and single "
      "intervals; other sets go through the diagonal approximation");
}

inline SequenceDiagnostics generate_sequence(const SequenceSpecification& spec) {
  if (spec.scales.size() < 3)
    throw SpecError("generate_sequence: need at least 3 scales for trends");
  for (std::size_t i = 0; i + 1 < spec.scales.size(); ++i)
    if (!(spec.scales[i] < spec.scales[i + 1]))
      throw SpecError("generate_sequence: scales must be strictly increasing");
  if (!spec.set.is_sign_definite())
    throw SpecError(
        "generate_sequence: nodal (sign-changing) critical sequences are out "
        "of scope");
  const bool negated = spec.set.intervals().front().sign < 0;
  const SignedClosedSet set =
      negated ? detail::positive_mirror(spec.set) : spec.set;
  const auto tower = build_tower(set);

  SequenceDiagnostics out;
  out.target_level = 0.5 * energy_closed_form(tower).total;

  const bool direct = set.is_point_set() || set.size() == 1;
  if (direct) {
    for (double s : spec.scales) {
      double scale = s;
      DeflatedIterate it;
      for (;;) {
        it = assemble_iterate(tower, spec.nl, scale, spec.assembly);
        if (it.corrections_converged || scale * 10.0 > spec.escalation_cap)
          break;
        scale *= 10.0;  // the construction only promises behavior for large s
      }
      if (!it.corrections_converged)
        throw NumericError(
            "generate_sequence: corrections failed to converge below the "
            "scale escalation cap");
      out.stages.push_back(detail::diagnose(it, spec.nl, spec.rho_probes));
    }
    return out;
  }

  // Diagonal path: finite approximants C_eps with shrinking eps, scale per
  // stage escalated until the criticality residual passes 1/j.
  std::vector<double> eps = spec.epsilon_schedule;
  if (eps.empty())
    for (int j = 1; j <= 5; ++j) eps.push_back(std::pow(2.0, -j));
  for (std::size_t j = 0; j < eps.size(); ++j) {
    const auto approx = finite_approximant(set, eps[j]);
    const auto stage_tower = build_tower(approx);
    const double ap_target = 1.0 / static_cast<double>(j + 1);
    // deep approximant stages have nearly degenerate gap ratios whose
    // Laplace widths shrink only like 1/s; the correction gradient is the
    // reliable witness that s has reached the asymptotic regime
    const double grad_target = 1e-2;
    double scale = spec.scales[std::min(j, spec.scales.size() - 1)];
    ScaleDiagnostics d;
    for (;;) {
      const auto it =
          assemble_point_iterate(stage_tower, spec.nl, scale, spec.assembly);
      d = detail::diagnose(it, spec.nl, spec.rho_probes);
      const bool ok = it.corrections_converged &&
                      d.ap_residual <= ap_target &&
                      d.grad_v_sq <= grad_target;
      if (ok) break;
      if (scale * 10.0 > spec.escalation_cap)
        throw NumericError(
            "generate_sequence: diagonal stage missed its residual target "
            "below the escalation cap");
      scale *= 10.0;
    }
    d.epsilon = eps[j];
    d.kappa = kappa_bound(set, approx);
    out.stages.push_back(d);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Weak-convergence check: I_s(phi) against the structural limit.

struct WeakTestFunction {
  std::string name;
  std::function<double(double)> phi;  // of t
};

struct WeakConvergenceReport {
  std::vector<double> targets;               // one per test function
  std::vector<double> scales;                // one per row
  std::vector<std::vector<double>> values;   // [scale][test function]
};

inline double weak_limit_target(const TowerProfile& tower,
                                const std::function<double(double)>& phi) {
  if (tower.set().is_point_set()) {
    double sum = 0.0;
    for (const auto& j : flux_jumps(tower)) sum += j.q * phi(j.t);
    return sum;
  }
  const auto& iv = tower.set().intervals();
  if (iv.size() != 1)
    throw SpecError("weak_limit_target: point sets and single intervals only");
  const double ta = iv.front().t_lo, tb = iv.front().t_hi;
  const double q_a =
      tower.piece_at(0.5 * ta).slope(ta) - 0.5 * kInv2Pi / envelope(ta);
  const double p_b = 0.5 * kInv2Pi / envelope(tb);
  // absolutely continuous part: integral phi / (4 sqrt(2 pi) t^{3/2}) dt
  const double c = 0.25 / std::sqrt(2.0 * M_PI);
  const int n = 20000;
  double acc = 0.0;
  for (int k = 0; k < n; ++k) {
    const double x0 = ta + (tb - ta) * k / n;
    const double x1 = ta + (tb - ta) * (k + 1) / n;
    acc += 0.5 *
           (phi(x0) / std::pow(x0, 1.5) + phi(x1) / std::pow(x1, 1.5)) *
           (x1 - x0);
  }
  return p_b * phi(tb) + q_a * phi(ta) + c * acc;
}

inline WeakConvergenceReport weak_convergence_check(
    const SequenceSpecification& spec,
    const std::vector<WeakTestFunction>& phis) {
  const auto tower = build_tower(spec.set);
  WeakConvergenceReport rep;
  for (const auto& tf : phis)
    rep.targets.push_back(weak_limit_target(tower, tf.phi));
  for (double s : spec.scales) {
    const auto it = assemble_iterate(tower, spec.nl, s, spec.assembly);
    std::vector<double> row;
    for (const auto& tf : phis)
      row.push_back(deflated_weak_integral(it.w, s, spec.nl, tf.phi));
    rep.scales.push_back(s);
    rep.values.push_back(std::move(row));
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Multi-bump superposition: sum of dilated towers at one center with
// log-separated scales. Reports the energy bookkeeping that pins the level
// to half the sum of the bump energies.

struct MultibumpReport {
  double total_energy = 0.0;     // |grad sum|^2 by quadrature
  double sum_of_energies = 0.0;  // sum of closed-form bump energies
  double gap = 0.0;              // |total - sum|
  SampledRadialFunction profile;
};

inline MultibumpReport multibump(const std::vector<TowerProfile>& towers,
                                 const std::vector<double>& scales,
                                 double min_separation = std::log(10.0)) {
  if (towers.size() != scales.size() || towers.empty())
    throw SpecError("multibump: need one scale per tower");
  for (std::size_t p = 0; p < scales.size(); ++p) {
    if (!(scales[p] > 0.0)) throw SpecError("multibump: scales must be positive");
    for (std::size_t q = p + 1; q < scales.size(); ++q)
      if (std::abs(std::log(scales[p]) - std::log(scales[q])) <
          min_separation - 1e-12)
        throw SpecError("multibump: insufficient scale separation");
  }
  double t_max = 0.0, t_fine = std::numeric_limits<double>::infinity();
  std::vector<double> kinks;
  for (std::size_t p = 0; p < towers.size(); ++p) {
    for (double j : towers[p].set().junctions()) {
      kinks.push_back(scales[p] * j);
      t_fine = std::min(t_fine, scales[p] * j);
    }
    t_max = std::max(t_max, scales[p] * (towers[p].deepest_t() + 10.0));
  }
  // the summands are affine between consecutive kink images, so chord
  // quadrature on any grid containing the kinks is exact; the geometric
  // base just gives the profile a usable resolution at every scale
  LogGrid base = make_geometric_grid(std::max(t_fine * 1e-3, 1e-9), t_max,
                                     1u << 15);
  std::vector<double> nodes = base.nodes();
  nodes.insert(nodes.end(), kinks.begin(), kinks.end());
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> merged;
  for (double t : nodes)
    if (merged.empty() || t - merged.back() > 1e-15 * std::max(1.0, t))
      merged.push_back(t);
  const LogGrid grid{std::move(merged)};

  std::vector<double> vals(grid.size(), 0.0);
  for (std::size_t p = 0; p < towers.size(); ++p) {
    const double amp = std::sqrt(scales[p]);
    for (std::size_t i = 0; i < grid.size(); ++i)
      vals[i] += amp * towers[p].evaluate(grid[i] / scales[p]);
  }
  MultibumpReport rep;
  rep.profile = SampledRadialFunction(grid, std::move(vals));
  rep.total_energy = dirichlet_energy(rep.profile);
  for (const auto& tw : towers)
    rep.sum_of_energies += energy_closed_form(tw).total;
  rep.gap = std::abs(rep.total_energy - rep.sum_of_energies);
  return rep;
}

}  // namespace tmlab
