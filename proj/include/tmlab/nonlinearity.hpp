#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "tmlab/errors.hpp"

// Critical-growth nonlinearities f(u) = 8 pi g(u) e^{4 pi u^2}, supplied
// through g and g'. The growth conditions (sign condition at large |t|,
// decay of g'/(g t), vanishing of F/(f t)) are asserted by the provider and
// spot-checked, not proven.

namespace tmlab {

inline constexpr double kFourPi = 4.0 * M_PI;

struct Nonlinearity {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> g_prime;
  // closed-form antiderivative F(u) = integral_0^u 8 pi g(tau) e^{4 pi
  // tau^2} d tau when available; otherwise F is computed by adaptive
  // quadrature
  std::function<double(double)> F_closed;
  double sign_threshold = 1.0;  // T in the sign condition
};

// The typical example g(t) = t, for which f(u) = 8 pi u e^{4 pi u^2} and
// F(u) = e^{4 pi u^2} - 1: the model functional.
inline Nonlinearity model_nonlinearity() {
  Nonlinearity nl;
  nl.name = "model";
  nl.g = [](double t) { return t; };
  nl.g_prime = [](double) { return 1.0; };
  nl.F_closed = [](double u) { return std::expm1(kFourPi * u * u); };
  nl.sign_threshold = 0.1;
  return nl;
}

// g(t) = t^3; F(u) = u^2 e^{4 pi u^2} - expm1(4 pi u^2)/(4 pi).
inline Nonlinearity cubic_nonlinearity() {
  Nonlinearity nl;
  nl.name = "cubic";
  nl.g = [](double t) { return t * t * t; };
  nl.g_prime = [](double t) { return 3.0 * t * t; };
  nl.F_closed = [](double u) {
    const double x = kFourPi * u * u;
    return u * u * std::exp(x) - std::expm1(x) / kFourPi;
  };
  nl.sign_threshold = 0.1;
  return nl;
}

inline Nonlinearity nonlinearity_by_name(const std::string& name) {
  if (name == "model") return model_nonlinearity();
  if (name == "cubic") return cubic_nonlinearity();
  throw SpecError("unknown nonlinearity: " + name);
}

namespace detail {

// Adaptive Simpson for F when no closed form is given. The integrand is
// smooth and one-signed on the ranges we ever integrate (|u| small enough
// that e^{4 pi u^2} is representable).
template <typename F>
double adaptive_simpson(F&& f, double a, double b, double fa, double fm,
                        double fb, double whole, double tol, int depth) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
  const double flm = f(lm), frm = f(rm);
  const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  const double delta = left + right - whole;
  if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
    return left + right + delta / 15.0;
  return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
         adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

template <typename F>
double integrate_adaptive(F&& f, double a, double b, double rel_tol) {
  if (a == b) return 0.0;
  const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  const double tol = std::max(std::abs(whole), 1.0) * rel_tol;
  return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48);
}

}  // namespace detail

inline double big_F(const Nonlinearity& nl, double u) {
  if (nl.F_closed) return nl.F_closed(u);
  if (kFourPi * u * u > 700.0)
    throw NumericError("big_F: argument overflows without a closed form");
  auto f = [&](double t) { return 8.0 * M_PI * nl.g(t) * std::exp(kFourPi * t * t); };
  return detail::integrate_adaptive(f, 0.0, u, 1e-10);
}

// log of F(u) for large positive u, where F(u) ~ g(u) e^{4 pi u^2} / u
// (endpoint Laplace asymptotics; relative error O(1/u^2)).
inline double log_big_F(const Nonlinearity& nl, double u) {
  if (u < 0.0) u = -u;  // F is even under the (g1) sign structure
  if (kFourPi * u * u <= 600.0) {
    const double v = big_F(nl, u);
    return v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
  }
  return kFourPi * u * u + std::log(nl.g(u)) - std::log(u);
}

// Spot checks of the growth conditions on a log-spaced sample.
inline bool check_growth_conditions(const Nonlinearity& nl,
                                    std::string* why = nullptr) {
  const double T = nl.sign_threshold;
  double prev_ratio = std::numeric_limits<double>::infinity();
  for (double t = T; t <= 64.0 * T; t *= 2.0) {
    if (!(nl.g(t) > 0.0) || !(nl.g(-t) < 0.0)) {
      if (why) *why = "sign condition fails at |t|=" + std::to_string(t);
      return false;
    }
    const double ratio = std::abs(nl.g_prime(t) / (nl.g(t) * t));
    if (ratio > prev_ratio + 1e-12) {
      if (why) *why = "g'/(g t) not decreasing at t=" + std::to_string(t);
      return false;
    }
    prev_ratio = ratio;
  }
  return true;
}

}  // namespace tmlab
