#pragma once

#include <cmath>
#include <vector>

#include "tmlab/grid.hpp"

namespace tmlab {

// Monotone cubic (Fritsch-Carlson) interpolant. Preserves piecewise
// monotonicity, so dilated towers pick up no spurious oscillation at kinks,
// and reproduces affine runs of the data exactly.
class PchipInterpolant {
public:
  explicit PchipInterpolant(const SampledRadialFunction& u)
      : grid_(u.grid()), y_(u.values()) {
    const std::size_t n = grid_.size();
    const auto& x = grid_.nodes();
    std::vector<double> h(n - 1), m(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      h[i] = x[i + 1] - x[i];
      m[i] = (y_[i + 1] - y_[i]) / h[i];
    }
    d_.assign(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (m[i - 1] * m[i] <= 0.0) {
        d_[i] = 0.0;
      } else {
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        d_[i] = (w1 + w2) / (w1 / m[i - 1] + w2 / m[i]);
      }
    }
    d_.front() = endpoint_slope(h[0], h[1], m[0], m[1]);
    d_.back() = endpoint_slope(h[n - 2], h[n - 3], m[n - 2], m[n - 3]);
  }

  // Evaluate with constant extension outside the grid.
  double operator()(double t) const {
    const auto& x = grid_.nodes();
    if (t <= x.front()) return y_.front();
    if (t >= x.back()) return y_.back();
    const std::size_t i = grid_.cell_of(t);
    const double h = x[i + 1] - x[i];
    const double s = (t - x[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    const double h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    const double h10 = s3 - 2.0 * s2 + s;
    const double h01 = -2.0 * s3 + 3.0 * s2;
    const double h11 = s3 - s2;
    return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
  }

private:
  static double endpoint_slope(double h0, double h1, double m0, double m1) {
    double d = ((2.0 * h0 + h1) * m0 - h0 * m1) / (h0 + h1);
    if (d * m0 <= 0.0) return 0.0;
    if (m0 * m1 < 0.0 && std::abs(d) > 3.0 * std::abs(m0)) return 3.0 * m0;
    return d;
  }

  LogGrid grid_;
  std::vector<double> y_;
  std::vector<double> d_;
};

}  // namespace tmlab
