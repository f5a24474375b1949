#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "tmlab/errors.hpp"

// Log-coordinate grids and sampled radial functions.
//
// Everything downstream works in the coordinate t = log(1/r), where r is the
// radius in the unit disk. Radii like e^{-81} underflow in r but are benign
// in t, so r never appears internally; it is reconstructed only for CSV
// output.

namespace tmlab {

class LogGrid {
public:
  LogGrid() = default;

  explicit LogGrid(std::vector<double> nodes) : nodes_(std::move(nodes)) {
    validate();
  }

  const std::vector<double>& nodes() const { return nodes_; }
  std::size_t size() const { return nodes_.size(); }
  double operator[](std::size_t i) const { return nodes_[i]; }
  double t_min() const { return nodes_.front(); }
  double t_max() const { return nodes_.back(); }

  // Index of the last node <= t (clamped to [0, size-2] so that the cell
  // [i, i+1] is always valid).
  std::size_t cell_of(double t) const {
    auto it = std::upper_bound(nodes_.begin(), nodes_.end(), t);
    std::size_t i = static_cast<std::size_t>(it - nodes_.begin());
    if (i > 0) --i;
    if (i + 1 >= nodes_.size()) i = nodes_.size() - 2;
    return i;
  }

  bool same_nodes(const LogGrid& other) const {
    return nodes_ == other.nodes_;
  }

private:
  void validate() const {
    if (nodes_.size() < 3) throw SpecError("LogGrid: need at least 3 nodes");
    if (!(nodes_.front() >= 0.0))
      throw SpecError("LogGrid: t_min must be >= 0");
    for (std::size_t i = 0; i + 1 < nodes_.size(); ++i) {
      if (!(nodes_[i] < nodes_[i + 1]) || !std::isfinite(nodes_[i + 1]))
        throw SpecError("LogGrid: nodes must be finite and strictly increasing");
    }
  }

  std::vector<double> nodes_;
};

inline LogGrid make_uniform_grid(double t_max, std::size_t n) {
  if (!std::isfinite(t_max) || t_max <= 0.0)
    throw SpecError("make_uniform_grid: t_max must be finite and positive");
  if (n < 3) throw SpecError("make_uniform_grid: need at least 3 nodes");
  std::vector<double> nodes(n);
  const double h = t_max / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) nodes[i] = h * static_cast<double>(i);
  nodes.back() = t_max;
  return LogGrid(std::move(nodes));
}

// Uniform grid with extra nodes inserted (kink locations of piecewise
// integrands go here so the trapezoid rule never straddles a derivative
// jump). Values closer than `tol` to an existing node are dropped.
inline LogGrid grid_with_nodes(double t_max, std::size_t n,
                               const std::vector<double>& extra,
                               double tol = 1e-12) {
  LogGrid base = make_uniform_grid(t_max, n);
  std::vector<double> nodes = base.nodes();
  std::vector<double> add;
  for (double t : extra) {
    if (!(t > 0.0) || !(t < t_max)) continue;
    add.push_back(t);
  }
  std::sort(add.begin(), add.end());
  nodes.insert(nodes.end(), add.begin(), add.end());
  std::sort(nodes.begin(), nodes.end());
  std::vector<double> merged;
  merged.reserve(nodes.size());
  for (double t : nodes) {
    if (merged.empty() || t - merged.back() > tol) merged.push_back(t);
  }
  return LogGrid(std::move(merged));
}

// Geometrically spaced nodes on [t_lo, t_max] with t = 0 prepended. Used
// where several widely separated scales must be resolved at once.
inline LogGrid make_geometric_grid(double t_lo, double t_max, std::size_t n) {
  if (!(t_lo > 0.0) || !(t_max > t_lo))
    throw SpecError("make_geometric_grid: need 0 < t_lo < t_max");
  if (n < 3) throw SpecError("make_geometric_grid: need at least 3 nodes");
  std::vector<double> nodes;
  nodes.reserve(n + 1);
  nodes.push_back(0.0);
  const double ratio = std::log(t_max / t_lo) / static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i)
    nodes.push_back(t_lo * std::exp(ratio * static_cast<double>(i)));
  nodes.back() = t_max;
  return LogGrid(std::move(nodes));
}

class SampledRadialFunction {
public:
  SampledRadialFunction() = default;

  SampledRadialFunction(LogGrid grid, std::vector<double> values)
      : grid_(std::move(grid)), values_(std::move(values)) {
    if (values_.size() != grid_.size())
      throw SpecError("SampledRadialFunction: value count != node count");
    for (double v : values_)
      if (!std::isfinite(v))
        throw SpecError("SampledRadialFunction: non-finite value");
  }

  const LogGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double value(std::size_t i) const { return values_[i]; }

  double sup_norm() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
  }

  // Piecewise-linear evaluation; constant extension outside the grid.
  double interpolate(double t) const {
    if (t <= grid_.t_min()) return values_.front();
    if (t >= grid_.t_max()) return values_.back();
    std::size_t i = grid_.cell_of(t);
    const double t0 = grid_[i], t1 = grid_[i + 1];
    const double a = (t - t0) / (t1 - t0);
    return values_[i] * (1.0 - a) + values_[i + 1] * a;
  }

private:
  LogGrid grid_;
  std::vector<double> values_;
};

template <typename F>
SampledRadialFunction sample_function(const LogGrid& grid, F&& f) {
  std::vector<double> v(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) v[i] = f(grid[i]);
  return SampledRadialFunction(grid, std::move(v));
}

// ---------------------------------------------------------------------------
// CSV serialization: header `t,r,value`, full round-trip precision.
// r = e^{-t} is emitted as 0 once t > 700 (underflow in double).

namespace detail {
inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return std::string(buf);
}
}  // namespace detail

inline void write_csv(const SampledRadialFunction& u, std::ostream& os) {
  os << "t,r,value\n";
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double t = u.grid()[i];
    const double r = t > 700.0 ? 0.0 : std::exp(-t);
    os << detail::format_double(t) << ',' << detail::format_double(r) << ','
       << detail::format_double(u.value(i)) << '\n';
  }
}

inline void write_csv(const SampledRadialFunction& u, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw SpecError("write_csv: cannot open " + path);
  write_csv(u, os);
}

inline SampledRadialFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw SpecError("read_csv: empty input");
  std::vector<double> nodes, values;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string t_s, r_s, v_s;
    if (!std::getline(row, t_s, ',') || !std::getline(row, r_s, ',') ||
        !std::getline(row, v_s))
      throw SpecError("read_csv: malformed row: " + line);
    nodes.push_back(std::stod(t_s));
    values.push_back(std::stod(v_s));
  }
  return SampledRadialFunction(LogGrid(std::move(nodes)), std::move(values));
}

inline SampledRadialFunction read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw SpecError("read_csv: cannot open " + path);
  return read_csv(is);
}

}  // namespace tmlab
