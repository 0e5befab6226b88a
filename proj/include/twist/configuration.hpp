#pragma once

// Configurations: finite indexed windows of real values standing for
// bi-infinite sequences with declared constant tails.  All computations live
// in the universal cover; values are only reduced mod 1 at reporting
// boundaries.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "twist/common.hpp"
#include "twist/generating_function.hpp"

namespace twist {

struct Configuration {
  std::int64_t lo = 0;                // index of values.front()
  std::vector<double> values;
  double tail_left = 0.0;             // value at indices < lo
  double tail_right = 0.0;            // value at indices > hi()

  std::int64_t hi() const { return lo + static_cast<std::int64_t>(values.size()) - 1; }
  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
  bool contains(std::int64_t j) const { return j >= lo && j <= hi(); }

  double at(std::int64_t j) const {
    if (j < lo) return tail_left;
    if (j > hi()) return tail_right;
    return values[static_cast<std::size_t>(j - lo)];
  }
  double& ref(std::int64_t j) {
    if (!contains(j)) throw Error(ErrorCode::IndexOutOfWindow, "Configuration::ref");
    return values[static_cast<std::size_t>(j - lo)];
  }

  static Configuration constant(std::int64_t lo, std::int64_t hi, double v) {
    Configuration c;
    c.lo = lo;
    c.values.assign(static_cast<std::size_t>(hi - lo + 1), v);
    c.tail_left = v;
    c.tail_right = v;
    return c;
  }
};

// Shift by one: (shift c)_j = c_{j+1}.  Window moves left by one index.
inline Configuration shift(const Configuration& c, std::int64_t n = 1) {
  Configuration out = c;
  out.lo = c.lo - n;
  return out;
}

// Largest |x_j - x_{j+1}| over the window including the two tail seams.
inline double max_step(const Configuration& c) {
  double worst = 0.0;
  for (std::int64_t j = c.lo - 1; j <= c.hi(); ++j)
    worst = std::max(worst, std::abs(c.at(j) - c.at(j + 1)));
  return worst;
}

// sup_k |V2(x_{k-1},x_k) + V1(x_k,x_{k+1})| with tails supplying the values
// outside the window; k runs over every index whose equation can differ from
// the pure-tail one.
inline double residual(const GeneratingFunction& gf, const Configuration& c) {
  if (c.size() < 3) throw Error(ErrorCode::WindowTooSmall, "residual: window length < 3");
  double worst = 0.0;
  for (std::int64_t k = c.lo - 1; k <= c.hi() + 1; ++k) {
    const double g = gf.V2(c.at(k - 1), c.at(k)) + gf.V1(c.at(k), c.at(k + 1));
    worst = std::max(worst, std::abs(g));
  }
  return worst;
}

// Finite-window rotation-number estimator: least-squares slope of k -> x_k.
inline double rotation_number(const Configuration& c) {
  if (c.size() < 8) throw Error(ErrorCode::WindowTooSmall, "rotation_number: window < 8");
  const std::int64_t n = c.size();
  double sk = 0.0, sx = 0.0, skk = 0.0, skx = 0.0;
  for (std::int64_t j = 0; j < n; ++j) {
    const double t = static_cast<double>(c.lo + j);
    const double x = c.values[static_cast<std::size_t>(j)];
    sk += t; sx += x; skk += t * t; skx += t * x;
  }
  const double nd = static_cast<double>(n);
  return (nd * skx - sk * sx) / (nd * skk - sk * sk);
}

// Action over the window: sum of V(x_k, x_{k+1}) for k = lo-1 .. hi, i.e.
// every pair with at least one window value.
inline double window_action(const GeneratingFunction& gf, const Configuration& c) {
  double s = 0.0;
  for (std::int64_t k = c.lo - 1; k <= c.hi(); ++k) s += gf.V(c.at(k), c.at(k + 1));
  return s;
}

}  // namespace twist
