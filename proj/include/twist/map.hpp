#pragma once

// The induced twist map and its lift.  map_forward solves p = -V1(x,x') for
// x' (unique by the twist condition: the residual is strictly monotone in
// x'), then sets p' = V2(x,x').  map_inverse runs the same scheme on the
// other implicit equation.  Also: the configuration <-> phase-point
// correspondence, the action-minimizing fixed point and its multiplier.

#include <cmath>
#include <vector>

#include "twist/common.hpp"
#include "twist/configuration.hpp"
#include "twist/generating_function.hpp"

namespace twist {

struct PhasePoint {
  double x = 0.0;
  double p = 0.0;
};

struct FixedPointData {
  double y0 = 0.0;      // argmin of x -> V(x,x) on [0,1)
  double p0 = 0.0;      // -V1(y0,y0)
  double lambda = 0.0;  // expanding multiplier, filled by linearize_eigen
  double kappa1 = 0.0;  // minimax tail constant, filled by kappa1_fit
};

namespace detail {

// Solve g(s) = 0 for s in [center-halfwidth, center+halfwidth], where g is
// strictly monotone (twist).  Bracketing scan + safeguarded Newton.
inline double solve_monotone(const std::function<double(double)>& g,
                             const std::function<double(double)>& dg, double center,
                             double halfwidth, double tol) {
  double a = center - halfwidth, b = center + halfwidth;
  double ga = g(a), gb = g(b);
  if (ga == 0.0) return a;
  if (gb == 0.0) return b;
  if (ga * gb > 0.0)
    throw Error(ErrorCode::NoBracket,
                "no sign change within the search bracket (twist bound violated or absurd momentum)");
  double s = 0.5 * (a + b);
  for (int it = 0; it < 200; ++it) {
    const double gs = g(s);
    if (std::abs(gs) <= tol) return s;
    if (ga * gs < 0.0) b = s; else { a = s; ga = gs; }
    const double d = dg(s);
    double snew = (d != 0.0) ? s - gs / d : 0.5 * (a + b);
    if (!(snew > a && snew < b)) snew = 0.5 * (a + b);  // Newton left the bracket
    s = snew;
  }
  return s;
}

}  // namespace detail

inline PhasePoint map_forward(const GeneratingFunction& gf, const PhasePoint& pt,
                              double tol = 1e-12) {
  const double x = pt.x, p = pt.p;
  const double halfwidth = std::abs(p) + gf.bracket_pad;
  const double xp = detail::solve_monotone(
      [&](double s) { return p + gf.V1(x, s); }, [&](double s) { return gf.V12(x, s); }, x,
      halfwidth, tol);
  return {xp, gf.V2(x, xp)};
}

inline PhasePoint map_inverse(const GeneratingFunction& gf, const PhasePoint& pt,
                              double tol = 1e-12) {
  const double xp = pt.x, pp = pt.p;
  const double halfwidth = std::abs(pp) + gf.bracket_pad;
  const double x = detail::solve_monotone(
      [&](double s) { return pp - gf.V2(s, xp); }, [&](double s) { return -gf.V12(s, xp); }, xp,
      halfwidth, tol);
  return {x, -gf.V1(x, xp)};
}

inline PhasePoint point_from_config(const GeneratingFunction& gf, const Configuration& c) {
  if (!c.contains(0) || !c.contains(1))
    throw Error(ErrorCode::IndexOutOfWindow, "point_from_config: indices 0,1 not in window");
  return {c.at(0), -gf.V1(c.at(0), c.at(1))};
}

inline Configuration config_from_point(const GeneratingFunction& gf, const PhasePoint& pt,
                                       std::int64_t lo, std::int64_t hi) {
  if (!(lo <= 0 && 0 < hi))
    throw Error(ErrorCode::InvalidConfig, "config_from_point: need lo <= 0 < hi");
  Configuration c;
  c.lo = lo;
  c.values.assign(static_cast<std::size_t>(hi - lo + 1), 0.0);
  c.ref(0) = pt.x;
  PhasePoint q = pt;
  for (std::int64_t j = 1; j <= hi; ++j) {
    q = map_forward(gf, q);
    c.ref(j) = q.x;
  }
  q = pt;
  for (std::int64_t j = -1; j >= lo; --j) {
    q = map_inverse(gf, q);
    c.ref(j) = q.x;
  }
  c.tail_left = c.at(lo);
  c.tail_right = c.at(hi);
  return c;
}

// Locates the unique (mod 1) minimum of x -> V(x,x) by a dense grid scan and
// golden-section refinement.  Exact integer minima (the standard family) are
// snapped so downstream arithmetic sees y0 = 0 exactly.
inline FixedPointData find_minimizing_fixed_point(const GeneratingFunction& gf, int grid_n = 1024,
                                                  double xtol = 1e-12) {
  const auto W = [&](double x) { return gf.V(x, x); };
  std::vector<double> w(static_cast<std::size_t>(grid_n));
  int best = 0;
  for (int i = 0; i < grid_n; ++i) {
    w[static_cast<std::size_t>(i)] = W(static_cast<double>(i) / grid_n);
    if (w[static_cast<std::size_t>(i)] < w[static_cast<std::size_t>(best)]) best = i;
  }
  const double h = 1.0 / grid_n;
  double y0 = golden_min(W, best * h - h, best * h + h, xtol);

  // Grid-separated competing minima signal failure of uniqueness.
  const double wbest = W(y0);
  for (int i = 0; i < grid_n; ++i) {
    int d = std::abs(i - best);
    d = std::min(d, grid_n - d);
    if (d <= 2) continue;
    const bool locmin =
        w[static_cast<std::size_t>(i)] <= w[static_cast<std::size_t>((i + 1) % grid_n)] &&
        w[static_cast<std::size_t>(i)] <= w[static_cast<std::size_t>((i + grid_n - 1) % grid_n)];
    if (locmin && w[static_cast<std::size_t>(i)] - wbest < 1e-9)
      throw Error(ErrorCode::NonUniqueMinimum,
                  "two grid-separated minima of V(x,x) agree within 1e-9");
  }

  // The landscape is machine-flat within ~sqrt(eps) of the minimum, so the
  // refined abscissa can sit a few 1e-9 off an exact integer minimum; snap
  // whenever the integer value is at least as good.
  const double snapped = std::round(y0);
  if (std::abs(y0 - snapped) < 1e-6 && W(snapped) <= W(y0) + 1e-15) y0 = snapped;
  y0 -= std::floor(y0);  // representative in [0,1)

  FixedPointData fp;
  fp.y0 = y0;
  fp.p0 = -gf.V1(y0, y0);
  return fp;
}

// Expanding multiplier of Df at the fixed point.  The Jacobian of the
// implicit map has trace -(V11+V22)/V12 and determinant 1 (area
// preservation), so the multiplier comes from the trace alone.
inline double linearize_eigen(const GeneratingFunction& gf, const FixedPointData& fp) {
  const double y = fp.y0;
  const double T = -(gf.V11(y, y) + gf.V22(y, y)) / gf.V12(y, y);
  if (std::abs(T) <= 2.0 + 1e-9)
    throw Error(ErrorCode::NotHyperbolic, "fixed point is not hyperbolic (|trace| <= 2)");
  return (std::abs(T) + std::sqrt(T * T - 4.0)) / 2.0;
}

}  // namespace twist
