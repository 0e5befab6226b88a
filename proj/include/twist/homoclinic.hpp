#pragma once

// Variational computation of Bangert's S-function and the homoclinic pair.
// S(x) is the minimal (truncated) action of configurations pinned to x at
// index 0 with tails clamped to y0 on the left and y0+1 on the right.  Its
// minima are translates of the minimizing homoclinic z, its maxima translates
// of the minimax homoclinic z~; the Peierls barrier is the height difference.
//
// The landscape oscillates between the two levels with critical points
// accumulating geometrically at both ends of (y0, y0+1), so after locating
// an extremum we re-index the relaxed configuration to the canonical
// representative: z_0 is the first value >= y0 + 1/2, and z~_0 the unique
// minimax value between z_{-1} and z_0.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "twist/common.hpp"
#include "twist/configuration.hpp"
#include "twist/generating_function.hpp"
#include "twist/map.hpp"
#include "twist/relax.hpp"

namespace twist {

struct HomoclinicPair {
  Configuration z;        // minimizing homoclinic, window [-M, M]
  Configuration z_tilde;  // minimax homoclinic, same window
  std::vector<std::array<double, 2>> s_samples;  // (x, S(x)) over the scan grid
  double delta0 = 0.0;    // S(z~_0) - S(z_0)
  double s_z = 0.0;       // S at the minimizer (baseline for level sets)
  double kappa1 = 0.0;
  double a0 = std::numeric_limits<double>::quiet_NaN();  // E0 endpoints, filled by locate_E0
  double b0 = std::numeric_limits<double>::quiet_NaN();
  double e0_interval = std::numeric_limits<double>::quiet_NaN();  // level a0/b0 were located at
  std::int64_t M = 0;
};

namespace detail {

inline RelaxOptions homoclinic_relax_options() {
  RelaxOptions opts;
  opts.flow_floor = 1e-4;  // Newton finishes from here; flow only needs the basin
  opts.flow.step_class_K = 2.0;
  opts.flow.step_class_margin = 0.25;
  return opts;
}

// Truncated S-sum over the window pairs k = -M .. M-1.
inline double s_sum(const GeneratingFunction& gf, const FixedPointData& fp,
                    const Configuration& c, std::int64_t M) {
  const double vfix = gf.V(fp.y0, fp.y0);
  double s = 0.0;
  for (std::int64_t k = -M; k < M; ++k) s += gf.V(c.at(k), c.at(k + 1)) - vfix;
  return s;
}

inline Configuration pinned_profile(const FixedPointData& fp, double x, std::int64_t M) {
  Configuration c = Configuration::constant(-M, M, fp.y0);
  c.tail_right = fp.y0 + 1.0;
  for (std::int64_t j = 1; j <= M; ++j) c.ref(j) = fp.y0 + 1.0;
  c.ref(0) = x;
  return c;
}

inline Configuration relax_pinned_at(const GeneratingFunction& gf, const FixedPointData& fp,
                                     double x, std::int64_t M, double tol,
                                     const Configuration* warm) {
  Configuration c0 = warm ? *warm : pinned_profile(fp, x, M);
  if (warm) c0.ref(0) = x;
  return relax_pinned(gf, c0, {0}, tol, homoclinic_relax_options());
}

// Step profile with the transition placed after site m (pin still at 0).
inline Configuration offset_profile(const FixedPointData& fp, double x, std::int64_t M,
                                    std::int64_t m) {
  Configuration c = Configuration::constant(-M, M, fp.y0);
  c.tail_right = fp.y0 + 1.0;
  for (std::int64_t j = std::max<std::int64_t>(m, -M); j <= M; ++j) c.ref(j) = fp.y0 + 1.0;
  if (c.contains(0)) c.ref(0) = x;
  return c;
}

// Multi-start constrained minimization: the pinned landscape has one local
// minimizer per admissible kink position, so the infimum is taken over step
// profiles with the transition at a spread of offsets.
inline Configuration relax_pinned_global(const GeneratingFunction& gf, const FixedPointData& fp,
                                         double x, std::int64_t M, double tol) {
  static constexpr std::int64_t offsets[] = {0, 1, -1, 2, -2, 4, -4, 8, -8, 16, -16, 32, -32};
  Configuration best;
  double sbest = std::numeric_limits<double>::infinity();
  for (const std::int64_t m : offsets) {
    if (m < -M + 2 || m > M - 1) continue;
    Configuration c = relax_pinned(gf, offset_profile(fp, x, M, m), {0}, tol,
                                   homoclinic_relax_options());
    const double s = s_sum(gf, fp, c, M);
    if (s < sbest) { sbest = s; best = std::move(c); }
  }
  return best;
}

// Re-index so that window index `pivot` of `c` becomes index 0; crop/pad to
// [-M, M] with the clamped tail values.
inline Configuration reindex(const Configuration& c, std::int64_t pivot, std::int64_t M) {
  Configuration out;
  out.lo = -M;
  out.tail_left = c.tail_left;
  out.tail_right = c.tail_right;
  out.values.resize(static_cast<std::size_t>(2 * M + 1));
  for (std::int64_t j = -M; j <= M; ++j)
    out.values[static_cast<std::size_t>(j + M)] = c.at(j + pivot);
  return out;
}

// Weak monotonicity with strictness wherever gaps are numerically resolvable,
// plus containment in [y0, y0+1].
inline void check_increasing_in_cell(const Configuration& c, double y0, const char* what) {
  for (std::int64_t j = c.lo; j < c.hi(); ++j) {
    const double a = c.at(j), b = c.at(j + 1);
    if (b < a - 1e-12)
      throw Error(ErrorCode::OrderingViolated, std::string(what) + ": not increasing");
  }
  for (std::int64_t j = c.lo; j <= c.hi(); ++j) {
    const double v = c.at(j);
    if (v < y0 - 1e-12 || v > y0 + 1.0 + 1e-12)
      throw Error(ErrorCode::OrderingViolated, std::string(what) + ": leaves (y0, y0+1)");
  }
}

}  // namespace detail

// S(x) for x in (y0, y0+1): relax with x_0 pinned to x and sum the truncated
// action relative to the fixed point.  Multi-started over kink positions so
// the value is the constrained infimum, not just the nearest local branch.
inline double s_eval(const GeneratingFunction& gf, const FixedPointData& fp, double x,
                     std::int64_t M, double tol = 1e-10) {
  if (M < 16) throw Error(ErrorCode::WindowTooSmall, "s_eval: M >= 16 required");
  if (!(x > fp.y0 && x < fp.y0 + 1.0))
    throw Error(ErrorCode::OutOfRange, "s_eval: pin outside (y0, y0+1)");
  const Configuration c = detail::relax_pinned_global(gf, fp, x, M, tol);
  return detail::s_sum(gf, fp, c, M);
}

// Smallest kappa1 such that |z~_{-j} - y0| <= kappa1 lambda^{-(j+1)} and
// |z~_j - y0 - 1| <= kappa1 lambda^{-(j+1)} hold for all j >= 0 in the window.
// Tail entries below the numerical floor (1e-11) carry no information about
// the true decay and are skipped.
inline double kappa1_fit(const HomoclinicPair& pair, const FixedPointData& fp) {
  const double lam = fp.lambda;
  const double y0 = fp.y0;
  double kappa = 0.0;
  for (std::int64_t j = 0; j <= pair.M; ++j) {
    const double left = std::abs(pair.z_tilde.at(-j) - y0);
    const double right = std::abs(pair.z_tilde.at(j) - y0 - 1.0);
    const double amp = std::pow(lam, static_cast<double>(j + 1));
    if (left > 1e-11) kappa = std::max(kappa, left * amp);
    if (right > 1e-11) kappa = std::max(kappa, right * amp);
  }
  return kappa;
}

inline HomoclinicPair compute_homoclinics(const GeneratingFunction& gf, const FixedPointData& fp,
                                          std::int64_t M = 64, int grid_n = 512,
                                          double tol = 1e-10) {
  if (fp.lambda <= 1.0)
    throw Error(ErrorCode::DegenerateInputs, "compute_homoclinics: fp.lambda not set (> 1)");
  const double y0 = fp.y0;

  // Scan S over the open interval.  The warm-start chain tracks one branch of
  // the landscape; near the interval ends this overestimates S (the true
  // constrained minimizer jumps between kink translates there), which is
  // harmless for the scan's role here: the minimizing level is exact at the
  // central minimum, and the maximizer is located in phase two inside the
  // central cell where the branch is the infimum.
  std::vector<std::array<double, 2>> samples;
  samples.reserve(static_cast<std::size_t>(grid_n));
  std::vector<Configuration> configs(static_cast<std::size_t>(grid_n));
  int imin = 0;
  {
    const Configuration* warm = nullptr;
    const double center = y0 + 0.5;
    for (int i = 0; i < grid_n; ++i) {
      const double x = y0 + static_cast<double>(i + 1) / (grid_n + 1);
      configs[static_cast<std::size_t>(i)] = detail::relax_pinned_at(gf, fp, x, M, tol, warm);
      warm = &configs[static_cast<std::size_t>(i)];
      const double s = detail::s_sum(gf, fp, configs[static_cast<std::size_t>(i)], M);
      samples.push_back({x, s});
      const double sbest = samples[static_cast<std::size_t>(imin)][1];
      const bool tie_toward_center =
          s < sbest + 1e-12 &&
          std::abs(x - center) < std::abs(samples[static_cast<std::size_t>(imin)][0] - center);
      if (s < sbest || tie_toward_center) imin = i;
    }
  }

  const double spacing = 1.0 / (grid_n + 1);
  auto nearest_scan = [&](double x) {
    int i = static_cast<int>(std::lround((x - y0) * (grid_n + 1))) - 1;
    return std::max(0, std::min(grid_n - 1, i));
  };
  auto sample_at = [&](double x) {
    const Configuration c = detail::relax_pinned_at(
        gf, fp, x, M, tol, &configs[static_cast<std::size_t>(nearest_scan(x))]);
    return detail::s_sum(gf, fp, c, M);
  };

  // Phase one: the minimizer.
  const double xm = samples[static_cast<std::size_t>(imin)][0];
  const double x_min = golden_min(sample_at, std::max(xm - spacing, y0 + 0.25 * spacing),
                                  std::min(xm + spacing, y0 + 1.0 - 0.25 * spacing), 1e-10);
  Configuration cmin = detail::relax_pinned_at(
      gf, fp, x_min, M, tol, &configs[static_cast<std::size_t>(nearest_scan(x_min))]);
  // The pin is inactive at an extremum of S; polish the full system so the
  // configuration is a genuine equilibrium.
  cmin = newton_polish(gf, cmin, {}, tol);

  HomoclinicPair pair;
  pair.M = M;
  pair.s_samples = std::move(samples);

  // Canonical indexing: z_0 is the first value >= y0 + 1/2.
  std::int64_t pivot_z = cmin.hi() + 1;
  for (std::int64_t j = cmin.lo; j <= cmin.hi(); ++j)
    if (cmin.at(j) >= y0 + 0.5) { pivot_z = j; break; }
  if (pivot_z > cmin.hi())
    throw Error(ErrorCode::OrderingViolated, "minimizer never crosses y0 + 1/2");
  pair.z = detail::reindex(cmin, pivot_z, M);

  // Phase two: the maximizer, which the interlacing chain confines to
  // (z_{-1}, z_0); S restricted there has the minimax as its only critical
  // point, so golden section on the whole cell is safe.
  const double zm1 = pair.z.at(-1), z0 = pair.z.at(0);
  const double gap = 1e-3 * (z0 - zm1);
  const double x_max =
      golden_min([&](double x) { return -sample_at(x); }, zm1 + gap, z0 - gap, 1e-10);
  Configuration cmax = detail::relax_pinned_at(
      gf, fp, x_max, M, tol, &configs[static_cast<std::size_t>(nearest_scan(x_max))]);
  cmax = newton_polish(gf, cmax, {}, tol);

  // z~_0 is the unique minimax value strictly between z_{-1} and z_0.
  std::int64_t pivot_t = 0;
  int found = 0;
  for (std::int64_t j = cmax.lo; j <= cmax.hi(); ++j)
    if (cmax.at(j) > zm1 && cmax.at(j) < z0) { pivot_t = j; ++found; }
  if (found != 1)
    throw Error(ErrorCode::OrderingViolated,
                "expected exactly one minimax value between z_{-1} and z_0, found " +
                    std::to_string(found));
  pair.z_tilde = detail::reindex(cmax, pivot_t, M);

  detail::check_increasing_in_cell(pair.z, y0, "z");
  detail::check_increasing_in_cell(pair.z_tilde, y0, "z~");
  // Interlacing: z~_j < z_j < z~_{j+1} wherever the gaps are resolvable.
  for (std::int64_t j = -M; j < M; ++j) {
    if (pair.z_tilde.at(j) > pair.z.at(j) + 1e-12 ||
        pair.z.at(j) > pair.z_tilde.at(j + 1) + 1e-12)
      throw Error(ErrorCode::OrderingViolated, "interlacing chain failed at j = " + std::to_string(j));
  }

  pair.s_z = detail::s_sum(gf, fp, pair.z, M);
  pair.delta0 = detail::s_sum(gf, fp, pair.z_tilde, M) - pair.s_z;
  pair.kappa1 = kappa1_fit(pair, fp);
  if (pair.kappa1 * std::pow(fp.lambda, -static_cast<double>(M)) >= 1e-10)
    throw Error(ErrorCode::WindowTooSmall,
                "tail bound kappa1 lambda^{-M} >= 1e-10; enlarge M");
  return pair;
}

// Direct Peierls-barrier sum over the window (independent route to delta0).
inline double direct_action_difference(const GeneratingFunction& gf, const HomoclinicPair& pair) {
  double s = 0.0;
  for (std::int64_t k = -pair.M; k < pair.M; ++k)
    s += gf.V(pair.z_tilde.at(k), pair.z_tilde.at(k + 1)) - gf.V(pair.z.at(k), pair.z.at(k + 1));
  return s;
}

// Connected component [a0, b0] of z_0 in { x : S(x) - S(z_0) <= e0 },
// restricted to the envelope cell (z~_0, z~_1).  The left edge always exists
// (S rises to the full barrier at z~_0).  To the right of z_0 the landscape
// only climbs over the small barrier separating adjacent kink translates; if
// e0 exceeds that barrier the sublevel component runs through, and the
// interval is clipped at z~_1 where the order envelopes take over.
inline std::array<double, 2> locate_E0(const GeneratingFunction& gf, const FixedPointData& fp,
                                       HomoclinicPair& pair, double e0, double xtol = 1e-10) {
  const double z0 = pair.z.at(0);
  const double zt0 = pair.z_tilde.at(0);
  const double zt1 = pair.z_tilde.at(1);
  const double base = pair.s_z;
  auto srel = [&](double x) { return s_eval(gf, fp, x, pair.M) - base - e0; };
  if (e0 <= 0.0 || e0 >= pair.delta0) {
    throw Error(ErrorCode::OutOfRange, "locate_E0: need 0 < e0 < delta0");
  }
  const double a0 = bisect_root(srel, zt0, z0, xtol);

  double b0 = zt1;
  const int probes = 32;
  double prev_x = z0;
  double prev_f = -e0;  // S_rel(z0) = 0
  for (int i = 1; i <= probes; ++i) {
    const double x = z0 + (zt1 - z0) * static_cast<double>(i) / (probes + 1);
    const double f = srel(x);
    if (prev_f <= 0.0 && f > 0.0) {
      b0 = bisect_root(srel, prev_x, x, xtol);
      break;
    }
    prev_x = x;
    prev_f = f;
  }
  pair.a0 = a0;
  pair.b0 = b0;
  pair.e0_interval = e0;
  return {a0, b0};
}

}  // namespace twist
