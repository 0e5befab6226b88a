#pragma once

// The instability measure Delta_1: the sup over energy levels e in
// [0, Delta_0/2] of the minimal squared gradient norm of E over the level set
// {E(h) = e} intersected with the box |h_j| <= u_j and (for the constrained
// variant) the connected component of 0 of {E <= e}.
//
// The level-set equality is handled by an augmented Lagrangian (no closed
// form projection exists); box feasibility by projection each iterate;
// connectivity by a conservative straight-segment test with rejection.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "twist/common.hpp"
#include "twist/energy.hpp"
#include "twist/tridiagonal.hpp"

namespace twist {

struct InstabilityReport {
  double delta0 = 0.0;
  double delta1 = 0.0;
  double e_star = 0.0;  // maximizing level; doubles as e0 downstream
  double delta1_tilde = std::numeric_limits<double>::quiet_NaN();
  double delta2 = 0.0;
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double lambda = 0.0;
  std::int64_t N_min = 0;
  double entropy_bound = 0.0;
  double ratio_conjecture = 0.0;  // Delta_1 / Delta_0^2, report-only
};

struct Delta1Options {
  int e_grid = 33;
  int n_starts = 4;
  double tol = 1e-8;            // level-set feasibility |E - e|
  bool refine_connectivity = false;
  bool compute_tilde = true;
  std::uint64_t seed = 0;
  int al_outer = 10;
  int inner_iters = 300;
  int segment_samples = 256;
};

// Conservative membership test for the connected component of 0 of
// {E <= e}: the straight segment s h, s in [0,1], must stay below the level
// at every sample.  The optional refinement accepts h whose gradient-descent
// path reaches 0 without the energy ever exceeding the level.
inline bool connected_to_zero(const GeneratingFunction& gf, const HomoclinicPair& pair,
                              const PerturbationWindow& h, double e, bool refine = false,
                              int segment_samples = 256) {
  PerturbationWindow probe = h;
  bool segment_ok = true;
  for (int i = 1; i <= segment_samples; ++i) {
    const double s = static_cast<double>(i) / segment_samples;
    for (std::size_t j = 0; j < h.h.size(); ++j) probe.h[j] = s * h.h[j];
    if (energy_E(gf, pair, probe) > e + 1e-10) { segment_ok = false; break; }
  }
  if (segment_ok) return true;
  if (!refine) return false;

  // descent refinement: follow -grad E from h; accept if it reaches 0 while
  // the energy stays below the level (it is non-increasing along exact
  // descent; Armijo keeps the discrete path monotone too)
  probe = h;
  double alpha = 1e-2;
  for (int it = 0; it < 4000; ++it) {
    if (probe.norm() <= 1e-8) return true;
    const GradientWindow g = grad_E(gf, pair, probe);
    const double e_cur = energy_E(gf, pair, probe);
    if (e_cur > e + 1e-10) return false;
    double gnorm2 = 0.0;
    for (std::int64_t j = probe.lo(); j <= probe.hi(); ++j) gnorm2 += g.at(j) * g.at(j);
    if (gnorm2 < 1e-24) return probe.norm() <= 1e-8;
    PerturbationWindow next = probe;
    bool moved = false;
    for (int bt = 0; bt < 30; ++bt) {
      for (std::int64_t j = probe.lo(); j <= probe.hi(); ++j)
        next.ref(j) = probe.at(j) - alpha * g.at(j);
      if (energy_E(gf, pair, next) <= e_cur - 1e-4 * alpha * gnorm2) {
        probe = next;
        alpha = std::min(alpha * 1.5, 1.0);
        moved = true;
        break;
      }
      alpha *= 0.5;
    }
    if (!moved) break;
  }
  return probe.norm() <= 1e-8;
}

namespace detail {

inline PerturbationWindow truncate_difference(const HomoclinicPair& pair, std::int64_t N) {
  PerturbationWindow d = PerturbationWindow::zeros(N);
  for (std::int64_t j = d.lo(); j <= d.hi(); ++j)
    d.ref(j) = pair.z_tilde.at(j) - pair.z.at(j);
  return d;
}

// First s in (0, 1] with E(s d) = e, by scan + bisection; returns -1 if the
// segment never reaches the level.
inline double first_level_crossing(const GeneratingFunction& gf, const HomoclinicPair& pair,
                                   const PerturbationWindow& d, double e, int scan = 256) {
  PerturbationWindow probe = d;
  auto E_at = [&](double s) {
    for (std::size_t j = 0; j < d.h.size(); ++j) probe.h[j] = s * d.h[j];
    return energy_E(gf, pair, probe);
  };
  double s_prev = 0.0, f_prev = -e;
  for (int i = 1; i <= scan; ++i) {
    const double s = static_cast<double>(i) / scan;
    const double f = E_at(s) - e;
    if (f >= 0.0) {
      if (f == 0.0) return s;
      double a = s_prev, b = s;
      for (int it = 0; it < 100; ++it) {
        const double m = 0.5 * (a + b);
        if (E_at(m) - e > 0.0) b = m; else a = m;
      }
      return 0.5 * (a + b);
    }
    s_prev = s;
    f_prev = f;
  }
  (void)f_prev;
  return -1.0;
}

struct LevelResult {
  double value = std::numeric_limits<double>::infinity();
  PerturbationWindow h;
  bool feasible = false;
};

inline void project_box(PerturbationWindow& h, const BoxBound& u) {
  for (std::int64_t j = h.lo(); j <= h.hi(); ++j) {
    const double b = u.at(j);
    if (h.at(j) > b) h.ref(j) = b;
    else if (h.at(j) < -b) h.ref(j) = -b;
  }
}

// Augmented-Lagrangian minimization of ||grad E||^2 on {E = e} from one
// start; box projection each iterate, connectivity by rejection.
inline LevelResult minimize_from(const GeneratingFunction& gf, const HomoclinicPair& pair,
                                 const BoxBound& u, double e, PerturbationWindow h,
                                 bool constrain_connectivity, const Delta1Options& opts) {
  const auto f_of = [&](const PerturbationWindow& w) { return grad_E(gf, pair, w).norm_sq(); };
  const auto c_of = [&](const PerturbationWindow& w) { return energy_E(gf, pair, w) - e; };

  double lambda_al = 0.0;
  double rho = std::max(1.0, 1.0 / std::max(e, 1e-6));
  PerturbationWindow best = h;
  double fbest = f_of(h);
  bool best_ok = std::abs(c_of(h)) <= opts.tol &&
                 (!constrain_connectivity ||
                  connected_to_zero(gf, pair, h, e, opts.refine_connectivity, opts.segment_samples));

  for (int outer = 0; outer < opts.al_outer; ++outer) {
    double alpha = 1e-2;
    for (int it = 0; it < opts.inner_iters; ++it) {
      const double c = c_of(h);
      const double f = f_of(h);
      const double phi = f + lambda_al * c + 0.5 * rho * c * c;
      // gradient of the AL functional
      std::vector<double> gphi = grad_norm_sq_gradient(gf, pair, h);
      const GradientWindow g = grad_E(gf, pair, h);
      const double w = lambda_al + rho * c;
      for (std::int64_t j = h.lo(); j <= h.hi(); ++j)
        gphi[static_cast<std::size_t>(j + h.N - 1)] += w * g.at(j);
      double gn2 = 0.0;
      for (const double v : gphi) gn2 += v * v;
      if (gn2 < 1e-22) break;

      bool moved = false;
      for (int bt = 0; bt < 25 && !moved; ++bt) {
        PerturbationWindow trial = h;
        for (std::int64_t j = h.lo(); j <= h.hi(); ++j)
          trial.ref(j) = h.at(j) - alpha * gphi[static_cast<std::size_t>(j + h.N - 1)];
        project_box(trial, u);
        const double ct = c_of(trial);
        const double phit = f_of(trial) + lambda_al * ct + 0.5 * rho * ct * ct;
        if (phit < phi - 1e-12 * std::abs(phi)) {
          // connectivity rejection, tested at the level plus the current slack
          if (constrain_connectivity && (it % 10 == 0 || it == opts.inner_iters - 1)) {
            const double slack = std::max(std::abs(ct), opts.tol);
            if (!connected_to_zero(gf, pair, trial, e + slack, opts.refine_connectivity,
                                   opts.segment_samples)) {
              alpha *= 0.5;
              continue;
            }
          }
          h = trial;
          alpha = std::min(alpha * 1.3, 10.0);
          moved = true;
        } else {
          alpha *= 0.5;
        }
      }
      if (!moved) break;
    }
    const double c = c_of(h);
    lambda_al += rho * c;
    if (std::abs(c) > opts.tol) rho *= 2.0;

    if (std::abs(c) <= opts.tol) {
      const double f = f_of(h);
      const bool ok = !constrain_connectivity ||
                      connected_to_zero(gf, pair, h, e, opts.refine_connectivity,
                                        opts.segment_samples);
      if (ok && (!best_ok || f < fbest)) {
        best = h;
        fbest = f;
        best_ok = true;
      }
    }
  }
  LevelResult r;
  r.value = fbest;
  r.h = best;
  r.feasible = best_ok;
  return r;
}

inline LevelResult min_gradnorm_level_impl(const GeneratingFunction& gf,
                                           const HomoclinicPair& pair, double e,
                                           const BoxBound& u, bool constrain_connectivity,
                                           const Delta1Options& opts) {
  const std::int64_t N = u.N;
  if (e <= 0.0) {
    LevelResult r;
    r.h = PerturbationWindow::zeros(N);
    r.value = grad_E(gf, pair, r.h).norm_sq();
    r.feasible = true;
    return r;
  }

  const PerturbationWindow d = truncate_difference(pair, N);
  const double s_star = detail::first_level_crossing(gf, pair, d, e);
  if (s_star < 0.0)
    throw Error(ErrorCode::Infeasible, "no start attains the level set within the segment");
  PerturbationWindow h0 = d;
  for (auto& v : h0.h) v *= s_star;

  LevelResult best = minimize_from(gf, pair, u, e, h0, constrain_connectivity, opts);
  // the segment start itself is always feasible; keep it as the fallback
  {
    const double f0 = grad_E(gf, pair, h0).norm_sq();
    if (!best.feasible || f0 < best.value) {
      const bool h0_ok = std::abs(energy_E(gf, pair, h0) - e) <= opts.tol;
      if (h0_ok && (!best.feasible || f0 < best.value)) {
        best.value = f0;
        best.h = h0;
        best.feasible = true;
      }
    }
  }

  CounterRng rng(opts.seed, CounterRng::stream_of(e), 17);
  std::uint64_t ctr = 0;
  for (int r = 0; r < opts.n_starts; ++r) {
    PerturbationWindow hr = h0;
    for (std::int64_t j = hr.lo(); j <= hr.hi(); ++j)
      hr.ref(j) += 0.35 * u.at(j) * rng.symmetric(ctr++);
    project_box(hr, u);
    const double t = first_level_crossing(gf, pair, hr, e);
    if (t < 0.0) continue;
    for (auto& v : hr.h) v *= t;
    if (!in_box(hr, u)) continue;
    const LevelResult cand = minimize_from(gf, pair, u, e, hr, constrain_connectivity, opts);
    if (cand.feasible && (!best.feasible || cand.value < best.value)) best = cand;
  }

  // all iterates must stay within the step class X_2 the tilde set lives in
  double worst_step = 0.0;
  for (std::int64_t j = -N; j <= N; ++j) {
    const double a = pair.z.at(j) + best.h.at(j);
    const double b = pair.z.at(j + 1) + best.h.at(j + 1);
    worst_step = std::max(worst_step, std::abs(b - a));
  }
  if (worst_step > 2.25)
    throw Error(ErrorCode::StepClassViolation,
                "perturbed configuration left X_2: sup step = " + std::to_string(worst_step));
  return best;
}

}  // namespace detail

// Approximate minimizer of ||grad E||^2 over {E = e} within the box and the
// connected component of 0.  Returns (value, argmin).
inline std::pair<double, PerturbationWindow> min_gradnorm_on_level(
    const GeneratingFunction& gf, const HomoclinicPair& pair, double e, const BoxBound& u,
    const Delta1Options& opts = {}) {
  const detail::LevelResult r = detail::min_gradnorm_level_impl(gf, pair, e, u, true, opts);
  if (!r.feasible) throw Error(ErrorCode::Infeasible, "no feasible point found on the level set");
  return {r.value, r.h};
}

// Sup over the level grid of the constrained inner minima; fills delta1,
// e_star and (optionally) delta1_tilde of the report.
inline void delta1(const GeneratingFunction& gf, const HomoclinicPair& pair,
                   const FixedPointData& fp, std::int64_t N, InstabilityReport& report,
                   const Delta1Options& opts = {}) {
  const BoxBound u = make_box(pair.kappa1, fp.lambda, N);
  const int n = std::max(2, opts.e_grid);
  double best = -1.0, best_e = 0.0;
  double best_tilde = -1.0;
  for (int i = 0; i < n; ++i) {
    const double e = (pair.delta0 / 2.0) * static_cast<double>(i) / (n - 1);
    const detail::LevelResult con = detail::min_gradnorm_level_impl(gf, pair, e, u, true, opts);
    if (!con.feasible)
      throw Error(ErrorCode::Infeasible, "constrained level " + std::to_string(e) + " infeasible");
    if (con.value > best) { best = con.value; best_e = e; }
    if (opts.compute_tilde) {
      const detail::LevelResult unc = detail::min_gradnorm_level_impl(gf, pair, e, u, false, opts);
      // N(e) is a subset of the tilde set, so the constrained minimizer is an
      // admissible upper bound for the tilde infimum as well
      const double vt = std::min(unc.feasible ? unc.value : con.value, con.value);
      if (vt > best_tilde) best_tilde = vt;
    }
  }
  report.delta1 = best;
  report.e_star = best_e;
  if (opts.compute_tilde) report.delta1_tilde = best_tilde;
  report.delta0 = pair.delta0;
  report.kappa1 = pair.kappa1;
  report.lambda = fp.lambda;
  report.ratio_conjecture = (pair.delta0 > 0.0) ? best / (pair.delta0 * pair.delta0) : 0.0;
}

inline double delta1_tilde(const GeneratingFunction& gf, const HomoclinicPair& pair,
                           const FixedPointData& fp, std::int64_t N,
                           const Delta1Options& opts = {}) {
  const BoxBound u = make_box(pair.kappa1, fp.lambda, N);
  const int n = std::max(2, opts.e_grid);
  double best = -1.0;
  for (int i = 0; i < n; ++i) {
    const double e = (pair.delta0 / 2.0) * static_cast<double>(i) / (n - 1);
    const detail::LevelResult unc = detail::min_gradnorm_level_impl(gf, pair, e, u, false, opts);
    const detail::LevelResult con = detail::min_gradnorm_level_impl(gf, pair, e, u, true, opts);
    const double v = std::min(unc.feasible ? unc.value : con.value,
                              con.feasible ? con.value : unc.value);
    if (v > best) best = v;
  }
  return best;
}

}  // namespace twist
