#pragma once

// Relaxation to equilibria of the discrete Euler-Lagrange equations.  The
// gradient semiflow does the descent (it selects minimizers, not saddles);
// a damped Newton polish on the tridiagonal window system finishes the last
// digits once the flow has entered the basin.

#include <cstdint>
#include <string>
#include <vector>

#include "twist/common.hpp"
#include "twist/configuration.hpp"
#include "twist/flow.hpp"
#include "twist/generating_function.hpp"

namespace twist {

struct RelaxOptions {
  double flow_floor = 1e-6;   // hand over to Newton below this residual
  double chunk_t = 4.0;       // flow time per residual check
  int max_chunks = 600;
  int newton_max = 80;
  FlowOptions flow = {.atol = 1e-10, .rtol = 1e-8, .sample_dt = 0.1,
                      .initial_dt = 1e-3, .step_class_K = 2.0, .step_class_margin = 0.25};
};

namespace detail {

inline double residual_unpinned(const GeneratingFunction& gf, const Configuration& c,
                                const std::vector<std::uint8_t>& pinned) {
  double worst = 0.0;
  for (std::int64_t j = c.lo; j <= c.hi(); ++j) {
    if (!pinned.empty() && pinned[static_cast<std::size_t>(j - c.lo)]) continue;
    const double g = gf.V2(c.at(j - 1), c.at(j)) + gf.V1(c.at(j), c.at(j + 1));
    worst = std::max(worst, std::abs(g));
  }
  return worst;
}

// One damped Newton step on the window equilibrium system; pinned rows are
// replaced by the identity.  Returns the new residual.
inline double newton_step(const GeneratingFunction& gf, Configuration& c,
                          const std::vector<std::uint8_t>& pinned) {
  const std::int64_t n = c.size();
  std::vector<double> sub(static_cast<std::size_t>(n), 0.0), dia(static_cast<std::size_t>(n)),
      sup(static_cast<std::size_t>(n), 0.0), rhs(static_cast<std::size_t>(n));
  auto is_pinned = [&](std::int64_t idx) {
    return !pinned.empty() && pinned[static_cast<std::size_t>(idx)];
  };
  for (std::int64_t i = 0; i < n; ++i) {
    const std::int64_t j = c.lo + i;
    const auto ii = static_cast<std::size_t>(i);
    if (is_pinned(i)) {
      dia[ii] = 1.0;
      rhs[ii] = 0.0;
      continue;
    }
    dia[ii] = gf.V22(c.at(j - 1), c.at(j)) + gf.V11(c.at(j), c.at(j + 1));
    rhs[ii] = -(gf.V2(c.at(j - 1), c.at(j)) + gf.V1(c.at(j), c.at(j + 1)));
    if (i > 0 && !is_pinned(i - 1)) sub[ii] = gf.V12(c.at(j - 1), c.at(j));
    if (i < n - 1 && !is_pinned(i + 1)) sup[ii] = gf.V12(c.at(j), c.at(j + 1));
  }
  // Thomas elimination (no pivoting; guarded against vanishing pivots).
  std::vector<double> cp(static_cast<std::size_t>(n)), dp(static_cast<std::size_t>(n));
  double piv = dia[0];
  if (std::abs(piv) < 1e-300) piv = 1e-300;
  cp[0] = sup[0] / piv;
  dp[0] = rhs[0] / piv;
  for (std::int64_t i = 1; i < n; ++i) {
    const auto ii = static_cast<std::size_t>(i);
    piv = dia[ii] - sub[ii] * cp[ii - 1];
    if (std::abs(piv) < 1e-300) piv = (piv >= 0 ? 1e-300 : -1e-300);
    cp[ii] = sup[ii] / piv;
    dp[ii] = (rhs[ii] - sub[ii] * dp[ii - 1]) / piv;
  }
  std::vector<double> delta(static_cast<std::size_t>(n));
  delta[static_cast<std::size_t>(n - 1)] = dp[static_cast<std::size_t>(n - 1)];
  for (std::int64_t i = n - 2; i >= 0; --i) {
    const auto ii = static_cast<std::size_t>(i);
    delta[ii] = dp[ii] - cp[ii] * delta[ii + 1];
  }

  const double r0 = residual_unpinned(gf, c, pinned);
  Configuration trial = c;
  double scale = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    for (std::int64_t i = 0; i < n; ++i)
      trial.values[static_cast<std::size_t>(i)] =
          c.values[static_cast<std::size_t>(i)] + scale * delta[static_cast<std::size_t>(i)];
    const double r = residual_unpinned(gf, trial, pinned);
    if (r < r0) {
      c = trial;
      return r;
    }
    scale *= 0.5;
  }
  return r0;  // no progress
}

}  // namespace detail

// Damped Newton iteration to residual <= tol, pinned coordinates fixed.
inline Configuration newton_polish(const GeneratingFunction& gf, const Configuration& c0,
                                   const std::vector<std::uint8_t>& pinned, double tol,
                                   int itmax = 80) {
  Configuration c = c0;
  double r = detail::residual_unpinned(gf, c, pinned);
  for (int it = 0; it < itmax && r > tol; ++it) {
    const double rnew = detail::newton_step(gf, c, pinned);
    if (rnew >= r) break;  // stalled
    r = rnew;
  }
  return c;
}

// Integrates the semiflow on the unpinned coordinates until their residual
// drops below tol; Newton-polishes the endgame.  The action over the window
// is non-increasing along the flow phase.
inline Configuration relax_pinned(const GeneratingFunction& gf, const Configuration& c0,
                                  const std::vector<std::int64_t>& pinned_indices, double tol,
                                  const RelaxOptions& opts = {}) {
  std::vector<std::uint8_t> mask;
  if (!pinned_indices.empty()) {
    mask.assign(static_cast<std::size_t>(c0.size()), 0);
    for (const std::int64_t j : pinned_indices) {
      if (!c0.contains(j))
        throw Error(ErrorCode::IndexOutOfWindow, "relax_pinned: pinned index outside window");
      mask[static_cast<std::size_t>(j - c0.lo)] = 1;
    }
  }

  const double handoff = std::max(tol, opts.flow_floor);
  double r = detail::residual_unpinned(gf, c0, mask);
  Configuration c = c0;
  if (r > handoff) {
    FlowStepper stepper(gf, c0, opts.flow, mask);
    double t = 0.0;
    int chunk = 0;
    for (; chunk < opts.max_chunks; ++chunk) {
      t += opts.chunk_t;
      stepper.advance_to(t);
      r = detail::residual_unpinned(gf, stepper.state(), mask);
      if (r <= handoff) break;
    }
    c = stepper.state();
    if (chunk == opts.max_chunks && r > handoff)
      throw Error(ErrorCode::MaxIterations,
                  "relaxation stalled at residual " + std::to_string(r));
  }
  if (r > tol) {
    c = newton_polish(gf, c, mask, tol, opts.newton_max);
    r = detail::residual_unpinned(gf, c, mask);
    if (r > tol)
      throw Error(ErrorCode::MaxIterations,
                  "Newton polish stalled at residual " + std::to_string(r));
  }
  return c;
}

}  // namespace twist
