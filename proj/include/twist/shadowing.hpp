#pragma once

// Symbolic gluing: for a binary word the configuration x^omega concatenates
// 2N-wide blocks of the fixed point (symbol 0) and of the minimizing
// homoclinic (symbol 1), each lifted by the count of ones to its left.  The
// minimax envelopes x^{omega,-} < x^omega < x^{omega,+} are assembled from
// z~ pieces anchored at the ones; their order interval, intersected with the
// per-one energy ceiling E <= e0, is the flow-invariant set whose equilibria
// shadow the word.  Relaxation inside the set is monitored, never projected:
// a membership violation falsifies the invariance at this resolution instead
// of being masked.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "twist/common.hpp"
#include "twist/configuration.hpp"
#include "twist/delta1.hpp"
#include "twist/energy.hpp"
#include "twist/flow.hpp"
#include "twist/homoclinic.hpp"
#include "twist/map.hpp"

namespace twist {

struct SymbolSequence {
  std::vector<int> word;                    // one period over {0,1}
  std::vector<std::int64_t> ones_positions; // indices of ones within the period

  static SymbolSequence from_word(std::vector<int> w) {
    if (w.empty()) throw Error(ErrorCode::InvalidConfig, "empty symbol word");
    SymbolSequence s;
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (w[i] != 0 && w[i] != 1)
        throw Error(ErrorCode::InvalidConfig, "symbol word must be over {0,1}");
      if (w[i] == 1) s.ones_positions.push_back(static_cast<std::int64_t>(i));
    }
    s.word = std::move(w);
    return s;
  }
  std::int64_t period() const { return static_cast<std::int64_t>(word.size()); }
  std::int64_t ones() const { return static_cast<std::int64_t>(ones_positions.size()); }
  double ones_density() const {
    return static_cast<double>(ones()) / static_cast<double>(period());
  }
};

struct ShadowSets {
  Configuration x_omega;
  Configuration x_minus;
  Configuration x_plus;
  std::int64_t N = 0;
  double e0 = 0.0;
  std::int64_t blocks = 0;                 // represented blocks, m = 0 .. blocks-1
  std::vector<int> symbols;                // symbol per represented block
  std::vector<std::int64_t> offsets;       // ones strictly before block m
  std::vector<std::int64_t> one_blocks;    // represented block indices with symbol 1
};

struct MonitorSample {
  double t = 0.0;
  bool in_A = false;
  bool in_B = false;
};

struct ShadowResult {
  Configuration equilibrium;
  double residual = 0.0;
  SymbolSequence itinerary;      // read off the middle period
  std::vector<PhasePoint> orbit; // block centres of the middle period
  double w1_distance = 0.0;
  std::vector<MonitorSample> monitor_log;
  std::int64_t N = 0;
  double e0 = 0.0;
};

// Smallest positive integer N with N >= (log(4 k1 k2) - log Delta1)/log lambda.
inline std::int64_t choose_N(const InstabilityReport& report) {
  if (!(report.delta1 > 0.0) || !(report.lambda > 1.0) || !(report.kappa1 > 0.0) ||
      !(report.kappa2 > 0.0))
    throw Error(ErrorCode::DegenerateInputs, "choose_N: need Delta1 > 0, lambda > 1, kappas > 0");
  const double bound =
      (std::log(4.0 * report.kappa1 * report.kappa2) - std::log(report.delta1)) /
      std::log(report.lambda);
  const auto n = static_cast<std::int64_t>(std::ceil(bound));
  return std::max<std::int64_t>(1, n);
}

inline double entropy_lower_bound(std::int64_t N) {
  if (N < 1) throw Error(ErrorCode::DegenerateInputs, "entropy_lower_bound: N >= 1");
  return std::log(2.0) / (2.0 * static_cast<double>(N));
}

namespace detail {

// Envelope anchors: the represented ones, plus one phantom one far beyond
// each end of the window (the finitely-many-ones adaptation of the
// construction).  The phantoms sit so far out that only the exact z~ tail
// values reach the window, which makes the envelopes consistent with the
// flat padding of x^omega.
struct GlueAnchors {
  std::vector<std::int64_t> pos;         // sorted anchor block indices
  std::vector<std::int64_t> kappa;       // ones strictly before each anchor
};

inline GlueAnchors build_anchors(const std::vector<std::int64_t>& one_blocks,
                                 std::int64_t ones_total, std::int64_t window_lo,
                                 std::int64_t window_hi, std::int64_t N, std::int64_t M) {
  GlueAnchors a;
  const std::int64_t p_left =
      (window_lo - M - 2 * N) / (2 * N) - 2;  // z~ index in the window >= M+1: exact tail
  const std::int64_t p_right = (window_hi + M + 2 * N) / (2 * N) + 2;
  a.pos.push_back(p_left);
  a.kappa.push_back(-1);
  std::int64_t count = 0;
  for (const std::int64_t m : one_blocks) {
    a.pos.push_back(m);
    a.kappa.push_back(count);
    ++count;
  }
  a.pos.push_back(p_right);
  a.kappa.push_back(ones_total);
  return a;
}

}  // namespace detail

inline ShadowSets glue(const HomoclinicPair& pair, const FixedPointData& fp,
                       const SymbolSequence& omega, std::int64_t N, std::int64_t n_periods) {
  if (N < 1) throw Error(ErrorCode::DegenerateInputs, "glue: N >= 1");
  if (pair.M < N + 2)
    throw Error(ErrorCode::WindowTooSmall, "glue: homoclinic window must cover N + 2");
  if (n_periods < 1) throw Error(ErrorCode::InvalidConfig, "glue: n_periods >= 1");

  const std::int64_t P = omega.period();
  const std::int64_t B = P * n_periods;
  const double y0 = fp.y0;

  ShadowSets sets;
  sets.N = N;
  sets.blocks = B;
  sets.symbols.resize(static_cast<std::size_t>(B));
  sets.offsets.resize(static_cast<std::size_t>(B));
  std::int64_t count = 0;
  for (std::int64_t m = 0; m < B; ++m) {
    const int sym = omega.word[static_cast<std::size_t>(m % P)];
    sets.symbols[static_cast<std::size_t>(m)] = sym;
    sets.offsets[static_cast<std::size_t>(m)] = count;
    if (sym == 1) {
      sets.one_blocks.push_back(m);
      ++count;
    }
  }

  // Flat padding beyond the outer blocks keeps the clamped tails where the
  // glued structure has already decayed to the fixed point, so the truncation
  // seam contributes nothing to the residual at double precision.
  const auto pad = static_cast<std::int64_t>(
      std::ceil(std::log(std::max(pair.kappa1, 1.0) / 1e-13) / std::log(fp.lambda))) + 2;
  const std::int64_t lo = -N + 1 - pad;
  const std::int64_t hi = 2 * (B - 1) * N + N + pad;
  Configuration x = Configuration::constant(lo, hi, y0);
  x.tail_left = y0;
  x.tail_right = y0 + static_cast<double>(count);
  for (std::int64_t i = 2 * (B - 1) * N + N + 1; i <= hi; ++i) x.ref(i) = x.tail_right;
  for (std::int64_t m = 0; m < B; ++m) {
    const double k = static_cast<double>(sets.offsets[static_cast<std::size_t>(m)]);
    for (std::int64_t j = -N + 1; j <= N; ++j) {
      const std::int64_t i = 2 * m * N + j;
      x.ref(i) = (sets.symbols[static_cast<std::size_t>(m)] == 1) ? pair.z.at(j) + k : y0 + k;
    }
  }
  sets.x_omega = std::move(x);

  const detail::GlueAnchors anchors =
      detail::build_anchors(sets.one_blocks, count, lo, hi, N, pair.M);
  Configuration lo_env = Configuration::constant(lo, hi, y0);
  Configuration hi_env = Configuration::constant(lo, hi, y0);
  for (std::int64_t i = lo; i <= hi; ++i) {
    // x^-: segment of the largest anchor p with 2pN < i
    std::size_t lo_idx = anchors.pos.size();
    for (std::size_t q = anchors.pos.size(); q-- > 0;)
      if (2 * anchors.pos[q] * N < i) { lo_idx = q; break; }
    // x^+: segment of the smallest anchor p with 2pN >= i
    std::size_t hi_idx = anchors.pos.size();
    for (std::size_t q = 0; q < anchors.pos.size(); ++q)
      if (2 * anchors.pos[q] * N >= i) { hi_idx = q; break; }
    if (lo_idx == anchors.pos.size() || hi_idx == anchors.pos.size())
      throw Error(ErrorCode::WindowMismatch, "glue: envelope anchor out of range");
    const std::int64_t pl = anchors.pos[lo_idx];
    const std::int64_t ph = anchors.pos[hi_idx];
    lo_env.ref(i) = pair.z_tilde.at(i - 2 * pl * N) + static_cast<double>(anchors.kappa[lo_idx]);
    hi_env.ref(i) =
        pair.z_tilde.at(i - 2 * ph * N + 1) + static_cast<double>(anchors.kappa[hi_idx]);
  }
  lo_env.tail_left = lo_env.at(lo);
  lo_env.tail_right = lo_env.at(hi);
  hi_env.tail_left = hi_env.at(lo);
  hi_env.tail_right = hi_env.at(hi);
  sets.x_minus = std::move(lo_env);
  sets.x_plus = std::move(hi_env);

  for (std::int64_t i = lo; i <= hi; ++i) {
    if (sets.x_minus.at(i) > sets.x_omega.at(i) + 1e-12 ||
        sets.x_omega.at(i) > sets.x_plus.at(i) + 1e-12)
      throw Error(ErrorCode::OrderingViolated, "glue: envelope sandwich failed at index " +
                                                   std::to_string(i));
  }
  return sets;
}

inline bool in_A(const Configuration& c, const ShadowSets& sets, double tol = 0.0) {
  if (c.lo != sets.x_omega.lo || c.size() != sets.x_omega.size())
    throw Error(ErrorCode::WindowMismatch, "in_A: windows differ");
  for (std::int64_t j = c.lo; j <= c.hi(); ++j)
    if (c.at(j) < sets.x_minus.at(j) - tol || c.at(j) > sets.x_plus.at(j) + tol) return false;
  return max_step(c) <= 1.0 + std::max(tol, 1e-9);
}

inline bool in_B(const GeneratingFunction& gf, const HomoclinicPair& pair, const Configuration& c,
                 const ShadowSets& sets, double tol = 1e-10) {
  const std::int64_t N = sets.N;
  for (const std::int64_t p : sets.one_blocks) {
    const double k = static_cast<double>(sets.offsets[static_cast<std::size_t>(p)]);
    PerturbationWindow h = PerturbationWindow::zeros(N);
    for (std::int64_t i = -N + 1; i <= N; ++i)
      h.ref(i) = c.at(i + 2 * p * N) - k - pair.z.at(i);
    if (energy_E(gf, pair, h) > sets.e0 + tol) return false;
    if (!connected_to_zero(gf, pair, h, sets.e0)) return false;
  }
  return true;
}

// Reads the symbol of every block whose centre lies in the window: 1 if the
// centre value (mod 1, relative to y0) falls in [a0, b0], 0 if it falls in
// [z~_1 - 1, z~_0] around the fixed point.
inline SymbolSequence itinerary(const HomoclinicPair& pair, const FixedPointData& fp,
                                const Configuration& c, std::int64_t N, double e0,
                                std::int64_t m_lo, std::int64_t m_hi, double tol = 1e-9) {
  if (std::isnan(pair.a0) || std::isnan(pair.b0))
    throw Error(ErrorCode::MissingData, "itinerary: E0 = [a0, b0] not located (call locate_E0)");
  (void)e0;
  const double y0 = fp.y0;
  const double zt0 = pair.z_tilde.at(0);
  const double zt1 = pair.z_tilde.at(1);
  std::vector<int> word;
  for (std::int64_t m = m_lo; m <= m_hi; ++m) {
    const std::int64_t center = 2 * m * N;
    if (!c.contains(center))
      throw Error(ErrorCode::WindowMismatch, "itinerary: block centre outside window");
    const double v = c.at(center);
    const double u = v - std::floor(v - y0);  // representative in [y0, y0+1)
    if (u >= pair.a0 - tol && u <= pair.b0 + tol) {
      word.push_back(1);
    } else if (u <= zt0 + tol || u >= zt1 - tol) {
      word.push_back(0);
    } else {
      throw Error(ErrorCode::Unclassifiable,
                  "block centre value " + std::to_string(u) + " lies in neither interval");
    }
  }
  return SymbolSequence::from_word(std::move(word));
}

struct ShadowOptions {
  double tol = 1e-8;          // equilibrium residual target
  std::int64_t N_override = 0;  // 0: choose_N(report)
  std::int64_t n_periods = 3;
  double monitor_dt = 0.1;
  double t_max = 400.0;
  FlowOptions flow = {.atol = 1e-10, .rtol = 1e-8, .sample_dt = 0.1,
                      .initial_dt = 1e-3, .step_class_K = 1.0, .step_class_margin = 0.1};
};

inline ShadowResult shadow_orbit(const GeneratingFunction& gf, const HomoclinicPair& pair_in,
                                 const FixedPointData& fp, const SymbolSequence& omega,
                                 const InstabilityReport& report, const ShadowOptions& opts = {}) {
  const std::int64_t N = (opts.N_override > 0) ? opts.N_override : choose_N(report);
  const double e0 = report.e_star;

  HomoclinicPair pair = pair_in;
  if (std::isnan(pair.a0) || std::isnan(pair.b0) ||
      std::abs(pair.e0_interval - e0) > 1e-12)
    locate_E0(gf, fp, pair, e0);

  ShadowSets sets = glue(pair, fp, omega, N, opts.n_periods);
  sets.e0 = e0;

  ShadowResult result;
  result.N = N;
  result.e0 = e0;

  FlowStepper stepper(gf, sets.x_omega, opts.flow);
  double t = 0.0;
  double res = residual(gf, sets.x_omega);
  while (res > opts.tol) {
    if (t >= opts.t_max)
      throw Error(ErrorCode::RelaxationStalled,
                  "residual " + std::to_string(res) + " after t = " + std::to_string(t));
    t += opts.monitor_dt;
    stepper.advance_to(t);
    MonitorSample s;
    s.t = t;
    s.in_A = in_A(stepper.state(), sets, 1e-9);
    s.in_B = in_B(gf, pair, stepper.state(), sets);
    result.monitor_log.push_back(s);
    res = residual(gf, stepper.state());
  }
  result.equilibrium = stepper.state();
  result.residual = res;

  // middle period of the represented blocks
  const std::int64_t P = omega.period();
  const std::int64_t mid = (opts.n_periods / 2) * P;
  result.itinerary = itinerary(pair, fp, result.equilibrium, N, e0, mid, mid + P - 1);

  double w1 = 0.0;
  for (std::int64_t m = mid; m < mid + P; ++m) {
    const std::int64_t center = 2 * m * N;
    const double xv = result.equilibrium.at(center);
    const double pv = -gf.V1(xv, result.equilibrium.at(center + 1));
    result.orbit.push_back({xv, pv});
    const double dx = xv - fp.y0;
    const double circ = std::abs(dx - std::round(dx));
    w1 += std::hypot(circ, pv - fp.p0);
  }
  result.w1_distance = w1 / static_cast<double>(P);
  return result;
}

struct WassersteinRow {
  double ones_density = 0.0;
  double w1 = 0.0;
  double w1_over_N = 0.0;  // the factor multiplying the symbolic kappa3 in Eq. 1.6's right side
};

inline std::vector<WassersteinRow> wasserstein_report(const std::vector<ShadowResult>& results,
                                                      const std::vector<SymbolSequence>& words) {
  if (results.size() != words.size())
    throw Error(ErrorCode::WindowMismatch, "wasserstein_report: size mismatch");
  std::vector<WassersteinRow> rows;
  rows.reserve(results.size());
  for (std::size_t i = 0; i < results.size(); ++i) {
    WassersteinRow r;
    r.ones_density = words[i].ones_density();
    r.w1 = results[i].w1_distance;
    r.w1_over_N = results[i].w1_distance / static_cast<double>(results[i].N);
    rows.push_back(r);
  }
  return rows;
}

}  // namespace twist
