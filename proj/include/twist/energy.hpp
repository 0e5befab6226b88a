#pragma once

// The energy functional E on perturbation windows around the minimizing
// homoclinic: E(h) = sum_k V(z_k+h_k, z_{k+1}+h_{k+1}) - V(z_k, z_{k+1}),
// its gradient (which also has components at the echo sites -N and N+1 just
// outside the truncation), the tridiagonal window Hessian, and the
// geometrically-decaying box bounds u_j = 2 kappa1 lambda^{-|j|}.

#include <cmath>
#include <cstdint>
#include <vector>

#include "twist/common.hpp"
#include "twist/homoclinic.hpp"

namespace twist {

struct PerturbationWindow {
  std::int64_t N = 0;         // support is -N+1 .. N
  std::vector<double> h;      // size 2N

  static PerturbationWindow zeros(std::int64_t N) {
    PerturbationWindow w;
    w.N = N;
    w.h.assign(static_cast<std::size_t>(2 * N), 0.0);
    return w;
  }
  std::int64_t lo() const { return -N + 1; }
  std::int64_t hi() const { return N; }
  double at(std::int64_t j) const {
    if (j < lo() || j > hi()) return 0.0;
    return h[static_cast<std::size_t>(j + N - 1)];
  }
  double& ref(std::int64_t j) {
    if (j < lo() || j > hi()) throw Error(ErrorCode::IndexOutOfWindow, "PerturbationWindow::ref");
    return h[static_cast<std::size_t>(j + N - 1)];
  }
  double norm() const {
    double s = 0.0;
    for (const double v : h) s += v * v;
    return std::sqrt(s);
  }
};

struct BoxBound {
  std::int64_t N = 0;
  std::vector<double> u;  // aligned with PerturbationWindow: sites -N+1 .. N

  double at(std::int64_t j) const {
    if (j < -N + 1 || j > N) return 0.0;
    return u[static_cast<std::size_t>(j + N - 1)];
  }
};

inline BoxBound make_box(double kappa1, double lambda, std::int64_t N) {
  BoxBound b;
  b.N = N;
  b.u.resize(static_cast<std::size_t>(2 * N));
  for (std::int64_t j = -N + 1; j <= N; ++j)
    b.u[static_cast<std::size_t>(j + N - 1)] =
        2.0 * kappa1 * std::pow(lambda, -static_cast<double>(std::llabs(j)));
  return b;
}

struct GradientWindow {
  std::int64_t lo = 0;        // first site, -N
  std::vector<double> values; // sites -N .. N+1

  double at(std::int64_t j) const {
    const std::int64_t i = j - lo;
    if (i < 0 || i >= static_cast<std::int64_t>(values.size())) return 0.0;
    return values[static_cast<std::size_t>(i)];
  }
  double norm_sq() const {
    double s = 0.0;
    for (const double v : values) s += v * v;
    return s;
  }
};

struct TridiagonalOperator {
  std::int64_t lo = 0;       // first site, -N+1
  std::vector<double> sub;   // sub[i] couples site lo+i to lo+i-1 (sub[0] unused)
  std::vector<double> diag;
  std::vector<double> sup;   // sup[i] couples site lo+i to lo+i+1 (last unused)

  std::int64_t size() const { return static_cast<std::int64_t>(diag.size()); }

  std::vector<double> apply(const std::vector<double>& x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      double acc = diag[i] * x[i];
      if (i > 0) acc += sub[i] * x[i - 1];
      if (i + 1 < n) acc += sup[i] * x[i + 1];
      y[i] = acc;
    }
    return y;
  }
};

namespace detail {

inline void check_window(const HomoclinicPair& pair, const PerturbationWindow& h) {
  if (h.N < 1 || h.N > pair.M - 2)
    throw Error(ErrorCode::WindowMismatch,
                "perturbation window must satisfy 1 <= N <= M - 2");
}

}  // namespace detail

inline double energy_E(const GeneratingFunction& gf, const HomoclinicPair& pair,
                       const PerturbationWindow& h) {
  detail::check_window(pair, h);
  const std::int64_t N = h.N;
  double s = 0.0;
  for (std::int64_t k = -N; k <= N; ++k) {
    const double a = pair.z.at(k) + h.at(k);
    const double b = pair.z.at(k + 1) + h.at(k + 1);
    s += gf.V(a, b) - gf.V(pair.z.at(k), pair.z.at(k + 1));
  }
  return s;
}

// Gradient components at every touched site, -N .. N+1.
inline GradientWindow grad_E(const GeneratingFunction& gf, const HomoclinicPair& pair,
                             const PerturbationWindow& h) {
  detail::check_window(pair, h);
  const std::int64_t N = h.N;
  GradientWindow g;
  g.lo = -N;
  g.values.resize(static_cast<std::size_t>(2 * N + 2));
  for (std::int64_t k = -N; k <= N + 1; ++k) {
    const double xm = pair.z.at(k - 1) + h.at(k - 1);
    const double x0 = pair.z.at(k) + h.at(k);
    const double xp = pair.z.at(k + 1) + h.at(k + 1);
    g.values[static_cast<std::size_t>(k + N)] = gf.V2(xm, x0) + gf.V1(x0, xp);
  }
  return g;
}

inline TridiagonalOperator hessian(const GeneratingFunction& gf, const HomoclinicPair& pair,
                                   const PerturbationWindow& h) {
  detail::check_window(pair, h);
  const std::int64_t N = h.N;
  TridiagonalOperator A;
  A.lo = -N + 1;
  const std::size_t n = static_cast<std::size_t>(2 * N);
  A.sub.assign(n, 0.0);
  A.diag.assign(n, 0.0);
  A.sup.assign(n, 0.0);
  for (std::int64_t i = -N + 1; i <= N; ++i) {
    const auto ii = static_cast<std::size_t>(i + N - 1);
    const double xm = pair.z.at(i - 1) + h.at(i - 1);
    const double x0 = pair.z.at(i) + h.at(i);
    const double xp = pair.z.at(i + 1) + h.at(i + 1);
    A.diag[ii] = gf.V22(xm, x0) + gf.V11(x0, xp);
    if (i > -N + 1) A.sub[ii] = gf.V12(xm, x0);
    if (i < N) A.sup[ii] = gf.V12(x0, xp);
  }
  return A;
}

inline bool in_box(const PerturbationWindow& h, const BoxBound& u) {
  if (h.N != u.N) throw Error(ErrorCode::WindowMismatch, "in_box: windows differ");
  for (std::int64_t j = h.lo(); j <= h.hi(); ++j)
    if (std::abs(h.at(j)) > u.at(j)) return false;
  return true;
}

// d/dh of ||grad E(h)||^2 over the support sites.
inline std::vector<double> grad_norm_sq_gradient(const GeneratingFunction& gf,
                                                 const HomoclinicPair& pair,
                                                 const PerturbationWindow& h) {
  const std::int64_t N = h.N;
  const GradientWindow g = grad_E(gf, pair, h);
  std::vector<double> out(static_cast<std::size_t>(2 * N), 0.0);
  for (std::int64_t j = -N + 1; j <= N; ++j) {
    const double xm = pair.z.at(j - 1) + h.at(j - 1);
    const double x0 = pair.z.at(j) + h.at(j);
    const double xp = pair.z.at(j + 1) + h.at(j + 1);
    const double d_prev = gf.V12(xm, x0);                      // dg_{j-1}/dh_j
    const double d_self = gf.V22(xm, x0) + gf.V11(x0, xp);     // dg_j/dh_j
    const double d_next = gf.V12(x0, xp);                      // dg_{j+1}/dh_j
    out[static_cast<std::size_t>(j + N - 1)] =
        2.0 * (g.at(j - 1) * d_prev + g.at(j) * d_self + g.at(j + 1) * d_next);
  }
  return out;
}

}  // namespace twist
