#pragma once

// Smallest singular value of a symmetric tridiagonal operator by bisection on
// the LDL^T inertia of shifted copies: the count of eigenvalues in (-s, s) is
// nu(A - sI) - nu(A + sI), where nu counts negative pivots.

#include <cmath>
#include <cstdint>

#include "twist/energy.hpp"

namespace twist {

// Number of eigenvalues of A strictly below sigma.
inline int inertia_below(const TridiagonalOperator& A, double sigma) {
  const std::size_t n = A.diag.size();
  int count = 0;
  double d = A.diag[0] - sigma;
  // pivot floor keeps the recurrence finite when a leading minor is singular
  double scale = std::abs(sigma);
  for (std::size_t i = 0; i < n; ++i)
    scale = std::max(scale, std::abs(A.diag[i]) + (i > 0 ? std::abs(A.sub[i]) : 0.0) +
                                (i + 1 < n ? std::abs(A.sup[i]) : 0.0));
  const double floor = 1e-300 * std::max(1.0, scale);
  if (std::abs(d) < floor) d = -floor;
  if (d < 0.0) ++count;
  for (std::size_t i = 1; i < n; ++i) {
    d = (A.diag[i] - sigma) - A.sub[i] * A.sub[i] / d;
    if (std::abs(d) < floor) d = -floor;
    if (d < 0.0) ++count;
  }
  return count;
}

inline int eigenvalues_in_symmetric_interval(const TridiagonalOperator& A, double s) {
  return inertia_below(A, s) - inertia_below(A, -s);
}

inline double smallest_singular_value(const TridiagonalOperator& A, double rel_tol = 1e-10) {
  const std::size_t n = A.diag.size();
  double hi = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    hi = std::max(hi, std::abs(A.diag[i]) + (i > 0 ? std::abs(A.sub[i]) : 0.0) +
                          (i + 1 < n ? std::abs(A.sup[i]) : 0.0));
  if (eigenvalues_in_symmetric_interval(A, hi * (1.0 + 1e-12)) == 0) return hi;  // degenerate
  double lo = 0.0;
  for (int it = 0; it < 200 && (hi - lo) > rel_tol * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (eigenvalues_in_symmetric_interval(A, mid) >= 1)
      hi = mid;
    else
      lo = mid;
  }
  const double s = 0.5 * (lo + hi);
  return (s < 1e-12) ? 0.0 : s;
}

// Phonon gap: smallest singular value of the window restriction of the second
// variation at the minimizing homoclinic.
inline double delta2(const GeneratingFunction& gf, const HomoclinicPair& pair, std::int64_t N) {
  const TridiagonalOperator A = hessian(gf, pair, PerturbationWindow::zeros(N));
  return smallest_singular_value(A, 1e-10);
}

}  // namespace twist
