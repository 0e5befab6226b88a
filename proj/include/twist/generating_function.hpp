#pragma once

// Generating functions of area-preserving twist maps.  A map f:(x,p)->(x',p')
// is defined implicitly by p = -V1(x,x'), p' = V2(x,x') for a scalar V(x,x')
// with V(x+1,x'+1) = V(x,x') and V12 <= -delta < 0 (twist).  The Standard
// (Chirikov-Taylor) family V(x,x') = (x'-x)^2/2 - k cos(2 pi x)/(2 pi) is
// built in; custom maps supply analytic derivative evaluators directly --
// no numeric differentiation happens in the core.

#include <cmath>
#include <functional>

#include "twist/common.hpp"

namespace twist {

enum class MapKind { standard, custom };

enum class Partial { V, V1, V2, V11, V12, V22 };

struct GeneratingFunction {
  MapKind kind = MapKind::standard;
  double k = 1.0;  // Standard-map coupling; unused for custom maps

  using Eval = std::function<double(double, double)>;
  Eval V, V1, V2, V11, V12, V22;

  // Half-width of the root bracket used when solving the implicit equations;
  // for the standard family V1 grows linearly in x'-x so |p| + k + 2 suffices.
  double bracket_pad = 2.0;
};

inline GeneratingFunction standard_map(double k) {
  GeneratingFunction gf;
  gf.kind = MapKind::standard;
  gf.k = k;
  gf.V = [k](double x, double xp) {
    const double d = xp - x;
    return 0.5 * d * d - k * std::cos(kTwoPi * x) / kTwoPi;
  };
  gf.V1 = [k](double x, double xp) { return -(xp - x) + k * std::sin(kTwoPi * x); };
  gf.V2 = [](double x, double xp) { return xp - x; };
  gf.V11 = [k](double x, double /*xp*/) { return 1.0 + kTwoPi * k * std::cos(kTwoPi * x); };
  gf.V12 = [](double, double) { return -1.0; };
  gf.V22 = [](double, double) { return 1.0; };
  gf.bracket_pad = std::abs(k) + 2.0;
  return gf;
}

inline GeneratingFunction custom_map(GeneratingFunction::Eval V, GeneratingFunction::Eval V1,
                                     GeneratingFunction::Eval V2, GeneratingFunction::Eval V11,
                                     GeneratingFunction::Eval V12, GeneratingFunction::Eval V22,
                                     double bracket_pad = 8.0) {
  GeneratingFunction gf;
  gf.kind = MapKind::custom;
  gf.V = std::move(V);
  gf.V1 = std::move(V1);
  gf.V2 = std::move(V2);
  gf.V11 = std::move(V11);
  gf.V12 = std::move(V12);
  gf.V22 = std::move(V22);
  gf.bracket_pad = bracket_pad;
  return gf;
}

inline double eval_generating(const GeneratingFunction& gf, double x, double xp, Partial which) {
  switch (which) {
    case Partial::V: return gf.V(x, xp);
    case Partial::V1: return gf.V1(x, xp);
    case Partial::V2: return gf.V2(x, xp);
    case Partial::V11: return gf.V11(x, xp);
    case Partial::V12: return gf.V12(x, xp);
    case Partial::V22: return gf.V22(x, xp);
  }
  throw Error(ErrorCode::InvalidConfig, "eval_generating: bad selector");
}

// Sampled validation of the structural assumptions.  Returns the worst
// periodicity defect |V(x+1,x'+1)-V(x,x')| over an n x n grid with offsets
// |x-x'| <= 2.
inline double periodicity_defect(const GeneratingFunction& gf, int n = 64) {
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    for (int j = 0; j < n; ++j) {
      const double xp = x - 2.0 + 4.0 * static_cast<double>(j) / (n - 1);
      worst = std::max(worst, std::abs(gf.V(x + 1.0, xp + 1.0) - gf.V(x, xp)));
    }
  }
  return worst;
}

// Largest sampled V12 over |x-x'| <= 2 (twist requires this to stay below 0).
inline double twist_upper_bound(const GeneratingFunction& gf, int n = 64) {
  double worst = -1e300;
  for (int i = 0; i < n; ++i) {
    const double x = static_cast<double>(i) / n;
    for (int j = 0; j < n; ++j) {
      const double xp = x - 2.0 + 4.0 * static_cast<double>(j) / (n - 1);
      worst = std::max(worst, gf.V12(x, xp));
    }
  }
  return worst;
}

// Worst relative mismatch between the supplied V1, V2 and central differences
// of V over the sampled grid.
inline double derivative_defect(const GeneratingFunction& gf, int n = 32) {
  const double h = 1e-6;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = 0.013 + static_cast<double>(i) / n;
    for (int j = 0; j < n; ++j) {
      const double xp = x - 2.0 + 4.0 * static_cast<double>(j) / (n - 1);
      const double d1 = (gf.V(x + h, xp) - gf.V(x - h, xp)) / (2.0 * h);
      const double d2 = (gf.V(x, xp + h) - gf.V(x, xp - h)) / (2.0 * h);
      const double s1 = std::max(1.0, std::abs(gf.V1(x, xp)));
      const double s2 = std::max(1.0, std::abs(gf.V2(x, xp)));
      worst = std::max(worst, std::abs(d1 - gf.V1(x, xp)) / s1);
      worst = std::max(worst, std::abs(d2 - gf.V2(x, xp)) / s2);
    }
  }
  return worst;
}

}  // namespace twist
