#pragma once

// Shared infrastructure: error codes, a counter-based RNG used for all
// stochastic multi-starts (stateless, so parallel evaluation order cannot
// perturb results), and a few scalar search utilities.

#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <stdexcept>
#include <string>

namespace twist {

enum class ErrorCode {
  NoBracket,
  IndexOutOfWindow,
  NonUniqueMinimum,
  NotHyperbolic,
  WindowTooSmall,
  OrderingViolated,
  MaxIterations,
  OutOfRange,
  WindowMismatch,
  Infeasible,
  StepSizeUnderflow,
  StepClassViolation,
  RelaxationStalled,
  Unclassifiable,
  DegenerateInputs,
  MissingData,
  InvalidConfig,
};

inline const char* error_code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::NoBracket: return "NoBracket";
    case ErrorCode::IndexOutOfWindow: return "IndexOutOfWindow";
    case ErrorCode::NonUniqueMinimum: return "NonUniqueMinimum";
    case ErrorCode::NotHyperbolic: return "NotHyperbolic";
    case ErrorCode::WindowTooSmall: return "WindowTooSmall";
    case ErrorCode::OrderingViolated: return "OrderingViolated";
    case ErrorCode::MaxIterations: return "MaxIterations";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::WindowMismatch: return "WindowMismatch";
    case ErrorCode::Infeasible: return "Infeasible";
    case ErrorCode::StepSizeUnderflow: return "StepSizeUnderflow";
    case ErrorCode::StepClassViolation: return "StepClassViolation";
    case ErrorCode::RelaxationStalled: return "RelaxationStalled";
    case ErrorCode::Unclassifiable: return "Unclassifiable";
    case ErrorCode::DegenerateInputs: return "DegenerateInputs";
    case ErrorCode::MissingData: return "MissingData";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + what),
        code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Counter-based RNG.  value(i) depends only on (seed, stream, i); streams are
// derived from arbitrary tag words so that e.g. the multi-start randomness at
// a given energy level is keyed by the level itself, not by evaluation order.

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream1, std::uint64_t stream2 = 0)
      : base_(mix64(seed ^ mix64(stream1 ^ mix64(stream2)))) {}

  // Uniform in [0, 1).
  double uniform(std::uint64_t counter) const {
    const std::uint64_t r = mix64(base_ ^ (counter * 0xd1342543de82ef95ULL));
    return static_cast<double>(r >> 11) * 0x1.0p-53;
  }
  // Uniform in [-1, 1).
  double symmetric(std::uint64_t counter) const { return 2.0 * uniform(counter) - 1.0; }

  static std::uint64_t stream_of(double tag) {
    std::uint64_t bits;
    static_assert(sizeof(bits) == sizeof(tag));
    std::memcpy(&bits, &tag, sizeof(bits));
    return bits;
  }

 private:
  std::uint64_t base_;
};

// ---------------------------------------------------------------------------
// Scalar searches.

// Golden-section minimization of f on [a, b]; f assumed unimodal there.
// Returns the abscissa of the minimum located to absolute tolerance xtol.
inline double golden_min(const std::function<double(double)>& f, double a, double b,
                         double xtol, int itmax = 200) {
  const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - invphi * (b - a);
  double d = a + invphi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < itmax && (b - a) > xtol; ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - invphi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + invphi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Bisection for f(x) = 0 on a bracket [a, b] with f(a), f(b) of opposite sign.
inline double bisect_root(const std::function<double(double)>& f, double a, double b,
                          double xtol, int itmax = 200) {
  double fa = f(a);
  double fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if (fa * fb > 0.0) throw Error(ErrorCode::NoBracket, "bisect_root: no sign change");
  for (int i = 0; i < itmax && (b - a) > xtol; ++i) {
    const double m = 0.5 * (a + b);
    const double fm = f(m);
    if (fm == 0.0) return m;
    if (fa * fm < 0.0) {
      b = m; fb = fm;
    } else {
      a = m; fa = fm;
    }
  }
  return 0.5 * (a + b);
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

}  // namespace twist
