#pragma once

// The formally gradient semiflow of the action on a finite window,
//   dx_j/dt = -V2(x_{j-1}, x_j) - V1(x_j, x_{j+1}),
// with constant (Dirichlet) tails.  Adaptive embedded Dormand-Prince 5(4)
// with absolute/relative error control; optional pinned coordinates are held
// exactly constant.  Equilibria of this flow are orbits of the map.

#include <cstdint>
#include <vector>

#include "twist/common.hpp"
#include "twist/configuration.hpp"
#include "twist/generating_function.hpp"

namespace twist {

struct FlowOptions {
  double atol = 1e-10;
  double rtol = 1e-8;
  double sample_dt = 0.1;
  double initial_dt = 1e-3;
  double step_class_K = 1.0;      // X_K bound the states must respect
  double step_class_margin = 0.1;
  std::uint64_t max_steps = 50'000'000;
};

struct StepStats {
  std::int64_t accepted = 0;
  std::int64_t rejected = 0;
  double max_error_estimate = 0.0;
};

struct Trajectory {
  std::vector<double> times;
  std::vector<Configuration> states;
  StepStats step_stats;
};

class FlowStepper {
 public:
  FlowStepper(const GeneratingFunction& gf, Configuration c0, FlowOptions opts,
              std::vector<std::uint8_t> pinned = {})
      : gf_(gf), c_(std::move(c0)), opts_(opts), pinned_(std::move(pinned)), dt_(opts.initial_dt) {
    const auto n = static_cast<std::size_t>(c_.size());
    if (!pinned_.empty() && pinned_.size() != n)
      throw Error(ErrorCode::WindowMismatch, "pinned mask size != window size");
    k1_.resize(n); k2_.resize(n); k3_.resize(n); k4_.resize(n);
    k5_.resize(n); k6_.resize(n); k7_.resize(n); ytmp_.resize(n); y5_.resize(n);
    check_step_class();
  }

  const Configuration& state() const { return c_; }
  double time() const { return t_; }
  const StepStats& stats() const { return stats_; }

  // Right-hand side at arbitrary values (tails from the stored configuration).
  void rhs(const std::vector<double>& y, std::vector<double>& out) const {
    const auto n = static_cast<std::int64_t>(y.size());
    auto val = [&](std::int64_t j) -> double {
      if (j < 0) return c_.tail_left;
      if (j >= n) return c_.tail_right;
      return y[static_cast<std::size_t>(j)];
    };
    for (std::int64_t j = 0; j < n; ++j) {
      if (!pinned_.empty() && pinned_[static_cast<std::size_t>(j)]) {
        out[static_cast<std::size_t>(j)] = 0.0;
        continue;
      }
      out[static_cast<std::size_t>(j)] =
          -gf_.V2(val(j - 1), val(j)) - gf_.V1(val(j), val(j + 1));
    }
  }

  void advance_to(double t_target) {
    while (t_ < t_target) {
      double dt = std::min(dt_, t_target - t_);
      if (dt < 1e-14 * std::max(1.0, std::abs(t_))) {
        if (t_target - t_ < 1e-12 * std::max(1.0, std::abs(t_target))) { t_ = t_target; return; }
        throw Error(ErrorCode::StepSizeUnderflow, "flow step size underflow at t = " + std::to_string(t_));
      }
      if (try_step(dt)) {
        t_ += dt;
        check_step_class();
      }
      if (stats_.accepted + stats_.rejected > static_cast<std::int64_t>(opts_.max_steps))
        throw Error(ErrorCode::MaxIterations, "flow exceeded max step count");
    }
  }

 private:
  bool try_step(double dt) {
    auto& y = c_.values;
    const std::size_t n = y.size();
    rhs(y, k1_);
    stage(y, dt, {{1.0 / 5, &k1_}});
    rhs(ytmp_, k2_);
    stage(y, dt, {{3.0 / 40, &k1_}, {9.0 / 40, &k2_}});
    rhs(ytmp_, k3_);
    stage(y, dt, {{44.0 / 45, &k1_}, {-56.0 / 15, &k2_}, {32.0 / 9, &k3_}});
    rhs(ytmp_, k4_);
    stage(y, dt, {{19372.0 / 6561, &k1_}, {-25360.0 / 2187, &k2_}, {64448.0 / 6561, &k3_},
                  {-212.0 / 729, &k4_}});
    rhs(ytmp_, k5_);
    stage(y, dt, {{9017.0 / 3168, &k1_}, {-355.0 / 33, &k2_}, {46732.0 / 5247, &k3_},
                  {49.0 / 176, &k4_}, {-5103.0 / 18656, &k5_}});
    rhs(ytmp_, k6_);
    stage(y, dt, {{35.0 / 384, &k1_}, {500.0 / 1113, &k3_}, {125.0 / 192, &k4_},
                  {-2187.0 / 6784, &k5_}, {11.0 / 84, &k6_}});
    y5_ = ytmp_;  // fifth-order solution
    rhs(y5_, k7_);

    // embedded error: coefficients b5 - b4
    static constexpr double e1 = 35.0 / 384 - 5179.0 / 57600;
    static constexpr double e3 = 500.0 / 1113 - 7571.0 / 16695;
    static constexpr double e4 = 125.0 / 192 - 393.0 / 640;
    static constexpr double e5 = -2187.0 / 6784 + 92097.0 / 339200;
    static constexpr double e6 = 11.0 / 84 - 187.0 / 2100;
    static constexpr double e7 = -1.0 / 40;
    double err = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double e = dt * (e1 * k1_[j] + e3 * k3_[j] + e4 * k4_[j] + e5 * k5_[j] +
                             e6 * k6_[j] + e7 * k7_[j]);
      const double sc = opts_.atol + opts_.rtol * std::max(std::abs(y[j]), std::abs(y5_[j]));
      err = std::max(err, std::abs(e) / sc);
    }
    stats_.max_error_estimate = std::max(stats_.max_error_estimate, err);
    if (err <= 1.0) {
      y = y5_;
      ++stats_.accepted;
      const double f = (err == 0.0) ? 5.0 : std::min(5.0, std::max(0.2, 0.9 * std::pow(err, -0.2)));
      dt_ = dt * f;
      return true;
    }
    ++stats_.rejected;
    dt_ = dt * std::max(0.2, 0.9 * std::pow(err, -0.2));
    return false;
  }

  struct Coef { double a; const std::vector<double>* k; };
  void stage(const std::vector<double>& y, double dt, std::initializer_list<Coef> cs) {
    const std::size_t n = y.size();
    for (std::size_t j = 0; j < n; ++j) {
      double acc = y[j];
      for (const auto& c : cs) acc += dt * c.a * (*c.k)[j];
      ytmp_[j] = acc;
    }
  }

  void check_step_class() const {
    const double s = max_step(c_);
    if (s > opts_.step_class_K + opts_.step_class_margin)
      throw Error(ErrorCode::StepClassViolation,
                  "sup |x_j - x_{j+1}| = " + std::to_string(s) + " exceeds K + margin");
  }

  const GeneratingFunction& gf_;
  Configuration c_;
  FlowOptions opts_;
  std::vector<std::uint8_t> pinned_;
  double t_ = 0.0;
  double dt_;
  StepStats stats_;
  std::vector<double> k1_, k2_, k3_, k4_, k5_, k6_, k7_, ytmp_, y5_;
};

inline Trajectory integrate(const GeneratingFunction& gf, const Configuration& c0, double t_end,
                            const FlowOptions& opts = {},
                            const std::vector<std::uint8_t>& pinned = {}) {
  FlowStepper stepper(gf, c0, opts, pinned);
  Trajectory traj;
  traj.times.push_back(0.0);
  traj.states.push_back(c0);
  double t = 0.0;
  while (t < t_end) {
    t = std::min(t + opts.sample_dt, t_end);
    stepper.advance_to(t);
    traj.times.push_back(t);
    traj.states.push_back(stepper.state());
  }
  traj.step_stats = stepper.stats();
  return traj;
}

// Integrates both configurations and reports whether cx(t) <= cy(t) + 1e-9
// componentwise at every sample.  The two trajectories carry independent
// integration errors, so the tolerances are tightened well below the 1e-9
// comparison slack.
inline bool order_preserved(const GeneratingFunction& gf, const Configuration& cx,
                            const Configuration& cy, double t_end, FlowOptions opts = {}) {
  if (cx.lo != cy.lo || cx.size() != cy.size())
    throw Error(ErrorCode::WindowMismatch, "order_preserved: windows differ");
  opts.atol = std::min(opts.atol, 1e-13);
  opts.rtol = std::min(opts.rtol, 1e-11);
  const Trajectory tx = integrate(gf, cx, t_end, opts);
  const Trajectory ty = integrate(gf, cy, t_end, opts);
  for (std::size_t s = 0; s < tx.states.size(); ++s)
    for (std::size_t j = 0; j < tx.states[s].values.size(); ++j)
      if (tx.states[s].values[j] > ty.states[s].values[j] + 1e-9) return false;
  return true;
}

}  // namespace twist
