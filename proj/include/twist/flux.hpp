#pragma once

// The action flux balance law along the semiflow: with h(t) the truncated
// deviation of the trajectory from the minimizing homoclinic,
//   dE(h(t))/dt = F(t) - ||grad E(h(t))||^2,
// where F collects the eight boundary terms F_1..F_8 of the window
// decomposition and obeys |F| <= kappa2 * max boundary deviation.  The audit
// reconstructs F two ways: from a centered difference of E (keeping the check
// independent of the integrator) and directly from the F_1..F_8 formulas.

#include <cstdint>
#include <vector>

#include "twist/energy.hpp"
#include "twist/flow.hpp"
#include "twist/homoclinic.hpp"

namespace twist {

struct FluxAuditRecord {
  double t = 0.0;
  double dE_dt_numeric = 0.0;
  double grad_norm_sq = 0.0;
  double F_reconstructed = 0.0;  // dE_dt + ||grad E||^2
  double F_bound = 0.0;          // kappa2 * max boundary deviation
  double F_direct = 0.0;         // F_1 + ... + F_8
  double F1 = 0.0;               // first boundary square, for the chain bound
  double boundary_dev = 0.0;     // max |x_i - z_i| over i in {-N,-N+1,N,N+1}
};

// kappa2 = 8 max{|V1|,|V2| : |x-y|<=2} * max{|V12| : |x-y|<=2}, located by
// dense sampling over one period with local refinement around the best cell.
inline double kappa2(const GeneratingFunction& gf, int n = 1024) {
  auto scan = [&](auto&& f, double x_lo, double x_hi, double d_lo, double d_hi, int m,
                  double& bx, double& bd) {
    double best = -1e300;
    for (int i = 0; i < m; ++i) {
      const double x = x_lo + (x_hi - x_lo) * static_cast<double>(i) / (m - 1);
      for (int j = 0; j < m; ++j) {
        const double d = d_lo + (d_hi - d_lo) * static_cast<double>(j) / (m - 1);
        const double v = f(x, x + d);
        if (v > best) { best = v; bx = x; bd = d; }
      }
    }
    return best;
  };
  auto refine = [&](auto&& f) {
    double bx = 0.0, bd = 0.0;
    double best = scan(f, 0.0, 1.0, -2.0, 2.0, n, bx, bd);
    double wx = 1.0 / (n - 1), wd = 4.0 / (n - 1);
    for (int round = 0; round < 3; ++round) {
      double bx2 = bx, bd2 = bd;
      const double v = scan(f, bx - wx, bx + wx, std::max(-2.0, bd - wd),
                            std::min(2.0, bd + wd), 65, bx2, bd2);
      best = std::max(best, v);
      bx = bx2; bd = bd2;
      wx /= 32.0; wd /= 32.0;
    }
    return best;
  };
  const double m1 = refine([&](double x, double y) {
    return std::max(std::abs(gf.V1(x, y)), std::abs(gf.V2(x, y)));
  });
  const double m2 = refine([&](double x, double y) { return std::abs(gf.V12(x, y)); });
  return 8.0 * m1 * m2;
}

inline std::vector<FluxAuditRecord> flux_audit(const GeneratingFunction& gf,
                                               const HomoclinicPair& pair,
                                               const Trajectory& traj, std::int64_t N,
                                               double kappa2_value = 0.0) {
  if (traj.states.size() < 3)
    throw Error(ErrorCode::WindowMismatch, "flux_audit: need at least 3 samples");
  const Configuration& first = traj.states.front();
  if (first.lo > -N - 1 || first.hi() < N + 2)
    throw Error(ErrorCode::WindowMismatch, "flux_audit: trajectory window must cover [-N-1, N+2]");
  if (N > pair.M - 2)
    throw Error(ErrorCode::WindowMismatch, "flux_audit: N exceeds homoclinic window - 2");
  const double k2 = (kappa2_value > 0.0) ? kappa2_value : kappa2(gf);

  const auto& z = pair.z;
  auto truncated = [&](const Configuration& x) {
    PerturbationWindow h = PerturbationWindow::zeros(N);
    for (std::int64_t j = -N + 1; j <= N; ++j) h.ref(j) = x.at(j) - z.at(j);
    return h;
  };

  std::vector<double> energies(traj.states.size());
  for (std::size_t i = 0; i < traj.states.size(); ++i)
    energies[i] = energy_E(gf, pair, truncated(traj.states[i]));

  std::vector<FluxAuditRecord> records;
  records.reserve(traj.states.size() - 2);
  for (std::size_t i = 1; i + 1 < traj.states.size(); ++i) {
    const Configuration& x = traj.states[i];
    FluxAuditRecord r;
    r.t = traj.times[i];
    r.dE_dt_numeric = (energies[i + 1] - energies[i - 1]) / (traj.times[i + 1] - traj.times[i - 1]);
    r.grad_norm_sq = grad_E(gf, pair, truncated(x)).norm_sq();
    r.F_reconstructed = r.dE_dt_numeric + r.grad_norm_sq;

    for (std::int64_t b : {-N, -N + 1, N, N + 1})
      r.boundary_dev = std::max(r.boundary_dev, std::abs(x.at(b) - z.at(b)));
    r.F_bound = k2 * r.boundary_dev;

    // the eight boundary terms of the window decomposition
    const double F1s = gf.V2(z.at(-N - 1), z.at(-N)) + gf.V1(z.at(-N), x.at(-N + 1));
    const double F2s = gf.V2(z.at(-N), x.at(-N + 1)) + gf.V1(x.at(-N + 1), x.at(-N + 2));
    const double F3s = gf.V2(x.at(N - 1), x.at(N)) + gf.V1(x.at(N), z.at(N + 1));
    const double F4s = gf.V2(x.at(N), z.at(N + 1)) + gf.V1(z.at(N + 1), z.at(N + 2));
    const double gleft = gf.V2(x.at(-N), x.at(-N + 1)) + gf.V1(x.at(-N + 1), x.at(-N + 2));
    const double gright = gf.V2(x.at(N - 1), x.at(N)) + gf.V1(x.at(N), x.at(N + 1));
    const double F1 = F1s * F1s;
    const double F2 = F2s * F2s;
    const double F3 = F3s * F3s;
    const double F4 = F4s * F4s;
    const double F5 = -gf.V2(z.at(-N), x.at(-N + 1)) * gleft;
    const double F6 = -gf.V1(x.at(-N + 1), x.at(-N + 2)) * gleft;
    const double F7 = -gf.V2(x.at(N - 1), x.at(N)) * gright;
    const double F8 = -gf.V1(x.at(N), z.at(N + 1)) * gright;
    r.F1 = F1;
    r.F_direct = F1 + F2 + F3 + F4 + F5 + F6 + F7 + F8;
    records.push_back(r);
  }
  return records;
}

}  // namespace twist
