#pragma once

// Shared lazily-computed fixtures.  The k = 1 homoclinic pipeline is the
// workhorse input for most suites; computing it once per test binary keeps
// the suites fast.

#include <map>
#include <tuple>

#include "twist/delta1.hpp"
#include "twist/flux.hpp"
#include "twist/generating_function.hpp"
#include "twist/homoclinic.hpp"
#include "twist/map.hpp"
#include "twist/shadowing.hpp"

namespace fixtures {

inline const twist::GeneratingFunction& std_map(double k) {
  static std::map<double, twist::GeneratingFunction> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, twist::standard_map(k)).first;
  return it->second;
}

inline const twist::FixedPointData& fixed_point(double k) {
  static std::map<double, twist::FixedPointData> cache;
  auto it = cache.find(k);
  if (it == cache.end()) {
    twist::FixedPointData fp = twist::find_minimizing_fixed_point(std_map(k));
    fp.lambda = twist::linearize_eigen(std_map(k), fp);
    it = cache.emplace(k, fp).first;
  }
  return it->second;
}

inline const twist::HomoclinicPair& homoclinics(double k, std::int64_t M = 64, int grid_n = 512) {
  static std::map<std::tuple<double, std::int64_t, int>, twist::HomoclinicPair> cache;
  const auto key = std::make_tuple(k, M, grid_n);
  auto it = cache.find(key);
  if (it == cache.end())
    it = cache.emplace(key, twist::compute_homoclinics(std_map(k), fixed_point(k), M, grid_n)).first;
  return it->second;
}

// Full instability report (delta1 with a light start budget, kappa2, delta2,
// N and the entropy bound).
inline const twist::InstabilityReport& report(double k) {
  static std::map<double, twist::InstabilityReport> cache;
  auto it = cache.find(k);
  if (it == cache.end()) {
    twist::InstabilityReport rep;
    twist::Delta1Options opts;
    opts.n_starts = 2;
    twist::delta1(std_map(k), homoclinics(k), fixed_point(k), 32, rep, opts);
    rep.kappa2 = twist::kappa2(std_map(k));
    rep.delta2 = twist::delta2(std_map(k), homoclinics(k), 32);
    rep.N_min = twist::choose_N(rep);
    rep.entropy_bound = twist::entropy_lower_bound(rep.N_min);
    it = cache.emplace(k, rep).first;
  }
  return it->second;
}

// Homoclinic pair with the E0 interval located at the report's e_star.
inline const twist::HomoclinicPair& pair_with_E0(double k) {
  static std::map<double, twist::HomoclinicPair> cache;
  auto it = cache.find(k);
  if (it == cache.end()) {
    twist::HomoclinicPair p = homoclinics(k);
    twist::locate_E0(std_map(k), fixed_point(k), p, report(k).e_star);
    it = cache.emplace(k, p).first;
  }
  return it->second;
}

}  // namespace fixtures
