#pragma once

// Pipeline orchestration behind the command-line tool: configuration
// parsing/validation, stage execution with homoclinic caching, JSON report
// assembly and tidy-CSV emission.  Reports are deterministic for a fixed
// RunConfig: object keys are sorted, doubles round-trip exactly, and all
// randomness flows from the single seed (timestamps only appear on request).

#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "twist/cache.hpp"
#include "twist/delta1.hpp"
#include "twist/flux.hpp"
#include "twist/shadowing.hpp"

namespace twist::cli {

using nlohmann::json;

struct RunConfig {
  std::string map_kind = "standard";
  double k = 1.0;

  std::int64_t M = 64;
  int grid_n = 512;

  Delta1Options d1;
  std::int64_t d1_N = 32;

  std::vector<int> omega = {1, 0};
  std::int64_t shadow_N = 0;  // 0: auto via the N criterion
  std::int64_t n_periods = 3;

  double flow_atol = 1e-10;
  double flow_rtol = 1e-8;
  double flow_sample_dt = 0.1;
  double flow_t_end = 5.0;

  std::uint64_t seed = 0;
  std::string cache_dir;

  static RunConfig from_json(const json& j);
  json echo() const;
};

inline RunConfig RunConfig::from_json(const json& j) {
  RunConfig c;
  try {
    if (j.contains("map")) {
      const auto& m = j.at("map");
      if (m.contains("kind")) c.map_kind = m.at("kind").get<std::string>();
      if (m.contains("k")) c.k = m.at("k").get<double>();
    }
    if (j.contains("window")) {
      const auto& w = j.at("window");
      if (w.contains("M")) c.M = w.at("M").get<std::int64_t>();
      if (w.contains("grid_n")) c.grid_n = w.at("grid_n").get<int>();
    }
    if (j.contains("delta1")) {
      const auto& d = j.at("delta1");
      if (d.contains("e_grid")) c.d1.e_grid = d.at("e_grid").get<int>();
      if (d.contains("n_starts")) c.d1.n_starts = d.at("n_starts").get<int>();
      if (d.contains("tol")) c.d1.tol = d.at("tol").get<double>();
      if (d.contains("refine_connectivity"))
        c.d1.refine_connectivity = d.at("refine_connectivity").get<bool>();
      if (d.contains("N")) c.d1_N = d.at("N").get<std::int64_t>();
    }
    if (j.contains("shadow")) {
      const auto& s = j.at("shadow");
      if (s.contains("omega")) c.omega = s.at("omega").get<std::vector<int>>();
      if (s.contains("N")) {
        if (s.at("N").is_string()) {
          if (s.at("N").get<std::string>() != "auto")
            throw Error(ErrorCode::InvalidConfig, "shadow.N must be \"auto\" or an integer");
          c.shadow_N = 0;
        } else {
          c.shadow_N = s.at("N").get<std::int64_t>();
        }
      }
      if (s.contains("n_periods")) c.n_periods = s.at("n_periods").get<std::int64_t>();
    }
    if (j.contains("flow")) {
      const auto& f = j.at("flow");
      if (f.contains("atol")) c.flow_atol = f.at("atol").get<double>();
      if (f.contains("rtol")) c.flow_rtol = f.at("rtol").get<double>();
      if (f.contains("sample_dt")) c.flow_sample_dt = f.at("sample_dt").get<double>();
      if (f.contains("t_end")) c.flow_t_end = f.at("t_end").get<double>();
    }
    if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("cache_dir")) c.cache_dir = j.at("cache_dir").get<std::string>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config parse: ") + e.what());
  }
  c.d1.seed = c.seed;

  if (c.map_kind != "standard")
    throw Error(ErrorCode::InvalidConfig, "map.kind must be \"standard\"");
  if (!(c.M >= 16)) throw Error(ErrorCode::InvalidConfig, "window.M must be >= 16");
  if (!(c.grid_n >= 16)) throw Error(ErrorCode::InvalidConfig, "window.grid_n must be >= 16");
  if (!(c.d1.tol > 0.0) || !(c.flow_atol > 0.0) || !(c.flow_rtol > 0.0) ||
      !(c.flow_sample_dt > 0.0) || !(c.flow_t_end > 0.0))
    throw Error(ErrorCode::InvalidConfig, "all tolerances and times must be positive");
  if (!(c.d1.e_grid >= 2) || !(c.d1.n_starts >= 0))
    throw Error(ErrorCode::InvalidConfig, "delta1.e_grid >= 2, delta1.n_starts >= 0");
  if (!(c.d1_N >= 1) || c.d1_N > c.M - 2)
    throw Error(ErrorCode::InvalidConfig, "delta1.N must satisfy 1 <= N <= M - 2");
  if (c.omega.empty()) throw Error(ErrorCode::InvalidConfig, "shadow.omega must be nonempty");
  for (const int s : c.omega)
    if (s != 0 && s != 1) throw Error(ErrorCode::InvalidConfig, "shadow.omega must be over {0,1}");
  if (!(c.n_periods >= 1)) throw Error(ErrorCode::InvalidConfig, "shadow.n_periods >= 1");
  return c;
}

inline json RunConfig::echo() const {
  json s_N;
  if (shadow_N == 0)
    s_N = "auto";
  else
    s_N = shadow_N;
  return {{"map", {{"kind", map_kind}, {"k", k}}},
          {"window", {{"M", M}, {"grid_n", grid_n}}},
          {"delta1",
           {{"e_grid", d1.e_grid},
            {"n_starts", d1.n_starts},
            {"tol", d1.tol},
            {"refine_connectivity", d1.refine_connectivity},
            {"N", d1_N}}},
          {"shadow", {{"omega", omega}, {"N", s_N}, {"n_periods", n_periods}}},
          {"flow",
           {{"atol", flow_atol},
            {"rtol", flow_rtol},
            {"sample_dt", flow_sample_dt},
            {"t_end", flow_t_end}}},
          {"seed", seed},
          {"cache_dir", cache_dir}};
}

struct RunOutput {
  json report;
  FixedPointData fp;
  std::optional<HomoclinicPair> pair;
  std::vector<FluxAuditRecord> audit;
  std::optional<Trajectory> trajectory;
  std::vector<ShadowResult> shadows;
};

namespace detail {

inline std::filesystem::path effective_cache_dir(const RunConfig& cfg) {
  if (const char* env = std::getenv("TWIST_CACHE_DIR"); env && *env) return env;
  return cfg.cache_dir;
}

inline HomoclinicPair homoclinics_cached(const GeneratingFunction& gf, const FixedPointData& fp,
                                         const RunConfig& cfg) {
  const std::filesystem::path dir = effective_cache_dir(cfg);
  const std::string key = homoclinic_cache_key(cfg.map_kind, cfg.k, cfg.M, cfg.grid_n);
  if (!dir.empty()) {
    if (auto cached = load_cached_pair(dir, key)) return *cached;
  }
  HomoclinicPair pair = compute_homoclinics(gf, fp, cfg.M, cfg.grid_n);
  if (!dir.empty()) store_cached_pair(dir, key, pair);
  return pair;
}

inline json fp_json(const FixedPointData& fp) {
  return {{"y0", fp.y0}, {"p0", fp.p0}, {"lambda", fp.lambda}};
}

inline json report_json(const InstabilityReport& r) {
  return {{"delta0", r.delta0},
          {"delta1", r.delta1},
          {"delta1_tilde", r.delta1_tilde},
          {"e_star", r.e_star},
          {"delta2", r.delta2},
          {"kappa1", r.kappa1},
          {"kappa2", r.kappa2},
          {"lambda", r.lambda},
          {"N", r.N_min},
          {"entropy_bound", r.entropy_bound},
          {"ratio_delta1_over_delta0_sq", r.ratio_conjecture}};
}

inline json shadow_json(const ShadowResult& r, const SymbolSequence& word) {
  json orbit = json::array();
  for (const auto& q : r.orbit) orbit.push_back({q.x, q.p});
  std::int64_t bad_a = 0, bad_b = 0;
  for (const auto& s : r.monitor_log) {
    bad_a += s.in_A ? 0 : 1;
    bad_b += s.in_B ? 0 : 1;
  }
  return {{"word", word.word},
          {"N", r.N},
          {"e0", r.e0},
          {"residual", r.residual},
          {"itinerary", r.itinerary.word},
          {"orbit", orbit},
          {"w1", r.w1_distance},
          {"monitor",
           {{"samples", r.monitor_log.size()},
            {"in_A_violations", bad_a},
            {"in_B_violations", bad_b}}}};
}

inline InstabilityReport full_instability(const GeneratingFunction& gf, const FixedPointData& fp,
                                          const HomoclinicPair& pair, const RunConfig& cfg) {
  InstabilityReport rep;
  delta1(gf, pair, fp, cfg.d1_N, rep, cfg.d1);
  rep.kappa2 = kappa2(gf);
  rep.delta2 = delta2(gf, pair, std::min<std::int64_t>(cfg.d1_N, pair.M - 2));
  rep.N_min = choose_N(rep);
  rep.entropy_bound = entropy_lower_bound(rep.N_min);
  return rep;
}

// Deterministic in-box perturbation of the one-block used by the flux audit.
inline Configuration perturbed_homoclinic(const HomoclinicPair& pair, const FixedPointData& fp,
                                          std::uint64_t seed) {
  Configuration c = pair.z;
  CounterRng rng(seed, 911);
  for (std::int64_t j = -4; j <= 4; ++j) {
    const double u =
        2.0 * pair.kappa1 * std::pow(fp.lambda, -static_cast<double>(std::llabs(j)));
    c.ref(j) += 0.05 * std::min(u, 1.0) * rng.symmetric(static_cast<std::uint64_t>(j + 4));
  }
  return c;
}

}  // namespace detail

inline RunOutput run(const std::string& command, const RunConfig& cfg, bool stamp = false) {
  static const std::vector<std::string> known = {"fixed-point", "homoclinic", "delta0",
                                                 "delta1",      "delta2",     "flow",
                                                 "audit-flux",  "shadow",     "entropy-bound",
                                                 "full"};
  bool ok = false;
  for (const auto& c : known) ok = ok || (c == command);
  if (!ok) throw Error(ErrorCode::InvalidConfig, "unknown command: " + command);

  const GeneratingFunction gf = standard_map(cfg.k);
  RunOutput out;
  out.report["schema_version"] = "1";
  out.report["command"] = command;
  out.report["config"] = cfg.echo();
  json prov = {{"generator", "twist-instability 0.1.0"},
               {"map", {{"kind", cfg.map_kind}, {"k", cfg.k}}}};
  if (stamp) {
    char buf[64];
    const std::time_t now = std::time(nullptr);
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
    prov["timestamp"] = buf;
  }
  out.report["provenance"] = prov;

  out.fp = find_minimizing_fixed_point(gf);
  out.fp.lambda = linearize_eigen(gf, out.fp);
  out.report["fixed_point"] = detail::fp_json(out.fp);
  if (command == "fixed-point") return out;

  HomoclinicPair pair = detail::homoclinics_cached(gf, out.fp, cfg);
  out.fp.kappa1 = pair.kappa1;
  out.report["homoclinic"] = {{"delta0", pair.delta0},
                              {"kappa1", pair.kappa1},
                              {"s_z", pair.s_z},
                              {"M", pair.M},
                              {"residual_z", residual(gf, pair.z)},
                              {"residual_z_tilde", residual(gf, pair.z_tilde)},
                              {"delta0_direct_sum_gap",
                               direct_action_difference(gf, pair) - pair.delta0}};
  if (command == "homoclinic") {
    out.report["homoclinic"]["z"] = pair.z.values;
    out.report["homoclinic"]["z_tilde"] = pair.z_tilde.values;
    out.pair = std::move(pair);
    return out;
  }
  if (command == "delta0") {
    out.pair = std::move(pair);
    return out;
  }
  if (command == "delta2") {
    const std::int64_t n2 = std::min<std::int64_t>(cfg.d1_N, pair.M - 2);
    out.report["delta2"] = {{"N", n2},
                            {"value", delta2(gf, pair, n2)},
                            {"value_small_window", delta2(gf, pair, std::min<std::int64_t>(16, n2))}};
    out.pair = std::move(pair);
    return out;
  }

  if (command == "flow") {
    FlowOptions fopts{.atol = cfg.flow_atol, .rtol = cfg.flow_rtol,
                      .sample_dt = cfg.flow_sample_dt, .initial_dt = 1e-3,
                      .step_class_K = 1.0, .step_class_margin = 0.1};
    const Configuration c0 = detail::perturbed_homoclinic(pair, out.fp, cfg.seed);
    out.trajectory = integrate(gf, c0, cfg.flow_t_end, fopts);
    out.report["flow"] = {{"t_end", cfg.flow_t_end},
                          {"samples", out.trajectory->times.size()},
                          {"final_residual", residual(gf, out.trajectory->states.back())},
                          {"accepted_steps", out.trajectory->step_stats.accepted},
                          {"rejected_steps", out.trajectory->step_stats.rejected}};
    out.pair = std::move(pair);
    return out;
  }

  if (command == "audit-flux") {
    FlowOptions fopts{.atol = cfg.flow_atol, .rtol = cfg.flow_rtol,
                      .sample_dt = std::min(cfg.flow_sample_dt, 1e-3), .initial_dt = 1e-4,
                      .step_class_K = 1.0, .step_class_margin = 0.1};
    const Configuration c0 = detail::perturbed_homoclinic(pair, out.fp, cfg.seed);
    out.trajectory = integrate(gf, c0, std::min(cfg.flow_t_end, 2.0), fopts);
    const double k2 = kappa2(gf);
    InstabilityReport quick;
    quick.delta1 = 1.0;
    quick.kappa1 = pair.kappa1;
    quick.kappa2 = k2;
    quick.lambda = out.fp.lambda;
    std::int64_t N = (cfg.shadow_N > 0) ? cfg.shadow_N : 6;
    N = std::min<std::int64_t>(N, pair.M - 2);
    out.audit = flux_audit(gf, pair, *out.trajectory, N, k2);
    double max_balance = 0.0, worst_margin = -1e300;
    for (const auto& r : out.audit) {
      max_balance = std::max(max_balance,
                             std::abs(r.dE_dt_numeric - r.F_direct + r.grad_norm_sq));
      worst_margin = std::max(worst_margin, std::abs(r.F_direct) - r.F_bound);
    }
    out.report["flux_audit"] = {{"N", N},
                                {"kappa2", k2},
                                {"records", out.audit.size()},
                                {"max_balance_residual", max_balance},
                                {"max_bound_excess", worst_margin}};
    out.pair = std::move(pair);
    return out;
  }

  // remaining commands need the full instability report
  InstabilityReport rep = detail::full_instability(gf, out.fp, pair, cfg);
  out.report["instability"] = detail::report_json(rep);
  if (command == "delta1" || command == "entropy-bound") {
    out.pair = std::move(pair);
    return out;
  }

  // shadow and full
  locate_E0(gf, out.fp, pair, rep.e_star);
  out.report["E0"] = {{"a0", pair.a0}, {"b0", pair.b0}, {"e0", rep.e_star}};
  ShadowOptions sopts;
  sopts.N_override = cfg.shadow_N;
  sopts.n_periods = cfg.n_periods;
  const SymbolSequence word = SymbolSequence::from_word(cfg.omega);
  ShadowResult res = shadow_orbit(gf, pair, out.fp, word, rep, sopts);
  out.report["shadow_results"] = json::array({detail::shadow_json(res, word)});
  out.shadows.push_back(std::move(res));
  out.pair = std::move(pair);
  return out;
}

// Tidy CSV emission (header row, one observation per row).
inline std::filesystem::path emit_plot_data(const RunOutput& out, const std::string& what,
                                            const std::filesystem::path& out_dir) {
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  const std::filesystem::path file = out_dir / (what + ".csv");
  std::ofstream os(file);
  os.precision(17);

  if (what == "S-curve") {
    if (!out.pair || out.pair->s_samples.empty())
      throw Error(ErrorCode::MissingData, "emit: no S samples in this run");
    os << "x,S\n";
    for (const auto& s : out.pair->s_samples) os << s[0] << "," << s[1] << "\n";
  } else if (what == "homoclinics") {
    if (!out.pair) throw Error(ErrorCode::MissingData, "emit: no homoclinics in this run");
    os << "j,z,z_tilde\n";
    for (std::int64_t j = -out.pair->M; j <= out.pair->M; ++j)
      os << j << "," << out.pair->z.at(j) << "," << out.pair->z_tilde.at(j) << "\n";
  } else if (what == "flux-audit") {
    if (out.audit.empty()) throw Error(ErrorCode::MissingData, "emit: no flux audit in this run");
    os << "t,dE_dt,grad_norm_sq,F,F_bound\n";
    for (const auto& r : out.audit)
      os << r.t << "," << r.dE_dt_numeric << "," << r.grad_norm_sq << "," << r.F_reconstructed
         << "," << r.F_bound << "\n";
  } else if (what == "orbit") {
    if (out.shadows.empty()) throw Error(ErrorCode::MissingData, "emit: no shadow orbit in this run");
    os << "sample,x,p\n";
    std::size_t i = 0;
    for (const auto& q : out.shadows.front().orbit) os << i++ << "," << q.x << "," << q.p << "\n";
  } else if (what == "trajectory") {
    if (!out.trajectory) throw Error(ErrorCode::MissingData, "emit: no trajectory in this run");
    const auto& traj = *out.trajectory;
    os << "t";
    for (std::int64_t j = traj.states.front().lo; j <= traj.states.front().hi(); ++j)
      os << ",x_" << j;
    os << "\n";
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
      os << traj.times[s];
      for (const double v : traj.states[s].values) os << "," << v;
      os << "\n";
    }
  } else {
    throw Error(ErrorCode::InvalidConfig, "unknown emission: " + what);
  }
  return file;
}

}  // namespace twist::cli
