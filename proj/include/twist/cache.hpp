#pragma once

// Homoclinic cache: one JSON document per (map kind, coupling, M, grid_n),
// keyed by an FNV-1a hash of the canonical parameter string.  Doubles survive
// the round trip exactly (shortest-round-trip serialization).

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include <json.hpp>

#include "twist/homoclinic.hpp"

namespace twist {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string homoclinic_cache_key(const std::string& kind, double k, std::int64_t M,
                                        int grid_n) {
  std::ostringstream os;
  os.precision(17);
  os << "kind=" << kind << "|k=" << k << "|M=" << M << "|grid_n=" << grid_n;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a(os.str())));
  return buf;
}

inline nlohmann::json configuration_to_json(const Configuration& c) {
  return {{"lo", c.lo},
          {"values", c.values},
          {"tail_left", c.tail_left},
          {"tail_right", c.tail_right}};
}

inline Configuration configuration_from_json(const nlohmann::json& j) {
  Configuration c;
  c.lo = j.at("lo").get<std::int64_t>();
  c.values = j.at("values").get<std::vector<double>>();
  c.tail_left = j.at("tail_left").get<double>();
  c.tail_right = j.at("tail_right").get<double>();
  return c;
}

inline nlohmann::json pair_to_json(const HomoclinicPair& p) {
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : p.s_samples) samples.push_back({s[0], s[1]});
  return {{"z", configuration_to_json(p.z)},
          {"z_tilde", configuration_to_json(p.z_tilde)},
          {"s_samples", samples},
          {"delta0", p.delta0},
          {"s_z", p.s_z},
          {"kappa1", p.kappa1},
          {"M", p.M}};
}

inline HomoclinicPair pair_from_json(const nlohmann::json& j) {
  HomoclinicPair p;
  p.z = configuration_from_json(j.at("z"));
  p.z_tilde = configuration_from_json(j.at("z_tilde"));
  for (const auto& s : j.at("s_samples")) p.s_samples.push_back({s.at(0), s.at(1)});
  p.delta0 = j.at("delta0").get<double>();
  p.s_z = j.at("s_z").get<double>();
  p.kappa1 = j.at("kappa1").get<double>();
  p.M = j.at("M").get<std::int64_t>();
  return p;
}

inline std::optional<HomoclinicPair> load_cached_pair(const std::filesystem::path& dir,
                                                      const std::string& key) {
  const std::filesystem::path file = dir / ("homoclinic_" + key + ".json");
  if (!std::filesystem::exists(file)) return std::nullopt;
  std::ifstream in(file);
  if (!in) return std::nullopt;
  nlohmann::json j;
  in >> j;
  return pair_from_json(j);
}

inline void store_cached_pair(const std::filesystem::path& dir, const std::string& key,
                              const HomoclinicPair& pair) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  const std::filesystem::path file = dir / ("homoclinic_" + key + ".json");
  std::ofstream out(file);
  if (out) out << pair_to_json(pair).dump();
}

}  // namespace twist
