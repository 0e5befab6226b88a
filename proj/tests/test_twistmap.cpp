#include <cmath>

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "twist/configuration.hpp"
#include "twist/flow.hpp"
#include "twist/generating_function.hpp"
#include "twist/map.hpp"

using Catch::Approx;
using namespace twist;

TEST_CASE("generating function closed forms", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);
  CHECK(eval_generating(gf, 0.0, 0.0, Partial::V) == Approx(-1.0 / kTwoPi).epsilon(1e-12));
  CHECK(eval_generating(gf, 0.0, 0.0, Partial::V12) == Approx(-1.0));
  CHECK(eval_generating(gf, 0.0, 0.0, Partial::V11) == Approx(1.0 + kTwoPi).epsilon(1e-12));
}

TEST_CASE("structural assumptions hold on samples", "[twistmap]") {
  for (double k : {0.5, 1.0, 2.0}) {
    const auto& gf = fixtures::std_map(k);
    CHECK(periodicity_defect(gf) <= 1e-12);
    CHECK(twist_upper_bound(gf) < 0.0);
    CHECK(derivative_defect(gf) <= 1e-6);
  }
}

TEST_CASE("map_forward matches scalar root-find oracle", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);

  const PhasePoint fixed = map_forward(gf, {0.0, 0.0});
  CHECK(fixed.x == Approx(0.0).margin(1e-12));
  CHECK(fixed.p == Approx(0.0).margin(1e-12));

  // oracle: bisect p = (x'-x) - k sin(2 pi x) for x' directly
  auto oracle_xp = [&](double x, double p) {
    return bisect_root([&](double s) { return (s - x) - std::sin(kTwoPi * x) - p; }, x - 5.0,
                       x + 5.0, 1e-14);
  };
  const PhasePoint q = map_forward(gf, {0.25, 0.0});
  CHECK(q.x == Approx(oracle_xp(0.25, 0.0)).margin(1e-10));
  CHECK(q.x == Approx(1.25).margin(1e-10));
  CHECK(q.p == Approx(1.0).margin(1e-10));

  const PhasePoint h = map_forward(gf, {0.5, 0.0});
  CHECK(h.x == Approx(0.5).margin(1e-12));
  CHECK(h.p == Approx(0.0).margin(1e-12));
}

TEST_CASE("map_inverse and round trips", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);
  const PhasePoint z = map_inverse(gf, {0.0, 0.0});
  CHECK(z.x == Approx(0.0).margin(1e-12));

  const PhasePoint q0{0.3, 0.7};
  const PhasePoint rt = map_inverse(gf, map_forward(gf, q0));
  CHECK(rt.x == Approx(q0.x).margin(1e-10));
  CHECK(rt.p == Approx(q0.p).margin(1e-10));

  const PhasePoint pre = map_inverse(gf, {1.25, 1.0});
  CHECK(pre.x == Approx(0.25).margin(1e-10));
  CHECK(pre.p == Approx(0.0).margin(1e-10));

  CounterRng rng(7, 100);
  for (int i = 0; i < 100; ++i) {
    const PhasePoint a{rng.uniform(2 * i), 1.5 * rng.symmetric(2 * i + 1)};
    const PhasePoint fwd = map_inverse(gf, map_forward(gf, a));
    const PhasePoint bwd = map_forward(gf, map_inverse(gf, a));
    CHECK(std::abs(fwd.x - a.x) <= 1e-10);
    CHECK(std::abs(fwd.p - a.p) <= 1e-10);
    CHECK(std::abs(bwd.x - a.x) <= 1e-10);
    CHECK(std::abs(bwd.p - a.p) <= 1e-10);
  }
}

TEST_CASE("no bracket for bounded-derivative custom map", "[twistmap]") {
  auto V = [](double x, double xp) { return -std::cos(kTwoPi * (xp - x)) / (kTwoPi * kTwoPi); };
  auto gf = custom_map(
      V, [](double x, double xp) { return std::sin(kTwoPi * (xp - x)) / kTwoPi; },
      [](double x, double xp) { return -std::sin(kTwoPi * (xp - x)) / kTwoPi; },
      [](double x, double xp) { return -std::cos(kTwoPi * (xp - x)); },
      [](double x, double xp) { return std::cos(kTwoPi * (xp - x)); },
      [](double x, double xp) { return -std::cos(kTwoPi * (xp - x)); }, 4.0);
  CHECK_THROWS_MATCHES(map_forward(gf, {0.0, 2.0}), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::NoBracket;
                       }));
}

TEST_CASE("area preservation proxy via finite differences", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);
  CounterRng rng(11, 200);
  const double h = 1e-6;
  for (int i = 0; i < 100; ++i) {
    const double x = rng.uniform(2 * i);
    const double p = 1.2 * rng.symmetric(2 * i + 1);
    const PhasePoint xp = map_forward(gf, {x + h, p}), xm = map_forward(gf, {x - h, p});
    const PhasePoint pp = map_forward(gf, {x, p + h}), pm = map_forward(gf, {x, p - h});
    const double a = (xp.x - xm.x) / (2 * h), b = (pp.x - pm.x) / (2 * h);
    const double c = (xp.p - xm.p) / (2 * h), d = (pp.p - pm.p) / (2 * h);
    CHECK(std::abs(a * d - b * c - 1.0) <= 1e-6);
  }
}

TEST_CASE("configuration <-> point correspondence", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);

  const Configuration zero = Configuration::constant(-3, 3, 0.0);
  const PhasePoint p0 = point_from_config(gf, zero);
  CHECK(p0.x == Approx(0.0).margin(1e-14));
  CHECK(p0.p == Approx(0.0).margin(1e-14));

  Configuration c = Configuration::constant(0, 1, 0.0);
  c.ref(0) = 0.25;
  c.ref(1) = 1.25;
  const PhasePoint q = point_from_config(gf, c);
  CHECK(q.x == Approx(0.25));
  CHECK(q.p == Approx(-gf.V1(0.25, 1.25)).margin(1e-14));
  CHECK(q.p == Approx(0.0).margin(1e-12));

  const Configuration orbit = config_from_point(gf, {0.0, 0.0}, -3, 3);
  for (std::int64_t j = -3; j <= 3; ++j) CHECK(orbit.at(j) == Approx(0.0).margin(1e-12));

  const PhasePoint seed{0.31, 0.43};
  const Configuration win = config_from_point(gf, seed, -2, 2);
  const PhasePoint back = point_from_config(gf, win);
  CHECK(back.x == Approx(seed.x).margin(1e-10));
  CHECK(back.p == Approx(seed.p).margin(1e-10));

  const Configuration two = config_from_point(gf, {0.25, 0.0}, 0, 2);
  CHECK(two.at(0) == Approx(0.25));
  CHECK(two.at(1) == Approx(1.25).margin(1e-10));
  const PhasePoint step2 = map_forward(gf, map_forward(gf, {0.25, 0.0}));
  CHECK(two.at(2) == Approx(step2.x).margin(1e-10));

  CHECK_THROWS_AS(point_from_config(gf, Configuration::constant(2, 5, 0.0)), Error);
}

TEST_CASE("minimizing fixed point", "[twistmap]") {
  const auto fp1 = find_minimizing_fixed_point(fixtures::std_map(1.0));
  CHECK(fp1.y0 == Approx(0.0).margin(1e-12));
  CHECK(fp1.p0 == Approx(0.0).margin(1e-12));
  // residual of the constant configuration
  const Configuration cy = Configuration::constant(-4, 4, fp1.y0);
  CHECK(residual(fixtures::std_map(1.0), cy) <= 1e-12);

  // grid-scan oracle at k = 0.5: argmin of V(x,x) over a dense grid
  const auto& gf05 = fixtures::std_map(0.5);
  double best = 1e300, bx = 0;
  for (int i = 0; i < 4096; ++i) {
    const double x = i / 4096.0;
    if (gf05.V(x, x) < best) { best = gf05.V(x, x); bx = x; }
  }
  const auto fp05 = find_minimizing_fixed_point(gf05);
  CHECK(std::abs(fp05.y0 - bx) <= 1e-3);
  CHECK(fp05.y0 == Approx(0.0).margin(1e-12));

  CHECK_THROWS_MATCHES(find_minimizing_fixed_point(fixtures::std_map(0.0)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::NonUniqueMinimum;
                       }));
}

TEST_CASE("multiplier of the linearized map", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);
  const auto fp = find_minimizing_fixed_point(gf);
  const double lam = linearize_eigen(gf, fp);
  // oracle: larger eigenvalue of [[1+2 pi k, 1], [2 pi k, 1]]
  const double T = 2.0 + kTwoPi;
  const double disc = std::sqrt(T * T - 4.0);
  CHECK(lam == Approx((T + disc) / 2.0).epsilon(1e-12));
  CHECK(lam == Approx(8.16064).epsilon(1e-5));
  CHECK(lam * (1.0 / lam) == Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_MATCHES(
      linearize_eigen(fixtures::std_map(0.0), FixedPointData{0.0, 0.0, 0.0, 0.0}), Error,
      Catch::Matchers::Predicate<Error>(
          [](const Error& e) { return e.code() == ErrorCode::NotHyperbolic; }));
}

TEST_CASE("rotation number estimator", "[twistmap]") {
  Configuration c = Configuration::constant(-8, 8, 0.4);
  CHECK(rotation_number(c) == Approx(0.0).margin(1e-14));
  for (std::int64_t j = -8; j <= 8; ++j) c.ref(j) = 0.3 * static_cast<double>(j);
  CHECK(rotation_number(c) == Approx(0.3).epsilon(1e-12));
}

TEST_CASE("residual of simple configurations", "[twistmap]") {
  const auto& gf = fixtures::std_map(1.0);
  CHECK(residual(gf, Configuration::constant(-5, 5, 0.0)) <= 1e-14);
  // constant 0.25: V2 + V1 = k sin(pi/2) = k at every site
  CHECK(residual(gf, Configuration::constant(-5, 5, 0.25)) == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("homoclinic window is consistent with the map", "[twistmap][slow]") {
  const auto& gf = fixtures::std_map(1.0);
  const auto& pair = fixtures::homoclinics(1.0);

  CHECK(residual(gf, pair.z) <= 1e-8);
  CHECK(rotation_number(pair.z) > -0.1);
  CHECK(rotation_number(pair.z) < 0.1);

  // per-step conjugacy along the configuration: F(iota(S^j z)) = iota(S^{j+1} z)
  double worst = 0.0;
  for (std::int64_t j = -40; j < 40; ++j) {
    Configuration cj = shift(pair.z, j);
    Configuration cj1 = shift(pair.z, j + 1);
    const PhasePoint a = map_forward(gf, point_from_config(gf, cj));
    const PhasePoint b = point_from_config(gf, cj1);
    worst = std::max(worst, std::max(std::abs(a.x - b.x), std::abs(a.p - b.p)));
  }
  CHECK(worst <= 1e-6);

  // short-horizon forward orbit reproduces the configuration before the
  // hyperbolic amplification of the equilibrium residual takes over
  PhasePoint q = point_from_config(gf, pair.z);
  for (std::int64_t j = 1; j <= 6; ++j) {
    q = map_forward(gf, q);
    CHECK(std::abs(q.x - pair.z.at(j)) <= 1e-6);
  }
}

TEST_CASE("conjugacy for equilibrium windows", "[twistmap][slow]") {
  const auto& gf = fixtures::std_map(1.0);
  const auto& pair = fixtures::homoclinics(1.0);
  for (const Configuration* c : {&pair.z, &pair.z_tilde}) {
    const PhasePoint a = map_forward(gf, point_from_config(gf, *c));
    const PhasePoint b = point_from_config(gf, shift(*c, 1));
    CHECK(std::abs(a.x - b.x) <= 1e-6);
    CHECK(std::abs(a.p - b.p) <= 1e-6);
  }
}
