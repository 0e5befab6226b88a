#include <cmath>

#include "catch_amalgamated.hpp"
#include "fixtures.hpp"
#include "twist/shadowing.hpp"

using Catch::Approx;
using namespace twist;

namespace {

InstabilityReport synthetic_report(double kappa1, double kappa2v, double d1, double lambda) {
  InstabilityReport r;
  r.kappa1 = kappa1;
  r.kappa2 = kappa2v;
  r.delta1 = d1;
  r.lambda = lambda;
  return r;
}

}  // namespace

TEST_CASE("choose_N arithmetic", "[shadowing]") {
  const double e = std::exp(1.0);
  CHECK(choose_N(synthetic_report(1.0, 24.0, 96.0, e)) == 1);   // bound exactly 0
  CHECK(choose_N(synthetic_report(1.0, 24.0, 0.96, e)) == 5);   // bound = ln 100
  CHECK_THROWS_MATCHES(choose_N(synthetic_report(1.0, 24.0, 0.0, e)), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& err) {
                         return err.code() == ErrorCode::DegenerateInputs;
                       }));
  CHECK_THROWS_AS(choose_N(synthetic_report(1.0, 24.0, 1.0, 1.0)), Error);
}

TEST_CASE("entropy lower bound", "[shadowing]") {
  CHECK(entropy_lower_bound(1) == Approx(0.34657359).epsilon(1e-7));
  CHECK(entropy_lower_bound(5) == Approx(0.06931472).epsilon(1e-7));
  CHECK_THROWS_AS(entropy_lower_bound(0), Error);
}

TEST_CASE("symbol sequences", "[shadowing]") {
  const auto w = SymbolSequence::from_word({1, 0, 1, 0});
  CHECK(w.period() == 4);
  CHECK(w.ones() == 2);
  CHECK(w.ones_positions == std::vector<std::int64_t>{0, 2});
  CHECK(w.ones_density() == 0.5);
  CHECK_THROWS_AS(SymbolSequence::from_word({}), Error);
  CHECK_THROWS_AS(SymbolSequence::from_word({0, 2}), Error);
}

TEST_CASE("gluing", "[shadowing][slow]") {
  const auto& fp = fixtures::fixed_point(1.0);
  const auto& pair = fixtures::homoclinics(1.0);
  const std::int64_t N = 6;

  SECTION("all zeros") {
    const auto sets = glue(pair, fp, SymbolSequence::from_word({0, 0, 0, 0}), N, 3);
    for (std::int64_t j = sets.x_omega.lo; j <= sets.x_omega.hi(); ++j) {
      CHECK(sets.x_omega.at(j) == fp.y0);
      CHECK(sets.x_minus.at(j) <= sets.x_omega.at(j) + 1e-12);
      CHECK(sets.x_omega.at(j) <= sets.x_plus.at(j) + 1e-12);
    }
  }

  SECTION("single one per period") {
    const auto w = SymbolSequence::from_word({1, 0, 0, 0});
    const auto sets = glue(pair, fp, w, N, 3);
    // middle-period one-block reproduces the homoclinic, lifted by one
    const std::int64_t m = 4;  // first block of the middle period carries the 1
    const double k = static_cast<double>(sets.offsets[static_cast<std::size_t>(m)]);
    CHECK(k == 1.0);
    for (std::int64_t j = -N + 1; j <= N; ++j)
      CHECK(sets.x_omega.at(2 * m * N + j) == Approx(pair.z.at(j) + k).margin(1e-14));
    // gains exactly one per period
    const std::int64_t stride = 2 * w.period() * N;
    for (std::int64_t i = 0; i <= stride; ++i)
      CHECK(sets.x_omega.at(i + stride) == Approx(sets.x_omega.at(i) + 1.0).margin(1e-12));
    // strict sandwich at the one-block centre
    CHECK(sets.x_minus.at(2 * m * N) < sets.x_omega.at(2 * m * N));
    CHECK(sets.x_omega.at(2 * m * N) < sets.x_plus.at(2 * m * N));
  }

  SECTION("adjacent ones") {
    const auto w = SymbolSequence::from_word({1, 1});
    const auto sets = glue(pair, fp, w, N, 3);
    const std::int64_t stride = 2 * w.period() * N;
    for (std::int64_t i = 0; i <= stride; ++i)
      CHECK(sets.x_omega.at(i + stride) == Approx(sets.x_omega.at(i) + 2.0).margin(1e-12));
    // envelope pieces between consecutive ones follow the minimax values
    const std::int64_t p = 2;  // a one-block with a one to its left and right
    const double k = static_cast<double>(sets.offsets[static_cast<std::size_t>(p)]);
    for (std::int64_t j = 1; j <= N; ++j) {
      CHECK(sets.x_minus.at(2 * p * N + j) == Approx(pair.z_tilde.at(j) + k).margin(1e-14));
      CHECK(sets.x_plus.at(2 * p * N - j + 1) ==
            Approx(pair.z_tilde.at(-j + 2) + k).margin(1e-14));
    }
  }

  SECTION("window too small") {
    CHECK_THROWS_MATCHES(glue(pair, fp, SymbolSequence::from_word({1}), pair.M - 1, 3), Error,
                         Catch::Matchers::Predicate<Error>([](const Error& e) {
                           return e.code() == ErrorCode::WindowTooSmall;
                         }));
  }
}

TEST_CASE("order-interval membership", "[shadowing][slow]") {
  const auto& fp = fixtures::fixed_point(1.0);
  const auto& pair = fixtures::homoclinics(1.0);
  auto sets = glue(pair, fp, SymbolSequence::from_word({1, 0}), 6, 3);
  sets.e0 = fixtures::report(1.0).e_star;

  CHECK(in_A(sets.x_omega, sets));
  CHECK(in_A(sets.x_minus, sets));  // closed inequality

  Configuration above = sets.x_plus;
  above.ref(0) += 1e-6;
  CHECK_FALSE(in_A(above, sets));
}

TEST_CASE("energy-ceiling membership", "[shadowing][slow]") {
  const auto& gf = fixtures::std_map(1.0);
  const auto& fp = fixtures::fixed_point(1.0);
  const auto& pair = fixtures::homoclinics(1.0);
  const std::int64_t N = 6;
  auto sets = glue(pair, fp, SymbolSequence::from_word({1, 0}), N, 3);
  sets.e0 = fixtures::report(1.0).e_star;

  CHECK(in_B(gf, pair, sets.x_omega, sets));

  // push one one-block to roughly twice the ceiling
  Configuration c = sets.x_omega;
  const std::int64_t p = sets.one_blocks[1];
  bool pushed = false;
  for (double scale = 0.02; scale < 0.5; scale *= 1.3) {
    Configuration trial = sets.x_omega;
    for (std::int64_t j = -2; j <= 2; ++j) trial.ref(2 * p * N + j) += scale;
    PerturbationWindow h = PerturbationWindow::zeros(N);
    const double k = static_cast<double>(sets.offsets[static_cast<std::size_t>(p)]);
    for (std::int64_t i = -N + 1; i <= N; ++i)
      h.ref(i) = trial.at(i + 2 * p * N) - k - pair.z.at(i);
    if (energy_E(gf, pair, h) > 2.0 * sets.e0) {
      c = trial;
      pushed = true;
      break;
    }
  }
  REQUIRE(pushed);
  CHECK_FALSE(in_B(gf, pair, c, sets));
}

TEST_CASE("itinerary extraction", "[shadowing][slow]") {
  const auto& fp = fixtures::fixed_point(1.0);
  const auto& pair = fixtures::pair_with_E0(1.0);
  const auto& rep = fixtures::report(1.0);
  const std::int64_t N = rep.N_min;

  const auto w = SymbolSequence::from_word({1, 0, 1, 1});
  auto sets = glue(pair, fp, w, N, 3);
  const auto read = itinerary(pair, fp, sets.x_omega, N, rep.e_star, 0, 3 * w.period() - 1);
  for (std::int64_t m = 0; m < 3 * w.period(); ++m)
    CHECK(read.word[static_cast<std::size_t>(m)] ==
          w.word[static_cast<std::size_t>(m % w.period())]);

  // a value in the classification gap is reported, not guessed
  Configuration c = sets.x_omega;
  c.ref(0) = pair.z_tilde.at(0) + (pair.a0 - pair.z_tilde.at(0)) / 2.0;
  CHECK_THROWS_MATCHES(itinerary(pair, fp, c, N, rep.e_star, 0, 0), Error,
                       Catch::Matchers::Predicate<Error>([](const Error& e) {
                         return e.code() == ErrorCode::Unclassifiable;
                       }));
}

TEST_CASE("shadow orbits for simple words", "[shadowing][slow]") {
  const auto& gf = fixtures::std_map(1.0);
  const auto& fp = fixtures::fixed_point(1.0);
  const auto& pair = fixtures::pair_with_E0(1.0);
  const auto& rep = fixtures::report(1.0);

  SECTION("all zeros") {
    const auto r = shadow_orbit(gf, pair, fp, SymbolSequence::from_word({0, 0, 0}), rep);
    CHECK(r.residual <= 1e-8);
    for (const int s : r.itinerary.word) CHECK(s == 0);
    CHECK(r.w1_distance == 0.0);
    for (const auto& q : r.orbit) {
      CHECK(q.x == Approx(fp.y0).margin(1e-12));
      CHECK(q.p == Approx(fp.p0).margin(1e-12));
    }
  }

  SECTION("single one relaxes onto the homoclinic") {
    const auto w = SymbolSequence::from_word({1, 0, 0, 0});
    const auto r = shadow_orbit(gf, pair, fp, w, rep);
    CHECK(r.residual <= 1e-8);
    CHECK(r.itinerary.word == w.word);
    for (const auto& s : r.monitor_log) {
      CHECK(s.in_A);
      CHECK(s.in_B);
    }
    const std::int64_t m = w.period();  // middle period starts here; its 1 is at block m
    const double k = 1.0;               // one preceding one
    double worst = 0.0;
    for (std::int64_t j = -r.N + 1; j <= r.N; ++j)
      worst = std::max(worst,
                       std::abs(r.equilibrium.at(2 * m * r.N + j) - k - pair.z.at(j)));
    CHECK(worst <= 1e-6);
  }

  SECTION("period-4 word with conjugacy check") {
    const auto w = SymbolSequence::from_word({1, 0, 1, 0});
    const auto r = shadow_orbit(gf, pair, fp, w, rep);
    CHECK(r.residual <= 1e-8);
    CHECK(r.itinerary.word == w.word);

    // per-step conjugacy across the middle period's block span
    const std::int64_t mid = w.period();
    double worst = 0.0;
    for (std::int64_t j = 2 * mid * r.N; j < 2 * (mid + w.period()) * r.N; ++j) {
      const PhasePoint a = map_forward(gf, point_from_config(gf, shift(r.equilibrium, j)));
      const PhasePoint b = point_from_config(gf, shift(r.equilibrium, j + 1));
      worst = std::max(worst, std::max(std::abs(a.x - b.x), std::abs(a.p - b.p)));
    }
    CHECK(worst <= 1e-6);

    // integer drift: one gain per one in the period
    const std::int64_t stride = 2 * w.period() * r.N;
    CHECK(r.equilibrium.at(stride) - r.equilibrium.at(0) ==
          Approx(static_cast<double>(w.ones())).margin(1e-7));
  }

  SECTION("stall reporting") {
    ShadowOptions opts;
    opts.t_max = 1e-9;
    CHECK_THROWS_MATCHES(
        shadow_orbit(gf, pair, fp, SymbolSequence::from_word({1, 0}), rep, opts), Error,
        Catch::Matchers::Predicate<Error>(
            [](const Error& e) { return e.code() == ErrorCode::RelaxationStalled; }));
  }
}

TEST_CASE("wasserstein distances shrink with ones density", "[shadowing][slow]") {
  const auto& gf = fixtures::std_map(1.0);
  const auto& fp = fixtures::fixed_point(1.0);
  const auto& pair = fixtures::pair_with_E0(1.0);
  const auto& rep = fixtures::report(1.0);

  std::vector<SymbolSequence> words;
  words.push_back(SymbolSequence::from_word({1, 0}));
  words.push_back(SymbolSequence::from_word({1, 0, 0, 0}));
  words.push_back(SymbolSequence::from_word({1, 0, 0, 0, 0, 0, 0, 0}));
  std::vector<ShadowResult> results;
  for (const auto& w : words) results.push_back(shadow_orbit(gf, pair, fp, w, rep));

  const auto rows = wasserstein_report(results, words);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0].ones_density == 0.5);
  CHECK(rows[1].ones_density == 0.25);
  CHECK(rows[2].ones_density == 0.125);
  CHECK(rows[0].w1 > rows[1].w1);
  CHECK(rows[1].w1 > rows[2].w1);
  CHECK(rows[2].w1 > 0.0);

  // longer-period proxy of the vanishing-density limit
  std::vector<int> w16(16, 0);
  w16[0] = 1;
  const auto r16 = shadow_orbit(gf, pair, fp, SymbolSequence::from_word(w16), rep);
  CHECK(r16.w1_distance <= rows[2].w1);
}
