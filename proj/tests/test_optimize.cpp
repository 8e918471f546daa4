#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

#include "eedc/error.hpp"
#include "eedc/optimize.hpp"
#include "eedc/parallel.hpp"
#include "eedc/reward.hpp"
#include "support.hpp"

using namespace eedc;

namespace {

// The worked instance with energy as the only cost. Waking the Group-2
// server then buys nothing at R = 0, so sleeping is optimal there.
ModelParams energy_only_micro() {
  ModelParams p = testing::micro_instance();
  p.c_hold_g1 = 0.0;
  p.c_hold_g2 = 0.0;
  p.c_transfer = 0.0;
  p.c_loss = 0.0;
  return p;
}

struct ThreadGuard {
  unsigned saved = thread_count();
  ~ThreadGuard() { set_thread_count(saved); }
};

}  // namespace

TEST_SUITE("optimize") {
  TEST_CASE("worked instance optimum") {
    auto p = testing::micro_instance();
    const auto high = optimize(p, PolicySpaceKind::full);
    CHECK(high.best_policy == Policy({1}));
    CHECK(std::fabs(high.best_eta - 3.86) <= 1e-12);
    CHECK(high.evaluations == 2);

    p.price = 0.0;
    const auto zero = optimize(p, PolicySpaceKind::full);
    CHECK(zero.best_policy == Policy({1}));
    CHECK(std::fabs(zero.best_eta - (-4.14)) <= 1e-12);

    // Holding and transfer costs still favour the awake server at R = 0.
    auto q = testing::micro_instance();
    q.price = 0.0;
    q.c_loss = 0.0;
    CHECK(optimize(q, PolicySpaceKind::full).best_policy == Policy({1}));
    CHECK(std::fabs(evaluate_eta(q, Policy({1})) - (-3.14)) <= 1e-12);

    auto e = energy_only_micro();
    e.price = 0.0;
    const auto sleep = optimize(e, PolicySpaceKind::full);
    CHECK(sleep.best_policy == Policy({0}));
    CHECK(std::fabs(sleep.best_eta - (-2.5)) <= 1e-12);
  }

  TEST_CASE("exhaustive search agrees with a brute-force scan") {
    testing::Rng rng(61);
    for (int t = 0; t < 25; ++t) {
      const auto p = testing::random_instance(rng, {5, 4});
      double best = -std::numeric_limits<double>::infinity();
      Policy arg;
      for (const Policy& d : enumerate_policies(p.m, PolicySpaceKind::full)) {
        const double eta = evaluate_eta(p, d);
        if (eta > best) {
          best = eta;
          arg = d;
        }
      }
      const auto res = optimize(p, PolicySpaceKind::full);
      CHECK(res.best_eta == doctest::Approx(best).epsilon(1e-12).scale(1.0));
      CHECK(evaluate_eta(p, res.best_policy) == doctest::Approx(best).epsilon(1e-10).scale(1.0));
    }
  }

  TEST_CASE("result does not depend on the thread count") {
    ThreadGuard guard;
    testing::Rng rng(62);
    const auto p = testing::random_instance(rng, {6, 5});
    set_thread_count(1);
    const auto one = optimize(p, PolicySpaceKind::full, {8, false});
    set_thread_count(5);
    const auto many = optimize(p, PolicySpaceKind::full, {8, false});
    CHECK(one.best_policy == many.best_policy);
    CHECK(one.best_eta == many.best_eta);
    REQUIRE(one.ranking.size() == 8);
    for (std::size_t k = 0; k < 8; ++k) {
      CHECK(one.ranking[k].policy == many.ranking[k].policy);
      CHECK(one.ranking[k].eta == many.ranking[k].eta);
    }
    for (std::size_t k = 1; k < 8; ++k) CHECK(one.ranking[k - 1].eta >= one.ranking[k].eta);
  }

  TEST_CASE("ties break to the lexicographically smallest policy") {
    ThreadGuard guard;
    // Actions 2 and 3 at level 2 of m = 3 differ only in energy; with zero
    // energy price they tie exactly with action 2.
    ModelParams p = testing::micro_instance();
    p.m = 3;
    p.c_energy = 0.0;
    for (unsigned threads : {1u, 3u}) {
      set_thread_count(threads);
      const auto res = optimize(p, PolicySpaceKind::full, {4, false});
      CHECK(res.best_policy == canonicalize_policy(p, res.best_policy));
    }
  }

  TEST_CASE("restricted spaces never beat the full space") {
    testing::Rng rng(63);
    for (int t = 0; t < 20; ++t) {
      const auto p = testing::random_instance(rng, {6, 4});
      const double full = optimize(p, PolicySpaceKind::full).best_eta;
      const double reduced = optimize(p, PolicySpaceKind::reduced).best_eta;
      CHECK(reduced == doctest::Approx(full).epsilon(1e-12).scale(1.0));
      CHECK(optimize(p, PolicySpaceKind::bang_bang).best_eta <= full + 1e-12 * std::max(1.0, std::fabs(full)));
      CHECK(optimize(p, PolicySpaceKind::threshold).best_eta <= full + 1e-12 * std::max(1.0, std::fabs(full)));
    }
  }

  TEST_CASE("extreme-price closed forms") {
    testing::Rng rng(64);
    for (int t = 0; t < 30; ++t) {
      const auto p = testing::random_instance(rng, {15, 15});
      const int m = p.m;
      const double high = evaluate_eta(p, threshold_policy(m, 1));
      const double low = evaluate_eta(p, threshold_policy(m, m + 1));
      CHECK(extreme_closed_form_eta(p, PriceRegime::high) ==
            doctest::Approx(high).epsilon(1e-10).scale(1.0));
      CHECK(extreme_closed_form_eta(p, PriceRegime::low) ==
            doctest::Approx(low).epsilon(1e-10).scale(1.0));
    }
  }

  TEST_CASE("extreme-price optimum above R_H") {
    auto p = testing::micro_instance();
    const auto prices = critical_prices_global(p, PolicySpaceKind::full);
    const auto res = optimal_extreme_prices(p, prices);
    CHECK(res.regime == PriceRegime::high);
    CHECK(res.policy == Policy({1}));
    CHECK(std::fabs(res.eta_closed_form - 3.86) <= 1e-12);
    CHECK(std::fabs(res.eta_generic - 3.86) <= 1e-12);

    // R_L is negative here, so R = 0 lies in neither regime once R_H > 0.
    CriticalPrices shifted = prices;
    shifted.r_high = 1.0;
    p.price = 0.0;
    CHECK_THROWS_AS(optimal_extreme_prices(p, shifted), RegimeError);
    CriticalPrices inexact = prices;
    inexact.exact = false;
    CHECK_THROWS_AS(optimal_extreme_prices(testing::micro_instance(), inexact), RegimeError);
  }

  TEST_CASE("threshold scan on the worked instance") {
    const auto res = threshold_scan(testing::micro_instance());
    REQUIRE(res.eta_by_theta.size() == 2);
    CHECK(res.theta_star == 1);
    CHECK(res.closed_form_gap <= 1e-12);
    CHECK_FALSE(res.below.applicable);
    CHECK(res.at.applicable);
    CHECK(res.at.holds);

    auto q = energy_only_micro();
    q.price = 0.0;
    CHECK(threshold_scan(q).theta_star == 2);
  }

  TEST_CASE("threshold closed form matches generic evaluation") {
    testing::Rng rng(65);
    for (int t = 0; t < 30; ++t) {
      const auto p = testing::random_instance(rng, {12, 12});
      const auto res = threshold_scan(p);
      double scale = 1.0;
      for (double v : res.eta_by_theta) scale = std::max(scale, std::fabs(v));
      CHECK(res.closed_form_gap <= 1e-10 * scale);
      CHECK(res.eta_by_theta[static_cast<std::size_t>(res.theta_star - 1)] ==
            *std::max_element(res.eta_by_theta.begin(), res.eta_by_theta.end()));
    }
    CHECK_THROWS_AS(threshold_closed_form_eta(testing::micro_instance(), 3), RangeError);
  }

  TEST_CASE("profit is linear above the level") {
    testing::Rng rng(66);
    for (int t = 0; t < 30; ++t) {
      const auto p = testing::random_instance(rng, {8, 6});
      const Policy base = testing::random_policy(rng, p.m);
      const int j = rng.integer(1, p.m);
      const auto rep = verify_monotonicity(p, base, j, std::nullopt);
      CHECK(rep.linear_ok);
      CHECK(rep.eta.size() == static_cast<std::size_t>(p.m + 1));
      CHECK(rep.expected_slope <= 0.0);
      CHECK(rep.argmax <= j);
    }
  }

  TEST_CASE("monotone in the high regime") {
    auto p = testing::micro_instance();
    p.m = 3;
    const auto prices = critical_prices_global(p, PolicySpaceKind::full);
    p.price = prices.r_high + 1.0;
    for (int j = 1; j <= 3; ++j) {
      const auto rep = verify_monotonicity(p, Policy({0, 0, 0}), j, prices);
      CHECK(rep.regime == MonotonicityReport::Regime::high);
      CHECK(rep.monotone_ok);
      CHECK(rep.violations.empty());
    }
  }

  TEST_CASE("price sweep flips the energy-only worked instance") {
    const auto sweep = price_sweep(energy_only_micro(), {10.0, 0.0}, PolicySpaceKind::full);
    REQUIRE(sweep.rows.size() == 2);
    CHECK(sweep.rows[0].price == 0.0);
    CHECK(sweep.rows[0].best_policy == Policy({0}));
    CHECK(sweep.rows[1].best_policy == Policy({1}));
    CHECK(sweep.rows[1].eta >= sweep.rows[0].eta);
    CHECK(sweep.rows[1].at_or_above_high);
    const auto csv = sweep_csv(sweep, 1);
    CHECK(csv.header().size() == 8);
    CHECK(csv.rows().size() == 2);
  }

  TEST_CASE("price sweep best profit is non-decreasing") {
    testing::Rng rng(67);
    for (int t = 0; t < 5; ++t) {
      const auto p = testing::random_instance(rng, {5, 3});
      std::vector<double> grid;
      for (int k = 0; k <= 20; ++k) grid.push_back(k);
      const auto sweep = price_sweep(p, grid, PolicySpaceKind::full);
      for (std::size_t k = 1; k < sweep.rows.size(); ++k) {
        CHECK(sweep.rows[k].eta >= sweep.rows[k - 1].eta - 1e-9);
      }
    }
    CHECK_THROWS_AS(price_sweep(testing::micro_instance(), {}, PolicySpaceKind::full), ConfigError);
  }

  TEST_CASE("enumeration gate applies to the search") {
    auto p = testing::micro_instance();
    p.m = 9;
    CHECK_THROWS_AS(optimize(p, PolicySpaceKind::full), GateError);
    CHECK(optimize(p, PolicySpaceKind::threshold).evaluations == 10);
  }
}
