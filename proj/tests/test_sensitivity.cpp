#include <doctest.h>

#include <cmath>

#include "eedc/chain.hpp"
#include "eedc/error.hpp"
#include "eedc/reward.hpp"
#include "eedc/sensitivity.hpp"
#include "support.hpp"

using namespace eedc;

namespace {

// G(n,j) + c at an arbitrary, possibly negative, price from one direct
// Poisson solve with f = R a - b.
double prf_plus_c_at(const ModelParams& p, const Policy& d, int j, double price) {
  const auto gen = build_generator(p, d);
  const auto chain = stationary_closed_form(p, d);
  const auto split = affine_decomposition(p, d);
  std::vector<double> f(split.a.size());
  double eta = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    f[k] = price * split.a[k] - split.b[k];
    eta += chain.pi[k] * f[k];
  }
  PoissonOptions opts;
  opts.method = PoissonMethod::dense;
  const auto g = solve_poisson_reward(gen, chain.pi, f, eta, opts).g;
  const StateSpace states(p.n, p.m);
  const double prf = g[states.index(p.n, j - 1)] - g[states.index(p.n, j)];
  return prf + price - (p.p2_work - p.p2_sleep) * p.c_energy / p.mu2;
}

// Root of G(n,j) + c in the price by plain bisection on direct solves.
double bisect_root(const ModelParams& p, const Policy& d, int j, double lo, double hi) {
  double flo = prf_plus_c_at(p, d, j, lo);
  for (int it = 0; it < 200 && hi - lo > 1e-13 * std::max(1.0, std::fabs(hi)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = prf_plus_c_at(p, d, j, mid);
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

ModelParams scale_costs(ModelParams p, double alpha) {
  p.c_energy *= alpha;
  p.c_hold_g1 *= alpha;
  p.c_hold_g2 *= alpha;
  p.c_transfer *= alpha;
  p.c_loss *= alpha;
  p.price *= alpha;
  return p;
}

}  // namespace

TEST_SUITE("sensitivity") {
  TEST_CASE("worked instance factors and critical price") {
    const auto p = testing::micro_instance();
    const auto rep = perturbation_factors(p, Policy({1}));
    CHECK(rep.c == doctest::Approx(9.5));
    CHECK(std::fabs(rep.prf[0] - (-3.22)) <= 1e-12);
    CHECK(std::fabs(rep.prf_plus_c[0] - 6.28) <= 1e-12);
    CHECK(rep.signs[0] == 1);
    REQUIRE_FALSE(rep.degenerate[0]);
    CHECK(std::fabs(rep.crit_prices[0] - (-5.7)) <= 1e-10);
    CHECK(critical_price_state(p, Policy({1}), 1) == doctest::Approx(-5.7).epsilon(1e-12));
  }

  TEST_CASE("worked instance global prices") {
    const auto cp = critical_prices_global(testing::micro_instance(), PolicySpaceKind::full);
    CHECK(cp.exact);
    CHECK(cp.policies == 2);
    CHECK(cp.r_high == 0.0);
    CHECK(cp.r_low < 0.0);
  }

  TEST_CASE("price lines agree with direct solves at other prices") {
    testing::Rng rng(51);
    for (int t = 0; t < 20; ++t) {
      const auto p = testing::random_instance(rng, {6, 6});
      const Policy d = testing::random_policy(rng, p.m);
      const auto lines = prf_plus_c_lines(p, d);
      for (double price : {0.0, 2.5, 17.0}) {
        auto q = p;
        q.price = price;
        const auto direct = perturbation_factors(q, d).prf_plus_c;
        for (std::size_t k = 0; k < lines.size(); ++k) {
          CHECK(lines[k].at(price) == doctest::Approx(direct[k]).epsilon(1e-9).scale(1.0 + price));
        }
      }
    }
  }

  TEST_CASE("critical prices match a bisection oracle") {
    testing::Rng rng(52);
    int checked = 0;
    for (int t = 0; t < 40 && checked < 15; ++t) {
      const auto p = testing::random_instance(rng, {5, 5});
      const Policy d = testing::random_policy(rng, p.m);
      const auto rep = perturbation_factors(p, d);
      for (int j = 1; j <= p.m; ++j) {
        const double root = rep.crit_prices[static_cast<std::size_t>(j - 1)];
        if (std::isnan(root) || std::fabs(root) > 1e4) continue;
        const double lo = root - 1.0 - std::fabs(root);
        const double hi = root + 1.0 + std::fabs(root);
        if ((prf_plus_c_at(p, d, j, lo) > 0.0) == (prf_plus_c_at(p, d, j, hi) > 0.0)) continue;
        CHECK(bisect_root(p, d, j, lo, hi) == doctest::Approx(root).epsilon(1e-8));
        ++checked;
      }
    }
    CHECK(checked >= 10);
  }

  TEST_CASE("critical prices scale with the costs") {
    testing::Rng rng(53);
    for (int t = 0; t < 10; ++t) {
      const auto p = testing::random_instance(rng, {5, 5});
      const Policy d = testing::random_policy(rng, p.m);
      const auto base = perturbation_factors(p, d);
      const auto scaled = perturbation_factors(scale_costs(p, 3.0), d);
      for (std::size_t k = 0; k < base.crit_prices.size(); ++k) {
        // Near-flat lines put the root far out and amplify rounding.
        if (base.degenerate[k] || std::fabs(base.crit_prices[k]) > 1e4) continue;
        CHECK(scaled.crit_prices[k] ==
              doctest::Approx(3.0 * base.crit_prices[k]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("performance difference on the worked instance") {
    const auto p = testing::micro_instance();
    const double direct = evaluate_eta(p, Policy({1})) - evaluate_eta(p, Policy({0}));
    CHECK(std::fabs(direct - 2.0933333333333333) <= 1e-12);
    CHECK(std::fabs(performance_difference(p, Policy({0}), Policy({1})) - direct) <= 1e-12);
    CHECK(std::fabs(single_change_difference(p, Policy({0}), Policy({1}), 1) - direct) <= 1e-12);
  }

  TEST_CASE("performance difference formula for arbitrary pairs") {
    testing::Rng rng(54);
    for (int t = 0; t < 50; ++t) {
      const auto p = testing::random_instance(rng, {6, 6});
      const Policy d = testing::random_policy(rng, p.m);
      const Policy e = testing::random_policy(rng, p.m);
      const double direct = evaluate_eta(p, e) - evaluate_eta(p, d);
      CHECK(performance_difference(p, d, e) ==
            doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    }
  }

  TEST_CASE("single change formula") {
    testing::Rng rng(55);
    for (int t = 0; t < 50; ++t) {
      const auto p = testing::random_instance(rng, {6, 6});
      const Policy d = testing::random_reduced_policy(rng, p.m);
      const int j = rng.integer(1, p.m);
      Policy e = d;
      e.set(j, rng.integer(0, j));
      const double direct = evaluate_eta(p, e) - evaluate_eta(p, d);
      CHECK(single_change_difference(p, d, e, j) ==
            doctest::Approx(direct).epsilon(1e-9).scale(1.0));
    }
    const auto p = testing::micro_instance();
    CHECK_THROWS_AS(require_single_change(Policy({0, 1}), Policy({1, 2}), 1), RangeError);
    auto q = p;
    q.m = 2;
    CHECK_THROWS_AS(single_change_difference(q, Policy({2, 0}), Policy({0, 0}), 1), RangeError);
  }

  TEST_CASE("sign conservation on the worked instance") {
    const auto sc = sign_conservation_check(testing::micro_instance(), Policy({0}), Policy({1}), 1);
    CHECK(sc.pi_ratio == doctest::Approx(5.0 / 3.0).epsilon(1e-14));
    CHECK(sc.prf_ratio == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(sc.holds);
    CHECK_FALSE(sc.degenerate);
  }

  TEST_CASE("sign conservation on random pairs") {
    testing::Rng rng(56);
    for (int t = 0; t < 40; ++t) {
      const auto p = testing::random_instance(rng, {6, 6});
      const Policy d = testing::random_reduced_policy(rng, p.m);
      const int j = rng.integer(1, p.m);
      Policy e = d;
      e.set(j, (d[j] + 1) % (j + 1));
      const auto sc = sign_conservation_check(p, d, e, j);
      if (!sc.degenerate) CHECK(sc.holds);
    }
  }

  TEST_CASE("global gate and degenerate reporting") {
    auto p = testing::micro_instance();
    p.m = 7;
    CHECK_THROWS_AS(critical_prices_global(p, PolicySpaceKind::full), GateError);
    CHECK_NOTHROW(critical_prices_global(p, PolicySpaceKind::bang_bang));
    const auto csv = sensitivity_csv(perturbation_factors(testing::micro_instance(), Policy({1})));
    CHECK(csv.rows().size() == 1);
    CHECK(csv.rows()[0][4] == "0");
  }
}
