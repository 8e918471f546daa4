#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "eedc/chain.hpp"
#include "eedc/error.hpp"
#include "eedc/potential.hpp"
#include "eedc/reward.hpp"
#include "support.hpp"

using namespace eedc;

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

RowMatrix to_eigen(const DenseMatrix& m) {
  return Eigen::Map<const RowMatrix>(m.data().data(), static_cast<Eigen::Index>(m.rows()),
                                     static_cast<Eigen::Index>(m.cols()));
}

// Oracle: the fundamental-matrix system (-B + e pi) g = f in long double
// with full pivoting, shifted so that g(0,0) = anchor.
std::vector<double> anchored_oracle(const Generator& gen, const std::vector<double>& pi,
                                    const std::vector<double>& f, double anchor) {
  using LMatrix = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
  using LVector = Eigen::Matrix<long double, Eigen::Dynamic, 1>;
  const auto size = static_cast<Eigen::Index>(gen.states.size());
  LMatrix a(size, size);
  LVector rhs(size);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      a(r, c) = -static_cast<long double>(gen.matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(c))) +
                pi[static_cast<std::size_t>(c)];
    }
    rhs(r) = f[static_cast<std::size_t>(r)];
  }
  const LVector x = a.fullPivLu().solve(rhs);
  std::vector<double> g;
  for (Eigen::Index k = 0; k < size; ++k) g.push_back(static_cast<double>(x(k) - x(0) + anchor));
  return g;
}

double rel_gap(const std::vector<double>& a, const std::vector<double>& b) {
  double scale = 1.0, worst = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    scale = std::max(scale, std::fabs(b[k]));
    worst = std::max(worst, std::fabs(a[k] - b[k]));
  }
  return worst / scale;
}

constexpr PoissonMethod kMethods[] = {PoissonMethod::rg_recursive, PoissonMethod::rg_matrix,
                                      PoissonMethod::explicit_sums, PoissonMethod::dense};

}  // namespace

TEST_SUITE("potential") {
  TEST_CASE("worked instance potentials for every method") {
    const auto p = testing::micro_instance();
    for (PoissonMethod method : kMethods) {
      CAPTURE(to_string(method));
      PoissonOptions opts;
      opts.method = method;
      const auto sol = solve_poisson(p, Policy({1}), opts);
      CHECK(sol.g[0] == 1.0);
      CHECK(std::fabs(sol.g[1] - 7.36) <= 1e-12);
      CHECK(std::fabs(sol.g[2] - 10.58) <= 1e-12);
    }
  }

  TEST_CASE("fundamental normalisation centres the potentials") {
    const auto p = testing::micro_instance();
    PoissonOptions opts;
    opts.normalization = Normalization::fundamental;
    const auto sol = solve_poisson(p, Policy({1}), opts);
    CHECK(std::fabs(sol.g[0] - (-0.6)) <= 1e-12);
    CHECK(std::fabs(sol.g[1] - 5.76) <= 1e-12);
    CHECK(std::fabs(sol.g[2] - 8.98) <= 1e-12);
    const auto chain = stationary_closed_form(p, Policy({1}));
    double pig = 0.0;
    for (std::size_t k = 0; k < 3; ++k) pig += chain.pi[k] * sol.g[k];
    CHECK(std::fabs(pig - sol.eta) <= 1e-12);

    testing::Rng rng(41);
    for (int t = 0; t < 20; ++t) {
      const auto q = testing::random_instance(rng, {8, 8});
      const Policy d = testing::random_policy(rng, q.m);
      const auto c = stationary_closed_form(q, d);
      const auto anchored = solve_poisson(q, d);
      const auto fund = normalize_fundamental(anchored, c);
      double mean = 0.0;
      for (std::size_t k = 0; k < c.pi.size(); ++k) mean += c.pi[k] * fund.g[k];
      CHECK(std::fabs(mean - fund.eta) <= 1e-9 * std::max(1.0, std::fabs(fund.eta)));
      for (std::size_t k = 1; k < c.pi.size(); ++k) {
        CHECK((fund.g[k] - fund.g[0]) ==
              doctest::Approx(anchored.g[k] - anchored.g[0]).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("factor example and reassembly") {
    const auto gen = build_generator(testing::micro_instance(), Policy({1}));
    const auto fac = rg_factorize(gen);
    CHECK(fac.u == std::vector<double>{-1.0, -2.0});
    CHECK(fac.r == std::vector<double>{0.5});
    CHECK(fac.g[0] == 1.0);
    const auto inv = invert_reduced(fac);
    CHECK(inv(0, 0) == doctest::Approx(1.0));
    CHECK(inv(0, 1) == doctest::Approx(0.5));
    CHECK(inv(1, 0) == doctest::Approx(1.0));
    CHECK(inv(1, 1) == doctest::Approx(1.0));

    testing::Rng rng(42);
    for (int t = 0; t < 20; ++t) {
      const auto p = testing::random_instance(rng, {6, 6});
      const auto g = build_generator(p, testing::random_policy(rng, p.m));
      const auto f = rg_factorize(g);
      const RowMatrix B = to_eigen(g.matrix);
      const Eigen::Index dim = B.rows() - 1;
      const RowMatrix back = to_eigen(reassemble(f));
      const double scale = B.cwiseAbs().maxCoeff();
      CHECK((back - B.bottomRightCorner(dim, dim)).cwiseAbs().maxCoeff() <= 1e-13 * scale);
      const auto lit = rg_factorize_literal(g);
      for (std::size_t k = 0; k < f.u.size(); ++k) {
        CHECK(lit.u[k] == doctest::Approx(f.u[k]).epsilon(1e-9));
      }
    }
  }

  TEST_CASE("explicit inverse of a 30-state chain matches a dense inverse") {
    ModelParams p = testing::micro_instance();
    p.n = 12;
    p.m = 17;
    p.lambda = 6.0;
    p.mu1 = 0.7;
    p.mu2 = 0.4;
    const auto gen = build_generator(p, Policy(std::vector<int>(17, 5)));
    REQUIRE(gen.states.size() == 30);
    const RowMatrix inv = to_eigen(invert_reduced(rg_factorize(gen)));
    const RowMatrix B = to_eigen(gen.matrix);
    const Eigen::MatrixXd oracle = (-B.bottomRightCorner(29, 29)).inverse();
    CHECK((inv - oracle).cwiseAbs().maxCoeff() <= 1e-9 * oracle.cwiseAbs().maxCoeff());
    CHECK(inv.minCoeff() > 0.0);
    // mu1 (-B_reduced)^{-1} e_1 is the all-ones vector.
    CHECK((p.mu1 * inv.col(0).array() - 1.0).abs().maxCoeff() <= 1e-10);
  }

  TEST_CASE("all methods solve the Poisson equation and agree with the oracle") {
    testing::Rng rng(43);
    for (int t = 0; t < 60; ++t) {
      const auto p = testing::random_instance(rng, {10, 10});
      const Policy d = testing::random_policy(rng, p.m);
      const auto gen = build_generator(p, d);
      const auto f = build_reward(p, d).f;
      const double eta = evaluate_eta(p, d);
      const auto oracle = anchored_oracle(gen, stationary_closed_form(p, d).pi, f, 1.0);
      double fscale = 1.0;
      for (double v : f) fscale = std::max(fscale, std::fabs(v));
      for (PoissonMethod method : kMethods) {
        CAPTURE(to_string(method));
        PoissonOptions opts;
        opts.method = method;
        const auto sol = solve_poisson(p, d, eta, opts);
        CHECK(poisson_residual(gen, sol.g, f, eta) <= 1e-9 * fscale);
        CHECK(rel_gap(sol.g, oracle) <= 1e-9);
      }
    }
  }

  TEST_CASE("anchor shifts every potential by the same constant") {
    testing::Rng rng(44);
    const auto p = testing::random_instance(rng, {6, 6});
    const Policy d = testing::random_policy(rng, p.m);
    PoissonOptions opts;
    const auto base = solve_poisson(p, d, opts);
    opts.anchor = -4.5;
    const auto moved = solve_poisson(p, d, opts);
    for (std::size_t k = 0; k < base.g.size(); ++k) {
      CHECK(moved.g[k] - base.g[k] == doctest::Approx(-5.5).epsilon(1e-9));
    }
  }

  TEST_CASE("inconsistent eta is rejected") {
    const auto p = testing::micro_instance();
    CHECK_THROWS_AS(solve_poisson(p, Policy({1}), 3.87), ConsistencyError);
    CHECK_NOTHROW(solve_poisson(p, Policy({1}), 3.86));
  }

  TEST_CASE("heavy load stays accurate with the stabilised sums") {
    ModelParams p = testing::micro_instance();
    p.n = 15;
    p.m = 15;
    p.lambda = 40.0;
    p.mu1 = 1.0;
    p.mu2 = 0.8;
    const Policy d(std::vector<int>(15, 15));
    const auto gen = build_generator(p, d);
    const auto f = build_reward(p, d).f;
    const double eta = evaluate_eta(p, d);
    const auto oracle = anchored_oracle(gen, stationary_closed_form(p, d).pi, f, 1.0);
    for (PoissonMethod method : {PoissonMethod::rg_recursive, PoissonMethod::explicit_sums}) {
      PoissonOptions opts;
      opts.method = method;
      CHECK(rel_gap(solve_poisson(p, d, eta, opts).g, oracle) <= 1e-9);
    }
  }

  TEST_CASE("method names round trip") {
    for (PoissonMethod method : kMethods) CHECK(parse_poisson_method(to_string(method)) == method);
    CHECK_THROWS_AS(parse_poisson_method("lu"), ConfigError);
  }
}
