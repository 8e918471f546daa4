#include "eedc/sensitivity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eedc/error.hpp"
#include "eedc/parallel.hpp"

namespace eedc {

double transfer_constant(const ModelParams& p) {
  return p.price - (p.p2_work - p.p2_sleep) * p.c_energy / p.mu2;
}

std::vector<double> realization_factors(const ModelParams& params, const std::vector<double>& g) {
  const StateSpace states(params.n, params.m);
  if (g.size() != states.size()) throw RangeError("realization_factors: wrong potential length");
  std::vector<double> out(static_cast<std::size_t>(params.m));
  for (int j = 1; j <= params.m; ++j) {
    out[static_cast<std::size_t>(j - 1)] =
        g[states.index(params.n, j - 1)] - g[states.index(params.n, j)];
  }
  return out;
}

std::vector<PriceLine> prf_plus_c_lines(const ModelParams& params, const Policy& d) {
  const Generator gen = build_generator(params, d);
  const ChainSolution chain = stationary_closed_form(params, d);
  const AffineReward split = affine_decomposition(params, d);
  const ProfitBreakdown profit = profit_breakdown(chain, split, params.price);

  // R = 0: f = -b, eta = -F.  R = 1: f = a - b, eta = D - F.
  std::vector<double> f0(split.b.size()), f1(split.b.size());
  for (std::size_t k = 0; k < f0.size(); ++k) {
    f0[k] = -split.b[k];
    f1[k] = split.a[k] - split.b[k];
  }
  const auto g0 = solve_poisson_reward(gen, chain.pi, f0, -profit.cost_rate).g;
  const auto g1 = solve_poisson_reward(gen, chain.pi, f1, profit.revenue_rate - profit.cost_rate).g;
  const auto prf0 = realization_factors(params, g0);
  const auto prf1 = realization_factors(params, g1);

  ModelParams at0 = params;
  at0.price = 0.0;
  const double c0 = transfer_constant(at0);
  std::vector<PriceLine> lines(prf0.size());
  for (std::size_t k = 0; k < lines.size(); ++k) {
    lines[k].intercept = prf0[k] + c0;
    lines[k].slope = (prf1[k] + c0 + 1.0) - lines[k].intercept;
  }
  return lines;
}

namespace {

bool degenerate_slope(const PriceLine& line) {
  return std::fabs(line.slope) <= 1e-12 * std::max(1.0, std::fabs(line.intercept));
}

}  // namespace

SensitivityReport perturbation_factors(const ModelParams& params, const Policy& d) {
  SensitivityReport rep;
  const PotentialSolution sol = solve_poisson(params, d);
  rep.prf = realization_factors(params, sol.g);
  rep.c = transfer_constant(params);
  const auto lines = prf_plus_c_lines(params, d);
  for (std::size_t k = 0; k < rep.prf.size(); ++k) {
    const double value = rep.prf[k] + rep.c;
    rep.prf_plus_c.push_back(value);
    rep.signs.push_back(value > 0.0 ? 1 : (value < 0.0 ? -1 : 0));
    const bool degenerate = degenerate_slope(lines[k]);
    rep.degenerate.push_back(degenerate);
    rep.crit_prices.push_back(degenerate ? std::numeric_limits<double>::quiet_NaN()
                                         : -lines[k].intercept / lines[k].slope);
  }
  return rep;
}

double critical_price_state(const ModelParams& params, const Policy& d, int j) {
  if (j < 1 || j > params.m) throw RangeError("critical_price_state: level out of range");
  const PriceLine line = prf_plus_c_lines(params, d)[static_cast<std::size_t>(j - 1)];
  if (degenerate_slope(line)) {
    throw DegeneratePriceError("G(n," + std::to_string(j) + ") + c does not depend on the price (value " +
                               format_number(line.intercept) + ")");
  }
  return -line.intercept / line.slope;
}

CriticalPrices critical_prices_global(const ModelParams& params, PolicySpaceKind space,
                                      bool allow_large) {
  require_valid(params);
  if (!allow_large && space == PolicySpaceKind::full && params.m > kCriticalPriceMaxM) {
    throw GateError("exact critical prices need the full space, refused for m = " +
                    std::to_string(params.m) + " > " + std::to_string(kCriticalPriceMaxM));
  }
  check_enumeration_gate(params.m, space, allow_large);
  const PolicySpace policies(params.m, space);

  struct Partial {
    double high = 0.0;
    double low = std::numeric_limits<double>::infinity();
    std::uint64_t degenerate = 0;
  };
  std::vector<Partial> partials(thread_count());
  const std::size_t chunks = parallel_chunks(policies.size(), [&](std::size_t w, std::uint64_t b, std::uint64_t e) {
    Partial part;
    for (std::uint64_t idx = b; idx < e; ++idx) {
      for (const PriceLine& line : prf_plus_c_lines(params, policies.at(idx))) {
        if (degenerate_slope(line)) {
          ++part.degenerate;
          continue;
        }
        const double root = -line.intercept / line.slope;
        part.high = std::max(part.high, root);
        part.low = std::min(part.low, root);
      }
    }
    partials[w] = part;
  });

  CriticalPrices out;
  out.search_space = space;
  out.exact = space == PolicySpaceKind::full;
  out.policies = policies.size();
  out.r_low = std::numeric_limits<double>::infinity();
  for (std::size_t w = 0; w < chunks; ++w) {
    out.r_high = std::max(out.r_high, partials[w].high);
    out.r_low = std::min(out.r_low, partials[w].low);
    out.degenerate += partials[w].degenerate;
  }
  return out;
}

double performance_difference(const ModelParams& params, const Policy& d, const Policy& d_prime) {
  const Generator gen = build_generator(params, d);
  const Generator gen_p = build_generator(params, d_prime);
  const ChainSolution chain_p = stationary_closed_form(params, d_prime);
  const RewardVector f = build_reward(params, d);
  const RewardVector f_p = build_reward(params, d_prime);
  const PotentialSolution sol = solve_poisson(params, d);

  const std::size_t size = gen.states.size();
  double total = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    double row = 0.0;
    const std::size_t lo = k > 0 ? k - 1 : 0;
    const std::size_t hi = std::min(size - 1, k + 1);
    for (std::size_t c = lo; c <= hi; ++c) row += (gen_p.matrix(k, c) - gen.matrix(k, c)) * sol.g[c];
    total += chain_p.pi[k] * (row + (f_p.f[k] - f.f[k]));
  }
  return total;
}

void require_single_change(const Policy& d, const Policy& d_prime, int j) {
  if (d.m() != d_prime.m()) throw RangeError("policies have different lengths");
  if (j < 1 || j > d.m()) throw RangeError("level out of range");
  for (int q = 1; q <= d.m(); ++q) {
    if (q != j && d[q] != d_prime[q]) {
      throw RangeError("policies differ at level " + std::to_string(q) + ", not only at " +
                       std::to_string(j));
    }
  }
}

namespace {

void require_canonical_pair(const Policy& d, const Policy& d_prime, int j) {
  require_single_change(d, d_prime, j);
  if (d[j] > j || d_prime[j] > j) {
    throw RangeError("single-change formula needs both actions at level " + std::to_string(j) +
                     " within {0.." + std::to_string(j) + "}");
  }
}

}  // namespace

double single_change_difference(const ModelParams& params, const Policy& d, const Policy& d_prime,
                                int j) {
  require_canonical_pair(d, d_prime, j);
  if (d == d_prime) return 0.0;
  const SensitivityReport rep = perturbation_factors(params, d);
  const ChainSolution chain_p = stationary_closed_form(params, d_prime);
  const StateSpace states(params.n, params.m);
  return params.mu2 * chain_p.pi[states.index(params.n, j)] * (d_prime[j] - d[j]) *
         rep.prf_plus_c[static_cast<std::size_t>(j - 1)];
}

SignConservation sign_conservation_check(const ModelParams& params, const Policy& d,
                                         const Policy& d_prime, int j) {
  require_canonical_pair(d, d_prime, j);
  SignConservation out;
  out.level = j;
  const StateSpace states(params.n, params.m);
  const std::size_t k = states.index(params.n, j);
  const double num = perturbation_factors(params, d).prf_plus_c[static_cast<std::size_t>(j - 1)];
  const double den = perturbation_factors(params, d_prime).prf_plus_c[static_cast<std::size_t>(j - 1)];
  out.pi_ratio = stationary_closed_form(params, d).pi[k] / stationary_closed_form(params, d_prime).pi[k];
  if (std::fabs(num) < 1e-12 || std::fabs(den) < 1e-12) {
    out.degenerate = true;
    out.prf_ratio = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.prf_ratio = num / den;
  out.holds = out.prf_ratio > 0.0 &&
              std::fabs(out.prf_ratio - out.pi_ratio) <= 1e-9 * std::fabs(out.pi_ratio);
  return out;
}

CsvTable sensitivity_csv(const SensitivityReport& rep) {
  CsvTable table({"j", "G", "G_plus_c", "critical_price", "degenerate"});
  for (std::size_t k = 0; k < rep.prf.size(); ++k) {
    table.add_row({std::to_string(k + 1), format_number(rep.prf[k]), format_number(rep.prf_plus_c[k]),
                   rep.degenerate[k] ? "" : format_number(rep.crit_prices[k]),
                   rep.degenerate[k] ? "1" : "0"});
  }
  return table;
}

}  // namespace eedc
