#include "eedc/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "eedc/error.hpp"
#include "eedc/parallel.hpp"
#include "eedc/reward.hpp"

namespace eedc {

namespace {

// Profit of many policies on one instance. The (i,0) block does not depend
// on the policy, so it is summed once relative to xi(n,0) = 1.
class PolicyEvaluator {
 public:
  explicit PolicyEvaluator(const ModelParams& p) : p_(p) {
    require_valid(p);
    const double idle = (p.n * p.p1_work + p.m * p.p2_sleep) * p.c_energy;
    double w = 1.0;
    for (int i = p.n; i >= 0; --i) {
      const double f = p.price * (i * p.mu1) - (idle + i * p.c_hold_g1);
      head_weight_ += w;
      head_profit_ += w * f;
      if (i > 0) w *= i * p.mu1 / p.lambda;
    }
  }

  [[nodiscard]] double eta(const Policy& d) const {
    const ModelParams& p = p_;
    double weight = head_weight_;
    double profit = head_profit_;
    double t = 1.0;
    for (int j = 1; j <= p.m; ++j) {
      const int on = d[j];
      const double served = p.n * p.mu1 + std::min(on, j) * p.mu2;
      t *= p.lambda / served;
      const double cost = (p.n * p.p1_work + on * p.p2_work + (p.m - on) * p.p2_sleep) * p.c_energy +
                          p.n * p.c_hold_g1 + j * p.c_hold_g2 + p.n * p.mu1 * p.c_transfer +
                          (j == p.m ? p.lambda * p.c_loss : 0.0);
      weight += t;
      profit += t * (p.price * served - cost);
    }
    return profit / weight;
  }

 private:
  ModelParams p_;
  double head_weight_ = 0.0;
  double head_profit_ = 0.0;
};

bool ranks_before(const RankedPolicy& a, const RankedPolicy& b) {
  if (a.eta != b.eta) return a.eta > b.eta;
  return a.policy < b.policy;
}

void keep_top(std::vector<RankedPolicy>& top, std::size_t k, RankedPolicy cand) {
  if (k == 0) return;
  if (top.size() == k && !ranks_before(cand, top.back())) return;
  top.insert(std::upper_bound(top.begin(), top.end(), cand, ranks_before), std::move(cand));
  if (top.size() > k) top.pop_back();
}

double log_sum_exp_average(const std::vector<double>& logw, const std::vector<double>& f) {
  const double top = *std::max_element(logw.begin(), logw.end());
  double num = 0.0;
  double den = 0.0;
  for (std::size_t k = 0; k < logw.size(); ++k) {
    const double w = std::exp(logw[k] - top);
    num += w * f[k];
    den += w;
  }
  return num / den;
}

// log of lambda^i / (i! mu1^i), i = 0..n.
std::vector<double> log_head_weights(const ModelParams& p) {
  std::vector<double> out;
  for (int i = 0; i <= p.n; ++i) {
    out.push_back(i * std::log(p.lambda) - std::lgamma(i + 1.0) - i * std::log(p.mu1));
  }
  return out;
}

double head_reward(const ModelParams& p, int i) {
  return p.price * i * p.mu1 - (p.n * p.p1_work + p.m * p.p2_sleep) * p.c_energy - i * p.c_hold_g1;
}

// Reward at (n,j) with no Group-2 server awake.
double sleeping_reward(const ModelParams& p, int j) {
  return p.price * p.n * p.mu1 - (p.n * p.p1_work + p.m * p.p2_sleep) * p.c_energy -
         (p.n * p.c_hold_g1 + j * p.c_hold_g2) - p.n * p.mu1 * p.c_transfer -
         (j == p.m ? p.lambda * p.c_loss : 0.0);
}

// Reward at (n,j) with exactly j Group-2 servers awake.
double matched_reward(const ModelParams& p, int j) {
  return p.price * (p.n * p.mu1 + j * p.mu2) -
         (p.n * p.p1_work + j * p.p2_work + (p.m - j) * p.p2_sleep) * p.c_energy -
         (p.n * p.c_hold_g1 + j * p.c_hold_g2) - p.n * p.mu1 * p.c_transfer -
         (j == p.m ? p.lambda * p.c_loss : 0.0);
}

}  // namespace

OptimizationResult optimize(const ModelParams& params, PolicySpaceKind space,
                            const OptimizeOptions& options) {
  require_valid(params);
  check_enumeration_gate(params.m, space, options.allow_large);
  const PolicySpace policies(params.m, space);
  const PolicyEvaluator evaluator(params);

  struct Partial {
    RankedPolicy best{Policy{}, -std::numeric_limits<double>::infinity()};
    std::vector<RankedPolicy> top;
  };
  std::vector<Partial> partials(thread_count());
  const std::size_t chunks =
      parallel_chunks(policies.size(), [&](std::size_t w, std::uint64_t b, std::uint64_t e) {
        Partial part;
        for (std::uint64_t idx = b; idx < e; ++idx) {
          RankedPolicy cand{policies.at(idx), 0.0};
          cand.eta = evaluator.eta(cand.policy);
          if (!std::isfinite(cand.eta)) throw NumericalError("non-finite profit during enumeration");
          if (part.best.policy.m() == 0 || ranks_before(cand, part.best)) part.best = cand;
          keep_top(part.top, options.top_k, std::move(cand));
        }
        partials[w] = std::move(part);
      });

  OptimizationResult out;
  out.space = space;
  out.evaluations = policies.size();
  RankedPolicy best = partials[0].best;
  for (std::size_t w = 0; w < chunks; ++w) {
    if (ranks_before(partials[w].best, best)) best = partials[w].best;
    for (auto& cand : partials[w].top) keep_top(out.ranking, options.top_k, cand);
  }
  out.best_policy = best.policy;
  out.best_eta = best.eta;
  return out;
}

double extreme_closed_form_eta(const ModelParams& p, PriceRegime regime) {
  require_valid(p);
  std::vector<double> logw = log_head_weights(p);
  std::vector<double> f;
  for (int i = 0; i <= p.n; ++i) f.push_back(head_reward(p, i));
  const double log_top = logw.back();
  double acc = 0.0;
  for (int j = 1; j <= p.m; ++j) {
    if (regime == PriceRegime::high) {
      acc += std::log(p.lambda) - std::log(p.n * p.mu1 + j * p.mu2);
      f.push_back(matched_reward(p, j));
    } else {
      acc += std::log(p.lambda) - std::log(p.n * p.mu1);
      f.push_back(sleeping_reward(p, j));
    }
    logw.push_back(log_top + acc);
  }
  return log_sum_exp_average(logw, f);
}

ExtremeResult optimal_extreme_prices(const ModelParams& params, const CriticalPrices& prices) {
  if (!prices.exact) {
    throw RegimeError("extreme-price optimum needs critical prices over the full policy set");
  }
  ExtremeResult out;
  const int m = params.m;
  if (params.price >= prices.r_high) {
    out.regime = PriceRegime::high;
    out.policy = threshold_policy(m, 1);
  } else if (params.price >= 0.0 && params.price <= prices.r_low) {
    out.regime = PriceRegime::low;
    out.policy = threshold_policy(m, m + 1);
  } else {
    throw RegimeError("price " + format_number(params.price) + " lies strictly between R_L = " +
                      format_number(prices.r_low) + " and R_H = " + format_number(prices.r_high));
  }
  out.eta_closed_form = extreme_closed_form_eta(params, out.regime);
  out.eta_generic = evaluate_eta(params, out.policy);
  return out;
}

double threshold_closed_form_eta(const ModelParams& p, int theta) {
  require_valid(p);
  if (theta < 1 || theta > p.m + 1) throw RangeError("threshold theta out of range");
  std::vector<double> logw = log_head_weights(p);
  std::vector<double> f;
  for (int i = 0; i <= p.n; ++i) f.push_back(head_reward(p, i));
  const double log_top = logw.back();
  const double asleep_step = std::log(p.lambda) - std::log(p.n * p.mu1);
  for (int j = 1; j < theta; ++j) {
    logw.push_back(log_top + j * asleep_step);
    f.push_back(sleeping_reward(p, j));
  }
  double acc = (theta - 1) * asleep_step;
  for (int j = theta; j <= p.m; ++j) {
    acc += std::log(p.lambda) - std::log(p.n * p.mu1 + j * p.mu2);
    logw.push_back(log_top + acc);
    f.push_back(matched_reward(p, j));
  }
  return log_sum_exp_average(logw, f);
}

ThresholdResult threshold_scan(const ModelParams& params) {
  require_valid(params);
  const int m = params.m;
  ThresholdResult out;
  for (int theta = 1; theta <= m + 1; ++theta) {
    const double generic = evaluate_eta(params, threshold_policy(m, theta));
    const double closed = threshold_closed_form_eta(params, theta);
    out.eta_by_theta.push_back(generic);
    out.eta_closed_form_by_theta.push_back(closed);
    out.closed_form_gap = std::max(out.closed_form_gap, std::fabs(generic - closed));
  }
  for (int theta = 2; theta <= m + 1; ++theta) {
    if (out.eta_by_theta[static_cast<std::size_t>(theta - 1)] >
        out.eta_by_theta[static_cast<std::size_t>(out.theta_star - 1)]) {
      out.theta_star = theta;
    }
  }

  const double c = transfer_constant(params);
  out.tolerance = 1e-9 * std::max(1.0, std::fabs(c));
  const int t = out.theta_star;
  auto term = [&](int policy_theta, int level, bool upper) {
    ConditionTerm ct;
    ct.policy_theta = policy_theta;
    ct.level = level;
    if (level < 1 || level > m || policy_theta < 1 || policy_theta > m + 1) return ct;
    ct.applicable = true;
    const auto rep = perturbation_factors(params, threshold_policy(m, policy_theta));
    ct.value = rep.prf_plus_c[static_cast<std::size_t>(level - 1)];
    ct.holds = upper ? ct.value <= out.tolerance : ct.value >= -out.tolerance;
    return ct;
  };
  out.below = term(t - 1, t - 1, true);
  out.at = term(t, t, false);
  out.above = term(t + 1, t + 1, false);
  out.above_same_level = term(t + 1, t, false);
  return out;
}

MonotonicityReport verify_monotonicity(const ModelParams& params, const Policy& base, int j,
                                       const std::optional<CriticalPrices>& prices) {
  require_valid(params);
  require_valid_policy(params, base);
  if (j < 1 || j > params.m) throw RangeError("monotonicity level out of range");
  MonotonicityReport rep;
  rep.level = j;
  rep.base = base;
  Policy d = base;
  for (int v = 0; v <= params.m; ++v) {
    d.set(j, v);
    rep.eta.push_back(evaluate_eta(params, d));
  }
  d.set(j, j);
  const StateSpace states(params.n, params.m);
  const double pi_nj = stationary_closed_form(params, d).pi[states.index(params.n, j)];
  rep.expected_slope = -pi_nj * (params.p2_work - params.p2_sleep) * params.c_energy;
  const double at_j = rep.eta[static_cast<std::size_t>(j)];
  for (int v = j; v <= params.m; ++v) {
    const double predicted = at_j + rep.expected_slope * (v - j);
    rep.linearity_residual =
        std::max(rep.linearity_residual, std::fabs(rep.eta[static_cast<std::size_t>(v)] - predicted));
  }
  rep.linear_ok = rep.linearity_residual < 1e-10;
  if (!rep.linear_ok) {
    rep.violations.push_back("linearity residual " + format_number(rep.linearity_residual) +
                             " on {" + std::to_string(j) + ".." + std::to_string(params.m) + "}");
  }

  if (prices) {
    if (params.price >= prices->r_high) {
      rep.regime = MonotonicityReport::Regime::high;
    } else if (params.price >= 0.0 && params.price <= prices->r_low) {
      rep.regime = MonotonicityReport::Regime::low;
    } else {
      rep.regime = MonotonicityReport::Regime::between;
    }
  }
  bool up = true;
  bool down = true;
  bool strict_up = true;
  bool strict_down = true;
  for (int v = 0; v < j; ++v) {
    const double a = rep.eta[static_cast<std::size_t>(v)];
    const double b = rep.eta[static_cast<std::size_t>(v + 1)];
    // A few hundred ulps of eta: enough to absorb rounding in pi f, small
    // enough to resolve real steps on light-load instances with large eta.
    const double margin = 1e-13 * std::max({1.0, std::fabs(a), std::fabs(b)});
    if (!(b - a > margin)) strict_up = false;
    if (!(a - b > margin)) strict_down = false;
    if (b - a < -margin) up = false;
    if (a - b < -margin) down = false;
  }
  switch (rep.regime) {
    case MonotonicityReport::Regime::high:
      rep.monotone_ok = strict_up;
      if (!strict_up) rep.violations.push_back("not strictly increasing on {0..j} above R_H");
      break;
    case MonotonicityReport::Regime::low:
      rep.monotone_ok = strict_down;
      if (!strict_down) rep.violations.push_back("not strictly decreasing on {0..j} below R_L");
      break;
    case MonotonicityReport::Regime::between:
    case MonotonicityReport::Regime::unknown:
      rep.monotone_ok = up || down;
      if (!rep.monotone_ok) rep.violations.push_back("not monotone on {0..j}");
      break;
  }
  rep.argmax = static_cast<int>(std::max_element(rep.eta.begin(), rep.eta.end()) - rep.eta.begin());
  return rep;
}

SweepResult price_sweep(const ModelParams& params, const std::vector<double>& grid,
                        PolicySpaceKind space, bool allow_large) {
  require_valid(params);
  if (grid.empty()) throw ConfigError("price grid is empty");
  SweepResult out;
  const PolicySpaceKind price_space =
      params.m <= kCriticalPriceMaxM ? PolicySpaceKind::full : PolicySpaceKind::reduced;
  out.prices = critical_prices_global(params, price_space, allow_large);

  std::vector<double> sorted = grid;
  std::sort(sorted.begin(), sorted.end());
  double previous = -std::numeric_limits<double>::infinity();
  for (const double price : sorted) {
    ModelParams at = params;
    at.price = price;
    const OptimizationResult best = optimize(at, space, {0, allow_large});
    if (best.best_eta < previous - 1e-9 * std::max(1.0, std::fabs(previous))) {
      throw NumericalError("best profit decreased from " + format_number(previous) + " to " +
                           format_number(best.best_eta) + " at R = " + format_number(price));
    }
    previous = best.best_eta;
    SweepRow row;
    row.price = price;
    row.best_policy = best.best_policy;
    row.eta = best.best_eta;
    for (const PriceLine& line : prf_plus_c_lines(at, best.best_policy)) {
      const bool flat = std::fabs(line.slope) <= 1e-12 * std::max(1.0, std::fabs(line.intercept));
      row.crit_prices.push_back(flat ? std::numeric_limits<double>::quiet_NaN()
                                     : -line.intercept / line.slope);
    }
    row.at_or_above_high = price >= out.prices.r_high;
    row.at_or_below_low = price >= 0.0 && price <= out.prices.r_low;
    out.rows.push_back(std::move(row));
  }
  return out;
}

CsvTable ranking_csv(const OptimizationResult& result) {
  CsvTable table({"rank", "policy", "eta"});
  if (result.ranking.empty()) {
    table.add_row({"1", format_policy(result.best_policy), format_number(result.best_eta)});
    return table;
  }
  for (std::size_t k = 0; k < result.ranking.size(); ++k) {
    table.add_row({std::to_string(k + 1), format_policy(result.ranking[k].policy),
                   format_number(result.ranking[k].eta)});
  }
  return table;
}

CsvTable threshold_csv(const ThresholdResult& result) {
  CsvTable table({"theta", "policy", "eta", "eta_closed_form", "is_theta_star"});
  const int m = static_cast<int>(result.eta_by_theta.size()) - 1;
  for (int theta = 1; theta <= m + 1; ++theta) {
    const auto k = static_cast<std::size_t>(theta - 1);
    table.add_row({std::to_string(theta), format_policy(threshold_policy(m, theta)),
                   format_number(result.eta_by_theta[k]),
                   format_number(result.eta_closed_form_by_theta[k]),
                   theta == result.theta_star ? "1" : "0"});
  }
  return table;
}

CsvTable monotonicity_csv(const MonotonicityReport& report) {
  CsvTable table({"j", "d_nj", "eta"});
  for (std::size_t v = 0; v < report.eta.size(); ++v) {
    table.add_row({std::to_string(report.level), std::to_string(v), format_number(report.eta[v])});
  }
  return table;
}

CsvTable sweep_csv(const SweepResult& result, int m) {
  std::vector<std::string> header{"R", "eta", "best_policy"};
  for (int j = 1; j <= m; ++j) header.push_back("crit_" + std::to_string(j));
  header.insert(header.end(), {"R_H", "R_L", "at_or_above_R_H", "at_or_below_R_L"});
  CsvTable table(std::move(header));
  for (const auto& row : result.rows) {
    std::vector<std::string> cells{format_number(row.price), format_number(row.eta),
                                   format_policy(row.best_policy)};
    for (const double c : row.crit_prices) cells.push_back(std::isnan(c) ? "" : format_number(c));
    cells.push_back(format_number(result.prices.r_high));
    cells.push_back(format_number(result.prices.r_low));
    cells.push_back(row.at_or_above_high ? "1" : "0");
    cells.push_back(row.at_or_below_low ? "1" : "0");
    table.add_row(std::move(cells));
  }
  return table;
}

}  // namespace eedc
