#include "eedc/reward.hpp"

#include <algorithm>

#include "eedc/error.hpp"
#include "eedc/kernels.hpp"

namespace eedc {

AffineReward affine_decomposition(const ModelParams& p, const Policy& d) {
  require_valid(p);
  require_valid_policy(p, d);
  const StateSpace states(p.n, p.m);
  AffineReward out{std::vector<double>(states.size()), std::vector<double>(states.size())};

  const double idle_energy = (p.n * p.p1_work + p.m * p.p2_sleep) * p.c_energy;
  for (int i = 0; i <= p.n; ++i) {
    out.a[states.index(i, 0)] = i * p.mu1;
    out.b[states.index(i, 0)] = idle_energy + i * p.c_hold_g1;
  }
  for (int j = 1; j <= p.m; ++j) {
    const int on = d[j];
    const std::size_t k = states.index(p.n, j);
    out.a[k] = p.n * p.mu1 + std::min(j, on) * p.mu2;
    const double energy = (p.n * p.p1_work + on * p.p2_work + (p.m - on) * p.p2_sleep) * p.c_energy;
    const double holding = p.n * p.c_hold_g1 + j * p.c_hold_g2;
    const double transfer = p.n * p.mu1 * p.c_transfer;
    const double loss = j == p.m ? p.lambda * p.c_loss : 0.0;
    out.b[k] = energy + holding + transfer + loss;
  }
  return out;
}

RewardVector build_reward(const ModelParams& params, const Policy& d) {
  const AffineReward split = affine_decomposition(params, d);
  RewardVector r{std::vector<double>(split.a.size())};
  kernels::affine(params.price, split.a, split.b, r.f);
  return r;
}

double average_profit(const ChainSolution& chain, const RewardVector& reward) {
  if (chain.pi.size() != reward.f.size()) {
    throw RangeError("average_profit: pi and f have different lengths");
  }
  return kernels::dot(chain.pi, reward.f);
}

ProfitBreakdown profit_breakdown(const ChainSolution& chain, const AffineReward& split,
                                 double price) {
  if (chain.pi.size() != split.a.size() || chain.pi.size() != split.b.size()) {
    throw RangeError("profit_breakdown: dimension mismatch");
  }
  ProfitBreakdown out;
  out.revenue_rate = kernels::dot(chain.pi, split.a);
  out.cost_rate = kernels::dot(chain.pi, split.b);
  out.eta = price * out.revenue_rate - out.cost_rate;
  return out;
}

double evaluate_eta(const ModelParams& params, const Policy& d) {
  return average_profit(stationary_closed_form(params, d), build_reward(params, d));
}

CsvTable reward_csv(const StateSpace& states, const RewardVector& reward,
                    const AffineReward& split) {
  CsvTable table({"index", "i", "j", "f", "a", "b"});
  for (std::size_t k = 0; k < states.size(); ++k) {
    const State s = states.state(k);
    table.add_row({std::to_string(k), std::to_string(s.i), std::to_string(s.j),
                   format_number(reward.f[k]), format_number(split.a[k]),
                   format_number(split.b[k])});
  }
  return table;
}

}  // namespace eedc
