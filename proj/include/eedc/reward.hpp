#pragma once

#include <vector>

#include "eedc/chain.hpp"
#include "eedc/csv.hpp"
#include "eedc/model.hpp"

namespace eedc {

/// Profit rate per state, indexed like StateSpace.
struct RewardVector {
  std::vector<double> f;
};

/// Split of the reward into a revenue-rate coefficient a (multiplied by
/// the price) and a cost rate b, so that f = R a - b.
struct AffineReward {
  std::vector<double> a;
  std::vector<double> b;
};

/// eta = pi f together with its price decomposition eta = R D - F.
struct ProfitBreakdown {
  double eta = 0.0;
  double revenue_rate = 0.0;  ///< D = pi a
  double cost_rate = 0.0;     ///< F = pi b
};

/// a(i,0) = i mu1 and a(n,j) = n mu1 + min(j, d_{n,j}) mu2. b collects the
/// energy, holding, transfer and loss costs. The energy term uses the raw
/// action d_{n,j}, so actions above j cost more without serving more.
AffineReward affine_decomposition(const ModelParams& params, const Policy& d);

/// f = R a - b, evaluated through the affine kernel so the two always agree
/// bit for bit.
RewardVector build_reward(const ModelParams& params, const Policy& d);

double average_profit(const ChainSolution& chain, const RewardVector& reward);
ProfitBreakdown profit_breakdown(const ChainSolution& chain, const AffineReward& split,
                                 double price);

/// Convenience: eta of policy d computed from the closed-form chain.
double evaluate_eta(const ModelParams& params, const Policy& d);

CsvTable reward_csv(const StateSpace& states, const RewardVector& reward,
                    const AffineReward& split);

}  // namespace eedc
