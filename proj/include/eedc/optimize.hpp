#pragma once

#include <optional>
#include <string>
#include <vector>

#include "eedc/csv.hpp"
#include "eedc/model.hpp"
#include "eedc/sensitivity.hpp"

namespace eedc {

struct RankedPolicy {
  Policy policy;
  double eta = 0.0;
};

struct OptimizationResult {
  Policy best_policy;
  double best_eta = 0.0;
  PolicySpaceKind space = PolicySpaceKind::full;
  std::uint64_t evaluations = 0;
  std::vector<RankedPolicy> ranking;  ///< top-k by eta, ties lexicographic
};

struct OptimizeOptions {
  std::size_t top_k = 0;
  bool allow_large = false;
};

/// Exhaustive search. Among equal maximisers the lexicographically
/// smallest policy wins, independent of thread count.
OptimizationResult optimize(const ModelParams& params, PolicySpaceKind space,
                            const OptimizeOptions& options = {});

enum class PriceRegime { high, low };

struct ExtremeResult {
  PriceRegime regime = PriceRegime::high;
  Policy policy;
  double eta_closed_form = 0.0;
  double eta_generic = 0.0;
};

/// Product-form profit of (1,2,...,m) or of all zeros, summed in log space
/// from the displayed formulas without going through the chain module.
double extreme_closed_form_eta(const ModelParams& params, PriceRegime regime);

/// Requires exact critical prices with R >= R_H (high regime) or
/// 0 <= R <= R_L (low regime); throws RegimeError otherwise.
ExtremeResult optimal_extreme_prices(const ModelParams& params, const CriticalPrices& prices);

/// One inequality of the necessary condition at theta*.
struct ConditionTerm {
  bool applicable = false;
  int level = 0;        ///< coordinate j of G(n,j)
  int policy_theta = 0; ///< threshold of the policy the factor is taken under
  double value = 0.0;   ///< G + c
  bool holds = true;
};

struct ThresholdResult {
  int theta_star = 1;
  std::vector<double> eta_by_theta;              ///< generic evaluation, theta = 1..m+1
  std::vector<double> eta_closed_form_by_theta;  ///< threshold product form
  double closed_form_gap = 0.0;                  ///< max |generic - closed form|
  ConditionTerm below;   ///< G^{d_{t-1}}(n,t-1) + c <= 0
  ConditionTerm at;      ///< G^{d_t}(n,t) + c >= 0
  ConditionTerm above;   ///< G^{d_{t+1}}(n,t+1) + c >= 0
  /// G^{d_{t+1}}(n,t) + c >= 0: the comparison of d_t with d_{t+1}
  /// actually bounds this factor, at level t rather than t+1.
  ConditionTerm above_same_level;
  double tolerance = 1e-9;

  [[nodiscard]] bool triple_holds() const { return below.holds && at.holds && above.holds; }
};

/// Product-form profit of the threshold policy d_theta.
double threshold_closed_form_eta(const ModelParams& params, int theta);

ThresholdResult threshold_scan(const ModelParams& params);

struct MonotonicityReport {
  int level = 0;
  Policy base;
  std::vector<double> eta;   ///< eta at d_{n,j} = 0..m
  double expected_slope = 0.0;  ///< -pi(n,j) (P2W - P2S) C1 on {j..m}
  double linearity_residual = 0.0;
  enum class Regime { high, low, between, unknown } regime = Regime::unknown;
  bool linear_ok = false;
  bool monotone_ok = false;
  int argmax = 0;
  std::vector<std::string> violations;
};

/// Sweeps d_{n,j} over {0..m} with the other coordinates of `base` fixed.
/// Without `prices` only the linear part and plain monotonicity on {0..j}
/// are checked.
MonotonicityReport verify_monotonicity(const ModelParams& params, const Policy& base, int j,
                                       const std::optional<CriticalPrices>& prices);

struct SweepRow {
  double price = 0.0;
  Policy best_policy;
  double eta = 0.0;
  std::vector<double> crit_prices;  ///< per-level critical prices of the best policy
  bool at_or_above_high = false;
  bool at_or_below_low = false;
};

struct SweepResult {
  CriticalPrices prices;
  std::vector<SweepRow> rows;
};

/// Re-optimises at each grid price. The best profit must be non-decreasing
/// in R; a drop beyond 1e-9 max(1, |eta|) raises NumericalError.
SweepResult price_sweep(const ModelParams& params, const std::vector<double>& grid,
                        PolicySpaceKind space, bool allow_large = false);

CsvTable ranking_csv(const OptimizationResult& result);
CsvTable threshold_csv(const ThresholdResult& result);
CsvTable monotonicity_csv(const MonotonicityReport& report);
CsvTable sweep_csv(const SweepResult& result, int m);

}  // namespace eedc
