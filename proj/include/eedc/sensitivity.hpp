#pragma once

#include <vector>

#include "eedc/csv.hpp"
#include "eedc/model.hpp"
#include "eedc/potential.hpp"

namespace eedc {

/// c = R - (P2W - P2S) C1 / mu2.
double transfer_constant(const ModelParams& params);

/// G(n,j) + c as an affine function of the price: intercept + slope * R.
struct PriceLine {
  double intercept = 0.0;
  double slope = 0.0;

  [[nodiscard]] double at(double price) const { return intercept + slope * price; }
};

struct SensitivityReport {
  std::vector<double> prf;          ///< G(n,j) = g(n,j-1) - g(n,j), j = 1..m
  double c = 0.0;
  std::vector<double> prf_plus_c;   ///< G(n,j) + c
  std::vector<double> crit_prices;  ///< root of G(n,j) + c in R; NaN when degenerate
  std::vector<bool> degenerate;     ///< zero R-slope, no crossing exists
  std::vector<int> signs;           ///< sign of G(n,j) + c in {-1, 0, 1}
};

/// Realisation factors G(n,j) from an already solved potential vector.
std::vector<double> realization_factors(const ModelParams& params, const std::vector<double>& g);

/// g is affine in R because f = R a - b and eta = R D - F. Two Poisson
/// solves, at R = 0 and R = 1, give every line exactly.
std::vector<PriceLine> prf_plus_c_lines(const ModelParams& params, const Policy& d);

SensitivityReport perturbation_factors(const ModelParams& params, const Policy& d);

/// Throws DegeneratePriceError when G(n,j) + c does not depend on R.
double critical_price_state(const ModelParams& params, const Policy& d, int j);

struct CriticalPrices {
  double r_high = 0.0;  ///< max(0, all per-state critical prices)
  double r_low = 0.0;   ///< min of all per-state critical prices
  PolicySpaceKind search_space = PolicySpaceKind::full;
  bool exact = false;   ///< true when the full policy set was enumerated
  std::uint64_t policies = 0;
  std::uint64_t degenerate = 0;  ///< (policy, j) pairs skipped for zero slope
};

/// Exact global prices need the full space, gated at this m.
inline constexpr int kCriticalPriceMaxM = 6;

CriticalPrices critical_prices_global(const ModelParams& params, PolicySpaceKind space,
                                      bool allow_large = false);

/// pi^{d'} [(B^{d'} - B^{d}) g^{d} + (f^{d'} - f^{d})].
double performance_difference(const ModelParams& params, const Policy& d, const Policy& d_prime);

/// Throws RangeError unless d and d' agree everywhere except possibly at
/// level j.
void require_single_change(const Policy& d, const Policy& d_prime, int j);

/// mu2 pi^{d'}(n,j) (d'_j - d_j) [G^{d}(n,j) + c], valid when both actions
/// at level j lie in {0..j}; throws RangeError otherwise.
double single_change_difference(const ModelParams& params, const Policy& d, const Policy& d_prime,
                                int j);

struct SignConservation {
  int level = 0;
  double prf_ratio = 0.0;  ///< [G^{d}(n,j)+c] / [G^{d'}(n,j)+c]
  double pi_ratio = 0.0;   ///< pi^{d}(n,j) / pi^{d'}(n,j)
  bool degenerate = false; ///< a numerator magnitude fell below 1e-12
  bool holds = false;      ///< ratios agree to 1e-9 relative and are positive
};

SignConservation sign_conservation_check(const ModelParams& params, const Policy& d,
                                         const Policy& d_prime, int j);

CsvTable sensitivity_csv(const SensitivityReport& report);

}  // namespace eedc
