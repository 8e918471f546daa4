#pragma once

#include <optional>
#include <string_view>
#include <vector>

#include "eedc/chain.hpp"
#include "eedc/csv.hpp"
#include "eedc/dense.hpp"
#include "eedc/model.hpp"
#include "eedc/reward.hpp"

namespace eedc {

/// The generator with its first row and column removed, together with
/// h = (f - eta e) without its first entry. Index k of the reduced system
/// is state index k + 1 of the full chain.
struct ReducedSystem {
  DenseMatrix b_reduced;
  std::vector<double> h;
  double mu1 = 0.0;  ///< the single rate that couples level 1 to the removed state
};

ReducedSystem reduce(const Generator& gen, const std::vector<double>& f, double eta);

/// UL-type factorisation (I - R_U) U_D (I - G_L) of the reduced generator.
/// Vectors are stored 0-based: u[k] is U_{k+1}, r[k] is R_{k+1} and
/// g[k] is G_{k+1}.
struct RGFactors {
  std::vector<double> u;
  std::vector<double> r;
  std::vector<double> g;
  std::vector<double> birth;  ///< upper diagonal of the reduced matrix
  std::vector<double> lower;  ///< lower diagonal A_2; lower[0] is the removed coupling mu1
  double span = 1.0;          ///< max |U_k| / min |U_k|
  bool ill_conditioned = false;
};

/// Spans of |U_k| above this raise the ill_conditioned flag.
inline constexpr double kConditionWarnSpan = 1e12;

/// The textbook recursion U_k = A_1 + lambda (-U_{k+1})^{-1} A_2 subtracts
/// nearly equal terms under heavy load. It is evaluated here through the
/// excess e_k = -U_k - A_2^(k), which obeys e_N = 0 and
/// e_k = birth_k e_{k+1} / (-U_{k+1}), so every step only adds positives.
RGFactors rg_factorize(const Generator& gen);

/// Same factors from the literal recursion, kept as a reference.
RGFactors rg_factorize_literal(const Generator& gen);

/// Rebuilds (I - R_U) U_D (I - G_L) as a dense matrix.
DenseMatrix reassemble(const RGFactors& factors);

/// Dense (-B_reduced)^{-1} = (I - G_L)^{-1} (-U_D)^{-1} (I - R_U)^{-1},
/// assembled row by row. All entries are positive.
DenseMatrix invert_reduced(const RGFactors& factors);

enum class PoissonMethod {
  rg_recursive,   ///< bidiagonal sweeps through the RG factors
  rg_matrix,      ///< explicit inverse times the right-hand side
  explicit_sums,  ///< nested X/Y product sums, state by state
  dense,          ///< fundamental-matrix solve with a dense LU
};

enum class Normalization { anchored, fundamental };

std::string_view to_string(PoissonMethod method);
PoissonMethod parse_poisson_method(std::string_view text);

struct PoissonOptions {
  PoissonMethod method = PoissonMethod::rg_recursive;
  Normalization normalization = Normalization::anchored;
  double anchor = 1.0;  ///< g(0,0) under anchored normalisation
  /// Evaluate (I - R_U)^{-1} h from whichever end of the chain carries the
  /// smaller probability mass. Off means the plain backward sums.
  bool stabilized = true;
};

struct PotentialSolution {
  std::vector<double> g;
  double eta = 0.0;
  double anchor = 1.0;  ///< the value of g(0,0)
  Normalization normalization = Normalization::anchored;
  PoissonMethod method = PoissonMethod::rg_recursive;
  std::optional<RGFactors> factors;
};

/// Solves B g = eta e - f for an arbitrary reward vector. `pi` must be the
/// stationary vector of `gen`; eta is taken as given.
PotentialSolution solve_poisson_reward(const Generator& gen, const std::vector<double>& pi,
                                       const std::vector<double>& f, double eta,
                                       const PoissonOptions& options = {});

/// Solves the Poisson equation for (params, d). Throws ConsistencyError
/// unless eta equals the average profit within 1e-12 max(1, |eta|).
PotentialSolution solve_poisson(const ModelParams& params, const Policy& d, double eta,
                                const PoissonOptions& options = {});

/// Convenience overload computing eta itself.
PotentialSolution solve_poisson(const ModelParams& params, const Policy& d,
                                const PoissonOptions& options = {});

/// Re-anchors so that pi g = eta, using the reduced-system formula
/// anchor = (eta - w phi0) / (pi(0,0) + mu1 w (-B_reduced)^{-1} e_1), where w
/// is pi without its first entry and phi0 the anchor-free part of g.
PotentialSolution normalize_fundamental(const PotentialSolution& sol,
                                        const ChainSolution& chain);

/// max_k |(B g)_k - (eta - f_k)|.
double poisson_residual(const Generator& gen, const std::vector<double>& g,
                        const std::vector<double>& f, double eta);

CsvTable potential_csv(const Generator& gen, const PotentialSolution& sol,
                       const std::vector<double>& f);

}  // namespace eedc
