#include "eedc/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "eedc/error.hpp"
#include "eedc/kernels.hpp"

namespace eedc {

ReducedSystem reduce(const Generator& gen, const std::vector<double>& f, double eta) {
  const std::size_t size = gen.states.size();
  if (f.size() != size) throw RangeError("reduce: reward length does not match the chain");
  ReducedSystem out{DenseMatrix(size - 1, size - 1), std::vector<double>(size - 1), gen.death[1]};
  for (std::size_t r = 1; r < size; ++r) {
    for (std::size_t c = 1; c < size; ++c) out.b_reduced(r - 1, c - 1) = gen.matrix(r, c);
    out.h[r - 1] = f[r] - eta;
  }
  return out;
}

namespace {

RGFactors reduced_diagonals(const Generator& gen) {
  const std::size_t size = gen.states.size();
  const std::size_t dim = size - 1;
  RGFactors fac;
  fac.birth.assign(dim, 0.0);
  fac.lower.assign(dim, 0.0);
  for (std::size_t k = 0; k < dim; ++k) {
    fac.birth[k] = k + 1 < dim ? gen.birth[k + 1] : 0.0;
    fac.lower[k] = gen.death[k + 1];
  }
  return fac;
}

void finish_factors(RGFactors& fac) {
  const std::size_t dim = fac.u.size();
  fac.r.assign(dim > 0 ? dim - 1 : 0, 0.0);
  fac.g.assign(dim, 0.0);
  double lo = std::fabs(fac.u[0]);
  double hi = lo;
  for (std::size_t k = 0; k < dim; ++k) {
    if (!(fac.u[k] < 0.0)) {
      throw NumericalError("RG factorisation broke down: U_" + std::to_string(k + 1) + " >= 0");
    }
    lo = std::min(lo, -fac.u[k]);
    hi = std::max(hi, -fac.u[k]);
    fac.g[k] = fac.lower[k] / -fac.u[k];
    if (k + 1 < dim) fac.r[k] = fac.birth[k] / -fac.u[k + 1];
  }
  fac.span = hi / lo;
  fac.ill_conditioned = fac.span > kConditionWarnSpan;
}

}  // namespace

RGFactors rg_factorize(const Generator& gen) {
  RGFactors fac = reduced_diagonals(gen);
  const std::size_t dim = fac.lower.size();
  fac.u.assign(dim, 0.0);
  double excess = 0.0;
  fac.u[dim - 1] = -fac.lower[dim - 1];
  for (std::size_t k = dim - 1; k-- > 0;) {
    excess = fac.birth[k] * excess / -fac.u[k + 1];
    fac.u[k] = -(fac.lower[k] + excess);
  }
  finish_factors(fac);
  return fac;
}

RGFactors rg_factorize_literal(const Generator& gen) {
  RGFactors fac = reduced_diagonals(gen);
  const std::size_t dim = fac.lower.size();
  fac.u.assign(dim, 0.0);
  fac.u[dim - 1] = gen.matrix(dim, dim);
  for (std::size_t k = dim - 1; k-- > 0;) {
    const double a1 = gen.matrix(k + 1, k + 1);
    fac.u[k] = a1 + fac.birth[k] * fac.lower[k + 1] / -fac.u[k + 1];
  }
  finish_factors(fac);
  return fac;
}

DenseMatrix reassemble(const RGFactors& fac) {
  const std::size_t dim = fac.u.size();
  DenseMatrix out(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    double diag = fac.u[k];
    if (k + 1 < dim) {
      diag += fac.r[k] * fac.u[k + 1] * fac.g[k + 1];
      out(k, k + 1) = -fac.r[k] * fac.u[k + 1];
    }
    out(k, k) = diag;
    if (k > 0) out(k, k - 1) = -fac.u[k] * fac.g[k];
  }
  return out;
}

DenseMatrix invert_reduced(const RGFactors& fac) {
  const std::size_t dim = fac.u.size();
  // Rows of (I - R_U)^{-1}: row k = e_k + R_k * row k+1, upper triangular.
  DenseMatrix upper(dim, dim);
  for (std::size_t k = dim; k-- > 0;) {
    auto row = upper.row(k);
    if (k + 1 < dim) kernels::scale(fac.r[k], upper.row(k + 1), row);
    row[k] = 1.0;
  }
  // (I - G_L) M = (-U_D)^{-1} (I - R_U)^{-1}, solved top to bottom.
  DenseMatrix inv(dim, dim);
  for (std::size_t k = 0; k < dim; ++k) {
    auto row = inv.row(k);
    kernels::scale(1.0 / -fac.u[k], upper.row(k), row);
    if (k > 0) kernels::axpy(fac.g[k], inv.row(k - 1), row);
  }
  return inv;
}

std::string_view to_string(PoissonMethod method) {
  switch (method) {
    case PoissonMethod::rg_recursive: return "rg";
    case PoissonMethod::rg_matrix: return "rg-matrix";
    case PoissonMethod::explicit_sums: return "explicit";
    case PoissonMethod::dense: return "dense";
  }
  return "unknown";
}

PoissonMethod parse_poisson_method(std::string_view text) {
  if (text == "rg") return PoissonMethod::rg_recursive;
  if (text == "rg-matrix") return PoissonMethod::rg_matrix;
  if (text == "explicit") return PoissonMethod::explicit_sums;
  if (text == "dense") return PoissonMethod::dense;
  throw ConfigError("unknown Poisson method '" + std::string(text) + "'");
}

namespace {

// Cumulative stationary mass of full-chain states 0..k, from the R-measure
// log products so that nothing overflows.
std::vector<double> head_mass(const Generator& gen, const RGFactors& fac) {
  const std::size_t size = gen.states.size();
  std::vector<double> logw(size, 0.0);
  for (std::size_t k = 0; k + 1 < size; ++k) {
    logw[k + 1] = logw[k] + std::log(gen.birth[k]) - std::log(-fac.u[k]);
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  std::vector<double> cum(size);
  double acc = 0.0;
  for (std::size_t k = 0; k < size; ++k) {
    acc += std::exp(logw[k] - top);
    cum[k] = acc;
  }
  for (double& c : cum) c /= acc;
  return cum;
}

// y = (I - R_U)^{-1} h. The backward sums are exact in exact arithmetic but
// cancel badly where most of the mass sits below level k. There the same
// entry equals -(1/pi_k) sum_{i<k} pi_i (f_i - eta), because pi (f - eta e)
// vanishes, and that form only accumulates the small head.
std::vector<double> upper_solve(const Generator& gen, const RGFactors& fac,
                                const std::vector<double>& h, double h0, bool stabilized) {
  const std::size_t dim = h.size();
  std::vector<double> y(dim);
  y[dim - 1] = h[dim - 1];
  for (std::size_t k = dim - 1; k-- > 0;) y[k] = h[k] + fac.r[k] * y[k + 1];
  if (!stabilized) return y;

  const std::vector<double> cum = head_mass(gen, fac);
  double head = -h0 * fac.lower[0] / gen.birth[0];
  for (std::size_t k = 0; k < dim; ++k) {
    if (k > 0) head = (head - h[k - 1]) * -fac.u[k] / fac.birth[k - 1];
    if (cum[k] > 0.5) break;
    y[k] = head;
  }
  return y;
}

std::vector<double> lower_sweep(const RGFactors& fac, const std::vector<double>& y,
                                 double anchor) {
  std::vector<double> phi(y.size());
  double prev = anchor;
  for (std::size_t k = 0; k < y.size(); ++k) {
    phi[k] = y[k] / -fac.u[k] + fac.g[k] * prev;
    prev = phi[k];
  }
  return phi;
}

// Brackets h_i + sum_j X_j^(i) h_{j+i-1} written out as product sums. In the
// stabilised variant the head-mass states use the equivalent sum over
// lower states, weighted by products of 1/R.
std::vector<double> explicit_brackets(const Generator& gen, const RGFactors& fac,
                                      const std::vector<double>& h, double h0,
                                      bool stabilized) {
  const std::size_t dim = h.size();
  std::vector<double> cum;
  if (stabilized) cum = head_mass(gen, fac);
  std::vector<double> bracket(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    if (stabilized && cum[i] <= 0.5) {
      // pi_t / pi_{i+1} for full states t = i .. 0, built downward.
      double sum = 0.0;
      double ratio = 1.0;
      for (std::size_t t = i + 1; t-- > 0;) {
        ratio *= -fac.u[t] / gen.birth[t];
        sum += ratio * (t == 0 ? h0 : h[t - 1]);
      }
      bracket[i] = -sum;
      continue;
    }
    double sum = h[i];
    double x = 1.0;
    for (std::size_t t = i + 1; t < dim; ++t) {
      x *= fac.r[t - 1];
      sum += x * h[t];
    }
    bracket[i] = sum;
  }
  return bracket;
}

std::vector<double> explicit_potentials(const RGFactors& fac, const std::vector<double>& bracket,
                                        double anchor) {
  const std::size_t dim = bracket.size();
  std::vector<double> phi(dim);
  double g_product = 1.0;
  for (std::size_t k = 0; k < dim; ++k) {
    g_product *= fac.g[k];
    double value = bracket[k] / -fac.u[k];
    double y = 1.0;
    for (std::size_t i = k; i-- > 0;) {
      y *= fac.g[i + 1];
      value += y * bracket[i] / -fac.u[i];
    }
    phi[k] = value + g_product * anchor;
  }
  return phi;
}

std::vector<double> dense_fundamental(const Generator& gen, const std::vector<double>& pi,
                                      const std::vector<double>& f) {
  const auto size = static_cast<Eigen::Index>(gen.states.size());
  Eigen::MatrixXd a(size, size);
  Eigen::VectorXd rhs(size);
  for (Eigen::Index r = 0; r < size; ++r) {
    for (Eigen::Index c = 0; c < size; ++c) {
      a(r, c) = -gen.matrix(static_cast<std::size_t>(r), static_cast<std::size_t>(c)) +
                pi[static_cast<std::size_t>(c)];
    }
    rhs(r) = f[static_cast<std::size_t>(r)];
  }
  const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
  const Eigen::VectorXd x = lu.solve(rhs);
  std::vector<double> g(x.data(), x.data() + size);
  for (const double v : g) {
    if (!std::isfinite(v)) throw NumericalError("fundamental-matrix solve produced a non-finite value");
  }
  return g;
}

PotentialSolution reanchor_fundamental(const PotentialSolution& sol, const std::vector<double>& pi) {
  PotentialSolution out = sol;
  // phi0 = phi - anchor e, since mu1 (-B_reduced)^{-1} e_1 = e.
  double w_phi0 = 0.0;
  double w_sum = 0.0;
  for (std::size_t k = 1; k < sol.g.size(); ++k) {
    w_phi0 += pi[k] * (sol.g[k] - sol.anchor);
    w_sum += pi[k];
  }
  const double anchor = (sol.eta - w_phi0) / (pi[0] + w_sum);
  out.g[0] = anchor;
  for (std::size_t k = 1; k < sol.g.size(); ++k) out.g[k] = sol.g[k] - sol.anchor + anchor;
  out.anchor = anchor;
  out.normalization = Normalization::fundamental;
  return out;
}

}  // namespace

PotentialSolution solve_poisson_reward(const Generator& gen, const std::vector<double>& pi,
                                       const std::vector<double>& f, double eta,
                                       const PoissonOptions& options) {
  const std::size_t size = gen.states.size();
  if (f.size() != size || pi.size() != size) {
    throw RangeError("solve_poisson: vector lengths do not match the chain");
  }
  PotentialSolution sol;
  sol.eta = eta;
  sol.method = options.method;
  sol.anchor = options.anchor;
  sol.g.assign(size, 0.0);
  sol.g[0] = options.anchor;

  std::vector<double> h(size - 1);
  for (std::size_t k = 1; k < size; ++k) h[k - 1] = f[k] - eta;
  const double h0 = f[0] - eta;

  std::vector<double> phi;
  if (options.method == PoissonMethod::dense) {
    const std::vector<double> g = dense_fundamental(gen, pi, f);
    phi.assign(g.begin() + 1, g.end());
    for (double& v : phi) v = v - g[0] + options.anchor;
  } else {
    RGFactors fac = rg_factorize(gen);
    switch (options.method) {
      case PoissonMethod::rg_recursive:
        phi = lower_sweep(fac, upper_solve(gen, fac, h, h0, options.stabilized), options.anchor);
        break;
      case PoissonMethod::explicit_sums:
        phi = explicit_potentials(fac, explicit_brackets(gen, fac, h, h0, options.stabilized),
                                  options.anchor);
        break;
      case PoissonMethod::rg_matrix: {
        const DenseMatrix inv = invert_reduced(fac);
        std::vector<double> rhs = h;
        rhs[0] += fac.lower[0] * options.anchor;
        phi.resize(h.size());
        for (std::size_t k = 0; k < h.size(); ++k) phi[k] = kernels::dot(inv.row(k), rhs);
        break;
      }
      case PoissonMethod::dense: break;
    }
    sol.factors = std::move(fac);
  }
  std::copy(phi.begin(), phi.end(), sol.g.begin() + 1);

  if (options.normalization == Normalization::fundamental) return reanchor_fundamental(sol, pi);
  return sol;
}

PotentialSolution solve_poisson(const ModelParams& params, const Policy& d, double eta,
                                const PoissonOptions& options) {
  const Generator gen = build_generator(params, d);
  const ChainSolution chain = stationary_closed_form(params, d);
  const RewardVector reward = build_reward(params, d);
  const double expected = average_profit(chain, reward);
  if (!(std::fabs(eta - expected) <= 1e-12 * std::max(1.0, std::fabs(expected)))) {
    throw ConsistencyError("eta " + format_number(eta) + " is not the average profit " +
                           format_number(expected) + " of the policy");
  }
  return solve_poisson_reward(gen, chain.pi, reward.f, eta, options);
}

PotentialSolution solve_poisson(const ModelParams& params, const Policy& d,
                                const PoissonOptions& options) {
  return solve_poisson(params, d, evaluate_eta(params, d), options);
}

PotentialSolution normalize_fundamental(const PotentialSolution& sol, const ChainSolution& chain) {
  if (chain.pi.size() != sol.g.size()) throw RangeError("normalize_fundamental: dimension mismatch");
  return reanchor_fundamental(sol, chain.pi);
}

double poisson_residual(const Generator& gen, const std::vector<double>& g,
                        const std::vector<double>& f, double eta) {
  const std::size_t size = gen.states.size();
  std::vector<double> lo(size, 0.0), di(size), up(size, 0.0), bg(size), target(size);
  for (std::size_t k = 0; k < size; ++k) {
    di[k] = gen.matrix(k, k);
    if (k > 0) lo[k] = gen.matrix(k, k - 1);
    if (k + 1 < size) up[k] = gen.matrix(k, k + 1);
    target[k] = eta - f[k];
  }
  kernels::active().tridiag(lo.data(), di.data(), up.data(), g.data(), bg.data(), size);
  return kernels::max_abs_diff(bg, target);
}

CsvTable potential_csv(const Generator& gen, const PotentialSolution& sol,
                       const std::vector<double>& f) {
  const std::size_t size = gen.states.size();
  CsvTable table({"index", "i", "j", "g", "residual"});
  for (std::size_t k = 0; k < size; ++k) {
    double bg = gen.matrix(k, k) * sol.g[k];
    if (k > 0) bg += gen.matrix(k, k - 1) * sol.g[k - 1];
    if (k + 1 < size) bg += gen.matrix(k, k + 1) * sol.g[k + 1];
    const State s = gen.states.state(k);
    table.add_row({std::to_string(k), std::to_string(s.i), std::to_string(s.j),
                   format_number(sol.g[k]), format_number(bg - (sol.eta - f[k]))});
  }
  return table;
}

}  // namespace eedc
