#include "eedc/chain.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "eedc/error.hpp"

namespace eedc {

double service_rate(const ModelParams& params, const Policy& d, int j) {
  if (j < 1 || j > params.m || j > d.m()) {
    throw RangeError("service_rate: level " + std::to_string(j) + " outside 1.." +
                     std::to_string(params.m));
  }
  return params.n * params.mu1 + std::min(d[j], j) * params.mu2;
}

Generator build_generator(const ModelParams& params, const Policy& d) {
  require_valid(params);
  require_valid_policy(params, d);
  const StateSpace states(params.n, params.m);
  const std::size_t size = states.size();
  Generator gen{states, DenseMatrix(size, size), std::vector<double>(size, 0.0),
                std::vector<double>(size, 0.0)};

  for (std::size_t k = 0; k + 1 < size; ++k) gen.birth[k] = params.lambda;
  for (std::size_t k = 1; k < size; ++k) {
    const State s = states.state(k);
    gen.death[k] = s.j == 0 ? s.i * params.mu1 : service_rate(params, d, s.j);
  }
  for (std::size_t k = 0; k < size; ++k) {
    if (k + 1 < size) gen.matrix(k, k + 1) = gen.birth[k];
    if (k > 0) gen.matrix(k, k - 1) = gen.death[k];
    gen.matrix(k, k) = -(gen.birth[k] + gen.death[k]);
  }
  return gen;
}

ChainSolution stationary_closed_form(const ModelParams& params, const Policy& d) {
  const Generator gen = build_generator(params, d);
  const std::size_t size = gen.states.size();
  ChainSolution sol;
  sol.xi.assign(size, 0.0);
  sol.xi[0] = 1.0;
  constexpr double kRescaleAbove = 1e250;
  for (std::size_t k = 1; k < size; ++k) {
    sol.xi[k] = sol.xi[k - 1] * (gen.birth[k - 1] / gen.death[k]);
    if (sol.xi[k] > kRescaleAbove) {
      const double s = 1.0 / sol.xi[k];
      for (std::size_t q = 0; q <= k; ++q) sol.xi[q] *= s;
    }
  }
  sol.b = 0.0;
  for (const double x : sol.xi) sol.b += x;
  sol.pi.resize(size);
  for (std::size_t k = 0; k < size; ++k) sol.pi[k] = sol.xi[k] / sol.b;
  return sol;
}

ChainSolution stationary_numeric(const Generator& gen, int replaced_row) {
  const auto size = static_cast<Eigen::Index>(gen.matrix.rows());
  const Eigen::Index r = replaced_row < 0 ? size - 1 : replaced_row;
  if (r >= size) throw RangeError("replaced balance row out of range");

  // Columns of B are the balance equations pi B = 0; transpose to rows.
  Eigen::MatrixXd a(size, size);
  for (Eigen::Index i = 0; i < size; ++i) {
    for (Eigen::Index k = 0; k < size; ++k) {
      a(i, k) = gen.matrix(static_cast<std::size_t>(k), static_cast<std::size_t>(i));
    }
  }
  a.row(r).setOnes();
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(size);
  rhs(r) = 1.0;

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
  if (!lu.isInvertible()) throw NumericalError("balance system is singular");
  const Eigen::VectorXd x = lu.solve(rhs);

  ChainSolution sol;
  sol.pi.assign(x.data(), x.data() + size);
  // Entries far out in the tail come back with absolute, not relative,
  // accuracy, so only a clearly negative or non-finite entry is an error.
  for (const double p : sol.pi) {
    if (!std::isfinite(p) || p < -1e-12) {
      throw NumericalError("numeric stationary vector has a negative entry");
    }
  }
  sol.xi = sol.pi;
  sol.b = 1.0;
  return sol;
}

CsvTable generator_csv(const Generator& gen) {
  std::vector<std::string> header{"index", "i", "j"};
  const std::size_t size = gen.states.size();
  for (std::size_t k = 0; k < size; ++k) header.push_back("b" + std::to_string(k));
  CsvTable table(std::move(header));
  for (std::size_t k = 0; k < size; ++k) {
    const State s = gen.states.state(k);
    std::vector<std::string> row{std::to_string(k), std::to_string(s.i), std::to_string(s.j)};
    for (std::size_t c = 0; c < size; ++c) row.push_back(format_number(gen.matrix(k, c)));
    table.add_row(std::move(row));
  }
  return table;
}

CsvTable stationary_csv(const StateSpace& states, const ChainSolution& sol) {
  CsvTable table({"index", "i", "j", "pi"});
  for (std::size_t k = 0; k < states.size(); ++k) {
    const State s = states.state(k);
    table.add_row({std::to_string(k), std::to_string(s.i), std::to_string(s.j),
                   format_number(sol.pi[k])});
  }
  return table;
}

}  // namespace eedc
