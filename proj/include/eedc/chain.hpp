#pragma once

#include <vector>

#include "eedc/csv.hpp"
#include "eedc/dense.hpp"
#include "eedc/model.hpp"

namespace eedc {

/// Tridiagonal generator of the job-count chain under a fixed policy.
/// birth[k] is the rate k -> k+1 (k = 0..N-1) and death[k] the rate
/// k -> k-1 (k = 1..N, death[0] = 0), with N = n + m.
struct Generator {
  StateSpace states;
  DenseMatrix matrix;
  std::vector<double> birth;
  std::vector<double> death;
};

/// Stationary solution. xi holds the unnormalised weights; they equal the
/// textbook products unless a rescale was needed to stay in range, in
/// which case they are scaled by a common positive factor and b follows.
struct ChainSolution {
  std::vector<double> pi;
  std::vector<double> xi;
  double b = 0.0;
};

/// nu(d_{n,j}) = n mu1 + min(d_{n,j}, j) mu2 for level j in 1..m.
double service_rate(const ModelParams& params, const Policy& d, int j);

Generator build_generator(const ModelParams& params, const Policy& d);

/// Product-form stationary vector built from the birth/death ratios.
ChainSolution stationary_closed_form(const ModelParams& params, const Policy& d);

/// Dense oracle: solves pi B = 0 with balance equation `replaced_row`
/// swapped for the normalisation. Negative means the last equation.
ChainSolution stationary_numeric(const Generator& gen, int replaced_row = -1);

CsvTable generator_csv(const Generator& gen);
CsvTable stationary_csv(const StateSpace& states, const ChainSolution& sol);

}  // namespace eedc
