#pragma once

// Shared fixtures for the unit and acceptance binaries: the worked
// one-server-per-group instance and seeded random instances.

#include <cstdint>
#include <random>

#include "eedc/model.hpp"

namespace eedc::testing {

inline ModelParams micro_instance() {
  ModelParams p;
  p.lambda = 1.0;
  p.mu1 = 1.0;
  p.mu2 = 1.0;
  p.n = 1;
  p.m = 1;
  p.p1_work = 2.0;
  p.p2_work = 1.0;
  p.p2_sleep = 0.5;
  p.c_energy = 1.0;
  p.c_hold_g1 = 0.5;
  p.c_hold_g2 = 1.0;
  p.c_transfer = 0.2;
  p.c_loss = 5.0;
  p.price = 10.0;
  return p;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform(double lo, double hi) {
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
  }
  int integer(int lo, int hi) {
    return lo + static_cast<int>(engine_() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::mt19937_64 engine_;
};

struct InstanceShape {
  int max_n = 20;
  int max_m = 20;
  double rate_lo = 0.1;
  double rate_hi = 10.0;
};

inline ModelParams random_instance(Rng& rng, const InstanceShape& shape = {}) {
  ModelParams p;
  p.n = rng.integer(1, shape.max_n);
  p.m = rng.integer(1, shape.max_m);
  p.lambda = rng.uniform(shape.rate_lo, shape.rate_hi);
  p.mu1 = rng.uniform(shape.rate_lo, shape.rate_hi);
  p.mu2 = rng.uniform(shape.rate_lo, shape.rate_hi);
  p.p1_work = rng.uniform(0.5, 3.0);
  p.p2_work = rng.uniform(1.0, 4.0);
  p.p2_sleep = rng.uniform(0.05, 0.9) * p.p2_work;
  p.c_energy = rng.uniform(0.0, 2.0);
  p.c_hold_g1 = rng.uniform(0.0, 1.0);
  p.c_hold_g2 = rng.uniform(0.0, 1.5);
  p.c_transfer = rng.uniform(0.0, 1.0);
  p.c_loss = rng.uniform(0.0, 5.0);
  p.price = rng.uniform(0.0, 20.0);
  return p;
}

/// Instance with a wide work/sleep energy gap and light holding and loss
/// costs, so that keeping Group 2 asleep wins at low prices.
inline ModelParams energy_heavy_instance(Rng& rng, int max_n, int max_m) {
  ModelParams p = random_instance(rng, {max_n, max_m, 0.5, 5.0});
  p.p2_work = rng.uniform(5.0, 10.0);
  p.p2_sleep = rng.uniform(0.1, 0.5);
  p.c_energy = rng.uniform(2.0, 5.0);
  p.c_hold_g1 = rng.uniform(0.0, 0.1);
  p.c_hold_g2 = rng.uniform(0.0, 0.1);
  p.c_transfer = rng.uniform(0.0, 0.1);
  p.c_loss = rng.uniform(0.0, 0.1);
  return p;
}

/// Uniform draw from {0..m}^m.
inline Policy random_policy(Rng& rng, int m) {
  std::vector<int> a;
  for (int j = 1; j <= m; ++j) a.push_back(rng.integer(0, m));
  return Policy(std::move(a));
}

/// Uniform draw from {0..1} x {0..2} x ... x {0..m}.
inline Policy random_reduced_policy(Rng& rng, int m) {
  std::vector<int> a;
  for (int j = 1; j <= m; ++j) a.push_back(rng.integer(0, j));
  return Policy(std::move(a));
}

}  // namespace eedc::testing
