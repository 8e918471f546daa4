#pragma once

#include <cstdint>
#include <vector>

#include "eedc/csv.hpp"
#include "eedc/model.hpp"

namespace eedc {

enum class HorizonUnit { events, time };

struct SimConfig {
  HorizonUnit unit = HorizonUnit::events;
  double horizon = 1e6;          ///< total events or total simulated time
  double warmup = 0.1;           ///< discarded prefix, same unit as horizon
  bool warmup_is_fraction = true;  ///< warmup is a fraction of the horizon
  int replications = 1;
  std::uint64_t seed = 1;
  int batch_count = 20;          ///< batches per replication for the CI
  bool trace = false;            ///< record every post-warmup event
};

enum class EventKind { arrival, loss, completion_g1, transfer, completion_g2 };

struct TraceEvent {
  double time = 0.0;
  EventKind kind = EventKind::arrival;
  int from = 0;  ///< state index before the event
  int to = 0;    ///< state index after the event
};

/// Post-warmup tallies of one batch, one replication or the pooled run.
struct SimTally {
  std::uint64_t events = 0;
  std::uint64_t arrivals = 0;
  std::uint64_t completions_g1 = 0;  ///< includes the completions that trigger a transfer
  std::uint64_t completions_g2 = 0;
  std::uint64_t transfers = 0;
  std::uint64_t losses = 0;
  double time = 0.0;
  double energy_cost = 0.0;   ///< integral of the energy cost rate
  double holding_cost = 0.0;  ///< integral of the holding cost rate
  std::vector<double> occupancy;  ///< time spent in each state

  void add(const SimTally& other);
};

/// Average profit implied by a tally:
/// (R completions - energy - holding - C3 transfers - C4 losses) / time.
double tally_profit(const ModelParams& params, const SimTally& tally);

struct SimResult {
  double eta_hat = 0.0;
  double ci_half_width = 0.0;  ///< 95% Student-t over all batches; NaN with fewer than 2
  std::vector<double> pi_hat;
  SimTally total;
  std::vector<SimTally> replications;
  std::vector<std::vector<SimTally>> batches;  ///< [replication][batch]
  std::vector<std::vector<TraceEvent>> traces;  ///< [replication], when requested
};

/// Seed of replication `index`, derived by splitmix64 so that streams are
/// reproducible on every platform.
std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t index);

/// Validates the configuration; throws ConfigError.
void require_valid(const SimConfig& cfg);

SimResult simulate(const ModelParams& params, const Policy& d, const SimConfig& cfg);

/// Time-weighted state occupancy of the pooled run, normalised to sum 1.
std::vector<double> empirical_distribution(const SimResult& result);

CsvTable sim_csv(const ModelParams& params, const SimResult& result);
CsvTable trace_csv(const SimResult& result);

}  // namespace eedc
