#include "eedc/sim.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <limits>
#include <random>

#include "eedc/error.hpp"
#include "eedc/parallel.hpp"

namespace eedc {

void SimTally::add(const SimTally& o) {
  events += o.events;
  arrivals += o.arrivals;
  completions_g1 += o.completions_g1;
  completions_g2 += o.completions_g2;
  transfers += o.transfers;
  losses += o.losses;
  time += o.time;
  energy_cost += o.energy_cost;
  holding_cost += o.holding_cost;
  if (occupancy.size() < o.occupancy.size()) occupancy.resize(o.occupancy.size(), 0.0);
  for (std::size_t k = 0; k < o.occupancy.size(); ++k) occupancy[k] += o.occupancy[k];
}

double tally_profit(const ModelParams& p, const SimTally& t) {
  const double completions = static_cast<double>(t.completions_g1 + t.completions_g2);
  const double money = p.price * completions - t.energy_cost - t.holding_cost -
                       p.c_transfer * static_cast<double>(t.transfers) -
                       p.c_loss * static_cast<double>(t.losses);
  return money / t.time;
}

std::uint64_t replication_seed(std::uint64_t seed, std::uint64_t index) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

void require_valid(const SimConfig& cfg) {
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw ConfigError("horizon must be > 0");
  if (cfg.unit == HorizonUnit::events && cfg.horizon != std::floor(cfg.horizon)) {
    throw ConfigError("event horizon must be an integer");
  }
  const double warmup = cfg.warmup_is_fraction ? cfg.warmup * cfg.horizon : cfg.warmup;
  if (!(warmup >= 0.0)) throw ConfigError("warmup must be >= 0");
  if (!(cfg.horizon > warmup)) throw ConfigError("horizon must exceed warmup");
  if (cfg.replications < 1) throw ConfigError("replications must be >= 1");
  if (cfg.batch_count < 1) throw ConfigError("batch_count must be >= 1");
}

namespace {

struct Rates {
  int n = 0;
  int size = 0;
  double lambda = 0.0;
  std::vector<double> g1, g2, total, energy, holding;
};

Rates build_rates(const ModelParams& p, const Policy& d) {
  const StateSpace states(p.n, p.m);
  Rates r;
  r.n = p.n;
  r.size = static_cast<int>(states.size());
  r.lambda = p.lambda;
  for (std::size_t k = 0; k < states.size(); ++k) {
    const State s = states.state(k);
    const int on = d.action_at(s, p.n);
    r.g1.push_back(s.i * p.mu1);
    r.g2.push_back(std::min(on, s.j) * p.mu2);
    r.total.push_back(r.lambda + r.g1.back() + r.g2.back());
    r.energy.push_back((p.n * p.p1_work + on * p.p2_work + (p.m - on) * p.p2_sleep) * p.c_energy);
    r.holding.push_back(s.i * p.c_hold_g1 + s.j * p.c_hold_g2);
  }
  return r;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}
  // 53 random bits in [0, 1); independent of the standard library's
  // distribution implementations.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

struct RepOutput {
  SimTally total;
  std::vector<SimTally> batches;
  std::vector<TraceEvent> trace;
};

class Replication {
 public:
  Replication(const Rates& rates, const SimConfig& cfg, std::uint64_t seed)
      : rates_(rates), cfg_(cfg), rng_(seed) {
    warmup_ = cfg.warmup_is_fraction ? cfg.warmup * cfg.horizon : cfg.warmup;
    out_.batches.assign(static_cast<std::size_t>(cfg.batch_count), SimTally{});
    for (auto& b : out_.batches) b.occupancy.assign(static_cast<std::size_t>(rates.size), 0.0);
    for (int b = 1; b <= cfg.batch_count; ++b) {
      bounds_.push_back(warmup_ + (cfg.horizon - warmup_) * b / cfg.batch_count);
    }
  }

  RepOutput run() {
    if (cfg_.unit == HorizonUnit::events) {
      run_events();
    } else {
      run_time();
    }
    for (const auto& b : out_.batches) out_.total.add(b);
    return std::move(out_);
  }

 private:
  int batch_at(double clock) const {
    int b = 0;
    while (b + 1 < cfg_.batch_count && clock >= bounds_[static_cast<std::size_t>(b)]) ++b;
    return b;
  }

  void dwell(SimTally& t, double dt) {
    t.time += dt;
    t.occupancy[static_cast<std::size_t>(state_)] += dt;
    t.energy_cost += rates_.energy[static_cast<std::size_t>(state_)] * dt;
    t.holding_cost += rates_.holding[static_cast<std::size_t>(state_)] * dt;
  }

  // Draws the next event and applies it; tallies into `t` when non-null.
  void fire(SimTally* t) {
    const auto k = static_cast<std::size_t>(state_);
    const double u = rng_.uniform() * rates_.total[k];
    const int from = state_;
    EventKind kind;
    if (u < rates_.lambda) {
      if (state_ + 1 < rates_.size) {
        kind = EventKind::arrival;
        ++state_;
      } else {
        kind = EventKind::loss;
      }
    } else if (u < rates_.lambda + rates_.g1[k]) {
      // With Group 2 non-empty the freed Group-1 server takes over a
      // Group-2 job, so the chain leaves (n, j) for (n, j - 1) either way.
      kind = state_ > rates_.n ? EventKind::transfer : EventKind::completion_g1;
      --state_;
    } else {
      kind = EventKind::completion_g2;
      --state_;
    }
    if (t == nullptr) return;
    ++t->events;
    switch (kind) {
      case EventKind::arrival: ++t->arrivals; break;
      case EventKind::loss: ++t->arrivals; ++t->losses; break;
      case EventKind::completion_g1: ++t->completions_g1; break;
      case EventKind::transfer: ++t->completions_g1; ++t->transfers; break;
      case EventKind::completion_g2: ++t->completions_g2; break;
    }
    if (cfg_.trace) out_.trace.push_back({clock_, kind, from, state_});
  }

  void run_events() {
    const auto horizon = static_cast<std::uint64_t>(cfg_.horizon);
    const auto warm = static_cast<std::uint64_t>(std::ceil(warmup_));
    const std::uint64_t measured = horizon - warm;
    for (std::uint64_t e = 0; e < horizon; ++e) {
      const double dt = rng_.exponential(rates_.total[static_cast<std::size_t>(state_)]);
      clock_ += dt;
      SimTally* t = nullptr;
      if (e >= warm) {
        const std::uint64_t b = (e - warm) * static_cast<std::uint64_t>(cfg_.batch_count) / measured;
        t = &out_.batches[static_cast<std::size_t>(b)];
        dwell(*t, dt);
      }
      fire(t);
    }
  }

  void accrue(double from, double to) {
    double a = std::max(from, warmup_);
    while (a < to) {
      const int b = batch_at(a);
      const double end = b + 1 == cfg_.batch_count ? to : std::min(to, bounds_[static_cast<std::size_t>(b)]);
      dwell(out_.batches[static_cast<std::size_t>(b)], end - a);
      a = end;
    }
  }

  void run_time() {
    while (true) {
      const double dt = rng_.exponential(rates_.total[static_cast<std::size_t>(state_)]);
      const double next = clock_ + dt;
      accrue(clock_, std::min(next, cfg_.horizon));
      if (next >= cfg_.horizon) break;
      clock_ = next;
      fire(clock_ >= warmup_ ? &out_.batches[static_cast<std::size_t>(batch_at(clock_))] : nullptr);
    }
  }

  const Rates& rates_;
  const SimConfig& cfg_;
  Stream rng_;
  double warmup_ = 0.0;
  std::vector<double> bounds_;
  int state_ = 0;
  double clock_ = 0.0;
  RepOutput out_;
};

}  // namespace

SimResult simulate(const ModelParams& params, const Policy& d, const SimConfig& cfg) {
  require_valid(params);
  require_valid_policy(params, d);
  require_valid(cfg);
  const Rates rates = build_rates(params, d);

  std::vector<RepOutput> reps(static_cast<std::size_t>(cfg.replications));
  parallel_chunks(reps.size(), [&](std::size_t, std::uint64_t b, std::uint64_t e) {
    for (std::uint64_t r = b; r < e; ++r) {
      reps[r] = Replication(rates, cfg, replication_seed(cfg.seed, r)).run();
    }
  });

  SimResult res;
  res.total.occupancy.assign(static_cast<std::size_t>(rates.size), 0.0);
  std::vector<double> batch_eta;
  for (auto& rep : reps) {
    res.total.add(rep.total);
    for (const auto& b : rep.batches) {
      if (b.time > 0.0) batch_eta.push_back(tally_profit(params, b));
    }
    res.replications.push_back(std::move(rep.total));
    res.batches.push_back(std::move(rep.batches));
    if (cfg.trace) res.traces.push_back(std::move(rep.trace));
  }
  if (!(res.total.time > 0.0)) throw ConfigError("no simulated time after warmup");
  res.eta_hat = tally_profit(params, res.total);
  res.pi_hat = empirical_distribution(res);

  res.ci_half_width = std::numeric_limits<double>::quiet_NaN();
  if (batch_eta.size() >= 2) {
    const double count = static_cast<double>(batch_eta.size());
    double mean = 0.0;
    for (const double v : batch_eta) mean += v;
    mean /= count;
    double ss = 0.0;
    for (const double v : batch_eta) ss += (v - mean) * (v - mean);
    const boost::math::students_t dist(count - 1.0);
    res.ci_half_width = boost::math::quantile(dist, 0.975) * std::sqrt(ss / (count - 1.0) / count);
  }
  return res;
}

std::vector<double> empirical_distribution(const SimResult& result) {
  std::vector<double> pi = result.total.occupancy;
  double sum = 0.0;
  for (const double v : pi) sum += v;
  if (!(sum > 0.0)) throw ConfigError("empirical distribution needs positive simulated time");
  for (double& v : pi) v /= sum;
  return pi;
}

CsvTable sim_csv(const ModelParams& params, const SimResult& result) {
  const std::size_t size = result.total.occupancy.size();
  std::vector<std::string> header{"replication", "batch", "eta", "time"};
  for (std::size_t k = 0; k < size; ++k) header.push_back("occ_" + std::to_string(k));
  CsvTable table(std::move(header));
  for (std::size_t r = 0; r < result.batches.size(); ++r) {
    for (std::size_t b = 0; b < result.batches[r].size(); ++b) {
      const SimTally& t = result.batches[r][b];
      std::vector<std::string> row{std::to_string(r), std::to_string(b),
                                   t.time > 0.0 ? format_number(tally_profit(params, t)) : "",
                                   format_number(t.time)};
      for (std::size_t k = 0; k < size; ++k) {
        row.push_back(t.time > 0.0 ? format_number(t.occupancy[k] / t.time) : "");
      }
      table.add_row(std::move(row));
    }
  }
  return table;
}

CsvTable trace_csv(const SimResult& result) {
  static const char* const kNames[] = {"arrival", "loss", "completion_g1", "transfer", "completion_g2"};
  CsvTable table({"replication", "time", "event", "from", "to"});
  for (std::size_t r = 0; r < result.traces.size(); ++r) {
    for (const auto& ev : result.traces[r]) {
      table.add_row({std::to_string(r), format_number(ev.time), kNames[static_cast<int>(ev.kind)],
                     std::to_string(ev.from), std::to_string(ev.to)});
    }
  }
  return table;
}

}  // namespace eedc
