#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <cmath>
#include <functional>
#include <ostream>

#include "eedc/chain.hpp"
#include "eedc/error.hpp"
#include "eedc/optimize.hpp"
#include "eedc/parallel.hpp"
#include "eedc/potential.hpp"
#include "eedc/reward.hpp"
#include "eedc/sensitivity.hpp"
#include "eedc/sim.hpp"

namespace eedc::cli {

namespace {

struct Common {
  std::string config;
  std::string output;
  std::string policy;
  unsigned threads = 0;
};

// Prints a CSV table as aligned columns for the terminal.
void print_table(std::ostream& out, const CsvTable& table) {
  std::vector<std::size_t> width(table.header().size(), 0);
  auto widen = [&](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) width[k] = std::max(width[k], row[k].size());
  };
  widen(table.header());
  for (const auto& r : table.rows()) widen(r);
  auto emit = [&](const std::vector<std::string>& row) {
    for (std::size_t k = 0; k < row.size(); ++k) {
      if (k > 0) out << "  ";
      out << row[k] << std::string(width[k] - row[k].size(), ' ');
    }
    out << '\n';
  };
  emit(table.header());
  for (const auto& r : table.rows()) emit(r);
}

class Session {
 public:
  Session(const Common& common, std::ostream& out) : common_(common), out_(out) {}

  void load() {
    params_ = load_model_config(common_.config);
    require_valid(params_);
  }
  [[nodiscard]] const ModelParams& params() const { return params_; }

  [[nodiscard]] Policy policy() const {
    if (common_.policy.empty()) return threshold_policy(params_.m, 1);
    Policy d = parse_policy(common_.policy);
    require_valid_policy(params_, d);
    return d;
  }

  // Prints the table and writes the CSV file when --output was given.
  void emit(CsvTable table, const std::string& command) const {
    print_table(out_, table);
    if (!common_.output.empty()) {
      table.set_metadata(model_hash(params_), command);
      table.save(common_.output);
    }
  }

  std::ostream& out() const { return out_; }

 private:
  const Common& common_;
  std::ostream& out_;
  ModelParams params_;
};

void add_common(CLI::App* sub, Common& common, bool with_policy) {
  sub->add_option("-c,--config", common.config, "model configuration file (key=value lines)")
      ->required();
  sub->add_option("-o,--output", common.output, "write the result as CSV to this path");
  sub->add_option("--threads", common.threads, "worker threads (0 = all hardware threads)");
  if (with_policy) {
    sub->add_option("-p,--policy", common.policy,
                    "comma-separated actions d_{n,1..m} (default 1,2,...,m)");
  }
}

PolicySpaceKind space_from(const std::string& text) { return parse_policy_space(text); }

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Exact analysis and optimisation of a two-group energy-efficient data center"};
  app.name("eedc");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  Common common;
  Session session(common, out);
  std::function<int()> action;

  // validate
  auto* validate_cmd = app.add_subcommand("validate", "check a configuration and report violations");
  validate_cmd->add_option("-c,--config", common.config, "model configuration file")->required();
  validate_cmd->callback([&] {
    action = [&] {
      const ModelParams p = load_model_config(common.config);
      const ValidationReport rep = validate(p);
      for (const auto& w : rep.warnings) out << "warning: " << w << '\n';
      for (const auto& e : rep.errors) out << "error: " << e << '\n';
      if (!rep.ok()) {
        err << "eedc: invalid configuration: " << rep.errors.front() << '\n';
        return int{kConfig};
      }
      out << "ok\n";
      return int{kOk};
    };
  });

  // stationary
  bool numeric = false;
  auto* stationary_cmd = app.add_subcommand("stationary", "stationary distribution of a policy");
  add_common(stationary_cmd, common, true);
  stationary_cmd->add_flag("--numeric", numeric, "use the dense linear-solve oracle");
  stationary_cmd->callback([&] {
    action = [&] {
      const Policy d = session.policy();
      const Generator gen = build_generator(session.params(), d);
      const ChainSolution sol =
          numeric ? stationary_numeric(gen) : stationary_closed_form(session.params(), d);
      session.emit(stationary_csv(gen.states, sol), "stationary");
      return int{kOk};
    };
  });

  // reward
  auto* reward_cmd = app.add_subcommand("reward", "reward vector, its price split and the average profit");
  add_common(reward_cmd, common, true);
  reward_cmd->callback([&] {
    action = [&] {
      const Policy d = session.policy();
      const ModelParams& p = session.params();
      const StateSpace states(p.n, p.m);
      const AffineReward split = affine_decomposition(p, d);
      const ProfitBreakdown profit =
          profit_breakdown(stationary_closed_form(p, d), split, p.price);
      session.emit(reward_csv(states, build_reward(p, d), split), "reward");
      out << "eta = " << format_number(profit.eta) << "  (R D - F with D = "
          << format_number(profit.revenue_rate) << ", F = " << format_number(profit.cost_rate)
          << ")\n";
      return int{kOk};
    };
  });

  // potentials
  std::string method = "rg";
  std::string normalization = "anchored";
  double anchor = 1.0;
  auto* potentials_cmd = app.add_subcommand("potentials", "performance potentials from the Poisson equation");
  add_common(potentials_cmd, common, true);
  potentials_cmd->add_option("--method", method, "rg | rg-matrix | explicit | dense")
      ->check(CLI::IsMember({"rg", "rg-matrix", "explicit", "dense"}));
  potentials_cmd->add_option("--normalization", normalization, "anchored | fundamental")
      ->check(CLI::IsMember({"anchored", "fundamental"}));
  potentials_cmd->add_option("--anchor", anchor, "value of g(0,0) under anchored normalisation");
  potentials_cmd->callback([&] {
    action = [&] {
      const Policy d = session.policy();
      const ModelParams& p = session.params();
      PoissonOptions opt;
      opt.method = parse_poisson_method(method);
      opt.normalization =
          normalization == "fundamental" ? Normalization::fundamental : Normalization::anchored;
      opt.anchor = anchor;
      const PotentialSolution sol = solve_poisson(p, d, opt);
      const Generator gen = build_generator(p, d);
      const RewardVector f = build_reward(p, d);
      session.emit(potential_csv(gen, sol, f.f), "potentials");
      out << "eta = " << format_number(sol.eta) << "  max residual = "
          << format_number(poisson_residual(gen, sol.g, f.f, sol.eta)) << '\n';
      if (sol.factors && sol.factors->ill_conditioned) {
        err << "eedc: warning: |U_k| spans " << format_number(sol.factors->span)
            << ", results may lose accuracy\n";
      }
      return int{kOk};
    };
  });

  // sensitivity
  auto* sensitivity_cmd = app.add_subcommand("sensitivity", "realisation factors G(n,j), c and critical prices");
  add_common(sensitivity_cmd, common, true);
  sensitivity_cmd->callback([&] {
    action = [&] {
      const SensitivityReport rep = perturbation_factors(session.params(), session.policy());
      session.emit(sensitivity_csv(rep), "sensitivity");
      out << "c = " << format_number(rep.c) << '\n';
      return int{kOk};
    };
  });

  // critical-prices
  std::string space = "full";
  bool allow_large = false;
  auto* critical_cmd = app.add_subcommand("critical-prices", "global critical prices R_H and R_L");
  add_common(critical_cmd, common, false);
  critical_cmd->add_option("--space", space, "full | reduced | bang-bang | threshold");
  critical_cmd->add_flag("--allow-large", allow_large, "lift the enumeration size gates");
  critical_cmd->callback([&] {
    action = [&] {
      const CriticalPrices cp =
          critical_prices_global(session.params(), space_from(space), allow_large);
      CsvTable table({"R_H", "R_L", "space", "exact", "policies", "degenerate"});
      table.add_row({format_number(cp.r_high), format_number(cp.r_low),
                     std::string(to_string(cp.search_space)), cp.exact ? "1" : "0",
                     std::to_string(cp.policies), std::to_string(cp.degenerate)});
      session.emit(table, "critical-prices");
      return int{kOk};
    };
  });

  // optimize
  std::size_t top = 10;
  auto* optimize_cmd = app.add_subcommand("optimize", "exhaustive search for the profit-maximising policy");
  add_common(optimize_cmd, common, false);
  optimize_cmd->add_option("--space", space, "full | reduced | bang-bang | threshold");
  optimize_cmd->add_option("--top", top, "number of ranked policies to report");
  optimize_cmd->add_flag("--allow-large", allow_large, "lift the enumeration size gates");
  optimize_cmd->callback([&] {
    action = [&] {
      const OptimizationResult res =
          optimize(session.params(), space_from(space), {top, allow_large});
      session.emit(ranking_csv(res), "optimize");
      out << "best policy (" << format_policy(res.best_policy) << ")  eta = "
          << format_number(res.best_eta) << "  evaluated " << res.evaluations << " policies\n";
      return int{kOk};
    };
  });

  // threshold
  auto* threshold_cmd = app.add_subcommand("threshold", "threshold policies, theta* and its sign conditions");
  add_common(threshold_cmd, common, false);
  threshold_cmd->callback([&] {
    action = [&] {
      const ThresholdResult res = threshold_scan(session.params());
      session.emit(threshold_csv(res), "threshold");
      out << "theta* = " << res.theta_star << '\n';
      auto show = [&](const char* label, const ConditionTerm& t) {
        if (!t.applicable) {
          out << "  " << label << ": skipped at the boundary\n";
          return;
        }
        out << "  " << label << ": G^(d_" << t.policy_theta << ")(n," << t.level
            << ") + c = " << format_number(t.value) << (t.holds ? "  ok" : "  VIOLATED") << '\n';
      };
      show("<= 0", res.below);
      show(">= 0", res.at);
      show(">= 0", res.above);
      show(">= 0 (same level)", res.above_same_level);
      return int{kOk};
    };
  });

  // monotonicity
  int level = 1;
  bool with_prices = false;
  auto* mono_cmd = app.add_subcommand("monotonicity", "sweep one action d_{n,j} over 0..m");
  add_common(mono_cmd, common, true);
  mono_cmd->add_option("-j,--level", level, "level j of the swept action")->required();
  mono_cmd->add_flag("--with-prices", with_prices, "compute R_H/R_L and check the strict regimes");
  mono_cmd->callback([&] {
    action = [&] {
      const ModelParams& p = session.params();
      std::optional<CriticalPrices> prices;
      if (with_prices) prices = critical_prices_global(p, PolicySpaceKind::full, false);
      const MonotonicityReport rep = verify_monotonicity(p, session.policy(), level, prices);
      session.emit(monotonicity_csv(rep), "monotonicity");
      out << "slope on {j..m} = " << format_number(rep.expected_slope)
          << "  linearity residual = " << format_number(rep.linearity_residual)
          << "  argmax d = " << rep.argmax << '\n';
      for (const auto& v : rep.violations) out << "violation: " << v << '\n';
      return int{kOk};
    };
  });

  // simulate
  SimConfig sim;
  std::string unit = "events";
  double warmup = -1.0;
  std::string trace_path;
  auto* sim_cmd = app.add_subcommand("simulate", "discrete-event simulation of the data center");
  add_common(sim_cmd, common, true);
  sim_cmd->add_option("--horizon", sim.horizon, "total events or simulated time");
  sim_cmd->add_option("--unit", unit, "events | time")->check(CLI::IsMember({"events", "time"}));
  sim_cmd->add_option("--warmup", warmup, "discarded prefix in horizon units (default 10% of horizon)");
  sim_cmd->add_option("--replications", sim.replications, "independent replications");
  sim_cmd->add_option("--seed", sim.seed, "root seed");
  sim_cmd->add_option("--batches", sim.batch_count, "batches per replication for the CI");
  sim_cmd->add_option("--trace", trace_path, "write the post-warmup event log as CSV");
  sim_cmd->callback([&] {
    action = [&] {
      sim.unit = unit == "time" ? HorizonUnit::time : HorizonUnit::events;
      if (warmup >= 0.0) {
        sim.warmup = warmup;
        sim.warmup_is_fraction = false;
      }
      sim.trace = !trace_path.empty();
      const ModelParams& p = session.params();
      const SimResult res = simulate(p, session.policy(), sim);
      session.emit(sim_csv(p, res), "simulate");
      out << "eta_hat = " << format_number(res.eta_hat) << " +/- " << format_number(res.ci_half_width)
          << "  time = " << format_number(res.total.time) << "  transfers = " << res.total.transfers
          << "  losses = " << res.total.losses << '\n';
      if (sim.trace) {
        CsvTable trace = trace_csv(res);
        trace.set_metadata(model_hash(p), "simulate-trace");
        trace.save(trace_path);
      }
      return int{kOk};
    };
  });

  // price-sweep
  double from = 0.0;
  double to = 20.0;
  int steps = 41;
  auto* sweep_cmd = app.add_subcommand("price-sweep", "re-optimise across a grid of service prices");
  add_common(sweep_cmd, common, false);
  sweep_cmd->add_option("--from", from, "first price");
  sweep_cmd->add_option("--to", to, "last price");
  sweep_cmd->add_option("--steps", steps, "grid points (>= 1)")->check(CLI::PositiveNumber);
  sweep_cmd->add_option("--space", space, "full | reduced | bang-bang | threshold");
  sweep_cmd->add_flag("--allow-large", allow_large, "lift the enumeration size gates");
  sweep_cmd->callback([&] {
    action = [&] {
      std::vector<double> grid;
      for (int k = 0; k < steps; ++k) {
        grid.push_back(steps == 1 ? from : from + (to - from) * k / (steps - 1));
      }
      const SweepResult res = price_sweep(session.params(), grid, space_from(space), allow_large);
      session.emit(sweep_csv(res, session.params().m), "price-sweep");
      out << "R_H = " << format_number(res.prices.r_high) << "  R_L = "
          << format_number(res.prices.r_low) << (res.prices.exact ? "" : "  (not exact)") << '\n';
      return int{kOk};
    };
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kUsage;
  }

  try {
    set_thread_count(common.threads);
    if (validate_cmd->parsed() == false) session.load();
    return action();
  } catch (const ConfigError& e) {
    err << "eedc: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const RangeError& e) {
    err << "eedc: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const GateError& e) {
    err << "eedc: refused: " << e.what() << '\n';
    return kGate;
  } catch (const RegimeError& e) {
    err << "eedc: refused: " << e.what() << '\n';
    return kGate;
  } catch (const std::exception& e) {
    err << "eedc: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

}  // namespace eedc::cli
