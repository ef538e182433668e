#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathcast/bands.hpp"

namespace pathcast {

enum class Agent { seller, spread_trader };
enum class StrategyFamily { median, band };
enum class BandAttitude { none, risk_averse, risk_seeking };
enum class Dynamics { static_plan, dynamic_kernel, dynamic_mae };
enum class ThresholdMethod { three_sigma, iqr, ipr_5_95, mae, fixed };

std::string agent_name(Agent a);
Agent parse_agent(const std::string& s);
std::string dynamics_name(Dynamics d);
Dynamics parse_dynamics(const std::string& s);
std::string threshold_name(ThresholdMethod m);
ThresholdMethod parse_threshold(const std::string& s);

struct StrategySpec {
  Agent agent = Agent::seller;
  StrategyFamily family = StrategyFamily::median;
  BandAttitude attitude = BandAttitude::none;
  Dynamics dynamics = Dynamics::static_plan;
  double scp = 0.5;  // band family only
  ReweightParams reweight;
  ThresholdMethod threshold = ThresholdMethod::mae;
  double fixed_eta = 0.0;  // ThresholdMethod::fixed

  void validate() const;
  bool params_invalid() const;
  std::string id() const;  // stable, filesystem-safe
};

// Steps are 1-based path positions u in 1..H. For a spread trade, entry is
// the first transaction in time, exit the second; direction +1 means the
// entry buys (long), -1 means it sells (short).
struct TradePlan {
  std::optional<int> entry;
  int exit = 1;
  int direction = 0;  // 0 for the seller
};

struct Execution {
  int step = 0;
  double price = 0.0;
  char side = 'S';  // 'B' or 'S'
};

struct AuditEntry {
  int tau = 0;
  std::string action;
  std::string reason;  // includes the inequality values that fired
};

struct TradeOutcome {
  std::vector<Execution> executions;  // in execution-time order
  double profit = 0.0;                // EUR for 1 MWh per action
  std::vector<AuditEntry> audit;
};

// Median rule: seller sells at the argmax; the spread trader trades the
// extrema in temporal order. Ties resolve to the earliest step.
TradePlan plan_median(Agent agent, std::span<const double> median_path);

// Band rules by attitude: risk-seeking sells at the maximum of the upper band
// and buys at the minimum of the lower; risk-averse sells at the maximum of
// the lower band (seller) or buys at the maximum of the lower and sells at
// the minimum of the upper (spread).
TradePlan plan_band(Agent agent, BandAttitude attitude, const PredictionBand& upper,
                    const PredictionBand& lower);

// Trust threshold from the residuals observed so far; a single residual
// degenerates to its absolute value for every method.
double threshold_eta(std::span<const double> residuals, ThresholdMethod method);

// One full delivery simulation: static plans execute as planned; dynamic
// plans are reweighted and re-tested at every step tau = 1..H.
TradeOutcome simulate_strategy(const StrategySpec& spec, const ScenarioEnsemble& ensemble,
                               std::span<const double> realized);

// Hindsight benchmarks on the realized path.
TradeOutcome crystal_ball(Agent agent, std::span<const double> realized);
enum class NaiveVariant { first, last };
TradeOutcome naive_endpoints(Agent agent, NaiveVariant variant, std::span<const double> realized);

// Recomputes the outcome from its executed actions; used to check the audit
// trail replays to the identical result.
TradeOutcome replay_outcome(Agent agent, const TradeOutcome& outcome,
                            std::span<const double> realized);

// ---------------------------------------------------------------------------
// Calibration grid search
// ---------------------------------------------------------------------------

struct GridAxes {
  std::vector<double> scp;
  std::vector<double> p;
  std::vector<double> lambda;
  std::vector<ThresholdMethod> eta;
};

GridAxes default_median_grid();
GridAxes default_band_grid();

// Cartesian product of the axes applicable to the template's family and
// dynamics, in lexicographic axis order (scp, p, lambda, eta).
std::vector<StrategySpec> enumerate_grid(const StrategySpec& tmpl, const GridAxes& axes);

struct BacktestCase {
  const ScenarioEnsemble* ensemble = nullptr;
  std::vector<double> realized;
};

struct GridCell {
  StrategySpec spec;
  double total_profit = 0.0;
  double downside = 0.0;
  double sortino = 0.0;
};

struct GridSearchResult {
  std::vector<GridCell> cells;
  std::size_t best_index = 0;
};

// Scores every cell by the Sortino ratio over the calibration cases. The
// objective direction is a flag: the ratio rewards profit per unit downside
// risk, so the default selects the maximum.
GridSearchResult grid_search(const StrategySpec& tmpl, const GridAxes& axes,
                             std::span<const BacktestCase> cases, bool maximize = true,
                             int threads = 1);

}  // namespace pathcast
