#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathcast/path_forecast.hpp"

namespace pathcast {

enum class EnsembleKind { historical, fundamental, naive };
std::string ensemble_kind_name(EnsembleKind k);
EnsembleKind parse_ensemble_kind(const std::string& s);

struct ScenarioEnsemble {
  ForecastOrigin origin;
  std::vector<std::vector<double>> paths;  // n x H, EUR/MWh
  std::vector<double> weights;             // nonnegative, sum 1
  std::vector<std::string> provenance;
  EnsembleKind kind = EnsembleKind::historical;

  int size() const { return static_cast<int>(paths.size()); }
  int horizon() const { return paths.empty() ? 0 : static_cast<int>(paths[0].size()); }
  void validate() const;
};

// ---------------------------------------------------------------------------
// Generation
// ---------------------------------------------------------------------------

// In-sample residual paths of the fitted models, expressed in EUR/MWh.
std::vector<std::vector<double>> in_sample_residual_paths(const PathModels& models);

// Point forecast plus one residual path per training sample, uniform weights.
ScenarioEnsemble historical_ensemble(const PathForecast& point_forecast,
                                     const std::vector<std::vector<double>>& residual_paths);

struct FundamentalScenario {
  std::string variable;
  double delta_known = 0.0;
  std::vector<double> delta_future;  // per native-granularity step
  std::vector<double> delta_fs;      // delta_known - delta_future[h]

  std::vector<double> positive_part() const;
  std::vector<double> negative_part() const;
};

// One scenario per training origin: the realized drift of the variable's
// forecast error from the last published value to each future period, on the
// sample's own timeline.
std::vector<FundamentalScenario> build_fundamental_scenarios(const FundamentalSeries& series,
                                                             std::span<const Minute> train_origins,
                                                             int horizon, int scenario_steps);

// Re-predicts the path once per scenario with the scenario's deltas
// substituted into the named fundamental_scenario channels.
ScenarioEnsemble fundamental_ensemble(
    const PathModels& models, const FeatureSpec& spec, const MarketStore& store,
    const ForecastOrigin& origin, double origin_price,
    const std::vector<ScenarioSubstitution>& substitutions);

// Builds the per-sample substitutions for every fundamental_scenario channel.
std::vector<ScenarioSubstitution> fundamental_substitutions(const FeatureSpec& spec,
                                                            const MarketStore& store,
                                                            std::span<const Minute> train_origins);

// Historical increment trajectories resampled with replacement and cumulated
// onto the last observed price.
ScenarioEnsemble naive_ensemble(const std::vector<std::vector<double>>& increment_paths,
                                double last_price, int n_draws, std::uint64_t global_seed,
                                const ForecastOrigin& origin);

std::vector<std::vector<double>> collect_increment_paths(const MarketStore& store,
                                                         std::span<const Date> days, int quarter,
                                                         int lead_minutes, int horizon);

// ---------------------------------------------------------------------------
// Support Vector Sorting
// ---------------------------------------------------------------------------

struct SvsRanking {
  std::vector<double> scenario_weights;  // w_i = sum_h |(-alpha_i + alpha*_i)|
  std::vector<int> order;                // descending weight, ties by index
  int selected_count = 0;
};

// Scenario index i must correspond to training-sample index i in every
// per-step model.
std::vector<double> svs_weights(const PathModels& models, int n_scenarios);
SvsRanking svs_rank(std::vector<double> weights);

// Exact first-order Wasserstein distance between two weighted discrete
// distributions on the line.
double wasserstein1(std::span<const double> a_values, std::span<const double> a_weights,
                    std::span<const double> b_values, std::span<const double> b_weights);

enum class SvsDistribution { pooled, per_step_mean };

struct SvsSelection {
  ScenarioEnsemble reduced;        // selected subset, uniform weights
  std::vector<int> selected;       // ensemble indices in selection order
  bool undersized = false;         // ensemble smaller than the minimum
  std::vector<double> w1_trace;    // W1 after each addition (from the 2nd)
};

SvsSelection select_scenarios_svs(const SvsRanking& ranking, const ScenarioEnsemble& ensemble,
                                  double omega = 0.01, int ma_window = 10, int minimum = 10,
                                  SvsDistribution dist = SvsDistribution::pooled);

// Per-step weighted lower median of the ensemble paths.
std::vector<double> empirical_median_path(const ScenarioEnsemble& ensemble);

}  // namespace pathcast
