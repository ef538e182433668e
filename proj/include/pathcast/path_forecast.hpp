#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "pathcast/features.hpp"
#include "pathcast/svr.hpp"

namespace pathcast {

enum class ForecastMode { multi_output, chain };

struct ForecastConfig {
  int horizon = 31;
  ForecastMode mode = ForecastMode::multi_output;
  SvrHyperParams hyper;
  KernelParams kernel_levels;  // quantile levels; widths are fitted per window
  int lead_minutes = 185;      // forecast origin relative to delivery start
  bool per_quarter_models = false;
  int threads = 1;
};

// One row per (delivery, day) at the common relative origin. Features and the
// auxiliary forecast (the origin's last known price) are standardized with
// training-window statistics; targets are differenced by the origin price and
// standardized per horizon step.
struct TrainingSet {
  std::vector<ForecastOrigin> origins;
  std::vector<double> origin_prices;
  std::vector<std::vector<double>> X;  // standardized feature rows
  std::vector<double> aux;             // standardized auxiliary forecasts
  std::vector<stats::Standardization> column_stats;
  stats::Standardization aux_stats;
  std::vector<std::vector<double>> targets_std;  // [h][row]
  std::vector<stats::Standardization> target_stats;

  int n_rows() const { return static_cast<int>(origins.size()); }
};

TrainingSet build_training_set(const FeatureSpec& spec, const MarketStore& store,
                               std::span<const Date> days, std::optional<int> quarter,
                               const ForecastConfig& config);

struct PathModels {
  ForecastConfig config;
  std::vector<SvrModel> models;  // one per horizon step
  std::vector<stats::Standardization> column_stats;
  stats::Standardization aux_stats;
  std::vector<stats::Standardization> target_stats;
  // Chain augmentation: per step h > 1, standardization of the appended
  // in-sample prediction columns for steps 1..h-1.
  std::vector<std::vector<stats::Standardization>> chain_stats;
  std::vector<std::vector<double>> in_sample_std;  // [h][row]
  std::vector<std::vector<double>> targets_std;    // [h][row]
  std::vector<ForecastOrigin> row_origins;
  std::vector<double> row_origin_prices;
  bool converged = true;
  std::string fingerprint;  // content hash over duals and biases
};

// Independent per-horizon fits sharing one gram matrix.
PathModels fit_multi_output(const TrainingSet& train, const ForecastConfig& config);
// Sequential fits with features augmented by earlier in-sample predictions.
PathModels fit_chain(const TrainingSet& train, const ForecastConfig& config);
PathModels fit_path_models(const TrainingSet& train, const ForecastConfig& config);

struct PathForecast {
  ForecastOrigin origin;
  std::vector<double> values;   // EUR/MWh after inverse transforms
  std::vector<double> raw_std;  // standardized-space predictions
  std::string model_fingerprint;
};

// Standardized-space prediction for one origin (chain handles augmentation).
std::vector<double> predict_path_std(const PathModels& models, std::span<const double> x_std,
                                     double aux_std);
// Inverse transforms: destandardize per step, then add the origin price.
PathForecast forecast_path(const PathModels& models, std::span<const double> x_std,
                           double aux_std, const ForecastOrigin& origin, double origin_price);

struct ExpandingWindowPlan {
  Date train_start;
  Date first_test_day;
  Date last_test_day;

  void validate() const;
  std::vector<Date> test_days() const;
};

// Per-delivery forecast context handed to downstream ensemble generation.
struct QuarterForecast {
  const PathModels* models = nullptr;
  const TrainingSet* train = nullptr;
  PathForecast forecast;
  std::vector<double> x_std;
  double aux_std = 0.0;
  double origin_price = 0.0;
};

using ForecastSink = std::function<void(const QuarterForecast&)>;

// Walk-forward driver: for each test day fit on all plan days strictly before
// it and forecast every delivery quarter present in the store. The sink is
// invoked sequentially in (day, quarter) order; fits run in parallel.
void run_expanding_window(const ExpandingWindowPlan& plan, const MarketStore& store,
                          const FeatureSpec& spec, const ForecastConfig& config,
                          const ForecastSink& sink);

}  // namespace pathcast
