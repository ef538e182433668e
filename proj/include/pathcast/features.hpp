#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pathcast/market_data.hpp"
#include "pathcast/stats.hpp"

namespace pathcast {

// ---------------------------------------------------------------------------
// Price-path transforms
// ---------------------------------------------------------------------------

// output[u] = prices[u] - prices[m]
std::vector<double> difference_path(std::span<const double> prices, int m);

// ---------------------------------------------------------------------------
// Feature assembly
// ---------------------------------------------------------------------------

enum class ChannelKind {
  last_price,
  price_diff_lags,
  volume_diff_lags,
  rolling_volume_sum,
  active_interval_count,
  weekday,
  exogenous_level,
  exogenous_forecast_error,
  // Forecast-error drift of a fundamental over the path horizon. Realized in
  // the training window; at a live origin either zero or substituted with a
  // generated scenario.
  fundamental_scenario,
};

ChannelKind parse_channel_kind(const std::string& s);
std::string channel_kind_name(ChannelKind k);

struct FeatureChannel {
  std::string name;
  ChannelKind kind = ChannelKind::last_price;
  std::string source;       // fundamental series name for exogenous kinds
  int shift_min = 0;        // availability shift / rolling window length
  int granularity_min = 0;  // source granularity for exogenous kinds
};

struct FeatureSpec {
  std::vector<FeatureChannel> channels;
  std::vector<int> lags;   // for *_diff_lags channels, default 1..31
  int horizon = 31;        // path steps, sizes fundamental_scenario channels
  bool sign_split = true;  // split scenario deltas into +/- channels

  void validate(const MarketStore& store) const;
  int channel_dim(const FeatureChannel& c) const;
  int expanded_dim() const;
  // Number of native-granularity periods a scenario channel spans. Uses the
  // worst grid alignment so the dimension is identical for every origin.
  int scenario_steps(int granularity_min) const;
};

struct ForecastOrigin {
  Date day;
  int quarter = 1;
  int m = 0;  // grid interval index of the origin

  bool operator==(const ForecastOrigin&) const = default;
};

// Whether assembly may read data after the origin (training rows may, live
// forecast origins must not).
enum class FutureAccess { realized, zeroed };

// Per-channel raw delta paths substituted into fundamental_scenario channels.
using ScenarioSubstitution = std::map<std::string, std::vector<double>>;

struct FeatureVector {
  ForecastOrigin origin;
  std::vector<double> values;
  std::vector<stats::Standardization> standardization;  // per expanded column
};

std::vector<double> assemble_raw_features(const FeatureSpec& spec, const MarketStore& store,
                                          const ForecastOrigin& origin, FutureAccess access,
                                          const ScenarioSubstitution* substitution = nullptr);

// Per-column standardization fitted on the training rows (population std,
// zero-variance columns recorded with std 1 so they contribute 0).
std::vector<stats::Standardization> fit_column_stats(
    const std::vector<std::vector<double>>& rows);
std::vector<double> apply_column_stats(std::span<const double> raw,
                                       std::span<const stats::Standardization> st);

FeatureVector assemble_features(const FeatureSpec& spec, const MarketStore& store,
                                const ForecastOrigin& origin,
                                std::span<const stats::Standardization> st, FutureAccess access,
                                const ScenarioSubstitution* substitution = nullptr);

// ---------------------------------------------------------------------------
// Merit-order slope (transformed supply curve elasticity)
// ---------------------------------------------------------------------------

enum class BidSide { buy, sell };

struct SupplyCurveBid {
  double price = 0.0;   // EUR/MWh
  double volume = 0.0;  // MWh
  BidSide side = BidSide::sell;
};

struct SupplyCurve {
  std::vector<SupplyCurveBid> bids;
  double min_price = -3000.0;
  double max_price = 3000.0;
};

// Monotone step function volume -> price built by moving price-dependent buy
// bids to the sell side and shifting volume by the inelastic demand.
struct TransformedSupplyCurve {
  std::vector<double> prices;       // ascending
  std::vector<double> cum_volumes;  // nondecreasing, inelastic demand removed
  double price_at_volume(double v) const;  // right-continuous, clamped at ends
  double volume_at_price(double p) const;
};

TransformedSupplyCurve transform_supply_curve(const SupplyCurve& curve, double inelastic_demand);

// Total buy volume = demand at the minimum price; the usual inelastic-demand
// proxy when nothing better is known.
double total_buy_volume(const SupplyCurve& curve);

// Centered finite-difference slopes (price(v+delta) - price(v-delta)) / (2
// delta) around the volume matching ref_price.
std::vector<double> merit_order_slope(const SupplyCurve& curve, double inelastic_demand,
                                      double ref_price, std::span<const double> deltas);

// curves.csv: delivery_day, delivery_quarter, side, price, volume
std::map<std::pair<Date, int>, SupplyCurve> load_curves_csv(const std::filesystem::path& p);

}  // namespace pathcast
