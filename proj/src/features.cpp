#include "pathcast/features.hpp"

#include <algorithm>
#include <cmath>

#include "pathcast/csv.hpp"

namespace pathcast {

std::vector<double> difference_path(std::span<const double> prices, int m) {
  if (m < 0 || static_cast<std::size_t>(m) >= prices.size())
    fail_validation("difference_path: origin outside path");
  std::vector<double> out(prices.size());
  const double anchor = prices[m];
  for (std::size_t u = 0; u < prices.size(); ++u) out[u] = prices[u] - anchor;
  return out;
}

ChannelKind parse_channel_kind(const std::string& s) {
  if (s == "last_price") return ChannelKind::last_price;
  if (s == "price_diff_lags") return ChannelKind::price_diff_lags;
  if (s == "volume_diff_lags") return ChannelKind::volume_diff_lags;
  if (s == "rolling_volume_sum") return ChannelKind::rolling_volume_sum;
  if (s == "active_interval_count") return ChannelKind::active_interval_count;
  if (s == "weekday") return ChannelKind::weekday;
  if (s == "exogenous_level") return ChannelKind::exogenous_level;
  if (s == "exogenous_forecast_error") return ChannelKind::exogenous_forecast_error;
  if (s == "fundamental_scenario") return ChannelKind::fundamental_scenario;
  fail_validation("unknown channel kind '" + s + "'");
}

std::string channel_kind_name(ChannelKind k) {
  switch (k) {
    case ChannelKind::last_price: return "last_price";
    case ChannelKind::price_diff_lags: return "price_diff_lags";
    case ChannelKind::volume_diff_lags: return "volume_diff_lags";
    case ChannelKind::rolling_volume_sum: return "rolling_volume_sum";
    case ChannelKind::active_interval_count: return "active_interval_count";
    case ChannelKind::weekday: return "weekday";
    case ChannelKind::exogenous_level: return "exogenous_level";
    case ChannelKind::exogenous_forecast_error: return "exogenous_forecast_error";
    case ChannelKind::fundamental_scenario: return "fundamental_scenario";
  }
  return "?";
}

namespace {

bool needs_series(ChannelKind k) {
  return k == ChannelKind::exogenous_level || k == ChannelKind::exogenous_forecast_error ||
         k == ChannelKind::fundamental_scenario;
}

}  // namespace

void FeatureSpec::validate(const MarketStore& store) const {
  if (horizon < 1) fail_validation("feature spec: horizon must be >= 1");
  for (std::size_t i = 0; i < channels.size(); ++i) {
    for (std::size_t j = i + 1; j < channels.size(); ++j)
      if (channels[i].name == channels[j].name)
        fail_validation("duplicate channel name '" + channels[i].name + "'");
    if (needs_series(channels[i].kind) && !store.find_series(channels[i].source))
      fail_validation("channel '" + channels[i].name + "' references unknown series '" +
                      channels[i].source + "'");
  }
  for (int lag : lags)
    if (lag < 1) fail_validation("lags must be positive");
}

int FeatureSpec::scenario_steps(int granularity_min) const {
  if (granularity_min <= 0) fail_validation("scenario channel needs a positive granularity");
  return (granularity_min - kGridStepMin + kGridStepMin * horizon) / granularity_min;
}

int FeatureSpec::channel_dim(const FeatureChannel& c) const {
  switch (c.kind) {
    case ChannelKind::last_price:
    case ChannelKind::rolling_volume_sum:
    case ChannelKind::active_interval_count:
    case ChannelKind::exogenous_level:
    case ChannelKind::exogenous_forecast_error:
      return 1;
    case ChannelKind::price_diff_lags:
    case ChannelKind::volume_diff_lags:
      return static_cast<int>(lags.size());
    case ChannelKind::weekday:
      return 7;
    case ChannelKind::fundamental_scenario:
      return scenario_steps(c.granularity_min) * (sign_split ? 2 : 1);
  }
  return 0;
}

int FeatureSpec::expanded_dim() const {
  int d = 0;
  for (const auto& c : channels) d += channel_dim(c);
  return d;
}

std::vector<double> assemble_raw_features(const FeatureSpec& spec, const MarketStore& store,
                                          const ForecastOrigin& origin, FutureAccess access,
                                          const ScenarioSubstitution* substitution) {
  const VwapGrid& grid = store.grid(origin.day, origin.quarter);
  if (origin.m < 0 || origin.m >= grid.size()) fail_validation("origin index outside grid");
  const Minute t0 = grid.interval_start(origin.m);

  std::vector<double> out;
  out.reserve(static_cast<std::size_t>(spec.expanded_dim()));

  auto lag_index = [&](int lag) {
    int u = origin.m - lag;
    if (u < 0)
      fail_validation("channel unavailable at origin: lag " + format_int(lag) +
                      " reaches before grid start");
    return u;
  };

  for (const auto& c : spec.channels) {
    switch (c.kind) {
      case ChannelKind::last_price:
        out.push_back(grid.prices[origin.m]);
        break;
      case ChannelKind::price_diff_lags:
        for (int lag : spec.lags) out.push_back(grid.prices[lag_index(lag)] - grid.prices[origin.m]);
        break;
      case ChannelKind::volume_diff_lags:
        for (int lag : spec.lags)
          out.push_back(grid.volumes[lag_index(lag)] - grid.volumes[origin.m]);
        break;
      case ChannelKind::rolling_volume_sum:
      case ChannelKind::active_interval_count: {
        int window = c.shift_min > 0 ? c.shift_min / kGridStepMin : 12;
        int lo = std::max(0, origin.m - window);
        double sum = 0.0;
        int active = 0;
        for (int u = lo; u <= origin.m; ++u) {
          sum += grid.volumes[u];
          if (grid.volumes[u] > 0.0) ++active;
        }
        out.push_back(c.kind == ChannelKind::rolling_volume_sum ? sum
                                                                : static_cast<double>(active));
        break;
      }
      case ChannelKind::weekday: {
        int w = iso_weekday(origin.day);
        for (int k = 1; k <= 7; ++k) out.push_back(k == w ? 1.0 : 0.0);
        break;
      }
      case ChannelKind::exogenous_level:
      case ChannelKind::exogenous_forecast_error: {
        const FundamentalSeries& s = store.series(c.source);
        int gran = c.granularity_min > 0 ? c.granularity_min : s.granularity_min;
        int shift = c.shift_min > 0 ? c.shift_min : s.availability_delay_min;
        Minute at = availability_floor(t0, shift, gran);
        out.push_back(c.kind == ChannelKind::exogenous_level ? s.actual_at(at) : s.error_at(at));
        break;
      }
      case ChannelKind::fundamental_scenario: {
        const FundamentalSeries& s = store.series(c.source);
        int gran = c.granularity_min > 0 ? c.granularity_min : s.granularity_min;
        int shift = c.shift_min > 0 ? c.shift_min : s.availability_delay_min;
        int steps = spec.scenario_steps(gran);
        std::vector<double> delta(static_cast<std::size_t>(steps), 0.0);
        const std::vector<double>* sub = nullptr;
        if (substitution) {
          auto it = substitution->find(c.name);
          if (it != substitution->end()) sub = &it->second;
        }
        if (sub) {
          if (static_cast<int>(sub->size()) != steps)
            fail_validation("scenario substitution for '" + c.name + "' has length " +
                            format_int(static_cast<std::int64_t>(sub->size())) + ", expected " +
                            format_int(steps));
          delta = *sub;
        } else if (access == FutureAccess::realized) {
          double known = s.error_at(availability_floor(t0, shift, gran));
          Minute p0 = gran * (t0 / gran);
          for (int j = 1; j <= steps; ++j)
            delta[static_cast<std::size_t>(j - 1)] = known - s.error_at(p0 + Minute(j) * gran);
        }
        for (int j = 0; j < steps; ++j) {
          if (spec.sign_split) {
            out.push_back(std::max(delta[static_cast<std::size_t>(j)], 0.0));
            out.push_back(std::min(delta[static_cast<std::size_t>(j)], 0.0));
          } else {
            out.push_back(delta[static_cast<std::size_t>(j)]);
          }
        }
        break;
      }
    }
  }
  for (double v : out)
    if (!std::isfinite(v)) fail_validation("non-finite feature value assembled");
  return out;
}

std::vector<stats::Standardization> fit_column_stats(const std::vector<std::vector<double>>& rows) {
  if (rows.empty()) fail_validation("fit_column_stats: no rows");
  const std::size_t dim = rows[0].size();
  std::vector<stats::Standardization> st(dim);
  std::vector<double> col(rows.size());
  for (std::size_t j = 0; j < dim; ++j) {
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != dim) fail_validation("fit_column_stats: ragged rows");
      col[i] = rows[i][j];
    }
    st[j].mean = stats::mean(col);
    double sd = stats::pop_std(col);
    st[j].std = sd > 0.0 ? sd : 1.0;
  }
  return st;
}

std::vector<double> apply_column_stats(std::span<const double> raw,
                                       std::span<const stats::Standardization> st) {
  if (raw.size() != st.size()) fail_validation("standardization dimension mismatch");
  std::vector<double> out(raw.size());
  for (std::size_t j = 0; j < raw.size(); ++j) out[j] = (raw[j] - st[j].mean) / st[j].std;
  return out;
}

FeatureVector assemble_features(const FeatureSpec& spec, const MarketStore& store,
                                const ForecastOrigin& origin,
                                std::span<const stats::Standardization> st, FutureAccess access,
                                const ScenarioSubstitution* substitution) {
  FeatureVector fv;
  fv.origin = origin;
  std::vector<double> raw = assemble_raw_features(spec, store, origin, access, substitution);
  fv.values = apply_column_stats(raw, st);
  fv.standardization.assign(st.begin(), st.end());
  return fv;
}

// ---------------------------------------------------------------------------
// Merit-order slope
// ---------------------------------------------------------------------------

TransformedSupplyCurve transform_supply_curve(const SupplyCurve& curve, double inelastic_demand) {
  if (curve.bids.empty()) fail_validation("supply curve has no bids");
  std::vector<std::pair<double, double>> atoms;  // price, volume
  atoms.reserve(curve.bids.size());
  for (const auto& b : curve.bids) {
    if (b.volume <= 0.0) fail_validation("supply curve bid with nonpositive volume");
    if (b.price < curve.min_price || b.price > curve.max_price)
      fail_validation("supply curve bid price outside admissible bounds");
    atoms.emplace_back(b.price, b.volume);
  }
  std::sort(atoms.begin(), atoms.end());
  TransformedSupplyCurve t;
  double cum = -inelastic_demand;
  for (const auto& [p, v] : atoms) {
    cum += v;
    if (!t.prices.empty() && t.prices.back() == p) {
      t.cum_volumes.back() = cum;
    } else {
      t.prices.push_back(p);
      t.cum_volumes.push_back(cum);
    }
  }
  for (std::size_t i = 1; i < t.cum_volumes.size(); ++i)
    if (t.cum_volumes[i] < t.cum_volumes[i - 1])
      fail_runtime("transformed supply curve not monotone");
  return t;
}

double TransformedSupplyCurve::price_at_volume(double v) const {
  // Right-continuous: the first atom whose cumulative volume exceeds v.
  auto it = std::upper_bound(cum_volumes.begin(), cum_volumes.end(), v);
  if (it == cum_volumes.end()) return prices.back();
  return prices[static_cast<std::size_t>(it - cum_volumes.begin())];
}

double TransformedSupplyCurve::volume_at_price(double p) const {
  if (p < prices.front() || p > prices.back())
    fail_validation("reference outside transformed curve");
  auto it = std::upper_bound(prices.begin(), prices.end(), p);
  if (it == prices.begin()) return cum_volumes.front();
  return cum_volumes[static_cast<std::size_t>(it - prices.begin()) - 1];
}

double total_buy_volume(const SupplyCurve& curve) {
  double v = 0.0;
  for (const auto& b : curve.bids)
    if (b.side == BidSide::buy) v += b.volume;
  return v;
}

std::vector<double> merit_order_slope(const SupplyCurve& curve, double inelastic_demand,
                                      double ref_price, std::span<const double> deltas) {
  for (double d : deltas)
    if (d <= 0.0) fail_validation("merit-order deltas must be positive");
  TransformedSupplyCurve t = transform_supply_curve(curve, inelastic_demand);
  double v0 = t.volume_at_price(ref_price);
  std::vector<double> slopes;
  slopes.reserve(deltas.size());
  for (double d : deltas)
    slopes.push_back((t.price_at_volume(v0 + d) - t.price_at_volume(v0 - d)) / (2.0 * d));
  return slopes;
}

std::map<std::pair<Date, int>, SupplyCurve> load_curves_csv(const std::filesystem::path& p) {
  CsvTable t = read_csv(p);
  const std::size_t c_day = t.col("delivery_day"), c_q = t.col("delivery_quarter"),
                    c_side = t.col("side"), c_price = t.col("price"), c_vol = t.col("volume");
  std::map<std::pair<Date, int>, SupplyCurve> out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = p.string() + ": line " + format_int(t.line_numbers[i]);
    SupplyCurveBid bid;
    if (row[c_side] == "buy")
      bid.side = BidSide::buy;
    else if (row[c_side] == "sell")
      bid.side = BidSide::sell;
    else
      fail_validation(where + ": side must be buy or sell");
    try {
      bid.price = parse_double(row[c_price]);
      bid.volume = parse_double(row[c_vol]);
      out[{parse_date(row[c_day]), static_cast<int>(parse_int(row[c_q]))}].bids.push_back(bid);
    } catch (const Error& e) {
      fail_validation(where + ": " + e.what());
    }
    if (bid.volume <= 0.0) fail_validation(where + ": volume must be positive");
  }
  return out;
}

}  // namespace pathcast
