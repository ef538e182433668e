#include "pathcast/market_data.hpp"

#include <algorithm>

#include "pathcast/csv.hpp"
#include "pathcast/rng.hpp"

namespace pathcast {

int VwapGrid::index_for_lead(int lead_min) const {
  Minute start = delivery_start_minute(delivery_day, delivery_quarter) - lead_min;
  Minute off = start - origin;
  if (off < 0 || off % kGridStepMin != 0 || off / kGridStepMin >= size())
    fail_validation("lead " + format_int(lead_min) + " min not on the grid for quarter " +
                    format_int(delivery_quarter));
  return static_cast<int>(off / kGridStepMin);
}

bool FundamentalSeries::covers(Minute m) const {
  if (m < start) return false;
  Minute idx = (m - start) / granularity_min;
  return idx < static_cast<Minute>(actuals.size());
}

double FundamentalSeries::actual_at(Minute m) const {
  if (!covers(m))
    fail_validation("fundamental '" + name + "' has no coverage at " + format_timestamp(m));
  return actuals[static_cast<std::size_t>((m - start) / granularity_min)];
}

double FundamentalSeries::forecast_at(Minute m) const {
  if (!covers(m))
    fail_validation("fundamental '" + name + "' has no coverage at " + format_timestamp(m));
  return forecasts[static_cast<std::size_t>((m - start) / granularity_min)];
}

void MarketStore::sort_index() {
  std::sort(grids.begin(), grids.end(), [](const VwapGrid& a, const VwapGrid& b) {
    if (a.delivery_day != b.delivery_day) return a.delivery_day < b.delivery_day;
    return a.delivery_quarter < b.delivery_quarter;
  });
}

const VwapGrid* MarketStore::find_grid(Date day, int quarter) const {
  auto it = std::lower_bound(grids.begin(), grids.end(), std::make_pair(day, quarter),
                             [](const VwapGrid& g, const std::pair<Date, int>& key) {
                               if (g.delivery_day != key.first) return g.delivery_day < key.first;
                               return g.delivery_quarter < key.second;
                             });
  if (it == grids.end() || it->delivery_day != day || it->delivery_quarter != quarter)
    return nullptr;
  return &*it;
}

const VwapGrid& MarketStore::grid(Date day, int quarter) const {
  const VwapGrid* g = find_grid(day, quarter);
  if (!g)
    fail_validation("no grid for delivery " + format_date(day) + " q" + format_int(quarter));
  return *g;
}

const FundamentalSeries* MarketStore::find_series(const std::string& name) const {
  for (const auto& s : fundamentals)
    if (s.name == name) return &s;
  return nullptr;
}

const FundamentalSeries& MarketStore::series(const std::string& name) const {
  const FundamentalSeries* s = find_series(name);
  if (!s) fail_validation("unknown fundamental series '" + name + "'");
  return *s;
}

VwapGrid aggregate_vwap(std::span<const TransactionRecord> transactions, Date delivery_day,
                        int delivery_quarter, double auction_price) {
  if (delivery_quarter < 1 || delivery_quarter > kQuartersPerDay)
    fail_validation("delivery_quarter must be in [1,96]");
  VwapGrid g;
  g.delivery_day = delivery_day;
  g.delivery_quarter = delivery_quarter;
  g.origin = grid_origin_minute(delivery_day);
  g.auction_seed_price = auction_price;
  const int n = grid_length(delivery_quarter);
  const Minute end = g.origin + Minute(n) * kGridStepMin;

  if (transactions.empty() && !std::isfinite(auction_price))
    fail_validation("no price basis: empty transaction set and no auction price");

  std::vector<double> pv(n, 0.0), vol(n, 0.0);
  for (std::size_t i = 0; i < transactions.size(); ++i) {
    const auto& tr = transactions[i];
    if (tr.delivery_day != delivery_day || tr.delivery_quarter != delivery_quarter)
      fail_validation("transaction " + format_int(static_cast<std::int64_t>(i)) +
                      " belongs to another delivery");
    if (tr.volume <= 0.0)
      fail_validation("transaction " + format_int(static_cast<std::int64_t>(i)) +
                      " has nonpositive volume");
    if (tr.timestamp < g.origin || tr.timestamp >= end)
      fail_validation("transaction " + format_int(static_cast<std::int64_t>(i)) +
                      " outside grid span [" + format_timestamp(g.origin) + ", " +
                      format_timestamp(end) + ")");
    int u = static_cast<int>((tr.timestamp - g.origin) / kGridStepMin);
    pv[u] += tr.price * tr.volume;
    vol[u] += tr.volume;
  }

  g.prices.assign(n, 0.0);
  g.volumes = vol;
  double last = auction_price;  // may be NaN when trades start at u=0
  for (int u = 0; u < n; ++u) {
    if (vol[u] > 0.0) {
      last = pv[u] / vol[u];
    } else if (!std::isfinite(last)) {
      fail_validation("no price basis for interval " + format_int(u) +
                      ": no earlier trade and no auction price");
    }
    g.prices[u] = last;
  }
  return g;
}

Minute availability_floor(Minute m, int shift_min, int granularity_min) {
  if (granularity_min <= 0) fail_validation("granularity must be positive");
  if (m < shift_min) fail_validation("variable not yet available at " + format_int(m));
  return granularity_min * ((m - shift_min) / granularity_min);
}

namespace {

struct SyntheticFundamentalSpec {
  const char* name;
  double level;
  double amplitude;
  double phase;
  double error_phi;
  double error_sigma;
};

// Error processes are AR(1) so forecast errors persist: the latest known
// error carries information about future ones, which is what the fundamental
// scenario machinery needs to have something to learn.
constexpr SyntheticFundamentalSpec kSyntheticFundamentals[] = {
    {"load", 100.0, 8.0, 0.3, 0.95, 0.30},
    {"wind", 40.0, 12.0, 2.1, 0.92, 0.40},
    {"solar", 25.0, 15.0, 4.0, 0.90, 0.35},
};

}  // namespace

SyntheticMarket generate_synthetic_market(const SyntheticMarketConfig& config) {
  if (config.n_days < 1) fail_validation("n_days must be positive");
  if (config.deliveries_per_day < 1 || config.deliveries_per_day > kQuartersPerDay)
    fail_validation("deliveries_per_day must be in [1,96]");
  if (config.volatility < 0.0) fail_validation("volatility must be nonnegative");
  if (config.mean_reversion < 0.0 || config.mean_reversion > 1.0)
    fail_validation("mean_reversion must be in [0,1]");

  SyntheticMarket market;
  const int gran = 15;
  const Minute fund_start = midnight_minute(config.first_day) - kMinutesPerDay;
  const Minute fund_end = midnight_minute(config.first_day + config.n_days) + kMinutesPerDay;
  const std::size_t n_periods = static_cast<std::size_t>((fund_end - fund_start) / gran);

  for (std::size_t s = 0; s < std::size(kSyntheticFundamentals); ++s) {
    const auto& fs = kSyntheticFundamentals[s];
    Rng rng(config.rng_seed, "fundamental", static_cast<std::int64_t>(s));
    FundamentalSeries series;
    series.name = fs.name;
    series.granularity_min = gran;
    series.availability_delay_min = 76;
    series.start = fund_start;
    series.actuals.resize(n_periods);
    series.forecasts.resize(n_periods);
    double err = 0.0;
    for (std::size_t k = 0; k < n_periods; ++k) {
      Minute t = fund_start + static_cast<Minute>(k) * gran;
      double tod = static_cast<double>(((t % kMinutesPerDay) + kMinutesPerDay) % kMinutesPerDay);
      double actual = fs.level +
                      fs.amplitude * std::sin(6.283185307179586 * tod / kMinutesPerDay + fs.phase) +
                      0.2 * rng.normal();
      err = fs.error_phi * err + fs.error_sigma * rng.normal();
      series.actuals[k] = actual;
      series.forecasts[k] = actual - err;
    }
    market.fundamentals.push_back(std::move(series));
  }

  auto aggregate_error = [&](Minute t) {
    double e = 0.0;
    for (const auto& s : market.fundamentals) e += s.error_at(t - (t % s.granularity_min));
    return e;
  };

  for (int day = 0; day < config.n_days; ++day) {
    Date T = config.first_day + day;
    for (int q = 1; q <= config.deliveries_per_day; ++q) {
      Rng price_rng(config.rng_seed, "price", day, q);
      Rng vol_rng(config.rng_seed, "volume", day, q);
      VwapGrid g;
      g.delivery_day = T;
      g.delivery_quarter = q;
      g.origin = grid_origin_minute(T);
      g.auction_seed_price = config.base_price;
      const int n = grid_length(q);
      g.prices.resize(n);
      g.volumes.resize(n);
      double walk = config.base_price;
      double observed = config.base_price;
      for (int u = 0; u < n; ++u) {
        if (u > 0)
          walk += config.mean_reversion * (config.base_price - walk) +
                  config.volatility * price_rng.normal();
        bool traded = vol_rng.uniform() >= 0.15;
        if (traded) {
          observed = walk + config.fundamental_effect * aggregate_error(g.interval_start(u));
          g.volumes[u] = 10.0 * std::exp(0.4 * vol_rng.normal());
        } else {
          g.volumes[u] = 0.0;  // price carries forward
        }
        g.prices[u] = observed;
      }
      market.grids.push_back(std::move(g));
    }
  }
  return market;
}

// ---------------------------------------------------------------------------
// CSV schemas
// ---------------------------------------------------------------------------

std::vector<TransactionRecord> load_transactions_csv(const std::filesystem::path& p,
                                                     int utc_offset_min) {
  CsvTable t = read_csv(p);
  const std::size_t c_id = t.col("trade_id"), c_ts = t.col("timestamp_utc"),
                    c_day = t.col("delivery_day"), c_q = t.col("delivery_quarter"),
                    c_price = t.col("price_eur_mwh"), c_vol = t.col("volume_mwh"),
                    c_mkt = t.col("market_id");
  std::vector<TransactionRecord> out;
  out.reserve(t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = p.string() + ": line " + format_int(t.line_numbers[i]);
    TransactionRecord r;
    r.trade_id = row[c_id];
    try {
      r.timestamp = parse_timestamp(row[c_ts]) + utc_offset_min;
      r.delivery_day = parse_date(row[c_day]);
      r.delivery_quarter = static_cast<int>(parse_int(row[c_q]));
      r.price = parse_double(row[c_price]);
      r.volume = parse_double(row[c_vol]);
    } catch (const Error& e) {
      fail_validation(where + ": " + e.what());
    }
    r.market_id = row[c_mkt];
    if (r.delivery_quarter < 1 || r.delivery_quarter > kQuartersPerDay)
      fail_validation(where + ": delivery_quarter outside [1,96]");
    if (r.volume <= 0.0) fail_validation(where + ": volume must be positive");
    if (r.timestamp >= delivery_start_minute(r.delivery_day, r.delivery_quarter))
      fail_validation(where + ": timestamp not before delivery start");
    out.push_back(std::move(r));
  }
  return out;
}

std::string write_transactions_csv(std::span<const TransactionRecord> recs, int utc_offset_min) {
  CsvWriter w({"trade_id", "timestamp_utc", "delivery_day", "delivery_quarter", "price_eur_mwh",
               "volume_mwh", "market_id"});
  for (const auto& r : recs) {
    w.add_row({r.trade_id, format_timestamp(r.timestamp - utc_offset_min),
               format_date(r.delivery_day), format_int(r.delivery_quarter),
               format_double(r.price), format_double(r.volume), r.market_id});
  }
  return w.str();
}

std::vector<FundamentalSeries> load_fundamentals_csv(const std::filesystem::path& p,
                                                     int utc_offset_min) {
  CsvTable t = read_csv(p);
  const std::size_t c_name = t.col("name"), c_ts = t.col("timestamp_utc"),
                    c_act = t.col("actual"), c_fc = t.col("forecast"),
                    c_gran = t.col("granularity_min"), c_delay = t.col("delay_min");
  struct Point {
    Minute t;
    double actual, forecast;
  };
  std::map<std::string, std::vector<Point>> by_name;
  std::map<std::string, std::pair<int, int>> meta;  // granularity, delay
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = p.string() + ": line " + format_int(t.line_numbers[i]);
    try {
      int gran = static_cast<int>(parse_int(row[c_gran]));
      int delay = static_cast<int>(parse_int(row[c_delay]));
      if (gran <= 0) fail_validation("granularity_min must be positive");
      if (delay < 0) fail_validation("delay_min must be nonnegative");
      auto [it, fresh] = meta.try_emplace(row[c_name], gran, delay);
      if (!fresh && it->second != std::make_pair(gran, delay))
        fail_validation("inconsistent granularity/delay for series '" + row[c_name] + "'");
      by_name[row[c_name]].push_back(
          {parse_timestamp(row[c_ts]) + utc_offset_min, parse_double(row[c_act]),
           parse_double(row[c_fc])});
    } catch (const Error& e) {
      fail_validation(where + ": " + e.what());
    }
  }
  std::vector<FundamentalSeries> out;
  for (auto& [name, pts] : by_name) {
    std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) { return a.t < b.t; });
    FundamentalSeries s;
    s.name = name;
    s.granularity_min = meta[name].first;
    s.availability_delay_min = meta[name].second;
    s.start = pts.front().t;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      if (pts[i].t != s.start + static_cast<Minute>(i) * s.granularity_min)
        fail_validation("series '" + name + "' has a coverage gap at " +
                        format_timestamp(pts[i].t));
      s.actuals.push_back(pts[i].actual);
      s.forecasts.push_back(pts[i].forecast);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::string write_fundamentals_csv(std::span<const FundamentalSeries> series, int utc_offset_min) {
  CsvWriter w({"name", "timestamp_utc", "actual", "forecast", "granularity_min", "delay_min"});
  for (const auto& s : series) {
    for (std::size_t k = 0; k < s.actuals.size(); ++k) {
      Minute t = s.start + static_cast<Minute>(k) * s.granularity_min;
      w.add_row({s.name, format_timestamp(t - utc_offset_min), format_double(s.actuals[k]),
                 format_double(s.forecasts[k]), format_int(s.granularity_min),
                 format_int(s.availability_delay_min)});
    }
  }
  return w.str();
}

AuctionPrices load_auction_prices_csv(const std::filesystem::path& p) {
  CsvTable t = read_csv(p);
  const std::size_t c_day = t.col("delivery_day"), c_q = t.col("delivery_quarter"),
                    c_price = t.col("price_eur_mwh");
  AuctionPrices out;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::string where = p.string() + ": line " + format_int(t.line_numbers[i]);
    try {
      out[{parse_date(row[c_day]), static_cast<int>(parse_int(row[c_q]))}] =
          parse_double(row[c_price]);
    } catch (const Error& e) {
      fail_validation(where + ": " + e.what());
    }
  }
  return out;
}

std::string write_auction_prices_csv(const AuctionPrices& prices) {
  CsvWriter w({"delivery_day", "delivery_quarter", "price_eur_mwh"});
  for (const auto& [key, price] : prices)
    w.add_row({format_date(key.first), format_int(key.second), format_double(price)});
  return w.str();
}

}  // namespace pathcast
