#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "pathcast/common.hpp"

namespace pathcast {

// Quarter-hourly delivery products on a 5-minute VWAP grid. The grid opens at
// 16:00 on the day before delivery and closes five minutes before delivery
// start; buckets are left-closed right-open so a trade on a boundary belongs
// to the interval it opens.
constexpr int kGridStepMin = 5;
constexpr int kQuarterMin = 15;
constexpr int kQuartersPerDay = 96;
constexpr int kGridOpenLeadMin = 480;  // 16:00 T-1 = delivery-day midnight - 480

inline Minute delivery_start_minute(Date day, int quarter) {
  return midnight_minute(day) + Minute(quarter - 1) * kQuarterMin;
}
inline Minute grid_origin_minute(Date day) { return midnight_minute(day) - kGridOpenLeadMin; }
inline int grid_length(int quarter) {
  return (kGridOpenLeadMin + (quarter - 1) * kQuarterMin - kGridStepMin) / kGridStepMin;
}

struct TransactionRecord {
  std::string trade_id;
  Minute timestamp = 0;  // market-local minutes
  Date delivery_day;
  int delivery_quarter = 1;  // 1..96
  double price = 0.0;        // EUR/MWh
  double volume = 0.0;       // MWh
  std::string market_id;
};

struct VwapGrid {
  Date delivery_day;
  int delivery_quarter = 1;
  Minute origin = 0;            // grid start, 16:00 T-1
  std::vector<double> prices;   // one entry per 5-minute interval, gap-filled
  std::vector<double> volumes;  // 0 for intervals without trades
  double auction_seed_price = std::numeric_limits<double>::quiet_NaN();

  int size() const { return static_cast<int>(prices.size()); }
  Minute interval_start(int u) const { return origin + Minute(u) * kGridStepMin; }
  // Index of the interval opening `lead` minutes before delivery start.
  int index_for_lead(int lead_min) const;
};

struct FundamentalSeries {
  std::string name;
  int granularity_min = 15;
  int availability_delay_min = 0;  // publication delay (nu)
  Minute start = 0;                // first period start, aligned to granularity
  std::vector<double> actuals;
  std::vector<double> forecasts;

  bool covers(Minute m) const;
  double actual_at(Minute m) const;    // value of the period containing m
  double forecast_at(Minute m) const;
  double error_at(Minute m) const { return actual_at(m) - forecast_at(m); }
};

struct SyntheticMarketConfig {
  int n_days = 10;
  int deliveries_per_day = kQuartersPerDay;
  double base_price = 50.0;        // EUR/MWh
  double volatility = 1.0;         // EUR/MWh per step
  double mean_reversion = 0.05;    // in [0,1]
  double fundamental_effect = 1.0; // EUR/MWh per unit of fundamental error
  std::uint64_t rng_seed = 1;
  Date first_day = Date{19723};    // 2024-01-01
};

struct SyntheticMarket {
  std::vector<VwapGrid> grids;  // ordered by (day, quarter)
  std::vector<FundamentalSeries> fundamentals;
};

// Immutable lookup view over a loaded dataset. Built once, then shared
// read-only across threads.
struct MarketStore {
  std::vector<VwapGrid> grids;  // sorted by (day, quarter)
  std::vector<FundamentalSeries> fundamentals;

  void sort_index();
  const VwapGrid* find_grid(Date day, int quarter) const;
  const VwapGrid& grid(Date day, int quarter) const;
  const FundamentalSeries* find_series(const std::string& name) const;
  const FundamentalSeries& series(const std::string& name) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

// Volume-weighted aggregation of one delivery's transactions onto the grid.
// Empty intervals carry the previous price forward; intervals before the
// first trade carry the intraday auction price. Pass NaN when no auction
// price exists.
VwapGrid aggregate_vwap(std::span<const TransactionRecord> transactions, Date delivery_day,
                        int delivery_quarter, double auction_price);

// g * floor((m - shift) / g): start of the last fully published period of
// granularity g, given a publication shift. Errors when m < shift.
Minute availability_floor(Minute m, int shift_min, int granularity_min);

SyntheticMarket generate_synthetic_market(const SyntheticMarketConfig& config);

// CSV schemas (fixed column sets). Timestamps are stored in UTC; the
// market-local frame used internally is UTC + utc_offset_min.
std::vector<TransactionRecord> load_transactions_csv(const std::filesystem::path& p,
                                                     int utc_offset_min = 0);
std::string write_transactions_csv(std::span<const TransactionRecord> recs,
                                   int utc_offset_min = 0);

std::vector<FundamentalSeries> load_fundamentals_csv(const std::filesystem::path& p,
                                                     int utc_offset_min = 0);
std::string write_fundamentals_csv(std::span<const FundamentalSeries> series,
                                   int utc_offset_min = 0);

// (delivery_day, quarter) -> auction price
using AuctionPrices = std::map<std::pair<Date, int>, double>;
AuctionPrices load_auction_prices_csv(const std::filesystem::path& p);
std::string write_auction_prices_csv(const AuctionPrices& prices);

}  // namespace pathcast
