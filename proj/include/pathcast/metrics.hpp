#pragma once

#include <span>
#include <vector>

namespace pathcast {
namespace metrics {

// Quantile levels used for the CRPS approximation: 0.01 .. 0.99.
std::vector<double> crps_levels();

// Mean absolute deviation over aligned (cell -> path) grids; the denominator
// counts every cell of every path.
double mae_paths(const std::vector<std::vector<double>>& realized,
                 const std::vector<std::vector<double>>& median_forecasts);

// Two-branch pinball loss at level alpha.
double pinball(double realized, double quantile, double alpha);

// Pinball averaged over the level grid, with empirical weighted quantiles of
// the ensemble values at one cell.
double crps_cell(std::span<const double> ensemble_values, std::span<const double> weights,
                 double realized);
// Per-level pinball at one cell (99 values).
std::vector<double> pinball_profile_cell(std::span<const double> ensemble_values,
                                         std::span<const double> weights, double realized);

double total_profit(std::span<const double> pnl);

enum class DownsideMode { spread, seller };  // mu = 0 vs mu = mean(pnl)
double downside(std::span<const double> pnl, DownsideMode mode);

// Profit over downside risk. Zero downside returns +inf / 0 / -inf by the
// sign of the profit.
double sortino(double profit, double downside_risk);

}  // namespace metrics
}  // namespace pathcast
