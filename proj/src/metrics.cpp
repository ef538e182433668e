#include "pathcast/metrics.hpp"

#include <cmath>
#include <limits>

#include "pathcast/common.hpp"
#include "pathcast/stats.hpp"

namespace pathcast {
namespace metrics {

std::vector<double> crps_levels() {
  std::vector<double> out(99);
  for (int k = 1; k <= 99; ++k) out[static_cast<std::size_t>(k - 1)] = k / 100.0;
  return out;
}

double mae_paths(const std::vector<std::vector<double>>& realized,
                 const std::vector<std::vector<double>>& median_forecasts) {
  if (realized.size() != median_forecasts.size() || realized.empty())
    fail_validation("mae_paths: shape mismatch");
  double sum = 0.0;
  std::size_t cells = 0;
  for (std::size_t i = 0; i < realized.size(); ++i) {
    if (realized[i].size() != median_forecasts[i].size())
      fail_validation("mae_paths: shape mismatch at cell " +
                      format_int(static_cast<std::int64_t>(i)));
    for (std::size_t u = 0; u < realized[i].size(); ++u) {
      sum += std::abs(realized[i][u] - median_forecasts[i][u]);
      ++cells;
    }
  }
  if (cells == 0) fail_validation("mae_paths: empty grids");
  return sum / static_cast<double>(cells);
}

double pinball(double realized, double quantile, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) fail_validation("pinball: alpha outside (0,1)");
  if (realized < quantile) return (1.0 - alpha) * (quantile - realized);
  return alpha * (realized - quantile);
}

std::vector<double> pinball_profile_cell(std::span<const double> ensemble_values,
                                         std::span<const double> weights, double realized) {
  if (ensemble_values.empty()) fail_validation("pinball profile: empty ensemble");
  std::vector<double> out;
  out.reserve(99);
  for (double a : crps_levels())
    out.push_back(pinball(realized, stats::weighted_quantile(ensemble_values, weights, a), a));
  return out;
}

double crps_cell(std::span<const double> ensemble_values, std::span<const double> weights,
                 double realized) {
  std::vector<double> pb = pinball_profile_cell(ensemble_values, weights, realized);
  double s = 0.0;
  for (double v : pb) s += v;
  return s / static_cast<double>(pb.size());
}

double total_profit(std::span<const double> pnl) {
  if (pnl.empty()) fail_validation("total_profit: empty pnl");
  double s = 0.0;
  for (double v : pnl) s += v;
  return s;
}

double downside(std::span<const double> pnl, DownsideMode mode) {
  if (pnl.empty()) fail_validation("downside: empty pnl");
  double mu = mode == DownsideMode::spread ? 0.0 : stats::mean(pnl);
  double s = 0.0;
  for (double v : pnl) {
    double m = std::min(v - mu, 0.0);  // only below-target deliveries carry risk
    s += m * m;
  }
  return std::sqrt(s / static_cast<double>(pnl.size()));
}

double sortino(double profit, double downside_risk) {
  if (downside_risk < 0.0) fail_validation("sortino: negative downside risk");
  if (downside_risk == 0.0) {
    if (profit > 0.0) return std::numeric_limits<double>::infinity();
    if (profit < 0.0) return -std::numeric_limits<double>::infinity();
    return 0.0;
  }
  return profit / downside_risk;
}

}  // namespace metrics
}  // namespace pathcast
