#include "pathcast/bands.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathcast/stats.hpp"

namespace pathcast {

namespace {

bool effectively_uniform(std::span<const double> ws) {
  if (ws.empty()) return true;
  double lo = ws[0], hi = ws[0];
  for (double w : ws) {
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  return hi - lo <= 1e-12 * std::max(1.0, std::abs(hi));
}

PredictionBand build_band_segments(const ScenarioEnsemble& ensemble,
                                   std::span<const double> weights, double scp, BandSide side,
                                   int tau) {
  if (!(scp > 0.0 && scp < 1.0)) fail_validation("scp must lie in (0,1)");
  ensemble.validate();
  const int H = ensemble.horizon();
  if (tau >= H) fail_validation("weighted band: empty horizon (tau >= H)");
  if (weights.size() != ensemble.paths.size())
    fail_validation("band weights size mismatch");
  const int n = ensemble.size();
  const std::size_t seg_len = static_cast<std::size_t>(H - tau);

  // Pathwise extremum over the future segment; smaller rank = less extreme.
  std::vector<double> extremity(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& p = ensemble.paths[static_cast<std::size_t>(i)];
    double ext = p[static_cast<std::size_t>(tau)];
    for (std::size_t u = static_cast<std::size_t>(tau); u < p.size(); ++u)
      ext = side == BandSide::upper ? std::max(ext, p[u]) : std::min(ext, p[u]);
    extremity[static_cast<std::size_t>(i)] = side == BandSide::upper ? ext : -ext;
  }
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (extremity[static_cast<std::size_t>(a)] != extremity[static_cast<std::size_t>(b)])
      return extremity[static_cast<std::size_t>(a)] < extremity[static_cast<std::size_t>(b)];
    return a < b;
  });

  PredictionBand band;
  band.side = side;
  band.scp = scp;
  band.from_step = tau;

  std::size_t keep = 0;
  if (effectively_uniform(weights)) {
    keep = static_cast<std::size_t>(std::ceil(scp * n - 1e-12));
  } else {
    double total = 0.0;
    for (double w : weights) total += w;
    // Maximal prefix with cumulative mass <= scp, plus the next path when
    // stopping would undershoot the target mass by more than half its weight.
    double cum = 0.0;
    while (keep < static_cast<std::size_t>(n)) {
      double w = weights[static_cast<std::size_t>(order[keep])] / total;
      if (cum + w > scp + 1e-12) break;
      cum += w;
      ++keep;
    }
    if (keep < static_cast<std::size_t>(n)) {
      double w_next = weights[static_cast<std::size_t>(order[keep])] / total;
      if (scp - cum > w_next / 2.0) ++keep;
    }
  }
  if (keep == 0) {
    keep = 1;
    band.degenerate = true;
  }

  band.values.assign(seg_len, side == BandSide::upper
                                  ? -std::numeric_limits<double>::infinity()
                                  : std::numeric_limits<double>::infinity());
  for (std::size_t k = 0; k < keep; ++k) {
    int idx = order[k];
    band.retained_indices.push_back(idx);
    const auto& p = ensemble.paths[static_cast<std::size_t>(idx)];
    for (std::size_t u = 0; u < seg_len; ++u) {
      double v = p[static_cast<std::size_t>(tau) + u];
      band.values[u] = side == BandSide::upper ? std::max(band.values[u], v)
                                               : std::min(band.values[u], v);
    }
  }
  std::sort(band.retained_indices.begin(), band.retained_indices.end());
  return band;
}

}  // namespace

PredictionBand build_band(const ScenarioEnsemble& ensemble, double scp, BandSide side) {
  return build_band_segments(ensemble, ensemble.weights, scp, side, 0);
}

std::vector<double> kernel_weights(std::span<const double> realized_prefix,
                                   const ScenarioEnsemble& ensemble,
                                   std::span<const double> initial_median,
                                   const ReweightParams& params, bool* underflow) {
  ensemble.validate();
  if (params.p <= 0.0) fail_validation("kernel shape p must be positive");
  if (params.lambda < 0.0) fail_validation("lambda must be nonnegative");
  const std::size_t tau = realized_prefix.size();
  if (tau < 1) fail_validation("kernel weights need at least one realized step");
  if (tau > ensemble.paths[0].size() || initial_median.size() < tau)
    fail_validation("realized prefix longer than the scenario horizon");
  if (underflow) *underflow = false;

  // Kernel scale: mean absolute deviation from the *initial* median, floored.
  double mae = 0.0;
  for (std::size_t u = 0; u < tau; ++u) mae += std::abs(realized_prefix[u] - initial_median[u]);
  mae = std::max(params.mae_floor, mae / static_cast<double>(tau));

  std::vector<double> tw(tau);
  double tw_sum = 0.0;
  for (std::size_t u = 0; u < tau; ++u) {
    tw[u] = std::exp(-params.lambda * static_cast<double>(tau - 1 - u));
    tw_sum += tw[u];
  }
  for (double& w : tw) w /= tw_sum;

  const std::size_t n = ensemble.paths.size();
  std::vector<double> log_k(n);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t u = 0; u < tau; ++u) {
      double d = realized_prefix[u] - ensemble.paths[i][u];
      s += tw[u] * d * d;
    }
    log_k[i] = -mae * std::pow(s, params.p / 2.0);
  }
  double max_log = *std::max_element(log_k.begin(), log_k.end());
  std::vector<double> out(n);
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = std::isfinite(max_log) ? std::exp(log_k[i] - max_log) : 0.0;
    sum += out[i];
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    if (underflow) *underflow = true;
    std::fill(out.begin(), out.end(), 1.0 / static_cast<double>(n));
    return out;
  }
  for (double& w : out) w /= sum;
  return out;
}

std::vector<double> inverse_mae_weights(std::span<const double> realized_prefix,
                                        const ScenarioEnsemble& ensemble) {
  ensemble.validate();
  const std::size_t tau = realized_prefix.size();
  if (tau < 1) fail_validation("inverse-MAE weights need at least one realized step");
  if (tau > ensemble.paths[0].size())
    fail_validation("realized prefix longer than the scenario horizon");
  const std::size_t n = ensemble.paths.size();
  std::vector<double> dev(n);
  std::vector<std::size_t> exact;
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t u = 0; u < tau; ++u) s += std::abs(realized_prefix[u] - ensemble.paths[i][u]);
    dev[i] = s / static_cast<double>(tau);
    if (dev[i] == 0.0) exact.push_back(i);
  }
  std::vector<double> out(n, 0.0);
  if (!exact.empty()) {
    // Limit convention: exact matches absorb all mass.
    for (std::size_t i : exact) out[i] = 1.0 / static_cast<double>(exact.size());
    return out;
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = 1.0 / dev[i];
    sum += out[i];
  }
  for (double& w : out) w /= sum;
  return out;
}

PredictionBand weighted_band(const ScenarioEnsemble& ensemble, std::span<const double> weights,
                             double scp, BandSide side, int tau) {
  double sum = 0.0;
  for (double w : weights) sum += w;
  if (std::abs(sum - 1.0) > 1e-9) fail_validation("weighted band: weights must be normalized");
  return build_band_segments(ensemble, weights, scp, side, tau);
}

std::vector<double> weighted_median_path(const ScenarioEnsemble& ensemble,
                                         std::span<const double> weights, int tau) {
  ensemble.validate();
  const int H = ensemble.horizon();
  if (tau >= H) fail_validation("weighted median: empty horizon (tau >= H)");
  if (weights.size() != ensemble.paths.size())
    fail_validation("weighted median: weights size mismatch");
  std::vector<double> out(static_cast<std::size_t>(H - tau));
  std::vector<double> col(ensemble.paths.size());
  for (int u = tau; u < H; ++u) {
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i)
      col[i] = ensemble.paths[i][static_cast<std::size_t>(u)];
    out[static_cast<std::size_t>(u - tau)] = stats::weighted_median_lower(col, weights);
  }
  return out;
}

}  // namespace pathcast
