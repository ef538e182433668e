#include "pathcast/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "pathcast/common.hpp"

namespace pathcast {
namespace stats {

double mean(std::span<const double> xs) {
  if (xs.empty()) fail_validation("mean of empty sample");
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double pop_std(std::span<const double> xs) {
  double mu = mean(xs);
  double s = 0.0;
  for (double x : xs) s += (x - mu) * (x - mu);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

Standardization standardize(std::span<const double> xs, std::vector<double>& out) {
  if (xs.empty()) fail_validation("standardize: empty path");
  Standardization st;
  st.mean = mean(xs);
  double sd = pop_std(xs);
  st.std = sd > 0.0 ? sd : 1.0;
  out.resize(xs.size());
  if (sd > 0.0) {
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (xs[i] - st.mean) / st.std;
  } else {
    std::fill(out.begin(), out.end(), 0.0);
  }
  return st;
}

std::vector<double> destandardize(std::span<const double> zs, const Standardization& s) {
  std::vector<double> out(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) out[i] = s.mean + s.std * zs[i];
  return out;
}

double quantile_linear(std::vector<double> xs, double p) {
  if (xs.empty()) fail_validation("quantile of empty sample");
  p = std::clamp(p, 0.0, 1.0);
  std::sort(xs.begin(), xs.end());
  if (xs.size() == 1) return xs[0];
  double h = p * static_cast<double>(xs.size() - 1);
  std::size_t i = static_cast<std::size_t>(h);
  if (i >= xs.size() - 1) return xs.back();
  double frac = h - static_cast<double>(i);
  return xs[i] + frac * (xs[i + 1] - xs[i]);
}

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

}  // namespace

double weighted_quantile(std::span<const double> xs, std::span<const double> ws, double p) {
  if (xs.empty() || xs.size() != ws.size()) fail_validation("weighted_quantile: bad input");
  if (effectively_uniform(ws)) return quantile_linear({xs.begin(), xs.end()}, p);
  p = std::clamp(p, 0.0, 1.0);
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return a < b;
  });
  double total = 0.0;
  for (double w : ws) total += w;
  if (total <= 0.0) fail_validation("weighted_quantile: nonpositive total weight");
  double cum = 0.0;
  for (std::size_t k : order) {
    cum += ws[k] / total;
    if (cum >= p - 1e-15) return xs[k];
  }
  return xs[order.back()];
}

double weighted_median_lower(std::span<const double> xs, std::span<const double> ws) {
  if (xs.empty() || xs.size() != ws.size()) fail_validation("weighted_median: bad input");
  std::vector<std::size_t> order(xs.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (xs[a] != xs[b]) return xs[a] < xs[b];
    return a < b;
  });
  double total = 0.0;
  for (double w : ws) total += w;
  if (total <= 0.0) fail_validation("weighted_median: nonpositive total weight");
  double cum = 0.0;
  for (std::size_t k : order) {
    cum += ws[k] / total;
    if (cum >= 0.5 - 1e-15) return xs[k];
  }
  return xs[order.back()];
}

double median_lower(std::span<const double> xs) {
  std::vector<double> ws(xs.size(), 1.0);
  return weighted_median_lower(xs, ws);
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) fail_validation("normal_quantile: p outside (0,1)");
  // Acklam's rational approximation.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double x;
  if (p < plow) {
    double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p <= phigh) {
    double q = p - 0.5, r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  } else {
    double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  // One Halley step against the exact CDF brings the error near machine eps.
  const double inv_sqrt2 = 0.7071067811865475244;
  const double inv_sqrt2pi = 0.3989422804014326779;
  double e = 0.5 * std::erfc(-x * inv_sqrt2) - p;
  double u = e / (inv_sqrt2pi * std::exp(-x * x / 2));
  x = x - u / (1 + x * u / 2);
  return x;
}

}  // namespace stats
}  // namespace pathcast
