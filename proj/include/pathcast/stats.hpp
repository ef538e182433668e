#pragma once

#include <span>
#include <vector>

namespace pathcast {
namespace stats {

double mean(std::span<const double> xs);
// Population standard deviation (divides by n).
double pop_std(std::span<const double> xs);

// Standardization with the degenerate-path convention: a zero-variance input
// maps to all zeros and std is recorded as 1.
struct Standardization {
  double mean = 0.0;
  double std = 1.0;
};
Standardization standardize(std::span<const double> xs, std::vector<double>& out);
std::vector<double> destandardize(std::span<const double> zs, const Standardization& s);

// Unweighted quantile, linear interpolation between order statistics
// (position (n-1)*p). `p` is clamped to [0, 1].
double quantile_linear(std::vector<double> xs, double p);

// Shared empirical quantile convention: effectively-uniform weights fall back
// to the interpolating quantile above; genuinely non-uniform weights use the
// left-continuous inverse CDF (smallest x with F(x) >= p).
double weighted_quantile(std::span<const double> xs, std::span<const double> ws, double p);

// Lower weighted median: smallest x with cumulative weight >= 1/2. With
// uniform weights this is the classical lower median.
double weighted_median_lower(std::span<const double> xs, std::span<const double> ws);
double median_lower(std::span<const double> xs);

// Standard normal quantile, accurate to ~1e-15 (Acklam initial guess plus one
// Halley refinement on erfc).
double normal_quantile(double p);

}  // namespace stats
}  // namespace pathcast
