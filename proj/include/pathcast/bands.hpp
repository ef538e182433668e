#pragma once

#include <span>
#include <vector>

#include "pathcast/ensembles.hpp"

namespace pathcast {

enum class BandSide { upper, lower };

// Simultaneous-coverage band over path steps. `from_step` = tau means the
// band covers steps tau+1..H (0 for a full-horizon band).
struct PredictionBand {
  BandSide side = BandSide::upper;
  double scp = 0.5;
  int from_step = 0;
  std::vector<double> values;
  std::vector<int> retained_indices;
  bool degenerate = false;  // filter emptied the set; kept the least extreme path
};

// Staszewska-style filtering: drop paths by pathwise extremum until the
// retained probability mass matches the SCP, then take the pointwise
// envelope. Uniform weights retain exactly ceil(scp * n) paths.
PredictionBand build_band(const ScenarioEnsemble& ensemble, double scp, BandSide side);

struct ReweightParams {
  double p = 1.0;          // generalized Gaussian shape
  double lambda = 0.0;     // exponential time-decay rate
  double mae_floor = 0.01; // EUR/MWh lower bound on the kernel scale
};

// Generalized Gaussian proximity weights of each scenario to the realized
// path prefix (steps 1..tau). Output is normalized to sum 1; if everything
// underflows the weights fall back to uniform and *underflow is set.
std::vector<double> kernel_weights(std::span<const double> realized_prefix,
                                   const ScenarioEnsemble& ensemble,
                                   std::span<const double> initial_median,
                                   const ReweightParams& params, bool* underflow = nullptr);

// Benchmark weighting: inversely proportional to the mean absolute deviation
// from the realized prefix; exact matches take all the mass (split on ties).
std::vector<double> inverse_mae_weights(std::span<const double> realized_prefix,
                                        const ScenarioEnsemble& ensemble);

// Band / median over the future segments u > tau under the weighted measure.
PredictionBand weighted_band(const ScenarioEnsemble& ensemble, std::span<const double> weights,
                             double scp, BandSide side, int tau);
std::vector<double> weighted_median_path(const ScenarioEnsemble& ensemble,
                                         std::span<const double> weights, int tau);

}  // namespace pathcast
