#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "pathcast/ensembles.hpp"
#include "pathcast/path_forecast.hpp"
#include "pathcast/strategies.hpp"

namespace pathcast {

// Flat key-value text with [sections]; '#' starts a comment; repeated keys
// accumulate in file order (used for channel and strategy lists).
struct ConfigFile {
  std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections;

  bool has(const std::string& sec, const std::string& key) const;
  std::string get(const std::string& sec, const std::string& key,
                  const std::string& fallback) const;
  std::string require(const std::string& sec, const std::string& key) const;
  std::vector<std::string> get_all(const std::string& sec, const std::string& key) const;
  std::string canonical_text() const;
};

ConfigFile parse_config_text(const std::string& text, const std::string& origin);
ConfigFile load_config(const std::filesystem::path& p);

struct StrategyConfig {
  StrategySpec spec;
  EnsembleKind kind = EnsembleKind::historical;
  bool use_svs = false;

  std::string artifact_id() const;  // spec id + ensemble source
};

struct ReportConfig {
  std::vector<std::pair<EnsembleKind, bool>> kinds;  // kind, svs
  int sample_quarter = 1;
};

struct RunConfig {
  std::filesystem::path out_dir = "out";
  std::uint64_t seed = 0;
  int threads = 1;
  int utc_offset_min = 0;

  SyntheticMarketConfig synth;

  std::filesystem::path transactions_csv;
  std::filesystem::path fundamentals_csv;
  std::filesystem::path auction_csv;
  std::filesystem::path curves_csv;  // optional, empty when unset

  ExpandingWindowPlan window;
  FeatureSpec features;
  ForecastConfig forecast;

  std::vector<EnsembleKind> ensemble_kinds;
  int naive_draws = 1000;
  bool svs_enabled = true;
  double svs_omega = 0.01;
  int svs_minimum = 10;
  int svs_ma_window = 10;
  SvsDistribution svs_distribution = SvsDistribution::pooled;
  double band_scp = 0.9;
  std::vector<double> merit_deltas = {500.0, 1000.0, 2000.0};

  std::vector<StrategyConfig> strategies;

  StrategySpec grid_template;
  EnsembleKind grid_kind = EnsembleKind::historical;
  bool grid_svs = false;
  Date calibration_first;
  Date calibration_last;
  bool grid_maximize = true;
  GridAxes grid_axes;  // defaults per family when not overridden

  ReportConfig report;

  std::string config_hash;  // sha256 of the canonical effective text

  std::filesystem::path data_path(const std::filesystem::path& p) const {
    return p.is_absolute() ? p : out_dir / p;
  }
};

struct ConfigOverrides {
  std::string out;
  std::string seed;
  std::string threads;
};

RunConfig parse_run_config(const ConfigFile& file, const ConfigOverrides& overrides);
RunConfig load_run_config(const std::filesystem::path& p, const ConfigOverrides& overrides);

}  // namespace pathcast
