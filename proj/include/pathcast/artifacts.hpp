#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "pathcast/bands.hpp"
#include "pathcast/config.hpp"
#include "pathcast/ensembles.hpp"
#include "pathcast/strategies.hpp"

namespace pathcast {

// Versioned little-endian binary blobs for the bulky artifacts; CSV/JSON for
// anything a person or a plotting script reads.

std::string serialize_market_store(const MarketStore& store);
MarketStore deserialize_market_store(const std::string& bytes);

std::string serialize_path_models(const PathModels& models);
PathModels deserialize_path_models(const std::string& bytes);

std::string forecast_to_json(const PathForecast& pf);
PathForecast forecast_from_json(const std::string& text);

// ensembles/<date>/<quarter>.<kind>.csv: provenance, weight, s1..sH
std::string ensemble_to_csv(const ScenarioEnsemble& e);
ScenarioEnsemble ensemble_from_csv(const std::string& text, EnsembleKind kind,
                                   const ForecastOrigin& origin);

// bands CSV for plotting: step, lower, median, upper, scp
std::string band_table_csv(std::span<const double> lower, std::span<const double> median,
                           std::span<const double> upper, double scp);

// backtest/<spec>/trades.csv
struct TradeLedgerRow {
  Date day;
  int quarter = 0;
  TradeOutcome outcome;
};
std::string trades_to_csv(std::span<const TradeLedgerRow> rows);

struct Manifest {
  std::string command;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> inputs;     // name -> sha256
  std::map<std::string, std::string> artifacts;  // out-relative path -> sha256

  std::string to_json() const;
};

// Writes the blob atomically and records its checksum in the manifest.
class ArtifactWriter {
 public:
  ArtifactWriter(std::filesystem::path out_dir, Manifest& manifest)
      : out_dir_(std::move(out_dir)), manifest_(manifest) {}
  void write(const std::string& rel_path, const std::string& bytes);

 private:
  std::filesystem::path out_dir_;
  Manifest& manifest_;
};

void write_manifest(const std::filesystem::path& out_dir, const Manifest& m);

}  // namespace pathcast
