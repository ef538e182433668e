#include "pathcast/config.hpp"

#include <algorithm>

namespace pathcast {

bool ConfigFile::has(const std::string& sec, const std::string& key) const {
  for (const auto& [name, entries] : sections)
    if (name == sec)
      for (const auto& [k, v] : entries)
        if (k == key) return true;
  return false;
}

std::string ConfigFile::get(const std::string& sec, const std::string& key,
                            const std::string& fallback) const {
  for (const auto& [name, entries] : sections)
    if (name == sec)
      for (const auto& [k, v] : entries)
        if (k == key) return v;
  return fallback;
}

std::string ConfigFile::require(const std::string& sec, const std::string& key) const {
  if (!has(sec, key)) fail_validation("config: missing required key [" + sec + "] " + key);
  return get(sec, key, "");
}

std::vector<std::string> ConfigFile::get_all(const std::string& sec,
                                             const std::string& key) const {
  std::vector<std::string> out;
  for (const auto& [name, entries] : sections)
    if (name == sec)
      for (const auto& [k, v] : entries)
        if (k == key) out.push_back(v);
  return out;
}

std::string ConfigFile::canonical_text() const {
  std::string out;
  for (const auto& [name, entries] : sections) {
    out += "[" + name + "]\n";
    for (const auto& [k, v] : entries) out += k + " = " + v + "\n";
  }
  return out;
}

ConfigFile parse_config_text(const std::string& text, const std::string& origin) {
  ConfigFile f;
  std::string section;
  int line_no = 0;
  for (const std::string& raw : split(text, '\n')) {
    ++line_no;
    std::string line = raw;
    if (auto pos = line.find('#'); pos != std::string::npos) line = line.substr(0, pos);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        fail_validation(origin + ": line " + format_int(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      f.sections.emplace_back(section, std::vector<std::pair<std::string, std::string>>{});
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos)
      fail_validation(origin + ": line " + format_int(line_no) + ": expected key = value");
    if (section.empty())
      fail_validation(origin + ": line " + format_int(line_no) + ": key outside any section");
    f.sections.back().second.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return f;
}

ConfigFile load_config(const std::filesystem::path& p) {
  if (!std::filesystem::exists(p)) fail_validation("config file not found: " + p.string());
  return parse_config_text(read_file(p), p.string());
}

namespace {

double to_double(const std::string& s, const std::string& where) {
  if (s == "inf" || s == "+inf") return std::numeric_limits<double>::infinity();
  bool ok = false;
  double v = parse_double(s, &ok);
  if (!ok) fail_validation("config: " + where + ": bad number '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s, const std::string& where) {
  bool ok = false;
  std::int64_t v = parse_int(s, &ok);
  if (!ok) fail_validation("config: " + where + ": bad integer '" + s + "'");
  return v;
}

bool to_bool(const std::string& s, const std::string& where) {
  if (s == "true" || s == "1" || s == "yes") return true;
  if (s == "false" || s == "0" || s == "no") return false;
  fail_validation("config: " + where + ": bad boolean '" + s + "'");
}

// "1:31" or "1,2,5"
std::vector<int> parse_lags(const std::string& s) {
  std::vector<int> out;
  if (auto pos = s.find(':'); pos != std::string::npos) {
    int lo = static_cast<int>(to_int(trim(s.substr(0, pos)), "lags"));
    int hi = static_cast<int>(to_int(trim(s.substr(pos + 1)), "lags"));
    for (int k = lo; k <= hi; ++k) out.push_back(k);
  } else {
    for (const std::string& part : split(s, ','))
      if (!trim(part).empty()) out.push_back(static_cast<int>(to_int(trim(part), "lags")));
  }
  if (out.empty()) fail_validation("config: empty lags list");
  return out;
}

// "<name> <kind> [key=value ...]"
FeatureChannel parse_channel(const std::string& line) {
  std::vector<std::string> tokens;
  for (const std::string& t : split(line, ' '))
    if (!trim(t).empty()) tokens.push_back(trim(t));
  if (tokens.size() < 2) fail_validation("config: channel needs '<name> <kind>': '" + line + "'");
  FeatureChannel c;
  c.name = tokens[0];
  c.kind = parse_channel_kind(tokens[1]);
  for (std::size_t i = 2; i < tokens.size(); ++i) {
    auto eq = tokens[i].find('=');
    if (eq == std::string::npos)
      fail_validation("config: channel option must be key=value: '" + tokens[i] + "'");
    std::string k = tokens[i].substr(0, eq), v = tokens[i].substr(eq + 1);
    if (k == "source")
      c.source = v;
    else if (k == "shift")
      c.shift_min = static_cast<int>(to_int(v, "channel shift"));
    else if (k == "granularity")
      c.granularity_min = static_cast<int>(to_int(v, "channel granularity"));
    else
      fail_validation("config: unknown channel option '" + k + "'");
  }
  return c;
}

// "<agent> <family> [attitude] <dynamics> [key=value ...]"
StrategyConfig parse_strategy(const std::string& line, double default_scp) {
  std::vector<std::string> tokens;
  for (const std::string& t : split(line, ' '))
    if (!trim(t).empty()) tokens.push_back(trim(t));
  if (tokens.size() < 3) fail_validation("config: strategy needs agent/family/dynamics: '" + line + "'");
  StrategyConfig sc;
  sc.spec.agent = parse_agent(tokens[0]);
  std::size_t i = 1;
  if (tokens[i] == "median") {
    sc.spec.family = StrategyFamily::median;
    sc.spec.attitude = BandAttitude::none;
    ++i;
  } else if (tokens[i] == "band") {
    sc.spec.family = StrategyFamily::band;
    ++i;
    if (i >= tokens.size()) fail_validation("config: band strategy needs an attitude");
    if (tokens[i] == "risk_averse")
      sc.spec.attitude = BandAttitude::risk_averse;
    else if (tokens[i] == "risk_seeking")
      sc.spec.attitude = BandAttitude::risk_seeking;
    else
      fail_validation("config: unknown band attitude '" + tokens[i] + "'");
    ++i;
    sc.spec.scp = default_scp;
  } else {
    fail_validation("config: unknown strategy family '" + tokens[i] + "'");
  }
  if (i >= tokens.size()) fail_validation("config: strategy missing dynamics: '" + line + "'");
  sc.spec.dynamics = parse_dynamics(tokens[i]);
  ++i;
  for (; i < tokens.size(); ++i) {
    auto eq = tokens[i].find('=');
    if (eq == std::string::npos)
      fail_validation("config: strategy option must be key=value: '" + tokens[i] + "'");
    std::string k = tokens[i].substr(0, eq), v = tokens[i].substr(eq + 1);
    if (k == "scp")
      sc.spec.scp = to_double(v, "strategy scp");
    else if (k == "p")
      sc.spec.reweight.p = to_double(v, "strategy p");
    else if (k == "lambda")
      sc.spec.reweight.lambda = to_double(v, "strategy lambda");
    else if (k == "eta") {
      bool numeric = false;
      double fixed = parse_double(v, &numeric);
      if (numeric || v == "inf") {
        sc.spec.threshold = ThresholdMethod::fixed;
        sc.spec.fixed_eta = v == "inf" ? std::numeric_limits<double>::infinity() : fixed;
      } else {
        sc.spec.threshold = parse_threshold(v);
      }
    } else if (k == "kind")
      sc.kind = parse_ensemble_kind(v);
    else if (k == "selection")
      sc.use_svs = v == "svs";
    else
      fail_validation("config: unknown strategy option '" + k + "'");
  }
  sc.spec.validate();
  return sc;
}

}  // namespace

std::string StrategyConfig::artifact_id() const {
  return spec.id() + "_" + ensemble_kind_name(kind) + (use_svs ? "_svs" : "");
}

RunConfig parse_run_config(const ConfigFile& file, const ConfigOverrides& overrides) {
  RunConfig rc;
  auto get = [&](const std::string& sec, const std::string& key, const std::string& def) {
    return file.get(sec, key, def);
  };

  rc.out_dir = !overrides.out.empty() ? overrides.out : get("run", "out", "out");
  std::string seed_str = !overrides.seed.empty() ? overrides.seed : get("run", "seed", "");
  if (seed_str.empty()) fail_validation("config: seed is mandatory ([run] seed or --seed)");
  rc.seed = static_cast<std::uint64_t>(to_int(seed_str, "seed"));
  rc.threads = static_cast<int>(
      to_int(!overrides.threads.empty() ? overrides.threads : get("run", "threads", "1"),
             "threads"));
  if (rc.threads < 1) fail_validation("config: threads must be >= 1");
  rc.utc_offset_min = static_cast<int>(to_int(get("run", "market_utc_offset_min", "0"), "offset"));

  rc.synth.n_days = static_cast<int>(to_int(get("synth", "n_days", "10"), "n_days"));
  rc.synth.deliveries_per_day =
      static_cast<int>(to_int(get("synth", "deliveries_per_day", "96"), "deliveries_per_day"));
  rc.synth.base_price = to_double(get("synth", "base_price", "50"), "base_price");
  rc.synth.volatility = to_double(get("synth", "volatility", "1"), "volatility");
  rc.synth.mean_reversion = to_double(get("synth", "mean_reversion", "0.05"), "mean_reversion");
  rc.synth.fundamental_effect =
      to_double(get("synth", "fundamental_effect", "1"), "fundamental_effect");
  rc.synth.rng_seed = rc.seed;
  rc.synth.first_day = parse_date(get("synth", "first_day", "2024-01-01"));

  rc.transactions_csv = get("data", "transactions", "data/transactions.csv");
  rc.fundamentals_csv = get("data", "fundamentals", "data/fundamentals.csv");
  rc.auction_csv = get("data", "auction_prices", "data/auction_prices.csv");
  rc.curves_csv = get("data", "curves", "");

  rc.window.train_start = parse_date(file.require("window", "train_start"));
  rc.window.first_test_day = parse_date(file.require("window", "first_test_day"));
  rc.window.last_test_day = parse_date(file.require("window", "last_test_day"));
  rc.window.validate();

  rc.features.lags = parse_lags(get("features", "lags", "1:31"));
  rc.features.sign_split = to_bool(get("features", "sign_split", "true"), "sign_split");
  for (const std::string& line : file.get_all("features", "channel"))
    rc.features.channels.push_back(parse_channel(line));
  if (rc.features.channels.empty()) fail_validation("config: at least one feature channel required");

  rc.forecast.horizon = static_cast<int>(to_int(get("forecast", "horizon", "31"), "horizon"));
  if (rc.forecast.horizon < 1) fail_validation("config: horizon must be >= 1");
  rc.features.horizon = rc.forecast.horizon;
  std::string mode = get("forecast", "mode", "multi_output");
  if (mode == "multi_output")
    rc.forecast.mode = ForecastMode::multi_output;
  else if (mode == "chain")
    rc.forecast.mode = ForecastMode::chain;
  else
    fail_validation("config: unknown forecast mode '" + mode + "'");
  rc.forecast.hyper.C = to_double(get("forecast", "svr_c", "1"), "svr_c");
  rc.forecast.hyper.epsilon = to_double(get("forecast", "svr_epsilon", "0.1"), "svr_epsilon");
  rc.forecast.hyper.solver_tolerance =
      to_double(get("forecast", "solver_tolerance", "1e-6"), "solver_tolerance");
  rc.forecast.kernel_levels.alpha1_laplace =
      to_double(get("forecast", "laplace_alpha1", "0.75"), "laplace_alpha1");
  rc.forecast.kernel_levels.alpha2_laplace =
      to_double(get("forecast", "laplace_alpha2", "0.5"), "laplace_alpha2");
  rc.forecast.kernel_levels.alpha1_gauss =
      to_double(get("forecast", "gauss_alpha1", "0.75"), "gauss_alpha1");
  rc.forecast.kernel_levels.alpha2_gauss =
      to_double(get("forecast", "gauss_alpha2", "0.75"), "gauss_alpha2");
  rc.forecast.lead_minutes = static_cast<int>(to_int(get("forecast", "lead_minutes", "185"), "lead_minutes"));
  rc.forecast.per_quarter_models =
      to_bool(get("forecast", "per_quarter_models", "false"), "per_quarter_models");
  rc.forecast.threads = rc.threads;

  for (const std::string& k : split(get("ensembles", "kinds", "historical,fundamental,naive"), ','))
    if (!trim(k).empty()) rc.ensemble_kinds.push_back(parse_ensemble_kind(trim(k)));
  rc.naive_draws = static_cast<int>(to_int(get("ensembles", "naive_draws", "1000"), "naive_draws"));
  rc.svs_enabled = to_bool(get("ensembles", "svs", "true"), "svs");
  rc.svs_omega = to_double(get("ensembles", "svs_omega", "0.01"), "svs_omega");
  rc.svs_minimum = static_cast<int>(to_int(get("ensembles", "svs_minimum", "10"), "svs_minimum"));
  rc.svs_ma_window =
      static_cast<int>(to_int(get("ensembles", "svs_ma_window", "10"), "svs_ma_window"));
  std::string dist = get("ensembles", "svs_distribution", "pooled");
  if (dist == "pooled")
    rc.svs_distribution = SvsDistribution::pooled;
  else if (dist == "per_step_mean")
    rc.svs_distribution = SvsDistribution::per_step_mean;
  else
    fail_validation("config: unknown svs_distribution '" + dist + "'");
  rc.band_scp = to_double(get("ensembles", "band_scp", "0.9"), "band_scp");

  for (const std::string& line : file.get_all("backtest", "strategy"))
    rc.strategies.push_back(parse_strategy(line, rc.band_scp));

  if (file.has("gridsearch", "strategy")) {
    StrategyConfig g = parse_strategy(file.require("gridsearch", "strategy"), rc.band_scp);
    rc.grid_template = g.spec;
    rc.grid_kind = g.kind;
    rc.grid_svs = g.use_svs;
    rc.calibration_first = parse_date(file.require("gridsearch", "calibration_first_day"));
    rc.calibration_last = parse_date(file.require("gridsearch", "calibration_last_day"));
    rc.grid_maximize = to_bool(get("gridsearch", "maximize", "true"), "maximize");
    rc.grid_axes = rc.grid_template.family == StrategyFamily::band ? default_band_grid()
                                                                   : default_median_grid();
    if (file.has("gridsearch", "scp_values")) {
      rc.grid_axes.scp.clear();
      for (const std::string& s : split(file.require("gridsearch", "scp_values"), ','))
        rc.grid_axes.scp.push_back(to_double(trim(s), "scp_values"));
    }
    if (file.has("gridsearch", "p_values")) {
      rc.grid_axes.p.clear();
      for (const std::string& s : split(file.require("gridsearch", "p_values"), ','))
        rc.grid_axes.p.push_back(to_double(trim(s), "p_values"));
    }
    if (file.has("gridsearch", "lambda_values")) {
      rc.grid_axes.lambda.clear();
      for (const std::string& s : split(file.require("gridsearch", "lambda_values"), ','))
        rc.grid_axes.lambda.push_back(to_double(trim(s), "lambda_values"));
    }
    if (file.has("gridsearch", "eta_values")) {
      rc.grid_axes.eta.clear();
      for (const std::string& s : split(file.require("gridsearch", "eta_values"), ','))
        rc.grid_axes.eta.push_back(parse_threshold(trim(s)));
    }
  }

  for (const std::string& k : split(get("report", "kinds", ""), ',')) {
    std::string t = trim(k);
    if (t.empty()) continue;
    bool svs = false;
    if (t.size() > 4 && t.substr(t.size() - 4) == "+svs") {
      svs = true;
      t = t.substr(0, t.size() - 4);
    }
    rc.report.kinds.emplace_back(parse_ensemble_kind(t), svs);
  }
  if (rc.report.kinds.empty())
    for (EnsembleKind k : rc.ensemble_kinds) rc.report.kinds.emplace_back(k, false);
  rc.report.sample_quarter =
      static_cast<int>(to_int(get("report", "sample_quarter", "1"), "sample_quarter"));

  // Thread count is an execution detail with no effect on artifacts, so it
  // stays out of the semantic hash.
  std::string effective = file.canonical_text();
  effective += "\n[effective]\nout = " + rc.out_dir.string() +
               "\nseed = " + format_int(static_cast<std::int64_t>(rc.seed)) + "\n";
  rc.config_hash = sha256_hex(effective);
  return rc;
}

RunConfig load_run_config(const std::filesystem::path& p, const ConfigOverrides& overrides) {
  return parse_run_config(load_config(p), overrides);
}

}  // namespace pathcast
