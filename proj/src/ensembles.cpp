#include "pathcast/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "pathcast/rng.hpp"
#include "pathcast/stats.hpp"

namespace pathcast {

std::string ensemble_kind_name(EnsembleKind k) {
  switch (k) {
    case EnsembleKind::historical: return "historical";
    case EnsembleKind::fundamental: return "fundamental";
    case EnsembleKind::naive: return "naive";
  }
  return "?";
}

EnsembleKind parse_ensemble_kind(const std::string& s) {
  if (s == "historical") return EnsembleKind::historical;
  if (s == "fundamental") return EnsembleKind::fundamental;
  if (s == "naive") return EnsembleKind::naive;
  fail_validation("unknown ensemble kind '" + s + "'");
}

void ScenarioEnsemble::validate() const {
  if (paths.empty()) fail_validation("empty scenario ensemble");
  if (weights.size() != paths.size() || provenance.size() != paths.size())
    fail_validation("ensemble field sizes disagree");
  double sum = 0.0;
  for (double w : weights) {
    if (w < 0.0) fail_validation("negative scenario weight");
    sum += w;
  }
  if (std::abs(sum - 1.0) > 1e-9) fail_validation("scenario weights must sum to 1");
  for (const auto& p : paths)
    if (p.size() != paths[0].size()) fail_validation("ragged scenario paths");
}

std::vector<std::vector<double>> in_sample_residual_paths(const PathModels& models) {
  const int H = models.config.horizon;
  const std::size_t n = models.row_origins.size();
  std::vector<std::vector<double>> out(n, std::vector<double>(static_cast<std::size_t>(H)));
  for (int h = 0; h < H; ++h) {
    const auto& y = models.targets_std[static_cast<std::size_t>(h)];
    const auto& fx = models.in_sample_std[static_cast<std::size_t>(h)];
    const double sd = models.target_stats[static_cast<std::size_t>(h)].std;
    for (std::size_t i = 0; i < n; ++i)
      out[i][static_cast<std::size_t>(h)] = sd * (y[i] - fx[i]);
  }
  return out;
}

ScenarioEnsemble historical_ensemble(const PathForecast& point_forecast,
                                     const std::vector<std::vector<double>>& residual_paths) {
  if (residual_paths.empty()) fail_validation("historical ensemble: empty residual set");
  const std::size_t H = point_forecast.values.size();
  ScenarioEnsemble e;
  e.origin = point_forecast.origin;
  e.kind = EnsembleKind::historical;
  e.paths.reserve(residual_paths.size());
  for (std::size_t i = 0; i < residual_paths.size(); ++i) {
    if (residual_paths[i].size() != H)
      fail_validation("residual path length differs from forecast horizon");
    std::vector<double> p(H);
    for (std::size_t h = 0; h < H; ++h) p[h] = point_forecast.values[h] + residual_paths[i][h];
    e.paths.push_back(std::move(p));
    e.provenance.push_back("train " + format_int(static_cast<std::int64_t>(i)));
  }
  e.weights.assign(e.paths.size(), 1.0 / static_cast<double>(e.paths.size()));
  return e;
}

std::vector<double> FundamentalScenario::positive_part() const {
  std::vector<double> out(delta_fs.size());
  for (std::size_t i = 0; i < delta_fs.size(); ++i) out[i] = std::max(delta_fs[i], 0.0);
  return out;
}

std::vector<double> FundamentalScenario::negative_part() const {
  std::vector<double> out(delta_fs.size());
  for (std::size_t i = 0; i < delta_fs.size(); ++i) out[i] = std::min(delta_fs[i], 0.0);
  return out;
}

std::vector<FundamentalScenario> build_fundamentalscenarios_impl(
    const FundamentalSeries& series, std::span<const Minute> train_origins, int scenario_steps) {
  std::vector<FundamentalScenario> out;
  out.reserve(train_origins.size());
  const int g = series.granularity_min;
  for (Minute t : train_origins) {
    FundamentalScenario sc;
    sc.variable = series.name;
    sc.delta_known = series.error_at(availability_floor(t, series.availability_delay_min, g));
    const Minute p0 = g * (t / g);
    sc.delta_future.resize(static_cast<std::size_t>(scenario_steps));
    sc.delta_fs.resize(static_cast<std::size_t>(scenario_steps));
    for (int j = 1; j <= scenario_steps; ++j) {
      double fut = series.error_at(p0 + Minute(j) * g);
      sc.delta_future[static_cast<std::size_t>(j - 1)] = fut;
      sc.delta_fs[static_cast<std::size_t>(j - 1)] = sc.delta_known - fut;
    }
    out.push_back(std::move(sc));
  }
  return out;
}

std::vector<FundamentalScenario> build_fundamental_scenarios(const FundamentalSeries& series,
                                                             std::span<const Minute> train_origins,
                                                             int horizon, int scenario_steps) {
  if (horizon < 1) fail_validation("horizon must be positive");
  if (scenario_steps < 1) fail_validation("scenario_steps must be positive");
  return build_fundamentalscenarios_impl(series, train_origins, scenario_steps);
}

std::vector<ScenarioSubstitution> fundamental_substitutions(const FeatureSpec& spec,
                                                            const MarketStore& store,
                                                            std::span<const Minute> train_origins) {
  std::vector<ScenarioSubstitution> subs(train_origins.size());
  for (const auto& c : spec.channels) {
    if (c.kind != ChannelKind::fundamental_scenario) continue;
    const FundamentalSeries& s = store.series(c.source);
    int gran = c.granularity_min > 0 ? c.granularity_min : s.granularity_min;
    int steps = spec.scenario_steps(gran);
    auto scen = build_fundamental_scenarios(s, train_origins, spec.horizon, steps);
    for (std::size_t i = 0; i < subs.size(); ++i) subs[i][c.name] = scen[i].delta_fs;
  }
  return subs;
}

ScenarioEnsemble fundamental_ensemble(const PathModels& models, const FeatureSpec& spec,
                                      const MarketStore& store, const ForecastOrigin& origin,
                                      double origin_price,
                                      const std::vector<ScenarioSubstitution>& substitutions) {
  bool has_channel = false;
  for (const auto& c : spec.channels)
    if (c.kind == ChannelKind::fundamental_scenario) has_channel = true;
  if (!has_channel)
    fail_validation("fundamental ensemble: no fundamental_scenario channel in the feature spec");
  if (substitutions.empty()) fail_validation("fundamental ensemble: no scenarios");

  ScenarioEnsemble e;
  e.origin = origin;
  e.kind = EnsembleKind::fundamental;
  const double aux_raw = store.grid(origin.day, origin.quarter)
                             .prices[static_cast<std::size_t>(origin.m)];
  const double aux_std = (aux_raw - models.aux_stats.mean) / models.aux_stats.std;
  for (std::size_t i = 0; i < substitutions.size(); ++i) {
    std::vector<double> raw =
        assemble_raw_features(spec, store, origin, FutureAccess::zeroed, &substitutions[i]);
    std::vector<double> x = apply_column_stats(raw, models.column_stats);
    PathForecast pf = forecast_path(models, x, aux_std, origin, origin_price);
    e.paths.push_back(std::move(pf.values));
    e.provenance.push_back("train " + format_int(static_cast<std::int64_t>(i)));
  }
  e.weights.assign(e.paths.size(), 1.0 / static_cast<double>(e.paths.size()));
  return e;
}

std::vector<std::vector<double>> collect_increment_paths(const MarketStore& store,
                                                         std::span<const Date> days, int quarter,
                                                         int lead_minutes, int horizon) {
  std::vector<std::vector<double>> out;
  for (Date day : days) {
    const VwapGrid* g = store.find_grid(day, quarter);
    if (!g) continue;
    int m = g->index_for_lead(lead_minutes);
    std::vector<double> inc(static_cast<std::size_t>(horizon));
    for (int h = 1; h <= horizon; ++h)
      inc[static_cast<std::size_t>(h - 1)] = g->prices[static_cast<std::size_t>(m + h)] -
                                             g->prices[static_cast<std::size_t>(m + h - 1)];
    out.push_back(std::move(inc));
  }
  return out;
}

ScenarioEnsemble naive_ensemble(const std::vector<std::vector<double>>& increment_paths,
                                double last_price, int n_draws, std::uint64_t global_seed,
                                const ForecastOrigin& origin) {
  if (increment_paths.empty()) fail_validation("naive ensemble: empty history");
  if (n_draws < 1) fail_validation("naive ensemble: n_draws must be positive");
  Rng rng(global_seed, "naive", origin.day.days, origin.quarter, origin.m);
  ScenarioEnsemble e;
  e.origin = origin;
  e.kind = EnsembleKind::naive;
  e.paths.reserve(static_cast<std::size_t>(n_draws));
  for (int k = 0; k < n_draws; ++k) {
    std::size_t pick = static_cast<std::size_t>(rng.index(increment_paths.size()));
    const auto& inc = increment_paths[pick];
    std::vector<double> p(inc.size());
    double level = last_price;
    for (std::size_t h = 0; h < inc.size(); ++h) {
      level += inc[h];
      p[h] = level;
    }
    e.paths.push_back(std::move(p));
    e.provenance.push_back("naive draw " + format_int(k));
  }
  e.weights.assign(e.paths.size(), 1.0 / static_cast<double>(e.paths.size()));
  return e;
}

std::vector<double> svs_weights(const PathModels& models, int n_scenarios) {
  for (const auto& m : models.models)
    if (m.n_samples() != n_scenarios)
      fail_validation("svs_weights: scenario/training index misalignment");
  std::vector<double> w(static_cast<std::size_t>(n_scenarios), 0.0);
  for (const auto& m : models.models)
    for (int i = 0; i < n_scenarios; ++i) w[static_cast<std::size_t>(i)] += std::abs(m.coef(i));
  return w;
}

SvsRanking svs_rank(std::vector<double> weights) {
  SvsRanking r;
  r.order.resize(weights.size());
  std::iota(r.order.begin(), r.order.end(), 0);
  std::stable_sort(r.order.begin(), r.order.end(), [&](int a, int b) {
    if (weights[static_cast<std::size_t>(a)] != weights[static_cast<std::size_t>(b)])
      return weights[static_cast<std::size_t>(a)] > weights[static_cast<std::size_t>(b)];
    return a < b;
  });
  r.scenario_weights = std::move(weights);
  return r;
}

double wasserstein1(std::span<const double> a_values, std::span<const double> a_weights,
                    std::span<const double> b_values, std::span<const double> b_weights) {
  if (a_values.empty() || b_values.empty()) fail_validation("wasserstein1: empty sample");
  if (a_values.size() != a_weights.size() || b_values.size() != b_weights.size())
    fail_validation("wasserstein1: value/weight size mismatch");
  auto sorted_order = [](std::span<const double> v) {
    std::vector<std::size_t> idx(v.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return v[x] < v[y]; });
    return idx;
  };
  auto norm = [](std::span<const double> w) {
    double s = 0.0;
    for (double x : w) s += x;
    if (s <= 0.0) fail_validation("wasserstein1: nonpositive total weight");
    return s;
  };
  const auto ia = sorted_order(a_values), ib = sorted_order(b_values);
  const double sa = norm(a_weights), sb = norm(b_weights);

  // Integral of |F_a - F_b| over the merged support.
  double dist = 0.0;
  double fa = 0.0, fb = 0.0;
  std::size_t i = 0, j = 0;
  double prev = 0.0;
  bool first = true;
  while (i < ia.size() || j < ib.size()) {
    double x;
    if (j >= ib.size() || (i < ia.size() && a_values[ia[i]] <= b_values[ib[j]]))
      x = a_values[ia[i]];
    else
      x = b_values[ib[j]];
    if (!first) dist += std::abs(fa - fb) * (x - prev);
    while (i < ia.size() && a_values[ia[i]] == x) fa += a_weights[ia[i++]] / sa;
    while (j < ib.size() && b_values[ib[j]] == x) fb += b_weights[ib[j++]] / sb;
    prev = x;
    first = false;
  }
  return dist;
}

SvsSelection select_scenarios_svs(const SvsRanking& ranking, const ScenarioEnsemble& ensemble,
                                  double omega, int ma_window, int minimum,
                                  SvsDistribution dist) {
  if (ranking.order.size() != ensemble.paths.size())
    fail_validation("svs selection: ranking size mismatch");
  if (minimum < 1) fail_validation("svs selection: minimum must be positive");
  SvsSelection sel;
  const int n = ensemble.size();
  const int H = ensemble.horizon();
  if (n < minimum) {
    sel.reduced = ensemble;
    sel.selected = ranking.order;
    sel.undersized = true;
    return sel;
  }

  // Pooled mode tracks one sorted multiset over all steps; per-step-mean mode
  // tracks one per step and averages the per-step distances.
  std::vector<std::vector<double>> pools(dist == SvsDistribution::pooled ? 1
                                                                         : static_cast<size_t>(H));
  std::vector<std::vector<double>> prev_pools;
  std::deque<double> deltas;
  double prev_w1 = 0.0;
  bool have_prev_w1 = false;

  auto insert_sorted = [](std::vector<double>& pool, double v) {
    pool.insert(std::upper_bound(pool.begin(), pool.end(), v), v);
  };

  for (int r = 0; r < n; ++r) {
    const int idx = ranking.order[static_cast<std::size_t>(r)];
    prev_pools = pools;
    const auto& path = ensemble.paths[static_cast<std::size_t>(idx)];
    if (dist == SvsDistribution::pooled) {
      for (double v : path) insert_sorted(pools[0], v);
    } else {
      for (int h = 0; h < H; ++h) insert_sorted(pools[static_cast<std::size_t>(h)], path[static_cast<std::size_t>(h)]);
    }
    sel.selected.push_back(idx);
    const int n_sel = r + 1;
    if (n_sel >= 2) {
      double w1 = 0.0;
      for (std::size_t k = 0; k < pools.size(); ++k) {
        std::vector<double> wa(prev_pools[k].size(), 1.0), wb(pools[k].size(), 1.0);
        w1 += wasserstein1(prev_pools[k], wa, pools[k], wb);
      }
      w1 /= static_cast<double>(pools.size());
      sel.w1_trace.push_back(w1);
      if (have_prev_w1) {
        deltas.push_back(std::abs(prev_w1 - w1));
        if (static_cast<int>(deltas.size()) > ma_window) deltas.pop_front();
      }
      prev_w1 = w1;
      have_prev_w1 = true;
    }
    if (n_sel >= minimum && !deltas.empty()) {
      double ma = 0.0;
      for (double d : deltas) ma += d;
      ma /= static_cast<double>(deltas.size());
      if (ma < omega) break;
    }
  }

  sel.reduced.origin = ensemble.origin;
  sel.reduced.kind = ensemble.kind;
  for (int idx : sel.selected) {
    sel.reduced.paths.push_back(ensemble.paths[static_cast<std::size_t>(idx)]);
    sel.reduced.provenance.push_back(ensemble.provenance[static_cast<std::size_t>(idx)]);
  }
  sel.reduced.weights.assign(sel.reduced.paths.size(),
                             1.0 / static_cast<double>(sel.reduced.paths.size()));
  return sel;
}

std::vector<double> empirical_median_path(const ScenarioEnsemble& ensemble) {
  ensemble.validate();
  const int H = ensemble.horizon();
  std::vector<double> out(static_cast<std::size_t>(H));
  std::vector<double> col(ensemble.paths.size());
  for (int h = 0; h < H; ++h) {
    for (std::size_t i = 0; i < ensemble.paths.size(); ++i)
      col[i] = ensemble.paths[i][static_cast<std::size_t>(h)];
    out[static_cast<std::size_t>(h)] = stats::weighted_median_lower(col, ensemble.weights);
  }
  return out;
}

}  // namespace pathcast
