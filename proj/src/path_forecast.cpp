#include "pathcast/path_forecast.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "pathcast/common.hpp"

namespace pathcast {

TrainingSet build_training_set(const FeatureSpec& spec, const MarketStore& store,
                               std::span<const Date> days, std::optional<int> quarter,
                               const ForecastConfig& config) {
  spec.validate(store);
  TrainingSet ts;
  std::vector<std::vector<double>> raw_rows;
  std::vector<double> raw_aux;
  const int H = config.horizon;

  for (Date day : days) {
    for (const VwapGrid& g : store.grids) {
      if (g.delivery_day != day) continue;
      if (quarter && g.delivery_quarter != *quarter) continue;
      ForecastOrigin origin{day, g.delivery_quarter, g.index_for_lead(config.lead_minutes)};
      if (origin.m + H >= g.size())
        fail_validation("grid too short for horizon at quarter " +
                        format_int(g.delivery_quarter));
      raw_rows.push_back(
          assemble_raw_features(spec, store, origin, FutureAccess::realized, nullptr));
      raw_aux.push_back(g.prices[origin.m]);
      ts.origins.push_back(origin);
      ts.origin_prices.push_back(g.prices[origin.m]);
    }
  }
  if (ts.origins.empty()) fail_validation("insufficient training days: no rows in window");

  ts.column_stats = fit_column_stats(raw_rows);
  ts.X.reserve(raw_rows.size());
  for (const auto& r : raw_rows) ts.X.push_back(apply_column_stats(r, ts.column_stats));

  {
    std::vector<double> tmp;
    ts.aux_stats = stats::standardize(raw_aux, tmp);
    ts.aux = std::move(tmp);
  }

  ts.targets_std.resize(static_cast<std::size_t>(H));
  ts.target_stats.resize(static_cast<std::size_t>(H));
  std::vector<double> diff(ts.origins.size());
  for (int h = 1; h <= H; ++h) {
    for (std::size_t i = 0; i < ts.origins.size(); ++i) {
      const ForecastOrigin& o = ts.origins[i];
      const VwapGrid& g = store.grid(o.day, o.quarter);
      diff[i] = g.prices[static_cast<std::size_t>(o.m + h)] - ts.origin_prices[i];
    }
    std::vector<double> z;
    ts.target_stats[static_cast<std::size_t>(h - 1)] = stats::standardize(diff, z);
    ts.targets_std[static_cast<std::size_t>(h - 1)] = std::move(z);
  }
  return ts;
}

namespace {

KernelParams fit_widths_for(const std::vector<std::vector<double>>& X,
                            std::span<const double> aux, const KernelParams& levels) {
  std::vector<double> xd, yd;
  pairwise_distance_samples(X, aux, xd, yd);
  bool all_same_x = std::all_of(xd.begin(), xd.end(), [](double v) { return v == 0.0; });
  if (all_same_x) fail_validation("degenerate training: all feature rows identical");
  try {
    return fit_kernel_widths(xd, yd, levels);
  } catch (const Error&) {
    // A collapsed auxiliary-distance distribution means the Gaussian factor
    // is constant 1; any positive width reproduces that.
    KernelParams p = fit_kernel_widths(xd, std::vector<double>{1.0}, levels);
    p.g = 1.0;
    return p;
  }
}

std::string models_fingerprint(const std::vector<SvrModel>& models) {
  std::string blob;
  for (const auto& m : models) {
    blob += format_double(m.bias);
    for (double a : m.alpha) blob += format_double(a);
    for (double a : m.alpha_star) blob += format_double(a);
  }
  return sha256_hex(blob).substr(0, 16);
}

void finalize(PathModels& pm, const TrainingSet& train) {
  pm.targets_std = train.targets_std;
  pm.row_origins = train.origins;
  pm.row_origin_prices = train.origin_prices;
  pm.column_stats = train.column_stats;
  pm.aux_stats = train.aux_stats;
  pm.target_stats = train.target_stats;
  pm.fingerprint = models_fingerprint(pm.models);
}

}  // namespace

PathModels fit_multi_output(const TrainingSet& train, const ForecastConfig& config) {
  if (train.n_rows() < 2) fail_validation("need at least 2 training rows");
  const int H = config.horizon;
  PathModels pm;
  pm.config = config;
  KernelParams params = fit_widths_for(train.X, train.aux, config.kernel_levels);
  Matrix gram = build_gram(train.X, train.aux, params);
  pm.models.resize(static_cast<std::size_t>(H));
  pm.in_sample_std.resize(static_cast<std::size_t>(H));
  std::vector<char> ok(static_cast<std::size_t>(H), 1);
  parallel_for(static_cast<std::size_t>(H), config.threads, [&](std::size_t h) {
    SvrFitResult fit = fit_svr_with_gram(gram, train.X, train.aux, train.targets_std[h],
                                         config.hyper, params);
    pm.models[h] = std::move(fit.model);
    pm.in_sample_std[h] = std::move(fit.in_sample_prediction);
    ok[h] = fit.converged ? 1 : 0;
  });
  pm.converged = std::all_of(ok.begin(), ok.end(), [](char c) { return c != 0; });
  finalize(pm, train);
  return pm;
}

PathModels fit_chain(const TrainingSet& train, const ForecastConfig& config) {
  if (train.n_rows() < 2) fail_validation("need at least 2 training rows");
  const int H = config.horizon;
  const std::size_t n = static_cast<std::size_t>(train.n_rows());
  PathModels pm;
  pm.config = config;
  pm.models.resize(static_cast<std::size_t>(H));
  pm.in_sample_std.resize(static_cast<std::size_t>(H));
  pm.chain_stats.resize(static_cast<std::size_t>(H));
  pm.converged = true;

  std::vector<std::vector<double>> X = train.X;  // grows by one column per step
  for (int h = 1; h <= H; ++h) {
    const std::size_t hi = static_cast<std::size_t>(h - 1);
    KernelParams params = fit_widths_for(X, train.aux, config.kernel_levels);
    SvrFitResult fit = fit_svr(X, train.aux, train.targets_std[hi], config.hyper, params);
    pm.models[hi] = std::move(fit.model);
    pm.in_sample_std[hi] = fit.in_sample_prediction;
    pm.converged = pm.converged && fit.converged;
    if (h < H) {
      std::vector<double> z;
      stats::Standardization st = stats::standardize(fit.in_sample_prediction, z);
      pm.chain_stats[static_cast<std::size_t>(h)] =
          h == 1 ? std::vector<stats::Standardization>{st}
                 : [&] {
                     auto v = pm.chain_stats[hi];
                     v.push_back(st);
                     return v;
                   }();
      for (std::size_t i = 0; i < n; ++i) X[i].push_back(z[i]);
    }
  }
  finalize(pm, train);
  return pm;
}

PathModels fit_path_models(const TrainingSet& train, const ForecastConfig& config) {
  return config.mode == ForecastMode::chain ? fit_chain(train, config)
                                            : fit_multi_output(train, config);
}

std::vector<double> predict_path_std(const PathModels& models, std::span<const double> x_std,
                                     double aux_std) {
  const int H = models.config.horizon;
  std::vector<double> out(static_cast<std::size_t>(H));
  if (models.config.mode == ForecastMode::multi_output) {
    for (int h = 0; h < H; ++h)
      out[static_cast<std::size_t>(h)] =
          predict(models.models[static_cast<std::size_t>(h)], x_std, aux_std);
  } else {
    std::vector<double> x(x_std.begin(), x_std.end());
    for (int h = 0; h < H; ++h) {
      const std::size_t hi = static_cast<std::size_t>(h);
      out[hi] = predict(models.models[hi], x, aux_std);
      if (h + 1 < H) {
        const stats::Standardization& st = models.chain_stats[hi + 1].back();
        x.push_back((out[hi] - st.mean) / st.std);
      }
    }
  }
  return out;
}

PathForecast forecast_path(const PathModels& models, std::span<const double> x_std,
                           double aux_std, const ForecastOrigin& origin, double origin_price) {
  if (models.target_stats.empty()) fail_validation("forecast_path: missing transform state");
  PathForecast pf;
  pf.origin = origin;
  pf.raw_std = predict_path_std(models, x_std, aux_std);
  pf.values.resize(pf.raw_std.size());
  for (std::size_t h = 0; h < pf.raw_std.size(); ++h) {
    const stats::Standardization& st = models.target_stats[h];
    pf.values[h] = origin_price + st.mean + st.std * pf.raw_std[h];
  }
  pf.model_fingerprint = models.fingerprint;
  return pf;
}

void ExpandingWindowPlan::validate() const {
  if (!(train_start < first_test_day && first_test_day <= last_test_day))
    fail_validation("expanding window: need train_start < first_test_day <= last_test_day");
}

std::vector<Date> ExpandingWindowPlan::test_days() const {
  validate();
  std::vector<Date> out;
  for (Date d = first_test_day; d <= last_test_day; d = d + 1) out.push_back(d);
  return out;
}

void run_expanding_window(const ExpandingWindowPlan& plan, const MarketStore& store,
                          const FeatureSpec& spec, const ForecastConfig& config,
                          const ForecastSink& sink) {
  plan.validate();
  for (Date test_day : plan.test_days()) {
    std::vector<Date> train_days;
    for (Date d = plan.train_start; d < test_day; d = d + 1) train_days.push_back(d);
    if (train_days.empty()) fail_validation("insufficient training days before first test day");

    std::vector<int> quarters;
    for (const VwapGrid& g : store.grids)
      if (g.delivery_day == test_day) quarters.push_back(g.delivery_quarter);
    std::sort(quarters.begin(), quarters.end());

    if (config.per_quarter_models) {
      struct Slot {
        TrainingSet train;
        PathModels models;
        QuarterForecast qf;
      };
      std::vector<Slot> slots(quarters.size());
      parallel_for(quarters.size(), config.threads, [&](std::size_t qi) {
        ForecastConfig qconfig = config;
        qconfig.threads = 1;  // parallelism lives at the quarter level here
        Slot& slot = slots[qi];
        slot.train = build_training_set(spec, store, train_days, quarters[qi], qconfig);
        slot.models = fit_path_models(slot.train, qconfig);
        const VwapGrid& g = store.grid(test_day, quarters[qi]);
        ForecastOrigin origin{test_day, quarters[qi], g.index_for_lead(config.lead_minutes)};
        std::vector<double> raw =
            assemble_raw_features(spec, store, origin, FutureAccess::zeroed, nullptr);
        slot.qf.x_std = apply_column_stats(raw, slot.models.column_stats);
        slot.qf.origin_price = g.prices[static_cast<std::size_t>(origin.m)];
        slot.qf.aux_std =
            (slot.qf.origin_price - slot.models.aux_stats.mean) / slot.models.aux_stats.std;
        slot.qf.forecast = forecast_path(slot.models, slot.qf.x_std, slot.qf.aux_std, origin,
                                         slot.qf.origin_price);
      });
      for (Slot& slot : slots) {
        slot.qf.models = &slot.models;
        slot.qf.train = &slot.train;
        sink(slot.qf);
      }
    } else {
      TrainingSet train = build_training_set(spec, store, train_days, std::nullopt, config);
      PathModels models = fit_path_models(train, config);
      std::vector<QuarterForecast> results(quarters.size());
      parallel_for(quarters.size(), config.threads, [&](std::size_t qi) {
        const VwapGrid& g = store.grid(test_day, quarters[qi]);
        ForecastOrigin origin{test_day, quarters[qi], g.index_for_lead(config.lead_minutes)};
        std::vector<double> raw =
            assemble_raw_features(spec, store, origin, FutureAccess::zeroed, nullptr);
        QuarterForecast& qf = results[qi];
        qf.x_std = apply_column_stats(raw, models.column_stats);
        qf.origin_price = g.prices[static_cast<std::size_t>(origin.m)];
        qf.aux_std = (qf.origin_price - models.aux_stats.mean) / models.aux_stats.std;
        qf.forecast = forecast_path(models, qf.x_std, qf.aux_std, origin, qf.origin_price);
      });
      for (QuarterForecast& qf : results) {
        qf.models = &models;
        qf.train = &train;
        sink(qf);
      }
    }
  }
}

}  // namespace pathcast
