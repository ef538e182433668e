#include "pathcast/strategies.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathcast/metrics.hpp"
#include "pathcast/stats.hpp"

namespace pathcast {

std::string agent_name(Agent a) { return a == Agent::seller ? "seller" : "spread_trader"; }

Agent parse_agent(const std::string& s) {
  if (s == "seller") return Agent::seller;
  if (s == "spread_trader" || s == "spread") return Agent::spread_trader;
  fail_validation("unknown agent '" + s + "'");
}

std::string dynamics_name(Dynamics d) {
  switch (d) {
    case Dynamics::static_plan: return "static";
    case Dynamics::dynamic_kernel: return "dynamic_kernel";
    case Dynamics::dynamic_mae: return "dynamic_mae";
  }
  return "?";
}

Dynamics parse_dynamics(const std::string& s) {
  if (s == "static") return Dynamics::static_plan;
  if (s == "dynamic_kernel") return Dynamics::dynamic_kernel;
  if (s == "dynamic_mae") return Dynamics::dynamic_mae;
  fail_validation("unknown dynamics '" + s + "'");
}

std::string threshold_name(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::three_sigma: return "three_sigma";
    case ThresholdMethod::iqr: return "iqr";
    case ThresholdMethod::ipr_5_95: return "ipr_5_95";
    case ThresholdMethod::mae: return "mae";
    case ThresholdMethod::fixed: return "fixed";
  }
  return "?";
}

ThresholdMethod parse_threshold(const std::string& s) {
  if (s == "three_sigma" || s == "3sigma") return ThresholdMethod::three_sigma;
  if (s == "iqr") return ThresholdMethod::iqr;
  if (s == "ipr_5_95" || s == "ipr") return ThresholdMethod::ipr_5_95;
  if (s == "mae") return ThresholdMethod::mae;
  if (s == "fixed") return ThresholdMethod::fixed;
  fail_validation("unknown threshold method '" + s + "'");
}

void StrategySpec::validate() const {
  if (family == StrategyFamily::band) {
    if (attitude == BandAttitude::none)
      fail_validation("band strategy needs a risk attitude");
    if (!(scp > 0.0 && scp < 1.0)) fail_validation("band strategy needs scp in (0,1)");
  } else if (attitude != BandAttitude::none) {
    fail_validation("median strategy must not carry a band attitude");
  }
  if (dynamics == Dynamics::dynamic_kernel && params_invalid())
    fail_validation("dynamic_kernel strategy needs positive p and nonnegative lambda");
}

bool StrategySpec::params_invalid() const {
  return reweight.p <= 0.0 || reweight.lambda < 0.0;
}

std::string StrategySpec::id() const {
  std::string s = agent_name(agent);
  s += family == StrategyFamily::median ? "_median" : "_band";
  if (family == StrategyFamily::band)
    s += attitude == BandAttitude::risk_averse ? "_averse" : "_seeking";
  s += "_" + dynamics_name(dynamics);
  return s;
}

namespace {

// arg-opt with earliest-step tie break; vals[k] is the value at global step
// first_step + k.
std::pair<int, double> arg_opt(std::span<const double> vals, int first_step, bool maximize) {
  int best = 0;
  for (std::size_t k = 1; k < vals.size(); ++k) {
    if (maximize ? vals[k] > vals[static_cast<std::size_t>(best)]
                 : vals[k] < vals[static_cast<std::size_t>(best)])
      best = static_cast<int>(k);
  }
  return {first_step + best, vals[static_cast<std::size_t>(best)]};
}

struct StepValues {
  int first_step = 1;
  std::vector<double> vals;
  double at(int u) const { return vals[static_cast<std::size_t>(u - first_step)]; }
  int last_step() const { return first_step + static_cast<int>(vals.size()) - 1; }
};

TradePlan spread_plan_from_extrema(int buy_step, int sell_step, int first_step, int last_step) {
  TradePlan plan;
  if (buy_step == sell_step) {
    // Degenerate curves: earliest adjacent pair, long by convention.
    (void)last_step;
    plan.entry = first_step;
    plan.exit = first_step + 1;
    plan.direction = +1;
  } else if (buy_step < sell_step) {
    plan.entry = buy_step;
    plan.exit = sell_step;
    plan.direction = +1;
  } else {
    plan.entry = sell_step;
    plan.exit = buy_step;
    plan.direction = -1;
  }
  return plan;
}

}  // namespace

TradePlan plan_median(Agent agent, std::span<const double> median_path) {
  if (median_path.empty()) fail_validation("plan_median: empty median path");
  if (agent == Agent::seller) {
    TradePlan plan;
    plan.exit = arg_opt(median_path, 1, true).first;
    plan.direction = 0;
    return plan;
  }
  if (median_path.size() < 2) fail_validation("spread plan needs at least 2 steps");
  int u_min = arg_opt(median_path, 1, false).first;
  int u_max = arg_opt(median_path, 1, true).first;
  return spread_plan_from_extrema(u_min, u_max, 1, static_cast<int>(median_path.size()));
}

TradePlan plan_band(Agent agent, BandAttitude attitude, const PredictionBand& upper,
                    const PredictionBand& lower) {
  if (attitude == BandAttitude::none) fail_validation("plan_band: attitude required");
  if (upper.values.size() != lower.values.size() || upper.from_step != lower.from_step)
    fail_validation("plan_band: bands on different horizons");
  const int first = upper.from_step + 1;
  if (agent == Agent::seller) {
    TradePlan plan;
    const auto& curve = attitude == BandAttitude::risk_seeking ? upper.values : lower.values;
    plan.exit = arg_opt(curve, first, true).first;
    plan.direction = 0;
    return plan;
  }
  if (upper.values.size() < 2) fail_validation("spread plan needs at least 2 steps");
  int buy_step, sell_step;
  if (attitude == BandAttitude::risk_seeking) {
    buy_step = arg_opt(lower.values, first, false).first;
    sell_step = arg_opt(upper.values, first, true).first;
  } else {
    buy_step = arg_opt(lower.values, first, true).first;
    sell_step = arg_opt(upper.values, first, false).first;
  }
  return spread_plan_from_extrema(buy_step, sell_step, first,
                                  first + static_cast<int>(upper.values.size()) - 1);
}

double threshold_eta(std::span<const double> residuals, ThresholdMethod method) {
  if (residuals.empty()) fail_validation("threshold_eta: no residuals");
  if (residuals.size() == 1) return std::abs(residuals[0]);
  std::vector<double> r(residuals.begin(), residuals.end());
  switch (method) {
    case ThresholdMethod::three_sigma:
      return 3.0 * stats::pop_std(r);
    case ThresholdMethod::iqr:
      return stats::quantile_linear(r, 0.75) - stats::quantile_linear(r, 0.25);
    case ThresholdMethod::ipr_5_95:
      return stats::quantile_linear(r, 0.95) - stats::quantile_linear(r, 0.05);
    case ThresholdMethod::mae: {
      double s = 0.0;
      for (double v : r) s += std::abs(v);
      return s / static_cast<double>(r.size());
    }
    case ThresholdMethod::fixed:
      fail_validation("threshold_eta: fixed threshold carries its own value");
  }
  return 0.0;
}

namespace {

struct Curves {
  // Updated forecast curves for global steps tau+1..H.
  int tau = 0;
  std::vector<double> median;            // median family
  std::vector<double> upper, lower;      // band family
};

Curves updated_curves(const StrategySpec& spec, const ScenarioEnsemble& ensemble,
                      std::span<const double> weights, int tau) {
  Curves c;
  c.tau = tau;
  if (spec.family == StrategyFamily::median) {
    c.median = weighted_median_path(ensemble, weights, tau);
  } else {
    c.upper = weighted_band(ensemble, weights, spec.scp, BandSide::upper, tau).values;
    c.lower = weighted_band(ensemble, weights, spec.scp, BandSide::lower, tau).values;
  }
  return c;
}

// Planning values over steps tau..H with the realized price substituted at
// tau. For the band family the buy leg reads the lower band and the sell leg
// the upper band.
StepValues with_realized(std::span<const double> curve, int tau, double realized_price) {
  StepValues sv;
  sv.first_step = tau;
  sv.vals.reserve(curve.size() + 1);
  sv.vals.push_back(realized_price);
  sv.vals.insert(sv.vals.end(), curve.begin(), curve.end());
  return sv;
}

struct CandidatePlan {
  TradePlan plan;
  double value = 0.0;
};

CandidatePlan candidate_spread_plan(const StrategySpec& spec, const StepValues& buy_vals,
                                    const StepValues& sell_vals) {
  int buy_step, sell_step;
  if (spec.family == StrategyFamily::median || spec.attitude == BandAttitude::risk_seeking) {
    buy_step = arg_opt(buy_vals.vals, buy_vals.first_step, false).first;
    sell_step = arg_opt(sell_vals.vals, sell_vals.first_step, true).first;
  } else {
    buy_step = arg_opt(buy_vals.vals, buy_vals.first_step, true).first;
    sell_step = arg_opt(sell_vals.vals, sell_vals.first_step, false).first;
  }
  CandidatePlan cand;
  cand.plan = spread_plan_from_extrema(buy_step, sell_step, buy_vals.first_step,
                                       buy_vals.last_step());
  if (buy_step == sell_step) {
    cand.plan.exit = std::min(cand.plan.exit, buy_vals.last_step());
    if (*cand.plan.entry >= cand.plan.exit) cand.plan.entry = cand.plan.exit - 1;
    buy_step = *cand.plan.entry;
    sell_step = cand.plan.exit;
  }
  cand.value = sell_vals.at(sell_step) - buy_vals.at(buy_step);
  return cand;
}

double plan_value_spread(const TradePlan& plan, const StepValues& buy_vals,
                         const StepValues& sell_vals) {
  int buy_step = plan.direction > 0 ? *plan.entry : plan.exit;
  int sell_step = plan.direction > 0 ? plan.exit : *plan.entry;
  return sell_vals.at(sell_step) - buy_vals.at(buy_step);
}

std::string ineq(double lhs, double eta, double rhs) {
  return format_double(lhs) + " - " + format_double(eta) + " > " + format_double(rhs);
}

}  // namespace

TradeOutcome simulate_strategy(const StrategySpec& spec, const ScenarioEnsemble& ensemble,
                               std::span<const double> realized) {
  spec.validate();
  ensemble.validate();
  const int H = ensemble.horizon();
  if (static_cast<int>(realized.size()) != H)
    fail_validation("simulate_strategy: realized path length differs from horizon");

  const std::vector<double> median0 = empirical_median_path(ensemble);

  TradePlan plan;
  if (spec.family == StrategyFamily::median) {
    plan = plan_median(spec.agent, median0);
  } else {
    plan = plan_band(spec.agent, spec.attitude, build_band(ensemble, spec.scp, BandSide::upper),
                     build_band(ensemble, spec.scp, BandSide::lower));
  }

  TradeOutcome out;
  auto price_at = [&](int u) { return realized[static_cast<std::size_t>(u - 1)]; };

  if (spec.dynamics == Dynamics::static_plan) {
    if (spec.agent == Agent::seller) {
      out.executions.push_back({plan.exit, price_at(plan.exit), 'S'});
      out.profit = price_at(plan.exit);
    } else {
      int u0 = *plan.entry, u1 = plan.exit;
      out.executions.push_back({u0, price_at(u0), plan.direction > 0 ? 'B' : 'S'});
      out.executions.push_back({u1, price_at(u1), plan.direction > 0 ? 'S' : 'B'});
      out.profit = plan.direction * (price_at(u1) - price_at(u0));
    }
    return out;
  }

  bool entered = false, closed = false;
  double entry_price = 0.0;
  const int dir = spec.agent == Agent::seller ? +1 : plan.direction;
  int direction = dir;

  auto close_seller = [&](int u) {
    out.executions.push_back({u, price_at(u), 'S'});
    out.profit = price_at(u);
    closed = true;
  };
  auto open_spread = [&](int u) {
    entry_price = price_at(u);
    out.executions.push_back({u, entry_price, direction > 0 ? 'B' : 'S'});
    entered = true;
  };
  auto close_spread = [&](int u) {
    out.executions.push_back({u, price_at(u), direction > 0 ? 'S' : 'B'});
    out.profit = direction * (price_at(u) - entry_price);
    closed = true;
  };

  for (int tau = 1; tau <= H && !closed; ++tau) {
    const double p_tau = price_at(tau);

    // Threshold from residuals against the initial median.
    double eta;
    if (spec.threshold == ThresholdMethod::fixed) {
      eta = spec.fixed_eta;
    } else {
      std::vector<double> residuals(static_cast<std::size_t>(tau));
      for (int u = 1; u <= tau; ++u)
        residuals[static_cast<std::size_t>(u - 1)] = price_at(u) - median0[static_cast<std::size_t>(u - 1)];
      eta = threshold_eta(residuals, spec.threshold);
    }

    Curves curves;
    if (tau < H) {
      std::vector<double> weights;
      std::span<const double> prefix = realized.subspan(0, static_cast<std::size_t>(tau));
      if (spec.dynamics == Dynamics::dynamic_kernel)
        weights = kernel_weights(prefix, ensemble, median0, spec.reweight);
      else
        weights = inverse_mae_weights(prefix, ensemble);
      curves = updated_curves(spec, ensemble, weights, tau);
    }

    if (spec.agent == Agent::seller) {
      // Planning curve per family/attitude.
      const std::vector<double>& curve = spec.family == StrategyFamily::median ? curves.median
                                         : spec.attitude == BandAttitude::risk_seeking
                                             ? curves.upper
                                             : curves.lower;
      if (tau == plan.exit) {
        if (tau == H) {
          close_seller(tau);
        } else {
          auto [u_star, v_star] = arg_opt(curve, tau + 1, true);
          if (v_star - eta > p_tau) {
            out.audit.push_back({tau, "postpone exit to " + format_int(u_star),
                                 "updated forecast: " + ineq(v_star, eta, p_tau)});
            plan.exit = u_star;
          } else {
            close_seller(tau);
          }
        }
      } else {  // tau < plan.exit
        double v_exit = curve[static_cast<std::size_t>(plan.exit - tau - 1)];
        if (p_tau - eta > v_exit) {
          out.audit.push_back(
              {tau, "sell early at " + format_int(tau), "realized beats plan: " + ineq(p_tau, eta, v_exit)});
          close_seller(tau);
        }
      }
      continue;
    }

    // Spread trader.
    if (!entered) {
      if (tau == H) {
        out.audit.push_back({tau, "cancel", "horizon end reached before entry"});
        out.profit = 0.0;
        closed = true;
        break;
      }
      StepValues buy_vals, sell_vals;
      if (spec.family == StrategyFamily::median) {
        buy_vals = with_realized(curves.median, tau, p_tau);
        sell_vals = buy_vals;
      } else {
        buy_vals = with_realized(curves.lower, tau, p_tau);
        sell_vals = with_realized(curves.upper, tau, p_tau);
      }
      CandidatePlan cand = candidate_spread_plan(spec, buy_vals, sell_vals);
      double current_value = plan_value_spread(plan, buy_vals, sell_vals);
      if (cand.value - eta > current_value) {
        out.audit.push_back(
            {tau,
             "reschedule to " + format_int(*cand.plan.entry) + "/" + format_int(cand.plan.exit),
             "updated plan gain: " + ineq(cand.value, eta, current_value)});
        plan = cand.plan;
        direction = plan.direction;
      }
      if (*plan.entry == tau) open_spread(tau);
      continue;
    }

    // Position open: exit-leg curve follows the leg that closes it.
    std::vector<double>* exit_curve = nullptr;
    bool exit_maximize;
    if (spec.family == StrategyFamily::median) {
      exit_curve = &curves.median;
      exit_maximize = direction > 0;
    } else if (direction > 0) {  // closing leg sells
      exit_curve = &curves.upper;
      exit_maximize = spec.attitude == BandAttitude::risk_seeking;
    } else {  // closing leg buys back
      exit_curve = &curves.lower;
      exit_maximize = spec.attitude != BandAttitude::risk_seeking;
    }

    if (tau == plan.exit) {
      if (tau == H) {
        close_spread(tau);
      } else {
        auto [u_star, v_star] = arg_opt(*exit_curve, tau + 1, exit_maximize);
        if (direction * v_star - eta > direction * p_tau) {
          out.audit.push_back({tau, "postpone exit to " + format_int(u_star),
                               "updated forecast: " +
                                   ineq(direction * v_star, eta, direction * p_tau)});
          plan.exit = u_star;
        } else {
          close_spread(tau);
        }
      }
    } else {  // tau < plan.exit
      double v_exit = (*exit_curve)[static_cast<std::size_t>(plan.exit - tau - 1)];
      if (direction * p_tau - eta > direction * v_exit) {
        out.audit.push_back({tau, "close early at " + format_int(tau),
                             "realized beats plan: " +
                                 ineq(direction * p_tau, eta, direction * v_exit)});
        close_spread(tau);
      }
    }
  }
  if (!closed && spec.agent == Agent::spread_trader && entered)
    fail_runtime("spread position left open past the horizon");
  return out;
}

TradeOutcome crystal_ball(Agent agent, std::span<const double> realized) {
  if (realized.empty()) fail_validation("crystal_ball: empty path");
  TradeOutcome out;
  auto price_at = [&](int u) { return realized[static_cast<std::size_t>(u - 1)]; };
  int u_max = arg_opt(realized, 1, true).first;
  if (agent == Agent::seller) {
    out.executions.push_back({u_max, price_at(u_max), 'S'});
    out.profit = price_at(u_max);
    return out;
  }
  int u_min = arg_opt(realized, 1, false).first;
  if (u_min == u_max) {  // constant path, profit 0
    out.profit = 0.0;
    return out;
  }
  int u0 = std::min(u_min, u_max), u1 = std::max(u_min, u_max);
  int dir = u_min < u_max ? +1 : -1;
  out.executions.push_back({u0, price_at(u0), dir > 0 ? 'B' : 'S'});
  out.executions.push_back({u1, price_at(u1), dir > 0 ? 'S' : 'B'});
  out.profit = price_at(u_max) - price_at(u_min);
  return out;
}

TradeOutcome naive_endpoints(Agent agent, NaiveVariant variant, std::span<const double> realized) {
  if (realized.empty()) fail_validation("naive_endpoints: empty path");
  TradeOutcome out;
  const int H = static_cast<int>(realized.size());
  auto price_at = [&](int u) { return realized[static_cast<std::size_t>(u - 1)]; };
  if (agent == Agent::seller) {
    int u = variant == NaiveVariant::first ? 1 : H;
    out.executions.push_back({u, price_at(u), 'S'});
    out.profit = price_at(u);
    return out;
  }
  if (H < 2) fail_validation("naive spread benchmark needs at least 2 steps");
  if (variant == NaiveVariant::first) {  // sell at the first step, buy back at the last
    out.executions.push_back({1, price_at(1), 'S'});
    out.executions.push_back({H, price_at(H), 'B'});
    out.profit = price_at(1) - price_at(H);
  } else {  // buy at the first step, sell at the last
    out.executions.push_back({1, price_at(1), 'B'});
    out.executions.push_back({H, price_at(H), 'S'});
    out.profit = price_at(H) - price_at(1);
  }
  return out;
}

TradeOutcome replay_outcome(Agent agent, const TradeOutcome& outcome,
                            std::span<const double> realized) {
  TradeOutcome replayed;
  replayed.executions = outcome.executions;
  for (auto& e : replayed.executions) {
    if (e.step < 1 || e.step > static_cast<int>(realized.size()))
      fail_validation("replay: executed step outside the path");
    e.price = realized[static_cast<std::size_t>(e.step - 1)];
  }
  if (agent == Agent::seller) {
    replayed.profit = replayed.executions.empty() ? 0.0 : replayed.executions[0].price;
    return replayed;
  }
  if (replayed.executions.empty()) {
    replayed.profit = 0.0;
    return replayed;
  }
  if (replayed.executions.size() != 2) fail_validation("replay: spread outcome needs 2 actions");
  const Execution& a = replayed.executions[0];
  const Execution& b = replayed.executions[1];
  int dir = a.side == 'B' ? +1 : -1;
  replayed.profit = dir * (b.price - a.price);
  return replayed;
}

// ---------------------------------------------------------------------------
// Grid search
// ---------------------------------------------------------------------------

GridAxes default_median_grid() {
  GridAxes axes;
  axes.p = {0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0, 2.25, 2.5, 2.75, 3.0};
  for (int k = 0; k <= 10; ++k) axes.lambda.push_back(k * 0.05);
  axes.eta = {ThresholdMethod::three_sigma, ThresholdMethod::iqr, ThresholdMethod::ipr_5_95,
              ThresholdMethod::mae};
  return axes;
}

GridAxes default_band_grid() {
  GridAxes axes;
  for (int k = 1; k <= 19; ++k) axes.scp.push_back(k * 0.05);
  axes.p = {0.5, 0.75, 1.0, 1.25, 1.75, 2.0};
  axes.lambda = {0.05, 0.1, 0.2, 0.35, 0.4, 0.5};
  axes.eta = {ThresholdMethod::iqr, ThresholdMethod::ipr_5_95};
  return axes;
}

std::vector<StrategySpec> enumerate_grid(const StrategySpec& tmpl, const GridAxes& axes) {
  const bool use_scp = tmpl.family == StrategyFamily::band;
  const bool use_kernel = tmpl.dynamics == Dynamics::dynamic_kernel;
  const bool use_eta = tmpl.dynamics != Dynamics::static_plan;

  auto axis = [](const std::vector<double>& v, bool used, double fallback) {
    return used && !v.empty() ? v : std::vector<double>{fallback};
  };
  std::vector<double> scps = axis(axes.scp, use_scp, tmpl.scp);
  std::vector<double> ps = axis(axes.p, use_kernel, tmpl.reweight.p);
  std::vector<double> lambdas = axis(axes.lambda, use_kernel, tmpl.reweight.lambda);
  std::vector<ThresholdMethod> etas = use_eta && !axes.eta.empty()
                                          ? axes.eta
                                          : std::vector<ThresholdMethod>{tmpl.threshold};

  std::vector<StrategySpec> out;
  for (double scp : scps)
    for (double p : ps)
      for (double lambda : lambdas)
        for (ThresholdMethod eta : etas) {
          StrategySpec s = tmpl;
          s.scp = scp;
          s.reweight.p = p;
          s.reweight.lambda = lambda;
          s.threshold = eta;
          s.validate();
          out.push_back(s);
        }
  if (out.empty()) fail_validation("empty strategy grid");
  return out;
}

GridSearchResult grid_search(const StrategySpec& tmpl, const GridAxes& axes,
                             std::span<const BacktestCase> cases, bool maximize, int threads) {
  if (cases.empty()) fail_validation("grid search without calibration cases");
  std::vector<StrategySpec> specs = enumerate_grid(tmpl, axes);
  GridSearchResult result;
  result.cells.resize(specs.size());
  const metrics::DownsideMode mode =
      tmpl.agent == Agent::seller ? metrics::DownsideMode::seller : metrics::DownsideMode::spread;
  parallel_for(specs.size(), threads, [&](std::size_t c) {
    std::vector<double> pnl;
    pnl.reserve(cases.size());
    for (const BacktestCase& bc : cases)
      pnl.push_back(simulate_strategy(specs[c], *bc.ensemble, bc.realized).profit);
    GridCell& cell = result.cells[c];
    cell.spec = specs[c];
    cell.total_profit = metrics::total_profit(pnl);
    cell.downside = metrics::downside(pnl, mode);
    cell.sortino = metrics::sortino(cell.total_profit, cell.downside);
  });
  std::size_t best = 0;
  for (std::size_t c = 1; c < result.cells.size(); ++c) {
    double a = result.cells[c].sortino, b = result.cells[best].sortino;
    if (maximize ? a > b : a < b) best = c;
  }
  result.best_index = best;
  return result;
}

}  // namespace pathcast
