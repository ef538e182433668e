#include "pathcast/svr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "pathcast/common.hpp"
#include "pathcast/stats.hpp"

namespace pathcast {

double corrected_kernel(std::span<const double> x_i, std::span<const double> x_j, double yhat_i,
                        double yhat_j, const KernelParams& params) {
  if (x_i.size() != x_j.size()) fail_validation("corrected_kernel: dimension mismatch");
  if (params.l <= 0.0 || params.g <= 0.0) fail_validation("kernel widths must be positive");
  double sq = 0.0;
  for (std::size_t k = 0; k < x_i.size(); ++k) {
    double d = x_i[k] - x_j[k];
    sq += d * d;
  }
  double dy = yhat_i - yhat_j;
  return std::exp(-params.l * std::sqrt(sq)) * std::exp(-params.g * dy * dy);
}

KernelParams fit_kernel_widths(std::span<const double> pairwise_x_dists,
                               std::span<const double> pairwise_yhat_sqdists,
                               const KernelParams& levels) {
  if (pairwise_x_dists.empty() || pairwise_yhat_sqdists.empty())
    fail_validation("fit_kernel_widths: empty distance sample");
  auto in01 = [](double a) { return a > 0.0 && a < 1.0; };
  if (!in01(levels.alpha1_laplace) || !in01(levels.alpha2_laplace) || !in01(levels.alpha1_gauss) ||
      !in01(levels.alpha2_gauss))
    fail_validation("quantile levels must lie in (0,1)");
  if (levels.alpha1_laplace <= 0.5)
    fail_validation("laplace alpha1 must exceed 0.5 for a positive width");

  KernelParams out = levels;
  double qx = stats::quantile_linear({pairwise_x_dists.begin(), pairwise_x_dists.end()},
                                     levels.alpha2_laplace);
  if (qx <= 0.0) fail_validation("degenerate distance distribution (feature space)");
  out.l = -std::log(2.0 - 2.0 * levels.alpha1_laplace) / qx;

  double qsq = stats::quantile_linear({pairwise_yhat_sqdists.begin(), pairwise_yhat_sqdists.end()},
                                      levels.alpha2_gauss);
  if (qsq <= 0.0) fail_validation("degenerate distance distribution (auxiliary forecasts)");
  double z = stats::normal_quantile(levels.alpha1_gauss);
  out.g = z * z / (2.0 * qsq);
  return out;
}

void pairwise_distance_samples(const std::vector<std::vector<double>>& X,
                               std::span<const double> aux, std::vector<double>& x_dists,
                               std::vector<double>& yhat_sqdists) {
  const std::size_t n = X.size();
  if (n < 2) fail_validation("need at least 2 rows for pairwise distances");
  if (aux.size() != n) fail_validation("aux size mismatch");
  const std::size_t total = n * (n - 1) / 2;
  const std::size_t cap = 2'000'000;
  const std::size_t stride = total > cap ? (total + cap - 1) / cap : 1;
  x_dists.clear();
  yhat_sqdists.clear();
  std::size_t flat = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j, ++flat) {
      if (flat % stride != 0) continue;
      double sq = 0.0;
      for (std::size_t k = 0; k < X[i].size(); ++k) {
        double d = X[i][k] - X[j][k];
        sq += d * d;
      }
      x_dists.push_back(std::sqrt(sq));
      double dy = aux[i] - aux[j];
      yhat_sqdists.push_back(dy * dy);
    }
  }
}

Matrix build_gram(const std::vector<std::vector<double>>& X, std::span<const double> aux,
                  const KernelParams& params) {
  const int n = static_cast<int>(X.size());
  Matrix gram(n);
  for (int i = 0; i < n; ++i) {
    gram.at(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      double v = corrected_kernel(X[static_cast<std::size_t>(i)], X[static_cast<std::size_t>(j)],
                                  aux[static_cast<std::size_t>(i)],
                                  aux[static_cast<std::size_t>(j)], params);
      gram.at(i, j) = v;
      gram.at(j, i) = v;
    }
  }
  return gram;
}

namespace {

constexpr double kCurvatureFloor = 1e-12;
constexpr double kDiagonalJitter = 1e-10;

}  // namespace

DualSolution solve_dual(const Matrix& gram, std::span<const double> targets,
                        const SvrHyperParams& hyper) {
  const int n = gram.n;
  if (static_cast<int>(targets.size()) != n) fail_validation("solve_dual: target size mismatch");
  if (hyper.C <= 0.0) fail_validation("C must be positive");
  if (hyper.epsilon < 0.0) fail_validation("epsilon must be nonnegative");
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(gram.at(i, j) - gram.at(j, i)) > 1e-8)
        fail_validation("solve_dual: gram matrix not symmetric");

  const double C = hyper.C;
  const double eps = hyper.epsilon;
  const long max_iter = hyper.max_passes > 0 ? hyper.max_passes : 10L * n * (2L * n);

  // 2N variables: k < n is alpha_k (sign +1), k >= n is alpha*_{k-n} (sign -1).
  // Objective (to minimize): 1/2 d'Qd + eps sum(alpha+alpha*) + y'd with
  // d = alpha - alpha*; constraint sum d = 0, box [0, C].
  std::vector<double> v(static_cast<std::size_t>(2 * n), 0.0);
  std::vector<double> grad(static_cast<std::size_t>(2 * n));
  for (int i = 0; i < n; ++i) {
    grad[static_cast<std::size_t>(i)] = eps + targets[static_cast<std::size_t>(i)];
    grad[static_cast<std::size_t>(n + i)] = eps - targets[static_cast<std::size_t>(i)];
  }
  auto sign_of = [&](int k) { return k < n ? 1.0 : -1.0; };
  auto base_of = [&](int k) { return k < n ? k : k - n; };

  DualSolution sol;
  long iter = 0;
  double m_val = 0.0, M_val = 0.0;
  for (;; ++iter) {
    // Maximal violating pair.
    int best_up = -1, best_down = -1;
    m_val = -std::numeric_limits<double>::infinity();
    M_val = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 2 * n; ++k) {
      const double s = sign_of(k);
      const double vk = v[static_cast<std::size_t>(k)];
      const double score = -s * grad[static_cast<std::size_t>(k)];
      const bool can_up = (s > 0 && vk < C) || (s < 0 && vk > 0);
      const bool can_down = (s > 0 && vk > 0) || (s < 0 && vk < C);
      if (can_up && score > m_val) {
        m_val = score;
        best_up = k;
      }
      if (can_down && score < M_val) {
        M_val = score;
        best_down = k;
      }
    }
    if (best_up < 0 || best_down < 0 || m_val - M_val <= hyper.solver_tolerance) {
      sol.converged = true;
      break;
    }
    if (iter >= max_iter) {
      sol.converged = false;  // best iterate so far, flagged
      break;
    }

    const int i = best_up, j = best_down;
    const int bi = base_of(i), bj = base_of(j);
    double a = gram.at(bi, bi) + gram.at(bj, bj) - 2.0 * gram.at(bi, bj);
    if (a <= 0.0) a = std::max(a + 2.0 * kDiagonalJitter, kCurvatureFloor);
    double t = (m_val - M_val) / a;

    const double si = sign_of(i), sj = sign_of(j);
    double cap_i = si > 0 ? C - v[static_cast<std::size_t>(i)] : v[static_cast<std::size_t>(i)];
    double cap_j = sj > 0 ? v[static_cast<std::size_t>(j)] : C - v[static_cast<std::size_t>(j)];
    t = std::min(t, std::min(cap_i, cap_j));

    v[static_cast<std::size_t>(i)] += si * t;
    v[static_cast<std::size_t>(j)] -= sj * t;
    v[static_cast<std::size_t>(i)] = std::clamp(v[static_cast<std::size_t>(i)], 0.0, C);
    v[static_cast<std::size_t>(j)] = std::clamp(v[static_cast<std::size_t>(j)], 0.0, C);

    // d_bi += t, d_bj -= t regardless of which halves were touched.
    const double* row_i = gram.row(bi);
    const double* row_j = gram.row(bj);
    for (int k = 0; k < n; ++k) {
      const double delta = t * (row_i[k] - row_j[k]);
      grad[static_cast<std::size_t>(k)] += delta;
      grad[static_cast<std::size_t>(n + k)] -= delta;
    }
  }
  sol.iterations = iter;
  sol.kkt_violation = std::max(0.0, m_val - M_val);

  sol.alpha.assign(targets.size(), 0.0);
  sol.alpha_star.assign(targets.size(), 0.0);
  for (int i = 0; i < n; ++i) {
    double ai = v[static_cast<std::size_t>(i)];
    double as = v[static_cast<std::size_t>(n + i)];
    // Complementary slackness canonicalization: shrinking both leaves
    // d = alpha - alpha* unchanged and never increases the objective.
    double c = std::min(ai, as);
    sol.alpha[static_cast<std::size_t>(i)] = ai - c;
    sol.alpha_star[static_cast<std::size_t>(i)] = as - c;
  }

  // Bias from free variables when any exist, otherwise the midpoint of the
  // feasible interval [-M, -m].
  double bias_sum = 0.0;
  int bias_count = 0;
  const double edge = 1e-9 * C;
  for (int k = 0; k < 2 * n; ++k) {
    int b = base_of(k);
    double val = k < n ? sol.alpha[static_cast<std::size_t>(b)]
                       : sol.alpha_star[static_cast<std::size_t>(b)];
    if (val > edge && val < C - edge) {
      bias_sum += sign_of(k) * grad[static_cast<std::size_t>(k)];
      ++bias_count;
    }
  }
  if (bias_count > 0) {
    sol.bias = bias_sum / bias_count;
  } else {
    sol.bias = -(m_val + M_val) / 2.0;
  }

  // In-sample predictions from the maintained gradient:
  // grad[i] = (Qd)_i + eps + y_i and f(x_i) = -(Qd)_i + b.
  sol.in_sample_prediction.resize(targets.size());
  for (int i = 0; i < n; ++i) {
    double qd = grad[static_cast<std::size_t>(i)] - eps - targets[static_cast<std::size_t>(i)];
    sol.in_sample_prediction[static_cast<std::size_t>(i)] = -qd + sol.bias;
  }
  sol.objective = svr_dual_objective(gram, sol.alpha, sol.alpha_star, targets, eps);
  return sol;
}

double svr_dual_objective(const Matrix& gram, std::span<const double> alpha,
                          std::span<const double> alpha_star, std::span<const double> targets,
                          double epsilon) {
  const int n = gram.n;
  std::vector<double> d(targets.size());
  for (int i = 0; i < n; ++i)
    d[static_cast<std::size_t>(i)] =
        alpha[static_cast<std::size_t>(i)] - alpha_star[static_cast<std::size_t>(i)];
  double quad = 0.0, lin = 0.0, box = 0.0;
  for (int i = 0; i < n; ++i) {
    double qi = 0.0;
    const double* row = gram.row(i);
    for (int j = 0; j < n; ++j) qi += row[j] * d[static_cast<std::size_t>(j)];
    quad += d[static_cast<std::size_t>(i)] * qi;
    lin += targets[static_cast<std::size_t>(i)] * d[static_cast<std::size_t>(i)];
    box += alpha[static_cast<std::size_t>(i)] + alpha_star[static_cast<std::size_t>(i)];
  }
  return 0.5 * quad + epsilon * box + lin;
}

SvrFitResult fit_svr_with_gram(const Matrix& gram, const std::vector<std::vector<double>>& X,
                               std::span<const double> aux, std::span<const double> targets,
                               const SvrHyperParams& hyper, const KernelParams& params) {
  DualSolution dual = solve_dual(gram, targets, hyper);
  SvrFitResult out;
  out.converged = dual.converged;
  out.objective = dual.objective;
  out.in_sample_prediction = std::move(dual.in_sample_prediction);
  SvrModel& m = out.model;
  m.alpha = std::move(dual.alpha);
  m.alpha_star = std::move(dual.alpha_star);
  m.bias = dual.bias;
  m.kernel = params;
  for (int i = 0; i < gram.n; ++i) {
    if (m.alpha[static_cast<std::size_t>(i)] > 0.0 ||
        m.alpha_star[static_cast<std::size_t>(i)] > 0.0) {
      m.support_indices.push_back(i);
      m.stored_features.push_back(X[static_cast<std::size_t>(i)]);
      m.stored_aux.push_back(aux[static_cast<std::size_t>(i)]);
    }
  }
  return out;
}

SvrFitResult fit_svr(const std::vector<std::vector<double>>& X, std::span<const double> aux,
                     std::span<const double> targets, const SvrHyperParams& hyper,
                     const KernelParams& params) {
  Matrix gram = build_gram(X, aux, params);
  return fit_svr_with_gram(gram, X, aux, targets, hyper, params);
}

double predict(const SvrModel& model, std::span<const double> x, double yhat_aux) {
  double acc = model.bias;
  for (std::size_t k = 0; k < model.support_indices.size(); ++k) {
    int i = model.support_indices[k];
    double c = model.coef(i);
    acc += c * corrected_kernel(model.stored_features[k], x, model.stored_aux[k], yhat_aux,
                                model.kernel);
  }
  if (!std::isfinite(acc)) fail_runtime("predict produced a non-finite value");
  return acc;
}

std::string svr_model_to_json(const SvrModel& model) {
  nlohmann::json j;
  j["format"] = "pathcast-svr";
  j["version"] = 1;
  j["alpha"] = model.alpha;
  j["alpha_star"] = model.alpha_star;
  j["bias"] = model.bias;
  j["support_indices"] = model.support_indices;
  j["stored_features"] = model.stored_features;
  j["stored_aux"] = model.stored_aux;
  j["kernel"] = {{"l", model.kernel.l},
                 {"g", model.kernel.g},
                 {"alpha1_laplace", model.kernel.alpha1_laplace},
                 {"alpha2_laplace", model.kernel.alpha2_laplace},
                 {"alpha1_gauss", model.kernel.alpha1_gauss},
                 {"alpha2_gauss", model.kernel.alpha2_gauss}};
  return j.dump();
}

SvrModel svr_model_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
  if (j.is_discarded() || j.value("format", "") != "pathcast-svr" || j.value("version", 0) != 1)
    fail_validation("not a pathcast-svr v1 artifact");
  SvrModel m;
  m.alpha = j.at("alpha").get<std::vector<double>>();
  m.alpha_star = j.at("alpha_star").get<std::vector<double>>();
  m.bias = j.at("bias").get<double>();
  m.support_indices = j.at("support_indices").get<std::vector<int>>();
  m.stored_features = j.at("stored_features").get<std::vector<std::vector<double>>>();
  m.stored_aux = j.at("stored_aux").get<std::vector<double>>();
  const auto& k = j.at("kernel");
  m.kernel.l = k.at("l").get<double>();
  m.kernel.g = k.at("g").get<double>();
  m.kernel.alpha1_laplace = k.at("alpha1_laplace").get<double>();
  m.kernel.alpha2_laplace = k.at("alpha2_laplace").get<double>();
  m.kernel.alpha1_gauss = k.at("alpha1_gauss").get<double>();
  m.kernel.alpha2_gauss = k.at("alpha2_gauss").get<double>();
  return m;
}

}  // namespace pathcast
