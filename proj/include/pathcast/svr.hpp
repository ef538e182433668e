#pragma once

#include <span>
#include <string>
#include <vector>

namespace pathcast {

// Dense symmetric kernel matrix.
struct Matrix {
  int n = 0;
  std::vector<double> a;
  Matrix() = default;
  explicit Matrix(int order) : n(order), a(static_cast<std::size_t>(order) * order, 0.0) {}
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * n; }
};

struct KernelParams {
  double l = 1.0;  // Laplace width on the feature space
  double g = 1.0;  // Gaussian width on the auxiliary forecasts
  double alpha1_laplace = 0.75;
  double alpha2_laplace = 0.5;
  double alpha1_gauss = 0.75;
  double alpha2_gauss = 0.75;
};

struct SvrHyperParams {
  double C = 1.0;
  double epsilon = 0.1;
  double solver_tolerance = 1e-6;
  long max_passes = 0;  // 0 -> 10 * N * (2N) dual-variable updates
};

// Fitted model: dual coefficients for every training sample plus the support
// rows needed for prediction. The predictor is
//   f(x) = sum_i (-alpha_i + alpha*_i) K(x_i, x) + b.
struct SvrModel {
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  double bias = 0.0;
  std::vector<int> support_indices;
  std::vector<std::vector<double>> stored_features;  // rows of the support vectors
  std::vector<double> stored_aux;                    // their auxiliary forecasts
  KernelParams kernel;

  int n_samples() const { return static_cast<int>(alpha.size()); }
  double coef(int i) const { return -alpha[i] + alpha_star[i]; }
};

// exp(-l ||x_i - x_j||) * exp(-g (yhat_i - yhat_j)^2)
double corrected_kernel(std::span<const double> x_i, std::span<const double> x_j, double yhat_i,
                        double yhat_j, const KernelParams& params);

// Width heuristics: match the empirical alpha2-quantile of the pairwise
// distances to the theoretical alpha1-quantile of the kernel's distribution.
// The Gaussian sample is of squared distances.
KernelParams fit_kernel_widths(std::span<const double> pairwise_x_dists,
                               std::span<const double> pairwise_yhat_sqdists,
                               const KernelParams& levels);

// All-pairs distance samples (strided subsample above a size cap so width
// fitting stays quadratic-free for large pools).
void pairwise_distance_samples(const std::vector<std::vector<double>>& X,
                               std::span<const double> aux, std::vector<double>& x_dists,
                               std::vector<double>& yhat_sqdists);

Matrix build_gram(const std::vector<std::vector<double>>& X, std::span<const double> aux,
                  const KernelParams& params);

struct DualSolution {
  std::vector<double> alpha;
  std::vector<double> alpha_star;
  double bias = 0.0;
  bool converged = false;
  long iterations = 0;
  double objective = 0.0;
  double kkt_violation = 0.0;
  std::vector<double> in_sample_prediction;
};

// Two-coordinate working-set descent (SMO) on the 2N-variable dual with
// maximal-violating-pair selection.
DualSolution solve_dual(const Matrix& gram, std::span<const double> targets,
                        const SvrHyperParams& hyper);

double svr_dual_objective(const Matrix& gram, std::span<const double> alpha,
                          std::span<const double> alpha_star, std::span<const double> targets,
                          double epsilon);

struct SvrFitResult {
  SvrModel model;
  std::vector<double> in_sample_prediction;
  bool converged = true;
  double objective = 0.0;
};

// Gram construction + dual solve + support-row extraction in one step.
SvrFitResult fit_svr(const std::vector<std::vector<double>>& X, std::span<const double> aux,
                     std::span<const double> targets, const SvrHyperParams& hyper,
                     const KernelParams& params);
SvrFitResult fit_svr_with_gram(const Matrix& gram, const std::vector<std::vector<double>>& X,
                               std::span<const double> aux, std::span<const double> targets,
                               const SvrHyperParams& hyper, const KernelParams& params);

double predict(const SvrModel& model, std::span<const double> x, double yhat_aux);

// Versioned JSON artifact for the fit/forecast split.
std::string svr_model_to_json(const SvrModel& model);
SvrModel svr_model_from_json(const std::string& text);

}  // namespace pathcast
