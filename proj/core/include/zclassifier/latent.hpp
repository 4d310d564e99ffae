#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zclassifier/backbone.hpp"
#include "zclassifier/data.hpp"
#include "zclassifier/tensor.hpp"

namespace zc {

/// Logit vectors collected from one model over a dataset.
struct LogitCollection {
  Tensor vectors;  // [N x K]
  std::vector<int> labels;
  std::string source;  // model id
};

/// Unbiased covariance (divisor N - 1) of the rows of X.
Tensor covariance(const Tensor& x);
/// correlation = D^{-1/2} Sigma D^{-1/2}; zero-variance columns are an error.
Tensor correlation(const Tensor& x);

double frobenius_diff(const Tensor& a, const Tensor& b);

struct BartlettResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// Bartlett's equality-of-variances test across groups of one logit
/// dimension, with the standard correction factor; p-value from the
/// chi-square survival function with k - 1 dof.
BartlettResult bartlett_test(const std::vector<std::vector<double>>& groups);

struct PcaResult {
  Tensor projection;  // [N x n]
  Tensor components;  // [n x K] rows, orthonormal, largest-|entry| positive
  std::vector<double> explained_variance;        // eigenvalues, descending
  std::vector<double> explained_variance_ratio;  // eigenvalue / total variance
  std::vector<double> mean;                      // column means removed before projecting
};

PcaResult pca(const Tensor& x, std::size_t n_components);

struct LdaResult {
  Tensor projection;  // [N x n]
  Tensor directions;  // [n x K] rows, unit norm, largest-|entry| positive
  std::vector<double> eigenvalues;
};

struct ScatterMatrices {
  Tensor within;   // S_w
  Tensor between;  // S_b
};
ScatterMatrices scatter_matrices(const Tensor& x, const std::vector<int>& labels);

/// Directions solving S_b v = lambda S_w v with S_w ridged by
/// 1e-6 * trace(S_w) / K. n_components is capped at classes - 1.
LdaResult fisher_lda(const Tensor& x, const std::vector<int>& labels, std::size_t n_components);

// --- exact t-SNE ---

struct TsneOptions {
  double perplexity = 30.0;
  std::size_t iterations = 1000;
  double learning_rate = 0.0;  // <= 0 picks N / 12
  std::size_t exaggeration_iters = 250;
  double exaggeration = 12.0;
  double initial_momentum = 0.5;
  double final_momentum = 0.8;
  std::uint64_t seed = 0;
  std::size_t cost_eval_stride = 10;
};

struct TsneResult {
  Tensor embedding;  // [N x 2]
  std::vector<std::pair<std::size_t, double>> cost_trace;  // (iteration, KL) post-exaggeration
};

/// Row-stochastic conditional affinities; per-point sigma found by bisection
/// until the row perplexity matches within 1e-4.
Tensor tsne_conditional_probabilities(const Tensor& x, double perplexity);
/// Symmetrized joint affinities P = (P_c + P_c^T) / (2N); sums to 1.
Tensor tsne_joint_probabilities(const Tensor& x, double perplexity);

TsneResult tsne(const Tensor& x, const TsneOptions& options);

// --- per-class Gaussians and GMM over a 2-D projection ---

struct EllipseParams {
  std::array<double, 2> center{0.0, 0.0};
  double major_axis = 0.0;  // 2-sigma confidence radius along the major axis
  double minor_axis = 0.0;
  double angle = 0.0;  // radians in (-pi/2, pi/2]
  bool degenerate = false;  // near-isotropic or regularized-singular
};

struct ClassGaussian {
  int class_index = 0;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 4> covariance{0.0, 0.0, 0.0, 0.0};  // row-major 2x2, MLE
  EllipseParams ellipse;
};

std::vector<ClassGaussian> fit_class_gaussians(const Tensor& x2, const std::vector<int>& labels);

struct GmmComponent {
  double weight = 0.0;
  std::array<double, 2> mean{0.0, 0.0};
  std::array<double, 4> covariance{0.0, 0.0, 0.0, 0.0};
};

struct GmmModel {
  std::vector<GmmComponent> components;
  Tensor responsibilities;  // [N x k]
  std::vector<double> log_likelihood_trace;
  bool converged = false;
  bool regularized = false;  // a covariance needed the singular-ridge
};

/// Full-covariance EM on 2-D points; log-likelihood is non-decreasing per
/// iteration, stopping at delta < tol or max_iters.
GmmModel fit_gmm(const Tensor& x2, std::size_t k, std::uint64_t seed, std::size_t max_iters = 200,
                 double tol = 1e-6);

EllipseParams ellipse_from_covariance(const std::array<double, 2>& mean,
                                      const std::array<double, 4>& cov);

// --- logit-noise calibration sweep ---

struct SweepResult {
  std::vector<double> stds;      // strictly increasing, nonnegative
  std::vector<double> accuracy;  // one entry per std
};

/// Accuracy of argmax(decision_logits + std * eps) averaged over trials;
/// the std = 0 entry is the exact deterministic accuracy (no noise drawn).
SweepResult noise_calibration_sweep(const Model& model, const Dataset& data,
                                    const std::vector<double>& stds, std::size_t trials,
                                    std::uint64_t seed);

/// The default 10-step grid from 0.00 to 2.00.
std::vector<double> default_sweep_grid();

/// mu (or raw logits) plus labels for one model over a dataset.
LogitCollection collect_logits(const Model& model, const Dataset& data, const std::string& source);

}  // namespace zc
