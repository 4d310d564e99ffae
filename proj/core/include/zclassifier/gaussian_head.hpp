#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "zclassifier/autograd.hpp"
#include "zclassifier/rng.hpp"
#include "zclassifier/tensor.hpp"

namespace zc {

/// Per-sample class-logit posterior: row b of mu/log_var parameterizes the
/// factorized Gaussian q_b(z) = prod_c N(z_c | mu[b,c], exp(log_var[b,c])).
struct GaussianLogits {
  Tensor mu;       // [batch x K]
  Tensor log_var;  // [batch x K]

  std::size_t batch() const { return mu.dim(0); }
  std::size_t num_classes() const { return mu.dim(1); }
};

/// Target distribution for class c: N(one_hot(c), I).
struct ClassPrototype {
  int class_index = 0;
  std::vector<double> mean;  // one-hot, length K

  static ClassPrototype make(int class_index, std::size_t num_classes);
};

enum class HeadVariant { zclassifier, nokl, softmax };

/// Head configuration. nokl is the zclassifier with lambda forced to 0;
/// softmax has no Gaussian posterior at all.
struct HeadKind {
  HeadVariant variant = HeadVariant::zclassifier;
  double lambda = 10.0;
  std::size_t latent_dim = 4;
  std::size_t samples_per_forward = 1;

  static HeadKind make_zclassifier(double lambda = 10.0, std::size_t latent_dim = 4,
                                   std::size_t samples = 1);
  static HeadKind make_nokl(std::size_t latent_dim = 4, std::size_t samples = 1);
  static HeadKind make_softmax();

  bool is_gaussian() const { return variant != HeadVariant::softmax; }
  double effective_lambda() const { return variant == HeadVariant::zclassifier ? lambda : 0.0; }
  void validate() const;
};

struct LossBreakdown {
  double cross_entropy = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double lambda = 0.0;
};

/// KL( N(mu, diag(exp(log_var))) || N(one_hot(label), I) )
///   = 1/2 sum_c [ (mu_c - onehot_c)^2 + sigma_c^2 - 1 - log sigma_c^2 ].
/// Zero exactly at the prototype, strictly positive elsewhere.
double kl_to_prototype(std::span<const double> mu, std::span<const double> log_var, int label);

/// Row-wise KL against each row's own label; returns length-batch vector.
std::vector<double> kl_to_prototype_rows(const GaussianLogits& g, const std::vector<int>& labels);

/// z[b,c,j] = mu[b,c] + exp(log_var[b,c]/2) * eps[b,c,j].
Tensor reparameterize(const Tensor& mu, const Tensor& log_var, const Tensor& eps);

/// Mean over the latent axis: [batch x K x d] -> [batch x K]. The averaged
/// draw is distributed N(mu, sigma^2/d).
Tensor average_latent(const Tensor& z);

/// Scalar loss components for a batch; values only, no graph.
LossBreakdown loss(const HeadKind& head, const GaussianLogits& g, const std::vector<int>& labels);
LossBreakdown loss(const HeadKind& head, const Tensor& raw_logits, const std::vector<int>& labels);

/// Per-row argmax of mu; ties break toward the lowest class index.
std::vector<int> predict(const Tensor& mu);

/// One averaged reparameterized draw per sample: eps ~ N(0,1) over
/// [batch x K x d], averaged over d (and over samples_per_forward draws).
Tensor sample_mean_logits(const GaussianLogits& g, const HeadKind& head, Rng& rng);

// --- graph-building forms used by the trainer ---

struct LossGraph {
  Var cross_entropy;
  Var kl;
  Var total;
  double lambda = 0.0;
};

/// Mean-over-batch KL node built from autograd primitives.
Var kl_to_prototype_mean(const Var& mu, const Var& log_var, const std::vector<int>& labels);

/// Differentiable reparameterized draw (eps enters as a constant).
Var reparameterize(const Var& mu, const Var& log_var, const Tensor& eps);
Var average_latent(const Var& z);

/// total = CE(mu) + lambda * KL for Gaussian heads (CE on raw logits and no
/// KL for softmax). When ce_on_sampled_latent is set, the CE term uses the
/// averaged reparameterized draw with the provided eps instead of mu.
LossGraph build_loss(const HeadKind& head, const Var& mu, const Var& log_var,
                     const std::vector<int>& labels, const Tensor* eps = nullptr,
                     bool ce_on_sampled_latent = false);
LossGraph build_loss_softmax(const Var& logits, const std::vector<int>& labels);

}  // namespace zc
