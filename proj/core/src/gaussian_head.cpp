#include "zclassifier/gaussian_head.hpp"

#include <cmath>
#include <stdexcept>

namespace zc {

ClassPrototype ClassPrototype::make(int class_index, std::size_t num_classes) {
  if (class_index < 0 || static_cast<std::size_t>(class_index) >= num_classes) {
    throw std::out_of_range("class prototype: index " + std::to_string(class_index) +
                            " out of range for " + std::to_string(num_classes) + " classes");
  }
  ClassPrototype p;
  p.class_index = class_index;
  p.mean.assign(num_classes, 0.0);
  p.mean[static_cast<std::size_t>(class_index)] = 1.0;
  return p;
}

HeadKind HeadKind::make_zclassifier(double lambda, std::size_t latent_dim, std::size_t samples) {
  HeadKind h{HeadVariant::zclassifier, lambda, latent_dim, samples};
  h.validate();
  return h;
}

HeadKind HeadKind::make_nokl(std::size_t latent_dim, std::size_t samples) {
  HeadKind h{HeadVariant::nokl, 0.0, latent_dim, samples};
  h.validate();
  return h;
}

HeadKind HeadKind::make_softmax() { return HeadKind{HeadVariant::softmax, 0.0, 0, 0}; }

void HeadKind::validate() const {
  switch (variant) {
    case HeadVariant::zclassifier:
      if (!(lambda > 0.0)) {
        throw std::invalid_argument("head: zclassifier requires lambda > 0, got " +
                                    std::to_string(lambda));
      }
      break;
    case HeadVariant::nokl:
      if (lambda != 0.0) {
        throw std::invalid_argument("head: nokl forces lambda = 0, got " + std::to_string(lambda));
      }
      break;
    case HeadVariant::softmax:
      return;
  }
  if (latent_dim == 0) throw std::invalid_argument("head: latent_dim must be positive");
  if (samples_per_forward == 0) throw std::invalid_argument("head: samples_per_forward must be positive");
}

double kl_to_prototype(std::span<const double> mu, std::span<const double> log_var, int label) {
  const std::size_t k = mu.size();
  if (log_var.size() != k) {
    throw ShapeError("kl_to_prototype: mu length " + std::to_string(k) + " vs log_var length " +
                     std::to_string(log_var.size()));
  }
  if (label < 0 || static_cast<std::size_t>(label) >= k) {
    throw std::out_of_range("kl_to_prototype: label " + std::to_string(label) +
                            " out of range for " + std::to_string(k) + " classes");
  }
  double acc = 0.0;
  for (std::size_t c = 0; c < k; ++c) {
    const double target = (c == static_cast<std::size_t>(label)) ? 1.0 : 0.0;
    const double diff = mu[c] - target;
    const double var = std::exp(log_var[c]);
    acc += diff * diff + var - 1.0 - log_var[c];
  }
  return 0.5 * acc;
}

std::vector<double> kl_to_prototype_rows(const GaussianLogits& g, const std::vector<int>& labels) {
  const std::size_t n = g.batch(), k = g.num_classes();
  if (labels.size() != n) {
    throw ShapeError("kl_to_prototype_rows: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = kl_to_prototype({g.mu.data() + i * k, k}, {g.log_var.data() + i * k, k}, labels[i]);
  }
  return out;
}

Tensor reparameterize(const Tensor& mu, const Tensor& log_var, const Tensor& eps) {
  if (!mu.same_shape(log_var)) {
    throw ShapeError("reparameterize: mu " + shape_str(mu.shape()) + " vs log_var " +
                     shape_str(log_var.shape()));
  }
  if (eps.rank() != 3 || eps.dim(0) != mu.dim(0) || eps.dim(1) != mu.dim(1)) {
    throw ShapeError("reparameterize: eps " + shape_str(eps.shape()) +
                     " incompatible with mu " + shape_str(mu.shape()));
  }
  const std::size_t n = mu.dim(0), k = mu.dim(1), d = eps.dim(2);
  Tensor z({n, k, d});
  for (std::size_t i = 0; i < n * k; ++i) {
    const double m = mu[i];
    const double s = std::exp(0.5 * log_var[i]);
    for (std::size_t j = 0; j < d; ++j) z[i * d + j] = m + s * eps[i * d + j];
  }
  return z;
}

Tensor average_latent(const Tensor& z) {
  if (z.rank() != 3) {
    throw ShapeError("average_latent: expected [batch x K x d], got " + shape_str(z.shape()));
  }
  const std::size_t n = z.dim(0), k = z.dim(1), d = z.dim(2);
  if (d == 0) throw ShapeError("average_latent: latent dimension must be >= 1");
  Tensor out({n, k});
  for (std::size_t i = 0; i < n * k; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += z[i * d + j];
    out[i] = s / static_cast<double>(d);
  }
  return out;
}

namespace {

double mean_softmax_ce(const Tensor& logits, const std::vector<int>& labels) {
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    total += mx + std::log(z) - row[static_cast<std::size_t>(labels[i])];
  }
  return total / static_cast<double>(n);
}

void check_labels(std::size_t n, std::size_t k, const std::vector<int>& labels) {
  if (n == 0) throw std::invalid_argument("loss: empty batch");
  if (labels.size() != n) {
    throw ShapeError("loss: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw std::out_of_range("loss: label " + std::to_string(y) + " out of range for " +
                              std::to_string(k) + " classes");
    }
  }
}

}  // namespace

LossBreakdown loss(const HeadKind& head, const GaussianLogits& g, const std::vector<int>& labels) {
  if (!head.is_gaussian()) {
    throw std::invalid_argument("loss: softmax head takes raw logits, not a Gaussian posterior");
  }
  check_labels(g.batch(), g.num_classes(), labels);
  LossBreakdown out;
  out.lambda = head.effective_lambda();
  out.cross_entropy = mean_softmax_ce(g.mu, labels);
  const auto kls = kl_to_prototype_rows(g, labels);
  double s = 0.0;
  for (double v : kls) s += v;
  out.kl = s / static_cast<double>(kls.size());
  out.total = out.cross_entropy + out.lambda * out.kl;
  return out;
}

LossBreakdown loss(const HeadKind& head, const Tensor& raw_logits, const std::vector<int>& labels) {
  if (head.is_gaussian()) {
    throw std::invalid_argument("loss: Gaussian head takes a GaussianLogits posterior");
  }
  check_labels(raw_logits.dim(0), raw_logits.dim(1), labels);
  LossBreakdown out;
  out.lambda = 0.0;
  out.cross_entropy = mean_softmax_ce(raw_logits, labels);
  out.kl = 0.0;
  out.total = out.cross_entropy;
  return out;
}

std::vector<int> predict(const Tensor& mu) {
  if (mu.rank() != 2) {
    throw ShapeError("predict: expected [batch x K], got " + shape_str(mu.shape()));
  }
  const std::size_t n = mu.dim(0), k = mu.dim(1);
  std::vector<int> out(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = mu.data() + i * k;
    std::size_t best = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (row[j] > row[best]) best = j;
    out[i] = static_cast<int>(best);
  }
  return out;
}

Tensor sample_mean_logits(const GaussianLogits& g, const HeadKind& head, Rng& rng) {
  if (!head.is_gaussian()) {
    throw std::invalid_argument("sample_mean_logits: softmax head has no latent distribution");
  }
  const std::size_t n = g.batch(), k = g.num_classes();
  Tensor acc({n, k});
  for (std::size_t s = 0; s < head.samples_per_forward; ++s) {
    Tensor eps = rng.normal_tensor({n, k, head.latent_dim});
    Tensor zbar = average_latent(reparameterize(g.mu, g.log_var, eps));
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += zbar[i];
  }
  const double inv = 1.0 / static_cast<double>(head.samples_per_forward);
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] *= inv;
  return acc;
}

Var kl_to_prototype_mean(const Var& mu, const Var& log_var, const std::vector<int>& labels) {
  const Tensor& m = mu.value();
  if (m.rank() != 2) {
    throw ShapeError("kl_to_prototype_mean: expected [batch x K], got " + shape_str(m.shape()));
  }
  const std::size_t n = m.dim(0), k = m.dim(1);
  check_labels(n, k, labels);
  Tensor targets({n, k});
  for (std::size_t i = 0; i < n; ++i) targets[i * k + static_cast<std::size_t>(labels[i])] = 1.0;

  // mean_i 1/2 sum_c [(mu - t)^2 + exp(lv) - 1 - lv]
  //   = sum over all entries of the bracket, scaled by 1/(2 batch).
  Var diff = sub(mu, Var::constant(std::move(targets)));
  Var bracket = add(square(diff), sub(add_scalar(exp(log_var), -1.0), log_var));
  return scale(reduce_sum(bracket), 0.5 / static_cast<double>(n));
}

Var reparameterize(const Var& mu, const Var& log_var, const Tensor& eps) {
  const std::size_t d = eps.rank() == 3 ? eps.dim(2) : 0;
  if (d == 0 || eps.dim(0) != mu.value().dim(0) || eps.dim(1) != mu.value().dim(1)) {
    throw ShapeError("reparameterize: eps " + shape_str(eps.shape()) + " incompatible with mu " +
                     shape_str(mu.value().shape()));
  }
  Var sigma = exp(scale(log_var, 0.5));
  return add(expand_last(mu, d), mul(expand_last(sigma, d), Var::constant(eps)));
}

Var average_latent(const Var& z) {
  if (z.value().rank() != 3) {
    throw ShapeError("average_latent: expected [batch x K x d], got " + shape_str(z.value().shape()));
  }
  return mean_last(z);
}

LossGraph build_loss(const HeadKind& head, const Var& mu, const Var& log_var,
                     const std::vector<int>& labels, const Tensor* eps,
                     bool ce_on_sampled_latent) {
  if (!head.is_gaussian()) {
    throw std::invalid_argument("build_loss: softmax head uses build_loss_softmax");
  }
  LossGraph out;
  out.lambda = head.effective_lambda();
  if (ce_on_sampled_latent) {
    if (eps == nullptr) {
      throw std::invalid_argument("build_loss: sampled-latent CE requires an eps tensor");
    }
    Var zbar = average_latent(reparameterize(mu, log_var, *eps));
    out.cross_entropy = softmax_cross_entropy(zbar, labels);
  } else {
    out.cross_entropy = softmax_cross_entropy(mu, labels);
  }
  out.kl = kl_to_prototype_mean(mu, log_var, labels);
  out.total = add(out.cross_entropy, scale(out.kl, out.lambda));
  return out;
}

LossGraph build_loss_softmax(const Var& logits, const std::vector<int>& labels) {
  LossGraph out;
  out.lambda = 0.0;
  out.cross_entropy = softmax_cross_entropy(logits, labels);
  out.kl = Var::constant(Tensor::scalar(0.0));
  out.total = out.cross_entropy;
  return out;
}

}  // namespace zc
