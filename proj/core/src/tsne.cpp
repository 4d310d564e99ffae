#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zclassifier/latent.hpp"
#include "zclassifier/rng.hpp"

namespace zc {

namespace {

constexpr double kPerplexityTol = 1e-4;
constexpr int kBisectionIters = 200;
constexpr double kQFloor = 1e-12;

Tensor squared_distances(const Tensor& x) {
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor dist({n, n});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      double s = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double diff = x[i * d + c] - x[j * d + c];
        s += diff * diff;
      }
      dist.at(i, j) = s;
      dist.at(j, i) = s;
    }
  return dist;
}

// Row affinities at a given precision beta = 1 / (2 sigma^2); returns the
// row perplexity. Distances are shifted by the row minimum for stability.
double row_affinities(const Tensor& d2, std::size_t i, double beta, std::vector<double>& p) {
  const std::size_t n = d2.dim(0);
  double dmin = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n; ++j)
    if (j != i) dmin = std::min(dmin, d2.at(i, j));
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) {
      p[j] = 0.0;
      continue;
    }
    p[j] = std::exp(-beta * (d2.at(i, j) - dmin));
    sum += p[j];
  }
  double entropy = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (j == i) continue;
    p[j] /= sum;
    if (p[j] > 0.0) entropy -= p[j] * std::log(p[j]);
  }
  return std::exp(entropy);
}

}  // namespace

Tensor tsne_conditional_probabilities(const Tensor& x, double perplexity) {
  if (x.rank() != 2) throw ShapeError("tsne: expected [N x D], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0);
  if (n > 5000) throw std::invalid_argument("tsne: exact method is limited to N <= 5000");
  if (!(perplexity >= 1.0) || 3.0 * perplexity >= static_cast<double>(n)) {
    throw std::invalid_argument("tsne: perplexity " + std::to_string(perplexity) +
                                " infeasible for N = " + std::to_string(n) +
                                " (requires 1 <= perplexity < N/3)");
  }

  const Tensor d2 = squared_distances(x);
  Tensor p_cond({n, n});
  std::vector<double> row(n);
  for (std::size_t i = 0; i < n; ++i) {
    double beta = 1.0, beta_lo = 0.0, beta_hi = std::numeric_limits<double>::infinity();
    double perp = row_affinities(d2, i, beta, row);
    for (int it = 0; it < kBisectionIters && std::fabs(perp - perplexity) > kPerplexityTol; ++it) {
      if (perp > perplexity) {
        // Entropy too high: sharpen the kernel.
        beta_lo = beta;
        beta = std::isinf(beta_hi) ? beta * 2.0 : 0.5 * (beta + beta_hi);
      } else {
        beta_hi = beta;
        beta = beta_lo > 0.0 ? 0.5 * (beta + beta_lo) : beta * 0.5;
      }
      perp = row_affinities(d2, i, beta, row);
    }
    for (std::size_t j = 0; j < n; ++j) p_cond.at(i, j) = row[j];
  }
  return p_cond;
}

Tensor tsne_joint_probabilities(const Tensor& x, double perplexity) {
  Tensor p = tsne_conditional_probabilities(x, perplexity);
  const std::size_t n = p.dim(0);
  Tensor joint({n, n});
  const double inv = 1.0 / (2.0 * static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) joint.at(i, j) = (p.at(i, j) + p.at(j, i)) * inv;
  return joint;
}

namespace {

double kl_cost(const Tensor& p, const Tensor& y) {
  const std::size_t n = p.dim(0);
  Tensor qnum({n, n});
  double sum_q = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = y.at(i, 0) - y.at(j, 0);
      const double dy = y.at(i, 1) - y.at(j, 1);
      const double q = 1.0 / (1.0 + dx * dx + dy * dy);
      qnum.at(i, j) = q;
      qnum.at(j, i) = q;
      sum_q += 2.0 * q;
    }
  double cost = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      const double pij = p.at(i, j);
      if (pij <= 0.0) continue;
      const double qij = std::max(qnum.at(i, j) / sum_q, kQFloor);
      cost += pij * std::log(pij / qij);
    }
  return cost;
}

}  // namespace

TsneResult tsne(const Tensor& x, const TsneOptions& options) {
  const Tensor p = tsne_joint_probabilities(x, options.perplexity);
  const std::size_t n = p.dim(0);
  if (options.iterations == 0) throw std::invalid_argument("tsne: iterations must be positive");
  const double lr = options.learning_rate > 0.0 ? options.learning_rate
                                                : static_cast<double>(n) / 12.0;

  Rng rng = Rng(options.seed).stream(7);
  Tensor y({n, 2});
  for (std::size_t i = 0; i < y.size(); ++i) y[i] = 1e-4 * rng.normal();

  Tensor vel({n, 2});
  Tensor gains({n, 2}, 1.0);
  Tensor grad({n, 2});
  Tensor qnum({n, n});

  TsneResult result;
  for (std::size_t iter = 1; iter <= options.iterations; ++iter) {
    const bool exaggerating = iter <= options.exaggeration_iters;
    const double p_scale = exaggerating ? options.exaggeration : 1.0;

    double sum_q = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) {
        const double dx = y.at(i, 0) - y.at(j, 0);
        const double dy = y.at(i, 1) - y.at(j, 1);
        const double q = 1.0 / (1.0 + dx * dx + dy * dy);
        qnum.at(i, j) = q;
        qnum.at(j, i) = q;
        sum_q += 2.0 * q;
      }

    grad.fill(0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (i == j) continue;
        const double mult =
            4.0 * (p_scale * p.at(i, j) - qnum.at(i, j) / sum_q) * qnum.at(i, j);
        grad.at(i, 0) += mult * (y.at(i, 0) - y.at(j, 0));
        grad.at(i, 1) += mult * (y.at(i, 1) - y.at(j, 1));
      }

    const double momentum =
        iter <= options.exaggeration_iters ? options.initial_momentum : options.final_momentum;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const bool same_sign = (grad[i] > 0.0) == (vel[i] > 0.0);
      gains[i] = same_sign ? std::max(0.01, gains[i] * 0.8) : gains[i] + 0.2;
      vel[i] = momentum * vel[i] - lr * gains[i] * grad[i];
      y[i] += vel[i];
    }
    double mean_x = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mean_x += y.at(i, 0);
      mean_y += y.at(i, 1);
    }
    mean_x /= static_cast<double>(n);
    mean_y /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
      y.at(i, 0) -= mean_x;
      y.at(i, 1) -= mean_y;
    }

    if (!exaggerating &&
        (iter % options.cost_eval_stride == 0 || iter == options.iterations)) {
      result.cost_trace.emplace_back(iter, kl_cost(p, y));
    }
  }
  result.embedding = std::move(y);
  return result;
}

}  // namespace zc
