#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "zclassifier/latent.hpp"
#include "zclassifier/rng.hpp"

namespace zc {

namespace {

struct Gaussian2 {
  // Cached inverse and log-normalizer of a 2x2 covariance.
  double inv00, inv01, inv11, log_norm;
};

Gaussian2 prepare(const std::array<double, 4>& cov) {
  const double det = cov[0] * cov[3] - cov[1] * cov[2];
  if (!(det > 0.0) || !(cov[0] > 0.0)) {
    throw std::runtime_error("gmm: covariance not positive definite");
  }
  Gaussian2 g;
  g.inv00 = cov[3] / det;
  g.inv01 = -cov[1] / det;
  g.inv11 = cov[0] / det;
  g.log_norm = -std::log(2.0 * M_PI) - 0.5 * std::log(det);
  return g;
}

double log_pdf(const Gaussian2& g, double dx, double dy) {
  const double quad = dx * (g.inv00 * dx + g.inv01 * dy) + dy * (g.inv01 * dx + g.inv11 * dy);
  return g.log_norm - 0.5 * quad;
}

bool is_singular(const std::array<double, 4>& cov, double scale) {
  const double det = cov[0] * cov[3] - cov[1] * cov[2];
  return !(det > 1e-12 * scale * scale) || !(cov[0] > 0.0) || !(cov[3] > 0.0);
}

}  // namespace

GmmModel fit_gmm(const Tensor& x2, std::size_t k, std::uint64_t seed, std::size_t max_iters,
                 double tol) {
  if (x2.rank() != 2 || x2.dim(1) != 2) {
    throw ShapeError("gmm: expected [N x 2], got " + shape_str(x2.shape()));
  }
  const std::size_t n = x2.dim(0);
  if (k == 0) throw std::invalid_argument("gmm: k must be >= 1");
  if (n < std::max<std::size_t>(k, 2)) {
    throw std::invalid_argument("gmm: needs at least max(k, 2) points");
  }

  // Data scale for the singular-covariance guard.
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x2.at(i, 0);
    my += x2.at(i, 1);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  std::array<double, 4> data_cov{0.0, 0.0, 0.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = x2.at(i, 0) - mx;
    const double dy = x2.at(i, 1) - my;
    data_cov[0] += dx * dx;
    data_cov[1] += dx * dy;
    data_cov[3] += dy * dy;
  }
  for (auto& v : data_cov) v /= static_cast<double>(n);
  data_cov[2] = data_cov[1];
  const double scale = std::sqrt(std::max(data_cov[0], data_cov[3]) + 1e-30);

  GmmModel model;
  model.components.resize(k);
  {
    // Seeded init: distinct sample points as means, shared data covariance.
    auto order = Rng(seed).stream(3).permutation(n);
    std::array<double, 4> init_cov = data_cov;
    if (is_singular(init_cov, scale)) {
      init_cov[0] += 1e-6 * scale * scale + 1e-12;
      init_cov[3] += 1e-6 * scale * scale + 1e-12;
      model.regularized = true;
    }
    for (std::size_t j = 0; j < k; ++j) {
      model.components[j].weight = 1.0 / static_cast<double>(k);
      model.components[j].mean = {x2.at(order[j], 0), x2.at(order[j], 1)};
      model.components[j].covariance = init_cov;
    }
  }

  model.responsibilities = Tensor({n, k});
  Tensor& resp = model.responsibilities;
  double prev_ll = -std::numeric_limits<double>::infinity();

  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    // E-step in the log domain.
    std::vector<Gaussian2> cached;
    cached.reserve(k);
    for (const auto& comp : model.components) cached.push_back(prepare(comp.covariance));

    double ll = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double row_max = -std::numeric_limits<double>::infinity();
      std::vector<double> logs(k);
      for (std::size_t j = 0; j < k; ++j) {
        const auto& comp = model.components[j];
        logs[j] = std::log(comp.weight) +
                  log_pdf(cached[j], x2.at(i, 0) - comp.mean[0], x2.at(i, 1) - comp.mean[1]);
        row_max = std::max(row_max, logs[j]);
      }
      double sum = 0.0;
      for (std::size_t j = 0; j < k; ++j) sum += std::exp(logs[j] - row_max);
      const double log_sum = row_max + std::log(sum);
      ll += log_sum;
      for (std::size_t j = 0; j < k; ++j) resp.at(i, j) = std::exp(logs[j] - log_sum);
    }
    model.log_likelihood_trace.push_back(ll);

    if (ll - prev_ll < tol && iter > 0) {
      model.converged = true;
      break;
    }
    prev_ll = ll;

    // M-step.
    for (std::size_t j = 0; j < k; ++j) {
      double nj = 0.0, sx = 0.0, sy = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        nj += resp.at(i, j);
        sx += resp.at(i, j) * x2.at(i, 0);
        sy += resp.at(i, j) * x2.at(i, 1);
      }
      auto& comp = model.components[j];
      comp.weight = nj / static_cast<double>(n);
      if (nj <= 0.0) {
        comp.covariance = data_cov;
        model.regularized = true;
        continue;
      }
      comp.mean = {sx / nj, sy / nj};
      std::array<double, 4> cov{0.0, 0.0, 0.0, 0.0};
      for (std::size_t i = 0; i < n; ++i) {
        const double dx = x2.at(i, 0) - comp.mean[0];
        const double dy = x2.at(i, 1) - comp.mean[1];
        const double r = resp.at(i, j);
        cov[0] += r * dx * dx;
        cov[1] += r * dx * dy;
        cov[3] += r * dy * dy;
      }
      for (auto& v : cov) v /= nj;
      cov[2] = cov[1];
      if (is_singular(cov, scale)) {
        cov[0] += 1e-6 * scale * scale + 1e-12;
        cov[3] += 1e-6 * scale * scale + 1e-12;
        model.regularized = true;
      }
      comp.covariance = cov;
    }
  }
  return model;
}

}  // namespace zc
