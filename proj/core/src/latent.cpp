#include "zclassifier/latent.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "zclassifier/gaussian_head.hpp"
#include "zclassifier/linalg.hpp"
#include "zclassifier/rng.hpp"
#include "zclassifier/special.hpp"

namespace zc {

namespace {

void check_matrix(const char* op, const Tensor& x, std::size_t min_rows) {
  if (x.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected [N x K], got " + shape_str(x.shape()));
  }
  if (x.dim(0) < min_rows) {
    throw std::invalid_argument(std::string(op) + ": needs at least " + std::to_string(min_rows) +
                                " rows, got " + std::to_string(x.dim(0)));
  }
}

std::vector<double> column_means(const Tensor& x) {
  const std::size_t n = x.dim(0), k = x.dim(1);
  std::vector<double> mean(k, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < k; ++j) mean[j] += x[i * k + j];
  for (std::size_t j = 0; j < k; ++j) mean[j] /= static_cast<double>(n);
  return mean;
}

}  // namespace

Tensor covariance(const Tensor& x) {
  check_matrix("covariance", x, 2);
  const std::size_t n = x.dim(0), k = x.dim(1);
  const auto mean = column_means(x);
  Tensor cov({k, k});
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t a = 0; a < k; ++a) {
      const double da = x[i * k + a] - mean[a];
      for (std::size_t b = a; b < k; ++b) {
        cov.at(a, b) += da * (x[i * k + b] - mean[b]);
      }
    }
  }
  const double inv = 1.0 / static_cast<double>(n - 1);
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = a; b < k; ++b) {
      cov.at(a, b) *= inv;
      cov.at(b, a) = cov.at(a, b);
    }
  return cov;
}

Tensor correlation(const Tensor& x) {
  Tensor cov = covariance(x);
  const std::size_t k = cov.dim(0);
  std::vector<double> inv_sd(k);
  for (std::size_t a = 0; a < k; ++a) {
    const double var = cov.at(a, a);
    if (var <= 0.0) {
      throw std::invalid_argument("correlation: zero-variance column " + std::to_string(a));
    }
    inv_sd[a] = 1.0 / std::sqrt(var);
  }
  Tensor corr({k, k});
  for (std::size_t a = 0; a < k; ++a)
    for (std::size_t b = 0; b < k; ++b) corr.at(a, b) = cov.at(a, b) * inv_sd[a] * inv_sd[b];
  for (std::size_t a = 0; a < k; ++a) corr.at(a, a) = 1.0;
  return corr;
}

double frobenius_diff(const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError("frobenius_diff: shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

BartlettResult bartlett_test(const std::vector<std::vector<double>>& groups) {
  const std::size_t k = groups.size();
  if (k < 2) throw std::invalid_argument("bartlett: needs at least 2 groups");
  double total_n = 0.0;
  std::vector<double> variances(k);
  for (std::size_t g = 0; g < k; ++g) {
    const auto& xs = groups[g];
    if (xs.size() < 2) {
      throw std::invalid_argument("bartlett: group " + std::to_string(g) + " has fewer than 2 values");
    }
    double mean = 0.0;
    for (double v : xs) mean += v;
    mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double v : xs) ss += (v - mean) * (v - mean);
    const double var = ss / static_cast<double>(xs.size() - 1);
    if (!(var > 0.0)) {
      throw std::invalid_argument("bartlett: group " + std::to_string(g) + " has zero variance");
    }
    variances[g] = var;
    total_n += static_cast<double>(xs.size());
  }

  const double dof_total = total_n - static_cast<double>(k);
  double pooled = 0.0, sum_log = 0.0, sum_inv = 0.0;
  for (std::size_t g = 0; g < k; ++g) {
    const double ni = static_cast<double>(groups[g].size());
    pooled += (ni - 1.0) * variances[g];
    sum_log += (ni - 1.0) * std::log(variances[g]);
    sum_inv += 1.0 / (ni - 1.0);
  }
  pooled /= dof_total;

  const double m = dof_total * std::log(pooled) - sum_log;
  const double correction =
      1.0 + (sum_inv - 1.0 / dof_total) / (3.0 * (static_cast<double>(k) - 1.0));

  BartlettResult r;
  r.statistic = std::max(0.0, m / correction);
  r.p_value = chi_squared_survival(r.statistic, static_cast<double>(k) - 1.0);
  return r;
}

namespace {

// Largest-magnitude entry of each row is made positive; first index wins ties.
void fix_row_signs(Tensor& rows) {
  const std::size_t n = rows.dim(0), k = rows.dim(1);
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t arg = 0;
    for (std::size_t j = 1; j < k; ++j)
      if (std::fabs(rows.at(i, j)) > std::fabs(rows.at(i, arg))) arg = j;
    if (rows.at(i, arg) < 0.0)
      for (std::size_t j = 0; j < k; ++j) rows.at(i, j) = -rows.at(i, j);
  }
}

}  // namespace

PcaResult pca(const Tensor& x, std::size_t n_components) {
  check_matrix("pca", x, 2);
  const std::size_t n = x.dim(0), k = x.dim(1);
  if (n_components == 0 || n_components > std::min(n, k)) {
    throw std::invalid_argument("pca: n_components must lie in [1, min(N, K)]");
  }
  PcaResult out;
  out.mean = column_means(x);
  const auto eig = symmetric_eigen(covariance(x));

  out.components = Tensor({n_components, k});
  out.explained_variance.resize(n_components);
  double total = 0.0;
  for (double ev : eig.eigenvalues) total += std::max(0.0, ev);
  for (std::size_t c = 0; c < n_components; ++c) {
    out.explained_variance[c] = eig.eigenvalues[c];
    for (std::size_t j = 0; j < k; ++j) out.components.at(c, j) = eig.eigenvectors.at(j, c);
  }
  fix_row_signs(out.components);
  out.explained_variance_ratio.resize(n_components);
  for (std::size_t c = 0; c < n_components; ++c) {
    out.explained_variance_ratio[c] = total > 0.0 ? std::max(0.0, out.explained_variance[c]) / total : 0.0;
  }

  out.projection = Tensor({n, n_components});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n_components; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += (x[i * k + j] - out.mean[j]) * out.components.at(c, j);
      out.projection.at(i, c) = s;
    }
  return out;
}

ScatterMatrices scatter_matrices(const Tensor& x, const std::vector<int>& labels) {
  check_matrix("scatter_matrices", x, 2);
  const std::size_t n = x.dim(0), k = x.dim(1);
  if (labels.size() != n) {
    throw ShapeError("scatter_matrices: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  std::set<int> classes(labels.begin(), labels.end());
  if (classes.size() < 2) throw std::invalid_argument("scatter_matrices: needs >= 2 classes present");

  const auto grand = column_means(x);
  ScatterMatrices out{Tensor({k, k}), Tensor({k, k})};
  for (int cls : classes) {
    std::vector<double> mean(k, 0.0);
    double count = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != cls) continue;
      count += 1.0;
      for (std::size_t j = 0; j < k; ++j) mean[j] += x[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) mean[j] /= count;
    for (std::size_t i = 0; i < n; ++i) {
      if (labels[i] != cls) continue;
      for (std::size_t a = 0; a < k; ++a) {
        const double da = x[i * k + a] - mean[a];
        for (std::size_t b = 0; b < k; ++b)
          out.within.at(a, b) += da * (x[i * k + b] - mean[b]);
      }
    }
    for (std::size_t a = 0; a < k; ++a) {
      const double da = mean[a] - grand[a];
      for (std::size_t b = 0; b < k; ++b) out.between.at(a, b) += count * da * (mean[b] - grand[b]);
    }
  }
  return out;
}

LdaResult fisher_lda(const Tensor& x, const std::vector<int>& labels, std::size_t n_components) {
  auto sm = scatter_matrices(x, labels);
  const std::size_t k = x.dim(1);
  std::set<int> classes(labels.begin(), labels.end());
  const std::size_t max_components = classes.size() - 1;
  if (n_components == 0 || n_components > max_components) {
    throw std::invalid_argument("fisher_lda: n_components must lie in [1, classes - 1] = [1, " +
                                std::to_string(max_components) + "]");
  }

  double trace = 0.0;
  for (std::size_t i = 0; i < k; ++i) trace += sm.within.at(i, i);
  const double ridge = 1e-6 * trace / static_cast<double>(k);
  for (std::size_t i = 0; i < k; ++i) sm.within.at(i, i) += ridge;

  Tensor l;
  try {
    l = cholesky(sm.within);
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(std::string("fisher_lda: within-class scatter singular after "
                                         "regularization: ") + e.what());
  }

  // Reduce S_b v = lambda S_w v to the symmetric problem
  // (L^-1 S_b L^-T) u = lambda u with v = L^-T u.
  Tensor m({k, k});
  for (std::size_t col = 0; col < k; ++col) {
    std::vector<double> b(k);
    for (std::size_t i = 0; i < k; ++i) b[i] = sm.between.at(i, col);
    auto y = solve_lower(l, b);
    for (std::size_t i = 0; i < k; ++i) m.at(i, col) = y[i];
  }
  // m = L^-1 S_b; now apply L^-1 from the right via transposition.
  Tensor mt({k, k});
  for (std::size_t row = 0; row < k; ++row) {
    std::vector<double> b(k);
    for (std::size_t j = 0; j < k; ++j) b[j] = m.at(row, j);
    auto y = solve_lower(l, b);
    for (std::size_t j = 0; j < k; ++j) mt.at(row, j) = y[j];
  }

  const auto eig = symmetric_eigen(mt);
  LdaResult out;
  out.eigenvalues.assign(eig.eigenvalues.begin(),
                         eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(n_components));
  out.directions = Tensor({n_components, k});
  for (std::size_t c = 0; c < n_components; ++c) {
    std::vector<double> u(k);
    for (std::size_t i = 0; i < k; ++i) u[i] = eig.eigenvectors.at(i, c);
    auto v = solve_lower_transposed(l, u);
    double norm = 0.0;
    for (double vi : v) norm += vi * vi;
    norm = std::sqrt(norm);
    for (std::size_t j = 0; j < k; ++j) out.directions.at(c, j) = v[j] / norm;
  }
  fix_row_signs(out.directions);

  const std::size_t n = x.dim(0);
  out.projection = Tensor({n, n_components});
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t c = 0; c < n_components; ++c) {
      double s = 0.0;
      for (std::size_t j = 0; j < k; ++j) s += x[i * k + j] * out.directions.at(c, j);
      out.projection.at(i, c) = s;
    }
  return out;
}

EllipseParams ellipse_from_covariance(const std::array<double, 2>& mean,
                                      const std::array<double, 4>& cov) {
  Tensor c({2, 2}, std::vector<double>{cov[0], cov[1], cov[2], cov[3]});
  bool regularized = false;
  auto eig = symmetric_eigen(c);
  if (eig.eigenvalues[1] <= 0.0) {
    c.at(0, 0) += 1e-6;
    c.at(1, 1) += 1e-6;
    eig = symmetric_eigen(c);
    regularized = true;
  }
  EllipseParams e;
  e.center = mean;
  // 2-sigma confidence contour (~86% of mass in 2-D).
  e.major_axis = 2.0 * std::sqrt(std::max(0.0, eig.eigenvalues[0]));
  e.minor_axis = 2.0 * std::sqrt(std::max(0.0, eig.eigenvalues[1]));
  double angle = std::atan2(eig.eigenvectors.at(1, 0), eig.eigenvectors.at(0, 0));
  // Axis direction is sign-free; fold into (-pi/2, pi/2].
  while (angle > 0.5 * M_PI) angle -= M_PI;
  while (angle <= -0.5 * M_PI) angle += M_PI;
  e.angle = angle;
  const double ratio = eig.eigenvalues[0] > 0.0 ? eig.eigenvalues[1] / eig.eigenvalues[0] : 1.0;
  e.degenerate = regularized || ratio > 0.95;
  return e;
}

std::vector<ClassGaussian> fit_class_gaussians(const Tensor& x2, const std::vector<int>& labels) {
  check_matrix("fit_class_gaussians", x2, 3);
  if (x2.dim(1) != 2) {
    throw ShapeError("fit_class_gaussians: expected [N x 2], got " + shape_str(x2.shape()));
  }
  if (labels.size() != x2.dim(0)) {
    throw ShapeError("fit_class_gaussians: label count mismatch");
  }
  std::set<int> classes(labels.begin(), labels.end());
  std::vector<ClassGaussian> out;
  for (int cls : classes) {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < labels.size(); ++i)
      if (labels[i] == cls) rows.push_back(i);
    if (rows.size() < 3) {
      throw std::invalid_argument("fit_class_gaussians: class " + std::to_string(cls) +
                                  " has fewer than 3 points");
    }
    ClassGaussian g;
    g.class_index = cls;
    for (std::size_t i : rows) {
      g.mean[0] += x2.at(i, 0);
      g.mean[1] += x2.at(i, 1);
    }
    const double inv_n = 1.0 / static_cast<double>(rows.size());
    g.mean[0] *= inv_n;
    g.mean[1] *= inv_n;
    for (std::size_t i : rows) {
      const double dx = x2.at(i, 0) - g.mean[0];
      const double dy = x2.at(i, 1) - g.mean[1];
      g.covariance[0] += dx * dx;
      g.covariance[1] += dx * dy;
      g.covariance[3] += dy * dy;
    }
    // MLE covariance (divisor n).
    g.covariance[0] *= inv_n;
    g.covariance[1] *= inv_n;
    g.covariance[2] = g.covariance[1];
    g.covariance[3] *= inv_n;
    g.ellipse = ellipse_from_covariance(g.mean, g.covariance);
    out.push_back(std::move(g));
  }
  return out;
}

SweepResult noise_calibration_sweep(const Model& model, const Dataset& data,
                                    const std::vector<double>& stds, std::size_t trials,
                                    std::uint64_t seed) {
  if (stds.empty()) throw std::invalid_argument("sweep: empty std grid");
  for (std::size_t i = 0; i < stds.size(); ++i) {
    if (stds[i] < 0.0) throw std::invalid_argument("sweep: stds must be nonnegative");
    if (i && stds[i] <= stds[i - 1]) {
      throw std::invalid_argument("sweep: std grid must be strictly increasing");
    }
  }
  if (trials == 0) throw std::invalid_argument("sweep: trials must be positive");
  if (!data.labeled()) throw std::invalid_argument("sweep: dataset must be labeled");

  const Tensor decision = forward_decision_logits(model, data.inputs);
  const std::size_t n = decision.dim(0), k = decision.dim(1);
  SweepResult out;
  out.stds = stds;
  out.accuracy.resize(stds.size());

  Rng root(seed);
  for (std::size_t si = 0; si < stds.size(); ++si) {
    const double std_dev = stds[si];
    if (std_dev == 0.0) {
      // Deterministic path: exactly the clean accuracy.
      auto preds = predict(decision);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (preds[i] == data.labels[i]) ++hits;
      out.accuracy[si] = static_cast<double>(hits) / static_cast<double>(n);
      continue;
    }
    double acc_sum = 0.0;
    for (std::size_t t = 0; t < trials; ++t) {
      Rng stream = root.stream(si * 1000003 + t);
      Tensor noisy = decision;
      for (std::size_t i = 0; i < noisy.size(); ++i) noisy[i] += std_dev * stream.normal();
      auto preds = predict(noisy);
      std::size_t hits = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (preds[i] == data.labels[i]) ++hits;
      acc_sum += static_cast<double>(hits) / static_cast<double>(n);
    }
    out.accuracy[si] = acc_sum / static_cast<double>(trials);
  }
  return out;
}

std::vector<double> default_sweep_grid() {
  std::vector<double> grid(10);
  for (int i = 0; i < 10; ++i) grid[static_cast<std::size_t>(i)] = 2.0 * i / 9.0;
  return grid;
}

LogitCollection collect_logits(const Model& model, const Dataset& data, const std::string& source) {
  LogitCollection out;
  out.vectors = forward_decision_logits(model, data.inputs);
  out.labels = data.labels;
  out.source = source;
  return out;
}

}  // namespace zc
