#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "zclassifier/tensor.hpp"

namespace zc {

enum class Domain { ind, ood_natural, ood_gaussian, ood_uniform };

std::string domain_name(Domain d);

/// Per-channel (rank-4 inputs) or per-dimension (rank-2 inputs) affine
/// standardization stats. Computed on training data only and re-applied
/// verbatim to test and OOD inputs.
struct Normalization {
  std::vector<double> mean;
  std::vector<double> stddev;
  bool identity() const { return mean.empty(); }
};

struct Dataset {
  Tensor inputs;            // [N x dim] or [N x C x H x W]
  std::vector<int> labels;  // empty for unlabeled (OOD) sources
  Domain domain = Domain::ind;
  Normalization norm;       // stats already applied to inputs

  std::size_t size() const { return inputs.rank() ? inputs.dim(0) : 0; }
  bool labeled() const { return !labels.empty(); }
};

/// Canonical CIFAR-10 binary batches: records of 3073 bytes, one label byte
/// then 3072 CHW pixel bytes. Pixels are scaled to [0,1] and standardized
/// per channel with train-set stats.
struct CifarPair {
  Dataset train;
  Dataset test;
};
CifarPair load_cifar10(const std::string& dir);

struct BlobConfig {
  std::size_t k = 10;
  std::size_t n_per_class = 600;
  std::size_t dim = 16;
  double spread = 1.0;
  void validate() const;
};

/// Class centers used by gen_blobs: axis-scaled for dim >= k, a circle in
/// the first two dimensions otherwise, a line for dim == 1. Pairwise center
/// distance is 9 * spread (above the 6 * spread separability floor).
std::vector<std::vector<double>> blob_centers(const BlobConfig& cfg);

/// Spherical Gaussian blobs, N(center_c, spread^2 I); labeled, domain ind.
Dataset gen_blobs(const BlobConfig& cfg, std::uint64_t seed);

/// Elementwise N(0,1); unlabeled, domain ood_gaussian. shape_like is the
/// per-sample shape.
Dataset gen_gaussian_noise(const Shape& shape_like, std::size_t n, std::uint64_t seed);

/// Elementwise U[lo, hi); unlabeled, domain ood_uniform.
Dataset gen_uniform_noise(const Shape& shape_like, std::size_t n, double lo, double hi,
                          std::uint64_t seed);

/// The in-distribution generator with every center translated by shift;
/// unlabeled by default (domain ood_natural), labeled variant for
/// OOD-classification style checks.
Dataset gen_shifted_blobs(const BlobConfig& cfg, const std::vector<double>& shift,
                          std::uint64_t seed, bool keep_labels = false);

Normalization compute_normalization(const Dataset& train);
Dataset apply_normalization(const Dataset& data, const Normalization& norm);

/// One row per sample, features flattened, label last (-1 when unlabeled).
void export_csv(const Dataset& data, const std::string& path);

}  // namespace zc
