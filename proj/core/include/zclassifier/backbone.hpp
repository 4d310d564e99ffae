#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "zclassifier/autograd.hpp"
#include "zclassifier/gaussian_head.hpp"
#include "zclassifier/tensor.hpp"

namespace zc {

enum class BackboneKind { mlp, conv };

/// Feature-extractor plan. "resnet-mini" is the conv kind with residual on;
/// "vgg-mini" is the identical plan with residual off, so the skip
/// connection is the only variable between the two.
struct BackboneConfig {
  BackboneKind kind = BackboneKind::mlp;
  // mlp: widths[0] is the stem output, each later entry adds one block.
  // conv: channels[0] is the stem output; every entry adds one block, the
  // first at stride 1 and each width change at stride 2 with a projection
  // shortcut.
  std::vector<std::size_t> widths;
  std::vector<std::size_t> channels;
  bool residual = true;
  std::vector<std::size_t> input_shape;  // {dim} for mlp, {c, h, w} for conv
  std::size_t num_classes = 2;
  HeadKind head;

  void validate() const;
  std::size_t flat_input_dim() const;

  static BackboneConfig mlp_mini(std::size_t input_dim, std::size_t num_classes, HeadKind head,
                                 bool residual = true, std::vector<std::size_t> widths = {64, 64, 64});
  static BackboneConfig conv_mini(std::vector<std::size_t> input_shape, std::size_t num_classes,
                                  HeadKind head, bool residual = true,
                                  std::vector<std::size_t> channels = {16, 32, 64});
};

/// Named parameter collection; order is the serialization order.
struct Model {
  BackboneConfig config;
  std::vector<std::pair<std::string, Tensor>> params;
  std::uint64_t rng_seed = 0;

  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;
  std::size_t param_count() const;
};

/// Parameter names and shapes implied by a config, in order.
std::vector<std::pair<std::string, Shape>> expected_parameters(const BackboneConfig& config);

/// He-uniform weights, zero biases. The log-variance columns of the head
/// weight are scaled down so initial log sigma^2 stays near 0 (sigma^2 ~ 1)
/// while keeping a live gradient path.
Model init_model(const BackboneConfig& config, std::uint64_t seed);

struct ForwardGraph {
  std::vector<Var> params;  // leaves, aligned with Model::params order
  Var mu;                   // gaussian heads
  Var log_var;              // gaussian heads, clamped to [-10, 10]
  Var logits;               // softmax head
};

/// Define-by-run forward pass; builds a fresh graph over the batch.
ForwardGraph forward_graph(const Model& model, const Tensor& batch);

/// Value-only forwards, evaluated in chunks to bound graph memory.
GaussianLogits forward_gaussian(const Model& model, const Tensor& inputs,
                                std::size_t chunk = 512);
Tensor forward_raw_logits(const Model& model, const Tensor& inputs, std::size_t chunk = 512);

/// mu for Gaussian heads, raw logits for softmax: the matrix the latent
/// analyses and the noise sweep run on.
Tensor forward_decision_logits(const Model& model, const Tensor& inputs, std::size_t chunk = 512);

}  // namespace zc
