#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "zclassifier/backbone.hpp"
#include "zclassifier/data.hpp"

namespace zc {

enum class OptimizerKind { sgd, adam };

struct OptimizerConfig {
  OptimizerKind kind = OptimizerKind::adam;
  double lr = 1e-3;
  double momentum = 0.9;  // sgd only
  double beta1 = 0.9;     // adam only
  double beta2 = 0.999;
  double eps = 1e-8;

  static OptimizerConfig sgd_config(double lr, double momentum = 0.9);
  static OptimizerConfig adam_config(double lr = 1e-3, double beta1 = 0.9, double beta2 = 0.999,
                                     double eps = 1e-8);
  void validate() const;
};

struct TrainConfig {
  std::size_t epochs = 30;
  std::size_t batch_size = 128;
  OptimizerConfig optimizer;
  std::uint64_t seed = 0;
  std::size_t eval_every = 1;          // validation cadence, in epochs
  double validation_fraction = 0.1;    // deterministic seeded split
  bool ce_on_sampled_latent = false;   // CE on averaged draws instead of mu

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double ce = 0.0;
  double kl = 0.0;
  double total = 0.0;
  double train_accuracy = 0.0;
  double val_accuracy = 0.0;
  double seconds = 0.0;
};

struct ClassReport {
  struct PerClass {
    double precision = 0.0;
    double recall = 0.0;
    std::size_t support = 0;
  };
  std::vector<PerClass> classes;
  double accuracy = 0.0;
};

/// Non-finite loss abort; carries the failing position and components.
class TrainError : public std::runtime_error {
 public:
  TrainError(std::size_t epoch, std::size_t batch, double ce, double kl, double total);
  std::size_t epoch() const { return epoch_; }
  std::size_t batch() const { return batch_; }

 private:
  std::size_t epoch_, batch_;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> records;
};

/// Mini-batch training over a seeded 90/10 train/validation split of
/// `data`. Fully reproducible: identical (model, data, config) give
/// bit-identical parameters.
TrainResult train(const Model& initial, const Dataset& data, const TrainConfig& cfg);

/// Per-class precision/recall/support and overall accuracy. Undefined
/// ratios (empty class, no predictions) report as 0.
ClassReport evaluate(const Model& model, const Dataset& data);
ClassReport report_from_predictions(const std::vector<int>& predicted,
                                    const std::vector<int>& truth, std::size_t num_classes);

/// history.csv: epoch,ce,kl,total,train_acc,val_acc,seconds.
void write_history_csv(const std::vector<EpochRecord>& records, const std::string& path);

// Exposed for direct optimizer-step checks.
class Optimizer {
 public:
  Optimizer(OptimizerConfig cfg, const Model& model);
  void step(Model& model, const std::vector<Tensor>& grads);

 private:
  OptimizerConfig cfg_;
  std::vector<Tensor> velocity_;  // sgd
  std::vector<Tensor> m_, v_;     // adam
  std::size_t t_ = 0;
};

}  // namespace zc
