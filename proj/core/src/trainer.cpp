#include "zclassifier/trainer.hpp"

#include <chrono>
#include <cmath>
#include <limits>

#include "zclassifier/gaussian_head.hpp"
#include "zclassifier/io.hpp"
#include "zclassifier/rng.hpp"

namespace zc {

OptimizerConfig OptimizerConfig::sgd_config(double lr, double momentum) {
  OptimizerConfig c;
  c.kind = OptimizerKind::sgd;
  c.lr = lr;
  c.momentum = momentum;
  c.validate();
  return c;
}

OptimizerConfig OptimizerConfig::adam_config(double lr, double beta1, double beta2, double eps) {
  OptimizerConfig c;
  c.kind = OptimizerKind::adam;
  c.lr = lr;
  c.beta1 = beta1;
  c.beta2 = beta2;
  c.eps = eps;
  c.validate();
  return c;
}

void OptimizerConfig::validate() const {
  if (!(lr >= 0.0)) throw std::invalid_argument("optimizer: lr must be nonnegative");
  if (kind == OptimizerKind::sgd) {
    if (momentum < 0.0 || momentum >= 1.0) {
      throw std::invalid_argument("optimizer: momentum must lie in [0, 1)");
    }
  } else {
    if (beta1 <= 0.0 || beta1 >= 1.0 || beta2 <= 0.0 || beta2 >= 1.0) {
      throw std::invalid_argument("optimizer: betas must lie in (0, 1)");
    }
    if (!(eps > 0.0)) throw std::invalid_argument("optimizer: eps must be positive");
  }
}

void TrainConfig::validate() const {
  optimizer.validate();
  if (epochs == 0) throw std::invalid_argument("train: epochs must be positive");
  if (batch_size == 0) throw std::invalid_argument("train: batch_size must be positive");
  if (eval_every == 0) throw std::invalid_argument("train: eval_every must be positive");
  if (validation_fraction < 0.0 || validation_fraction >= 1.0) {
    throw std::invalid_argument("train: validation_fraction must lie in [0, 1)");
  }
}

TrainError::TrainError(std::size_t epoch, std::size_t batch, double ce, double kl, double total)
    : std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch) + " batch " +
                         std::to_string(batch) + " (ce=" + std::to_string(ce) +
                         " kl=" + std::to_string(kl) + " total=" + std::to_string(total) + ")"),
      epoch_(epoch),
      batch_(batch) {}

Optimizer::Optimizer(OptimizerConfig cfg, const Model& model) : cfg_(std::move(cfg)) {
  cfg_.validate();
  if (cfg_.kind == OptimizerKind::sgd) {
    for (const auto& [name, t] : model.params) velocity_.emplace_back(t.shape());
  } else {
    for (const auto& [name, t] : model.params) {
      m_.emplace_back(t.shape());
      v_.emplace_back(t.shape());
    }
  }
}

void Optimizer::step(Model& model, const std::vector<Tensor>& grads) {
  if (grads.size() != model.params.size()) {
    throw ShapeError("optimizer: " + std::to_string(grads.size()) + " gradients for " +
                     std::to_string(model.params.size()) + " parameters");
  }
  if (cfg_.kind == OptimizerKind::sgd) {
    for (std::size_t i = 0; i < grads.size(); ++i) {
      Tensor& p = model.params[i].second;
      Tensor& vel = velocity_[i];
      const Tensor& g = grads[i];
      for (std::size_t j = 0; j < p.size(); ++j) {
        vel[j] = cfg_.momentum * vel[j] + g[j];
        p[j] -= cfg_.lr * vel[j];
      }
    }
    return;
  }
  ++t_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < grads.size(); ++i) {
    Tensor& p = model.params[i].second;
    const Tensor& g = grads[i];
    for (std::size_t j = 0; j < p.size(); ++j) {
      m_[i][j] = cfg_.beta1 * m_[i][j] + (1.0 - cfg_.beta1) * g[j];
      v_[i][j] = cfg_.beta2 * v_[i][j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      const double mhat = m_[i][j] / c1;
      const double vhat = v_[i][j] / c2;
      p[j] -= cfg_.lr * mhat / (std::sqrt(vhat) + cfg_.eps);
    }
  }
}

namespace {

Tensor gather_rows(const Tensor& inputs, const std::vector<std::size_t>& idx, std::size_t lo,
                   std::size_t hi) {
  Shape s = inputs.shape();
  const std::size_t row = inputs.size() / s[0];
  s[0] = hi - lo;
  Tensor out(s);
  for (std::size_t i = lo; i < hi; ++i) {
    const double* src = inputs.data() + idx[i] * row;
    double* dst = out.data() + (i - lo) * row;
    for (std::size_t j = 0; j < row; ++j) dst[j] = src[j];
  }
  return out;
}

double accuracy_of(const std::vector<int>& pred, const std::vector<int>& truth) {
  std::size_t hit = 0;
  for (std::size_t i = 0; i < pred.size(); ++i)
    if (pred[i] == truth[i]) ++hit;
  return pred.empty() ? 0.0 : static_cast<double>(hit) / static_cast<double>(pred.size());
}

}  // namespace

TrainResult train(const Model& initial, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (!data.labeled() || data.size() == 0) {
    throw std::invalid_argument("train: dataset must be nonempty and labeled");
  }
  const std::size_t k = initial.config.num_classes;
  for (int y : data.labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw std::out_of_range("train: label " + std::to_string(y) + " out of range for " +
                              std::to_string(k) + " classes");
    }
  }

  TrainResult result;
  result.model = initial;
  Model& model = result.model;

  Rng root(cfg.seed);
  // Stream 0: validation split; stream 1+epoch: per-epoch shuffle;
  // stream 1'000'000+epoch: epsilon draws for the sampled-CE path.
  const std::size_t n = data.size();
  auto split_order = root.stream(0).permutation(n);
  const std::size_t n_val = static_cast<std::size_t>(std::floor(cfg.validation_fraction * n));
  const std::size_t n_train = n - n_val;
  std::vector<std::size_t> train_idx(split_order.begin(), split_order.begin() + n_train);
  std::vector<std::size_t> val_idx(split_order.begin() + n_train, split_order.end());

  Tensor val_inputs;
  std::vector<int> val_labels;
  if (n_val) {
    val_inputs = gather_rows(data.inputs, val_idx, 0, n_val);
    for (std::size_t i = 0; i < n_val; ++i) val_labels.push_back(data.labels[val_idx[i]]);
  }

  Optimizer opt(cfg.optimizer, model);
  const HeadKind& head = model.config.head;
  double last_val_acc = std::numeric_limits<double>::quiet_NaN();

  for (std::size_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    auto order = root.stream(1 + epoch).permutation(n_train);
    std::vector<std::size_t> epoch_idx(n_train);
    for (std::size_t i = 0; i < n_train; ++i) epoch_idx[i] = train_idx[order[i]];
    Rng eps_rng = root.stream(1000000 + epoch);

    double sum_ce = 0.0, sum_kl = 0.0, sum_total = 0.0;
    std::size_t seen = 0, hits = 0, batch_index = 0;

    for (std::size_t lo = 0; lo < n_train; lo += cfg.batch_size, ++batch_index) {
      const std::size_t hi = std::min(n_train, lo + cfg.batch_size);
      const std::size_t m = hi - lo;
      Tensor batch = gather_rows(data.inputs, epoch_idx, lo, hi);
      std::vector<int> labels(m);
      for (std::size_t i = lo; i < hi; ++i) labels[i - lo] = data.labels[epoch_idx[i]];

      ForwardGraph g = forward_graph(model, batch);
      LossGraph lg;
      if (head.is_gaussian()) {
        Tensor eps;
        const Tensor* eps_ptr = nullptr;
        if (cfg.ce_on_sampled_latent) {
          eps = eps_rng.normal_tensor({m, k, head.latent_dim});
          eps_ptr = &eps;
        }
        lg = build_loss(head, g.mu, g.log_var, labels, eps_ptr, cfg.ce_on_sampled_latent);
      } else {
        lg = build_loss_softmax(g.logits, labels);
      }

      const double ce = lg.cross_entropy.value().item();
      const double kl = lg.kl.value().item();
      const double total = lg.total.value().item();
      if (!std::isfinite(total)) throw TrainError(epoch, batch_index, ce, kl, total);

      backward(lg.total);
      std::vector<Tensor> grads;
      grads.reserve(g.params.size());
      for (const auto& v : g.params) grads.push_back(v.grad());
      opt.step(model, grads);

      sum_ce += ce * static_cast<double>(m);
      sum_kl += kl * static_cast<double>(m);
      sum_total += total * static_cast<double>(m);
      seen += m;
      const Tensor& decision = head.is_gaussian() ? g.mu.value() : g.logits.value();
      auto preds = predict(decision);
      for (std::size_t i = 0; i < m; ++i)
        if (preds[i] == labels[i]) ++hits;
    }

    EpochRecord rec;
    rec.epoch = epoch;
    rec.ce = sum_ce / static_cast<double>(seen);
    rec.kl = sum_kl / static_cast<double>(seen);
    rec.total = sum_total / static_cast<double>(seen);
    rec.train_accuracy = static_cast<double>(hits) / static_cast<double>(seen);
    if (n_val && (epoch % cfg.eval_every == 0 || epoch == cfg.epochs)) {
      auto preds = predict(forward_decision_logits(model, val_inputs));
      last_val_acc = accuracy_of(preds, val_labels);
    }
    rec.val_accuracy = last_val_acc;
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    result.records.push_back(rec);
  }
  return result;
}

ClassReport report_from_predictions(const std::vector<int>& predicted,
                                    const std::vector<int>& truth, std::size_t num_classes) {
  if (predicted.size() != truth.size()) {
    throw ShapeError("report: " + std::to_string(predicted.size()) + " predictions for " +
                     std::to_string(truth.size()) + " labels");
  }
  std::vector<std::size_t> tp(num_classes, 0), fp(num_classes, 0), fn(num_classes, 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const auto t = static_cast<std::size_t>(truth[i]);
    const auto p = static_cast<std::size_t>(predicted[i]);
    if (t == p) {
      ++tp[t];
      ++hits;
    } else {
      ++fp[p];
      ++fn[t];
    }
  }
  ClassReport report;
  report.classes.resize(num_classes);
  for (std::size_t c = 0; c < num_classes; ++c) {
    auto& pc = report.classes[c];
    pc.support = tp[c] + fn[c];
    const std::size_t pred_c = tp[c] + fp[c];
    pc.precision = pred_c ? static_cast<double>(tp[c]) / static_cast<double>(pred_c) : 0.0;
    pc.recall = pc.support ? static_cast<double>(tp[c]) / static_cast<double>(pc.support) : 0.0;
  }
  report.accuracy = truth.empty() ? 0.0 : static_cast<double>(hits) / static_cast<double>(truth.size());
  return report;
}

ClassReport evaluate(const Model& model, const Dataset& data) {
  if (!data.labeled()) throw std::invalid_argument("evaluate: dataset must be labeled");
  auto preds = predict(forward_decision_logits(model, data.inputs));
  return report_from_predictions(preds, data.labels, model.config.num_classes);
}

void write_history_csv(const std::vector<EpochRecord>& records, const std::string& path) {
  CsvWriter csv({"epoch", "ce", "kl", "total", "train_acc", "val_acc", "seconds"});
  for (const auto& r : records) {
    csv.add_row({std::to_string(r.epoch), format_double(r.ce), format_double(r.kl),
                 format_double(r.total), format_double(r.train_accuracy),
                 format_double(r.val_accuracy), format_double(r.seconds)});
  }
  csv.save(path);
}

}  // namespace zc
