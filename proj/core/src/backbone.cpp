#include "zclassifier/backbone.hpp"

#include <cmath>
#include <stdexcept>

#include "zclassifier/rng.hpp"

namespace zc {

namespace {

constexpr double kLogVarClamp = 10.0;
// Head weight scale for the log-variance columns; keeps |log sigma^2| well
// below 1 at init so sigma^2 starts near the unit prior.
constexpr double kLogVarInitScale = 0.1;

struct ConvBlockPlan {
  std::size_t in_ch = 0, out_ch = 0, stride = 1;
  bool projection = false;
};

std::vector<ConvBlockPlan> conv_blocks(const BackboneConfig& cfg) {
  std::vector<ConvBlockPlan> plan;
  std::size_t in_ch = cfg.channels[0];
  for (std::size_t i = 0; i < cfg.channels.size(); ++i) {
    ConvBlockPlan b;
    b.in_ch = in_ch;
    b.out_ch = cfg.channels[i];
    b.stride = (b.out_ch == b.in_ch) ? 1 : 2;
    b.projection = (b.out_ch != b.in_ch) || (b.stride != 1);
    plan.push_back(b);
    in_ch = b.out_ch;
  }
  return plan;
}

struct MlpBlockPlan {
  std::size_t in_w = 0, out_w = 0;
  bool projection = false;
};

std::vector<MlpBlockPlan> mlp_blocks(const BackboneConfig& cfg) {
  std::vector<MlpBlockPlan> plan;
  std::size_t in_w = cfg.widths[0];
  for (std::size_t i = 1; i < cfg.widths.size(); ++i) {
    MlpBlockPlan b;
    b.in_w = in_w;
    b.out_w = cfg.widths[i];
    b.projection = (b.in_w != b.out_w);
    plan.push_back(b);
    in_w = b.out_w;
  }
  return plan;
}

std::size_t head_input_width(const BackboneConfig& cfg) {
  if (cfg.kind == BackboneKind::mlp) return cfg.widths.back();
  return cfg.channels.back();
}

std::size_t head_output_width(const BackboneConfig& cfg) {
  return cfg.head.is_gaussian() ? 2 * cfg.num_classes : cfg.num_classes;
}

// Spatial size after the stem and block plan; throws if it collapses.
std::size_t conv_final_spatial(const BackboneConfig& cfg) {
  std::size_t h = cfg.input_shape[1];
  std::size_t w = cfg.input_shape[2];
  for (const auto& b : conv_blocks(cfg)) {
    if (b.stride == 2) {
      h = (h + 2 - 3) / 2 + 1;
      w = (w + 2 - 3) / 2 + 1;
    }
    if (h == 0 || w == 0) throw ShapeError("backbone: spatial size collapsed to zero");
  }
  if (h != w) throw ShapeError("backbone: conv plan requires square feature maps");
  return h;
}

}  // namespace

void BackboneConfig::validate() const {
  head.validate();
  if (num_classes < 2) throw std::invalid_argument("backbone: num_classes must be >= 2");
  if (kind == BackboneKind::mlp) {
    if (input_shape.size() != 1 || input_shape[0] == 0) {
      throw std::invalid_argument("backbone: mlp expects input_shape {dim}");
    }
    if (widths.empty()) throw std::invalid_argument("backbone: mlp needs at least one width");
    for (std::size_t w : widths)
      if (w == 0) throw std::invalid_argument("backbone: widths must be positive");
  } else {
    if (input_shape.size() != 3 || input_shape[0] == 0 || input_shape[1] == 0 || input_shape[2] == 0) {
      throw std::invalid_argument("backbone: conv expects input_shape {c, h, w}");
    }
    if (channels.empty()) throw std::invalid_argument("backbone: conv needs at least one channel width");
    for (std::size_t c : channels)
      if (c == 0) throw std::invalid_argument("backbone: channels must be positive");
    conv_final_spatial(*this);
  }
}

std::size_t BackboneConfig::flat_input_dim() const {
  std::size_t n = 1;
  for (std::size_t d : input_shape) n *= d;
  return n;
}

BackboneConfig BackboneConfig::mlp_mini(std::size_t input_dim, std::size_t num_classes,
                                        HeadKind head, bool residual,
                                        std::vector<std::size_t> widths) {
  BackboneConfig cfg;
  cfg.kind = BackboneKind::mlp;
  cfg.widths = std::move(widths);
  cfg.residual = residual;
  cfg.input_shape = {input_dim};
  cfg.num_classes = num_classes;
  cfg.head = head;
  cfg.validate();
  return cfg;
}

BackboneConfig BackboneConfig::conv_mini(std::vector<std::size_t> input_shape,
                                         std::size_t num_classes, HeadKind head, bool residual,
                                         std::vector<std::size_t> channels) {
  BackboneConfig cfg;
  cfg.kind = BackboneKind::conv;
  cfg.channels = std::move(channels);
  cfg.residual = residual;
  cfg.input_shape = std::move(input_shape);
  cfg.num_classes = num_classes;
  cfg.head = head;
  cfg.validate();
  return cfg;
}

Tensor& Model::param(const std::string& name) {
  for (auto& [n, t] : params)
    if (n == name) return t;
  throw std::out_of_range("model: no parameter named " + name);
}

const Tensor& Model::param(const std::string& name) const {
  for (const auto& [n, t] : params)
    if (n == name) return t;
  throw std::out_of_range("model: no parameter named " + name);
}

std::size_t Model::param_count() const {
  std::size_t n = 0;
  for (const auto& [name, t] : params) n += t.size();
  return n;
}

std::vector<std::pair<std::string, Shape>> expected_parameters(const BackboneConfig& cfg) {
  cfg.validate();
  std::vector<std::pair<std::string, Shape>> out;
  if (cfg.kind == BackboneKind::mlp) {
    const std::size_t d = cfg.input_shape[0];
    out.emplace_back("stem.w", Shape{d, cfg.widths[0]});
    out.emplace_back("stem.b", Shape{cfg.widths[0]});
    const auto blocks = mlp_blocks(cfg);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      const std::string p = "block" + std::to_string(i);
      out.emplace_back(p + ".w1", Shape{b.in_w, b.out_w});
      out.emplace_back(p + ".b1", Shape{b.out_w});
      out.emplace_back(p + ".w2", Shape{b.out_w, b.out_w});
      out.emplace_back(p + ".b2", Shape{b.out_w});
      if (cfg.residual && b.projection) out.emplace_back(p + ".proj", Shape{b.in_w, b.out_w});
    }
  } else {
    const std::size_t c_in = cfg.input_shape[0];
    out.emplace_back("stem.w", Shape{cfg.channels[0], c_in, 3, 3});
    out.emplace_back("stem.b", Shape{cfg.channels[0]});
    const auto blocks = conv_blocks(cfg);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const auto& b = blocks[i];
      const std::string p = "block" + std::to_string(i);
      out.emplace_back(p + ".w1", Shape{b.out_ch, b.in_ch, 3, 3});
      out.emplace_back(p + ".b1", Shape{b.out_ch});
      out.emplace_back(p + ".w2", Shape{b.out_ch, b.out_ch, 3, 3});
      out.emplace_back(p + ".b2", Shape{b.out_ch});
      if (cfg.residual && b.projection) out.emplace_back(p + ".proj", Shape{b.out_ch, b.in_ch, 1, 1});
    }
  }
  out.emplace_back("head.w", Shape{head_input_width(cfg), head_output_width(cfg)});
  out.emplace_back("head.b", Shape{head_output_width(cfg)});
  return out;
}

Model init_model(const BackboneConfig& cfg, std::uint64_t seed) {
  Model model;
  model.config = cfg;
  model.rng_seed = seed;
  Rng root(seed);
  const auto spec = expected_parameters(cfg);
  for (std::size_t i = 0; i < spec.size(); ++i) {
    const auto& [name, shape] = spec[i];
    const bool is_bias = shape.size() == 1;
    if (is_bias) {
      model.params.emplace_back(name, Tensor::zeros(shape));
      continue;
    }
    std::size_t fan_in = shape[0];
    if (shape.size() == 4) fan_in = shape[1] * shape[2] * shape[3];  // [O x C x kh x kw]
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in));
    Rng stream = root.stream(i);
    Tensor w = stream.uniform_tensor(shape, -limit, limit);
    if (name == "head.w" && cfg.head.is_gaussian()) {
      const std::size_t k = cfg.num_classes;
      const std::size_t cols = 2 * k;
      for (std::size_t r = 0; r < shape[0]; ++r)
        for (std::size_t c = k; c < cols; ++c) w[r * cols + c] *= kLogVarInitScale;
    }
    model.params.emplace_back(name, std::move(w));
  }
  return model;
}

namespace {

struct ParamLookup {
  const std::vector<Var>* vars;
  const Model* model;
  const Var& operator()(const std::string& name) const {
    for (std::size_t i = 0; i < model->params.size(); ++i)
      if (model->params[i].first == name) return (*vars)[i];
    throw std::out_of_range("forward: no parameter named " + name);
  }
};

Var mlp_body(const BackboneConfig& cfg, const ParamLookup& p, const Var& input) {
  Var x = add_rowvec(matmul(input, p("stem.w")), p("stem.b"));
  const auto blocks = mlp_blocks(cfg);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string pre = "block" + std::to_string(i);
    Var h = relu(x);
    Var inner = add_rowvec(matmul(h, p(pre + ".w1")), p(pre + ".b1"));
    inner = add_rowvec(matmul(relu(inner), p(pre + ".w2")), p(pre + ".b2"));
    if (cfg.residual) {
      Var shortcut = b.projection ? matmul(x, p(pre + ".proj")) : x;
      x = add(shortcut, inner);
    } else {
      x = inner;
    }
  }
  return relu(x);
}

Var conv_body(const BackboneConfig& cfg, const ParamLookup& p, const Var& input) {
  Var x = add_channel_bias(conv2d(input, p("stem.w"), 1, 1), p("stem.b"));
  const auto blocks = conv_blocks(cfg);
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const auto& b = blocks[i];
    const std::string pre = "block" + std::to_string(i);
    Var h = relu(x);
    Var inner = add_channel_bias(conv2d(h, p(pre + ".w1"), b.stride, 1), p(pre + ".b1"));
    inner = add_channel_bias(conv2d(relu(inner), p(pre + ".w2"), 1, 1), p(pre + ".b2"));
    if (cfg.residual) {
      Var shortcut = b.projection ? conv2d(x, p(pre + ".proj"), b.stride, 0) : x;
      x = add(shortcut, inner);
    } else {
      x = inner;
    }
  }
  x = relu(x);
  const std::size_t spatial = x.value().dim(2);
  x = avg_pool2d(x, spatial, spatial);  // global average pool
  return reshape(x, Shape{x.value().dim(0), cfg.channels.back()});
}

}  // namespace

ForwardGraph forward_graph(const Model& model, const Tensor& batch) {
  const BackboneConfig& cfg = model.config;
  ForwardGraph g;
  g.params.reserve(model.params.size());
  for (const auto& [name, t] : model.params) g.params.push_back(Var::param(t));
  ParamLookup p{&g.params, &model};

  Var input = Var::constant(batch);
  if (cfg.kind == BackboneKind::mlp) {
    if (batch.rank() != 2 || batch.dim(1) != cfg.input_shape[0]) {
      throw ShapeError("forward: batch " + shape_str(batch.shape()) + " does not match input dim " +
                       std::to_string(cfg.input_shape[0]));
    }
  } else {
    if (batch.rank() != 4 || batch.dim(1) != cfg.input_shape[0] ||
        batch.dim(2) != cfg.input_shape[1] || batch.dim(3) != cfg.input_shape[2]) {
      throw ShapeError("forward: batch " + shape_str(batch.shape()) + " does not match input shape {" +
                       std::to_string(cfg.input_shape[0]) + "," + std::to_string(cfg.input_shape[1]) +
                       "," + std::to_string(cfg.input_shape[2]) + "}");
    }
  }

  Var features = cfg.kind == BackboneKind::mlp ? mlp_body(cfg, p, input) : conv_body(cfg, p, input);
  Var head_out = add_rowvec(matmul(features, p("head.w")), p("head.b"));
  const std::size_t k = cfg.num_classes;
  if (cfg.head.is_gaussian()) {
    g.mu = slice_cols(head_out, 0, k);
    g.log_var = clamp(slice_cols(head_out, k, 2 * k), -kLogVarClamp, kLogVarClamp);
  } else {
    g.logits = head_out;
  }
  return g;
}

namespace {

Tensor slice_rows_values(const Tensor& inputs, std::size_t r0, std::size_t r1) {
  Shape s = inputs.shape();
  const std::size_t row = inputs.size() / s[0];
  s[0] = r1 - r0;
  std::vector<double> data(inputs.vec().begin() + static_cast<std::ptrdiff_t>(r0 * row),
                           inputs.vec().begin() + static_cast<std::ptrdiff_t>(r1 * row));
  return Tensor(std::move(s), std::move(data));
}

template <typename Emit>
void forward_chunks(const Model& model, const Tensor& inputs, std::size_t chunk, Emit&& emit) {
  const std::size_t n = inputs.dim(0);
  if (chunk == 0) chunk = n;
  for (std::size_t start = 0; start < n; start += chunk) {
    const std::size_t stop = std::min(n, start + chunk);
    Tensor part = slice_rows_values(inputs, start, stop);
    emit(forward_graph(model, part), start, stop);
  }
}

}  // namespace

GaussianLogits forward_gaussian(const Model& model, const Tensor& inputs, std::size_t chunk) {
  if (!model.config.head.is_gaussian()) {
    throw std::invalid_argument("forward_gaussian: softmax head has no Gaussian posterior");
  }
  const std::size_t n = inputs.dim(0), k = model.config.num_classes;
  GaussianLogits out{Tensor({n, k}), Tensor({n, k})};
  forward_chunks(model, inputs, chunk, [&](const ForwardGraph& g, std::size_t start, std::size_t stop) {
    const std::size_t m = stop - start;
    for (std::size_t i = 0; i < m * k; ++i) {
      out.mu[start * k + i] = g.mu.value()[i];
      out.log_var[start * k + i] = g.log_var.value()[i];
    }
  });
  return out;
}

Tensor forward_raw_logits(const Model& model, const Tensor& inputs, std::size_t chunk) {
  if (model.config.head.is_gaussian()) {
    throw std::invalid_argument("forward_raw_logits: Gaussian head produces (mu, log_var)");
  }
  const std::size_t n = inputs.dim(0), k = model.config.num_classes;
  Tensor out({n, k});
  forward_chunks(model, inputs, chunk, [&](const ForwardGraph& g, std::size_t start, std::size_t stop) {
    const std::size_t m = stop - start;
    for (std::size_t i = 0; i < m * k; ++i) out[start * k + i] = g.logits.value()[i];
  });
  return out;
}

Tensor forward_decision_logits(const Model& model, const Tensor& inputs, std::size_t chunk) {
  if (model.config.head.is_gaussian()) return forward_gaussian(model, inputs, chunk).mu;
  return forward_raw_logits(model, inputs, chunk);
}

}  // namespace zc
