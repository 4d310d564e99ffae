#include "zclassifier/autograd.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace zc {

namespace {

NodePtr make_leaf(Tensor value, bool requires_grad) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  n->requires_grad = requires_grad;
  return n;
}

Var make_op(Tensor value, std::vector<NodePtr> parents, std::function<void(Node&)> backward_fn) {
  auto n = std::make_shared<Node>();
  n->value = std::move(value);
  for (const auto& p : parents) n->requires_grad = n->requires_grad || p->requires_grad;
  if (n->requires_grad) {
    n->parents = std::move(parents);
    n->backward_fn = std::move(backward_fn);
  }
  return Var(std::move(n));
}

void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  if (!a.same_shape(b)) {
    throw ShapeError(std::string(op) + ": shape mismatch " + shape_str(a.shape()) + " vs " +
                     shape_str(b.shape()));
  }
}

void check_rank2(const char* op, const Tensor& t) {
  if (t.rank() != 2) {
    throw ShapeError(std::string(op) + ": expected matrix, got shape " + shape_str(t.shape()));
  }
}

}  // namespace

Var Var::param(Tensor value) { return Var(make_leaf(std::move(value), true)); }
Var Var::constant(Tensor value) { return Var(make_leaf(std::move(value), false)); }

Var add(const Var& a, const Var& b) {
  check_same_shape("add", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.value()[i];
  NodePtr an = a.node(), bn = b.node();
  return make_op(std::move(out), {an, bn}, [an, bn](Node& self) {
    if (an->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    if (bn->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i];
  });
}

Var sub(const Var& a, const Var& b) {
  check_same_shape("sub", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= b.value()[i];
  NodePtr an = a.node(), bn = b.node();
  return make_op(std::move(out), {an, bn}, [an, bn](Node& self) {
    if (an->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    if (bn->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] -= self.grad[i];
  });
}

Var mul(const Var& a, const Var& b) {
  check_same_shape("mul", a.value(), b.value());
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= b.value()[i];
  NodePtr an = a.node(), bn = b.node();
  return make_op(std::move(out), {an, bn}, [an, bn](Node& self) {
    if (an->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * bn->value[i];
    if (bn->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) bn->grad[i] += self.grad[i] * an->value[i];
  });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= c;
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an, c](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += c * self.grad[i];
  });
}

Var add_scalar(const Var& a, double c) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += c;
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
  });
}

Var exp(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::exp(out[i]);
  NodePtr an = a.node();
  Tensor saved = out;
  return make_op(std::move(out), {an}, [an, saved](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] * saved[i];
  });
}

Var log(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::log(out[i]);
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i] / an->value[i];
  });
}

Var relu(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = out[i] > 0.0 ? out[i] : 0.0;
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (an->value[i] > 0.0) an->grad[i] += self.grad[i];
  });
}

Var square(const Var& a) {
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] *= out[i];
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      an->grad[i] += 2.0 * an->value[i] * self.grad[i];
  });
}

Var clamp(const Var& a, double lo, double hi) {
  if (lo >= hi) throw std::invalid_argument("clamp: lo must be < hi");
  Tensor out = a.value();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = std::min(hi, std::max(lo, out[i]));
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an, lo, hi](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i)
      if (an->value[i] > lo && an->value[i] < hi) an->grad[i] += self.grad[i];
  });
}

Var matmul(const Var& a, const Var& b) {
  check_rank2("matmul", a.value());
  check_rank2("matmul", b.value());
  const std::size_t m = a.value().dim(0), k = a.value().dim(1);
  const std::size_t k2 = b.value().dim(0), n = b.value().dim(1);
  if (k != k2) {
    throw ShapeError("matmul: inner dimensions differ, " + shape_str(a.value().shape()) + " vs " +
                     shape_str(b.value().shape()));
  }
  Tensor out({m, n});
  const double* A = a.value().data();
  const double* B = b.value().data();
  double* C = out.data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double av = A[i * k + p];
      if (av == 0.0) continue;
      const double* Brow = B + p * n;
      double* Crow = C + i * n;
      for (std::size_t j = 0; j < n; ++j) Crow[j] += av * Brow[j];
    }
  }
  NodePtr an = a.node(), bn = b.node();
  return make_op(std::move(out), {an, bn}, [an, bn, m, k, n](Node& self) {
    const double* G = self.grad.data();
    if (an->requires_grad) {
      // dA = G * B^T
      const double* B = bn->value.data();
      double* dA = an->grad.data();
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t p = 0; p < k; ++p) {
          double s = 0.0;
          const double* Grow = G + i * n;
          const double* Brow = B + p * n;
          for (std::size_t j = 0; j < n; ++j) s += Grow[j] * Brow[j];
          dA[i * k + p] += s;
        }
    }
    if (bn->requires_grad) {
      // dB = A^T * G
      const double* A = an->value.data();
      double* dB = bn->grad.data();
      for (std::size_t i = 0; i < m; ++i) {
        const double* Grow = G + i * n;
        for (std::size_t p = 0; p < k; ++p) {
          const double av = A[i * k + p];
          if (av == 0.0) continue;
          double* dBrow = dB + p * n;
          for (std::size_t j = 0; j < n; ++j) dBrow[j] += av * Grow[j];
        }
      }
    }
  });
}

Var add_rowvec(const Var& a, const Var& bias) {
  check_rank2("add_rowvec", a.value());
  if (bias.value().rank() != 1 || bias.value().dim(0) != a.value().dim(1)) {
    throw ShapeError("add_rowvec: bias shape " + shape_str(bias.value().shape()) +
                     " does not match matrix " + shape_str(a.value().shape()));
  }
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  Tensor out = a.value();
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += bias.value()[j];
  NodePtr an = a.node(), bn = bias.node();
  return make_op(std::move(out), {an, bn}, [an, bn, m, n](Node& self) {
    if (an->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
    if (bn->requires_grad)
      for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j) bn->grad[j] += self.grad[i * n + j];
  });
}

Var expand_last(const Var& a, std::size_t d) {
  if (d == 0) throw ShapeError("expand_last: d must be positive");
  Shape out_shape = a.value().shape();
  out_shape.push_back(d);
  Tensor out(out_shape);
  const std::size_t n = a.value().size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] = a.value()[i];
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an, n, d](Node& self) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) s += self.grad[i * d + j];
      an->grad[i] += s;
    }
  });
}

Var mean_last(const Var& a) {
  if (a.value().rank() == 0) throw ShapeError("mean_last: scalar input");
  Shape out_shape = a.value().shape();
  const std::size_t d = out_shape.back();
  out_shape.pop_back();
  Tensor out(out_shape);
  const std::size_t n = out.size();
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0.0;
    for (std::size_t j = 0; j < d; ++j) s += a.value()[i * d + j];
    out[i] = s / static_cast<double>(d);
  }
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an, n, d](Node& self) {
    const double inv = 1.0 / static_cast<double>(d);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < d; ++j) an->grad[i * d + j] += self.grad[i] * inv;
  });
}

Var reduce_sum(const Var& a) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value()[i];
  NodePtr an = a.node();
  return make_op(Tensor::scalar(s), {an}, [an](Node& self) {
    const double g = self.grad[0];
    for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
  });
}

Var reduce_mean(const Var& a) {
  if (a.value().size() == 0) throw ShapeError("reduce_mean: empty tensor");
  double s = 0.0;
  for (std::size_t i = 0; i < a.value().size(); ++i) s += a.value()[i];
  const double inv = 1.0 / static_cast<double>(a.value().size());
  NodePtr an = a.node();
  return make_op(Tensor::scalar(s * inv), {an}, [an, inv](Node& self) {
    const double g = self.grad[0] * inv;
    for (std::size_t i = 0; i < an->grad.size(); ++i) an->grad[i] += g;
  });
}

Var reshape(const Var& a, Shape shape) {
  if (shape_numel(shape) != a.value().size()) {
    throw ShapeError("reshape: cannot view " + shape_str(a.value().shape()) + " as " +
                     shape_str(shape));
  }
  Tensor out(std::move(shape), a.value().vec());
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an](Node& self) {
    for (std::size_t i = 0; i < self.grad.size(); ++i) an->grad[i] += self.grad[i];
  });
}

Var slice_cols(const Var& a, std::size_t c0, std::size_t c1) {
  check_rank2("slice_cols", a.value());
  const std::size_t m = a.value().dim(0), n = a.value().dim(1);
  if (c0 >= c1 || c1 > n) {
    throw ShapeError("slice_cols: range [" + std::to_string(c0) + ", " + std::to_string(c1) +
                     ") invalid for shape " + shape_str(a.value().shape()));
  }
  const std::size_t w = c1 - c0;
  Tensor out({m, w});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.value()[i * n + c0 + j];
  NodePtr an = a.node();
  return make_op(std::move(out), {an}, [an, m, n, w, c0](Node& self) {
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t j = 0; j < w; ++j) an->grad[i * n + c0 + j] += self.grad[i * w + j];
  });
}

Tensor softmax_rows(const Tensor& logits) {
  if (logits.rank() != 2) {
    throw ShapeError("softmax_rows: expected matrix, got shape " + shape_str(logits.shape()));
  }
  const std::size_t n = logits.dim(0), k = logits.dim(1);
  Tensor out = logits;
  for (std::size_t i = 0; i < n; ++i) {
    double mx = out[i * k];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, out[i * k + j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      out[i * k + j] = std::exp(out[i * k + j] - mx);
      z += out[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) out[i * k + j] /= z;
  }
  return out;
}

Var softmax_cross_entropy(const Var& logits, const std::vector<int>& labels) {
  check_rank2("softmax_cross_entropy", logits.value());
  const std::size_t n = logits.value().dim(0), k = logits.value().dim(1);
  if (n == 0) throw ShapeError("softmax_cross_entropy: empty batch");
  if (labels.size() != n) {
    throw ShapeError("softmax_cross_entropy: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(n) + " rows");
  }
  for (int y : labels) {
    if (y < 0 || static_cast<std::size_t>(y) >= k) {
      throw std::out_of_range("softmax_cross_entropy: label " + std::to_string(y) +
                              " out of range for " + std::to_string(k) + " classes");
    }
  }
  Tensor probs = softmax_rows(logits.value());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double* row = logits.value().data() + i * k;
    double mx = row[0];
    for (std::size_t j = 1; j < k; ++j) mx = std::max(mx, row[j]);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) z += std::exp(row[j] - mx);
    total += mx + std::log(z) - row[static_cast<std::size_t>(labels[i])];
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  NodePtr ln = logits.node();
  std::vector<int> labels_copy = labels;
  return make_op(Tensor::scalar(total * inv_n), {ln},
                 [ln, probs, labels_copy, n, k, inv_n](Node& self) {
                   const double g = self.grad[0] * inv_n;
                   for (std::size_t i = 0; i < n; ++i) {
                     for (std::size_t j = 0; j < k; ++j)
                       ln->grad[i * k + j] += g * probs[i * k + j];
                     ln->grad[i * k + static_cast<std::size_t>(labels_copy[i])] -= g;
                   }
                 });
}

namespace {

void check_rank4(const char* op, const Tensor& t) {
  if (t.rank() != 4) {
    throw ShapeError(std::string(op) + ": expected NCHW tensor, got shape " + shape_str(t.shape()));
  }
}

}  // namespace

Var conv2d(const Var& x, const Var& w, std::size_t stride, std::size_t pad) {
  check_rank4("conv2d", x.value());
  check_rank4("conv2d", w.value());
  if (stride == 0) throw ShapeError("conv2d: stride must be positive");
  const std::size_t n = x.value().dim(0), c = x.value().dim(1);
  const std::size_t h = x.value().dim(2), wd = x.value().dim(3);
  const std::size_t oc = w.value().dim(0), wc = w.value().dim(1);
  const std::size_t kh = w.value().dim(2), kw = w.value().dim(3);
  if (wc != c) {
    throw ShapeError("conv2d: input channels " + shape_str(x.value().shape()) +
                     " vs kernel " + shape_str(w.value().shape()));
  }
  if (h + 2 * pad < kh || wd + 2 * pad < kw) {
    throw ShapeError("conv2d: kernel " + shape_str(w.value().shape()) + " larger than padded input " +
                     shape_str(x.value().shape()));
  }
  const std::size_t oh = (h + 2 * pad - kh) / stride + 1;
  const std::size_t ow = (wd + 2 * pad - kw) / stride + 1;
  Tensor out({n, oc, oh, ow});
  const Tensor& xv = x.value();
  const Tensor& wv = w.value();
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t o = 0; o < oc; ++o)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double s = 0.0;
          for (std::size_t ci = 0; ci < c; ++ci)
            for (std::size_t ki = 0; ki < kh; ++ki) {
              const std::ptrdiff_t ih =
                  static_cast<std::ptrdiff_t>(i * stride + ki) - static_cast<std::ptrdiff_t>(pad);
              if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
              for (std::size_t kj = 0; kj < kw; ++kj) {
                const std::ptrdiff_t iw =
                    static_cast<std::ptrdiff_t>(j * stride + kj) - static_cast<std::ptrdiff_t>(pad);
                if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(wd)) continue;
                s += xv.at(b, ci, static_cast<std::size_t>(ih), static_cast<std::size_t>(iw)) *
                     wv.at(o, ci, ki, kj);
              }
            }
          out.at(b, o, i, j) = s;
        }
  NodePtr xn = x.node(), wn = w.node();
  return make_op(std::move(out), {xn, wn}, [xn, wn, n, c, h, wd, oc, kh, kw, stride, pad](Node& self) {
    const std::size_t oh = self.grad.dim(2), ow = self.grad.dim(3);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t o = 0; o < oc; ++o)
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j) {
            const double g = self.grad.at(b, o, i, j);
            if (g == 0.0) continue;
            for (std::size_t ci = 0; ci < c; ++ci)
              for (std::size_t ki = 0; ki < kh; ++ki) {
                const std::ptrdiff_t ih =
                    static_cast<std::ptrdiff_t>(i * stride + ki) - static_cast<std::ptrdiff_t>(pad);
                if (ih < 0 || ih >= static_cast<std::ptrdiff_t>(h)) continue;
                for (std::size_t kj = 0; kj < kw; ++kj) {
                  const std::ptrdiff_t iw =
                      static_cast<std::ptrdiff_t>(j * stride + kj) - static_cast<std::ptrdiff_t>(pad);
                  if (iw < 0 || iw >= static_cast<std::ptrdiff_t>(wd)) continue;
                  const std::size_t ihn = static_cast<std::size_t>(ih);
                  const std::size_t iwn = static_cast<std::size_t>(iw);
                  if (xn->requires_grad)
                    xn->grad.at(b, ci, ihn, iwn) += g * wn->value.at(o, ci, ki, kj);
                  if (wn->requires_grad)
                    wn->grad.at(o, ci, ki, kj) += g * xn->value.at(b, ci, ihn, iwn);
                }
              }
          }
  });
}

Var add_channel_bias(const Var& x, const Var& bias) {
  check_rank4("add_channel_bias", x.value());
  const std::size_t n = x.value().dim(0), c = x.value().dim(1);
  const std::size_t h = x.value().dim(2), w = x.value().dim(3);
  if (bias.value().rank() != 1 || bias.value().dim(0) != c) {
    throw ShapeError("add_channel_bias: bias shape " + shape_str(bias.value().shape()) +
                     " does not match channels of " + shape_str(x.value().shape()));
  }
  Tensor out = x.value();
  const std::size_t hw = h * w;
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ci = 0; ci < c; ++ci) {
      const double bv = bias.value()[ci];
      double* p = out.data() + (b * c + ci) * hw;
      for (std::size_t i = 0; i < hw; ++i) p[i] += bv;
    }
  NodePtr xn = x.node(), bn = bias.node();
  return make_op(std::move(out), {xn, bn}, [xn, bn, n, c, hw](Node& self) {
    if (xn->requires_grad)
      for (std::size_t i = 0; i < self.grad.size(); ++i) xn->grad[i] += self.grad[i];
    if (bn->requires_grad)
      for (std::size_t b = 0; b < n; ++b)
        for (std::size_t ci = 0; ci < c; ++ci) {
          const double* g = self.grad.data() + (b * c + ci) * hw;
          double s = 0.0;
          for (std::size_t i = 0; i < hw; ++i) s += g[i];
          bn->grad[ci] += s;
        }
  });
}

Var avg_pool2d(const Var& x, std::size_t k, std::size_t stride) {
  check_rank4("avg_pool2d", x.value());
  if (k == 0 || stride == 0) throw ShapeError("avg_pool2d: kernel and stride must be positive");
  const std::size_t n = x.value().dim(0), c = x.value().dim(1);
  const std::size_t h = x.value().dim(2), w = x.value().dim(3);
  if (h < k || w < k) {
    throw ShapeError("avg_pool2d: window " + std::to_string(k) + " exceeds input " +
                     shape_str(x.value().shape()));
  }
  const std::size_t oh = (h - k) / stride + 1;
  const std::size_t ow = (w - k) / stride + 1;
  Tensor out({n, c, oh, ow});
  const double inv = 1.0 / static_cast<double>(k * k);
  for (std::size_t b = 0; b < n; ++b)
    for (std::size_t ci = 0; ci < c; ++ci)
      for (std::size_t i = 0; i < oh; ++i)
        for (std::size_t j = 0; j < ow; ++j) {
          double s = 0.0;
          for (std::size_t ki = 0; ki < k; ++ki)
            for (std::size_t kj = 0; kj < k; ++kj)
              s += x.value().at(b, ci, i * stride + ki, j * stride + kj);
          out.at(b, ci, i, j) = s * inv;
        }
  NodePtr xn = x.node();
  return make_op(std::move(out), {xn}, [xn, n, c, k, stride, inv](Node& self) {
    const std::size_t oh = self.grad.dim(2), ow = self.grad.dim(3);
    for (std::size_t b = 0; b < n; ++b)
      for (std::size_t ci = 0; ci < c; ++ci)
        for (std::size_t i = 0; i < oh; ++i)
          for (std::size_t j = 0; j < ow; ++j) {
            const double g = self.grad.at(b, ci, i, j) * inv;
            for (std::size_t ki = 0; ki < k; ++ki)
              for (std::size_t kj = 0; kj < k; ++kj)
                xn->grad.at(b, ci, i * stride + ki, j * stride + kj) += g;
          }
  });
}

void backward(const Var& root) {
  if (!root.defined()) throw std::invalid_argument("backward: undefined root");
  if (root.value().size() != 1) {
    throw std::invalid_argument("backward: root must be scalar, got shape " +
                                shape_str(root.value().shape()));
  }
  // Iterative post-order topological sort over the parent DAG.
  std::vector<Node*> order;
  std::unordered_set<Node*> visited;
  std::vector<std::pair<Node*, std::size_t>> stack;
  stack.emplace_back(root.node().get(), 0);
  visited.insert(root.node().get());
  while (!stack.empty()) {
    auto& [node, next] = stack.back();
    if (next < node->parents.size()) {
      Node* p = node->parents[next++].get();
      if (p->requires_grad && visited.insert(p).second) stack.emplace_back(p, 0);
    } else {
      order.push_back(node);
      stack.pop_back();
    }
  }
  for (Node* n : order) {
    n->grad = Tensor(n->value.shape());
  }
  root.node()->grad[0] = 1.0;
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    if ((*it)->backward_fn) (*it)->backward_fn(**it);
  }
}

}  // namespace zc
