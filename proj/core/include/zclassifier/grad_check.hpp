#pragma once

#include <functional>
#include <string>
#include <vector>

#include "zclassifier/autograd.hpp"
#include "zclassifier/tensor.hpp"

namespace zc {

/// Builds a scalar Var from leaf parameter Vars (one per entry of the
/// parameter list, same order).
using ScalarGraphBuilder = std::function<Var(const std::vector<Var>&)>;

struct GradCheckEntry {
  std::size_t param_index = 0;
  std::size_t element = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double rel_error = 0.0;
};

struct GradCheckReport {
  bool pass = false;
  double max_rel_error = 0.0;
  GradCheckEntry worst;
  std::size_t checked = 0;
};

/// Compares reverse-mode gradients against central finite differences,
/// element by element. rel_error = |a - n| / max(|a|, |n|, 1e-6). Throws if
/// the function evaluates non-finite at any probe point.
GradCheckReport grad_check(const ScalarGraphBuilder& f, const std::vector<Tensor>& params,
                           double step = 1e-5, double tolerance = 1e-4);

}  // namespace zc
