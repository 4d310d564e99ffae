#include "zclassifier/grad_check.hpp"

#include <cmath>
#include <stdexcept>

namespace zc {

namespace {

double eval_scalar(const ScalarGraphBuilder& f, const std::vector<Tensor>& params) {
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(Var::constant(p));
  const double v = f(vars).value().item();
  if (!std::isfinite(v)) {
    throw std::runtime_error("grad_check: non-finite function value at probe point");
  }
  return v;
}

}  // namespace

GradCheckReport grad_check(const ScalarGraphBuilder& f, const std::vector<Tensor>& params,
                           double step, double tolerance) {
  if (step <= 0.0) throw std::invalid_argument("grad_check: step must be positive");

  // Analytic pass.
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(Var::param(p));
  Var root = f(vars);
  if (!std::isfinite(root.value().item())) {
    throw std::runtime_error("grad_check: non-finite function value at base point");
  }
  backward(root);

  GradCheckReport report;
  std::vector<Tensor> probe = params;
  for (std::size_t pi = 0; pi < params.size(); ++pi) {
    const Tensor& g = vars[pi].grad();
    for (std::size_t e = 0; e < params[pi].size(); ++e) {
      const double saved = probe[pi][e];
      probe[pi][e] = saved + step;
      const double fp = eval_scalar(f, probe);
      probe[pi][e] = saved - step;
      const double fm = eval_scalar(f, probe);
      probe[pi][e] = saved;

      const double numeric = (fp - fm) / (2.0 * step);
      const double analytic = g.size() ? g[e] : 0.0;
      const double denom = std::max({std::fabs(analytic), std::fabs(numeric), 1e-6});
      const double rel = std::fabs(analytic - numeric) / denom;
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst = GradCheckEntry{pi, e, analytic, numeric, rel};
      }
    }
  }
  report.pass = report.max_rel_error < tolerance;
  return report;
}

}  // namespace zc
