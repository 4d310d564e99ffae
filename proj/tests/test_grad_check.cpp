#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "zclassifier/grad_check.hpp"
#include "zclassifier/rng.hpp"

using namespace zc;

TEST_CASE("grad_check passes on the norm-squared function") {
  Rng rng(3);
  Tensor p = rng.normal_tensor({7});
  auto report = grad_check([](const std::vector<Var>& v) { return reduce_sum(mul(v[0], v[0])); }, {p});
  CHECK(report.pass);
  CHECK(report.max_rel_error < 1e-6);
  CHECK(report.checked == 7);
}

TEST_CASE("grad_check passes a random two-layer MLP loss") {
  Rng rng(17);
  Tensor x = rng.normal_tensor({5, 6});
  Tensor w1 = rng.normal_tensor({6, 8});
  Tensor b1 = rng.normal_tensor({8});
  Tensor w2 = rng.normal_tensor({8, 4});
  Tensor b2 = rng.normal_tensor({4});
  std::vector<int> labels{0, 1, 2, 3, 1};
  auto builder = [&x, labels](const std::vector<Var>& p) {
    Var h = relu(add_rowvec(matmul(Var::constant(x), p[0]), p[1]));
    Var logits = add_rowvec(matmul(h, p[2]), p[3]);
    return softmax_cross_entropy(logits, labels);
  };
  auto report = grad_check(builder, {w1, b1, w2, b2});
  INFO("max rel error ", report.max_rel_error);
  CHECK(report.pass);
}

TEST_CASE("grad_check fails on a deliberately corrupted backward rule") {
  // Negative control: analytic pass sees sum(w) while every numeric probe
  // sees sum(2w), which is what a broken backward rule looks like.
  Rng rng(8);
  Tensor p = rng.normal_tensor({4});
  bool analytic_pass_done = false;
  auto builder = [&analytic_pass_done](const std::vector<Var>& v) {
    // First (analytic) evaluation sees sum(w); all numeric probes see sum(2w).
    if (!analytic_pass_done && v[0].requires_grad()) {
      analytic_pass_done = true;
      return reduce_sum(v[0]);
    }
    return reduce_sum(scale(v[0], 2.0));
  };
  auto report = grad_check(builder, {p});
  CHECK_FALSE(report.pass);
  CHECK(report.max_rel_error > 0.3);
}

TEST_CASE("grad_check rejects non-finite probes") {
  Tensor p({1}, std::vector<double>{0.0});
  auto builder = [](const std::vector<Var>& v) { return reduce_sum(log(v[0])); };
  CHECK_THROWS_AS(grad_check(builder, {p}), std::runtime_error);
}

TEST_CASE("grad_check validates the step size") {
  Tensor p({1}, std::vector<double>{1.0});
  auto builder = [](const std::vector<Var>& v) { return reduce_sum(v[0]); };
  CHECK_THROWS_AS(grad_check(builder, {p}, 0.0), std::invalid_argument);
}
