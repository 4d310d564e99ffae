#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "zclassifier/gaussian_head.hpp"
#include "zclassifier/grad_check.hpp"
#include "zclassifier/rng.hpp"

using namespace zc;

namespace {

// Monte-Carlo oracle: KL(q||p) = E_q[log q(z) - log p(z)] estimated with
// reparameterized draws. Independent of the closed form under test.
double mc_kl_oracle(const std::vector<double>& mu, const std::vector<double>& log_var, int label,
                    int n_samples, Rng& rng) {
  const std::size_t k = mu.size();
  double acc = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    double log_q = 0.0, log_p = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      const double sigma = std::exp(0.5 * log_var[c]);
      const double eps = rng.normal();
      const double z = mu[c] + sigma * eps;
      // log N(z | m, v) = -0.5 [ log(2 pi v) + (z - m)^2 / v ]
      log_q += -0.5 * (std::log(2.0 * M_PI) + log_var[c] + eps * eps);
      const double target = c == static_cast<std::size_t>(label) ? 1.0 : 0.0;
      const double dz = z - target;
      log_p += -0.5 * (std::log(2.0 * M_PI) + dz * dz);
    }
    acc += log_q - log_p;
  }
  return acc / n_samples;
}

}  // namespace

TEST_CASE("kl_to_prototype analytic anchors") {
  const std::size_t k = 10;
  std::vector<double> mu(k, 0.0), lv(k, 0.0);

  SUBCASE("zero at the prototype") {
    mu[3] = 1.0;
    CHECK(kl_to_prototype(mu, lv, 3) == 0.0);
  }
  SUBCASE("0.5 when mu is the zero vector") {
    for (int y = 0; y < 10; ++y) CHECK(kl_to_prototype(mu, lv, y) == doctest::Approx(0.5).epsilon(1e-15));
  }
  SUBCASE("hand-evaluated inflated-variance case") {
    std::vector<double> lv4(k, std::log(4.0));
    const double expected = 0.5 * (1.0 + 10.0 * (3.0 - std::log(4.0)));
    CHECK(kl_to_prototype(mu, lv4, 0) == doctest::Approx(expected).epsilon(1e-12));
  }
  SUBCASE("label range is enforced") {
    CHECK_THROWS_AS(kl_to_prototype(mu, lv, 10), std::out_of_range);
    CHECK_THROWS_AS(kl_to_prototype(mu, lv, -1), std::out_of_range);
  }
}

TEST_CASE("kl_to_prototype matches the Monte-Carlo oracle") {
  Rng rng(314);
  const std::size_t k = 10;
  for (int trial = 0; trial < 10; ++trial) {
    const int label = static_cast<int>(rng.next_u64() % k);
    std::vector<double> mu(k), lv(k);
    for (std::size_t c = 0; c < k; ++c) {
      mu[c] = (c == static_cast<std::size_t>(label) ? 1.0 : 0.0) + rng.uniform(-0.3, 0.3);
      lv[c] = rng.uniform(-0.5, 0.5);
    }
    Rng mc = rng.stream(static_cast<std::uint64_t>(trial));
    const double estimate = mc_kl_oracle(mu, lv, label, 100000, mc);
    const double closed = kl_to_prototype(mu, lv, label);
    CHECK(std::fabs(closed - estimate) < 0.01);
  }
}

TEST_CASE("kl_to_prototype is nonnegative and zero only at the prototype") {
  Rng rng(555);
  const std::size_t k = 6;
  for (int trial = 0; trial < 200; ++trial) {
    const int label = static_cast<int>(rng.next_u64() % k);
    std::vector<double> mu(k), lv(k);
    for (std::size_t c = 0; c < k; ++c) {
      mu[c] = rng.uniform(-2.0, 2.0);
      lv[c] = rng.uniform(-2.0, 2.0);
    }
    CHECK(kl_to_prototype(mu, lv, label) >= 0.0);

    // A random perturbation away from the prototype is strictly positive.
    std::vector<double> proto(k, 0.0), zero_lv(k, 0.0);
    proto[static_cast<std::size_t>(label)] = 1.0;
    std::size_t idx = rng.next_u64() % k;
    double bump = rng.uniform(0.01, 0.5) * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    std::vector<double> perturbed = proto;
    perturbed[idx] += bump;
    CHECK(kl_to_prototype(perturbed, zero_lv, label) > 0.0);
  }
}

TEST_CASE("reparameterize follows mu and sigma") {
  Tensor mu({2, 3}, std::vector<double>{0.0, 1.0, -1.0, 2.0, 0.5, -0.5});
  Tensor lv({2, 3}, 0.0);

  SUBCASE("eps = 0 broadcasts mu") {
    Tensor eps({2, 3, 4}, 0.0);
    Tensor z = reparameterize(mu, lv, eps);
    for (std::size_t i = 0; i < 6; ++i)
      for (std::size_t j = 0; j < 4; ++j) CHECK(z[i * 4 + j] == mu[i]);
  }
  SUBCASE("unit eps with unit sigma shifts by one") {
    Tensor eps({2, 3, 1}, 1.0);
    Tensor z = reparameterize(mu, lv, eps);
    for (std::size_t i = 0; i < 6; ++i) CHECK(z[i] == doctest::Approx(mu[i] + 1.0));
  }
  SUBCASE("empirical variance matches exp(log_var) within 3%") {
    Rng rng(808);
    Tensor m1({1, 1}, std::vector<double>{0.7});
    Tensor l1({1, 1}, std::vector<double>{std::log(2.25)});
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      Tensor eps = rng.normal_tensor({1, 1, 1});
      Tensor z = reparameterize(m1, l1, eps);
      sum += z[0];
      sumsq += z[0] * z[0];
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::fabs(var - 2.25) / 2.25 < 0.03);
  }
}

TEST_CASE("average_latent reduces variance by d") {
  SUBCASE("d = 1 is the identity") {
    Rng rng(9);
    Tensor z = rng.normal_tensor({3, 4, 1});
    Tensor zbar = average_latent(z);
    for (std::size_t i = 0; i < zbar.size(); ++i) CHECK(zbar[i] == z[i]);
  }
  SUBCASE("constant slices pass through") {
    Tensor z({2, 2, 5}, 3.25);
    Tensor zbar = average_latent(z);
    for (std::size_t i = 0; i < zbar.size(); ++i) CHECK(zbar[i] == doctest::Approx(3.25));
  }
  SUBCASE("sigma^2 = 4, d = 4 gives unit variance of the average") {
    Rng rng(4242);
    Tensor mu({1, 1}, std::vector<double>{0.0});
    Tensor lv({1, 1}, std::vector<double>{std::log(4.0)});
    const int n = 100000;
    double sum = 0.0, sumsq = 0.0;
    for (int i = 0; i < n; ++i) {
      Tensor eps = rng.normal_tensor({1, 1, 4});
      double zbar = average_latent(reparameterize(mu, lv, eps))[0];
      sum += zbar;
      sumsq += zbar * zbar;
    }
    const double mean = sum / n;
    const double var = sumsq / n - mean * mean;
    CHECK(std::fabs(var - 1.0) < 0.03);
    CHECK(std::fabs(mean) < 0.01);  // E[zbar] = mu
  }
}

TEST_CASE("loss matches hand-evaluated closed forms") {
  const std::size_t k = 10, n = 4;
  HeadKind head = HeadKind::make_zclassifier(10.0, 4, 1);

  SUBCASE("one-hot mu with unit variances") {
    GaussianLogits g{Tensor({n, k}), Tensor({n, k})};
    std::vector<int> labels;
    for (std::size_t i = 0; i < n; ++i) {
      labels.push_back(static_cast<int>(i));
      g.mu.at(i, i) = 1.0;
    }
    LossBreakdown lb = loss(head, g, labels);
    const double ce = std::log(std::exp(1.0) + 9.0) - 1.0;  // -ln(e / (e + 9))
    CHECK(lb.cross_entropy == doctest::Approx(ce).epsilon(1e-14));
    CHECK(lb.kl == 0.0);
    CHECK(lb.total == doctest::Approx(ce).epsilon(1e-14));
    CHECK(lb.lambda == 10.0);
  }
  SUBCASE("uniform zero mu") {
    GaussianLogits g{Tensor({n, k}), Tensor({n, k})};
    std::vector<int> labels{0, 3, 5, 9};
    LossBreakdown lb = loss(head, g, labels);
    CHECK(lb.cross_entropy == doctest::Approx(std::log(10.0)).epsilon(1e-14));
    CHECK(lb.kl == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(lb.total == doctest::Approx(std::log(10.0) + 10.0 * 0.5).epsilon(1e-14));
  }
  SUBCASE("softmax head on confident logits") {
    Tensor logits({1, k});
    logits.at(0, 7) = 10.0;
    LossBreakdown lb = loss(HeadKind::make_softmax(), logits, {7});
    CHECK(lb.cross_entropy == doctest::Approx(std::log1p(9.0 * std::exp(-10.0))).epsilon(1e-10));
    CHECK(lb.kl == 0.0);
  }
  SUBCASE("empty batch is rejected") {
    GaussianLogits g{Tensor({0, k}), Tensor({0, k})};
    CHECK_THROWS_AS(loss(head, g, {}), std::invalid_argument);
  }
}

TEST_CASE("lambda = 0 loss equals the softmax loss on the same mu") {
  Rng rng(21);
  Tensor mu = rng.normal_tensor({6, 5});
  Tensor lv = rng.normal_tensor({6, 5});
  std::vector<int> labels{0, 1, 2, 3, 4, 0};
  GaussianLogits g{mu, lv};
  LossBreakdown nokl = loss(HeadKind::make_nokl(4, 1), g, labels);
  LossBreakdown sm = loss(HeadKind::make_softmax(), mu, labels);
  CHECK(nokl.total == doctest::Approx(sm.total).epsilon(1e-15));
  CHECK(nokl.cross_entropy == doctest::Approx(sm.cross_entropy).epsilon(1e-15));
}

TEST_CASE("predict takes the row argmax with low-index ties") {
  Tensor mu({3, 4});
  mu.at(0, 3) = 1.0;                      // one-hot
  mu.at(2, 1) = 0.9;
  mu.at(2, 0) = 0.1;
  mu.at(2, 2) = 0.2;
  auto pred = predict(mu);
  CHECK(pred[0] == 3);
  CHECK(pred[1] == 0);  // all-equal row breaks to class 0
  CHECK(pred[2] == 1);
}

TEST_CASE("predict is invariant under per-row constant shifts") {
  Rng rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    Tensor mu = rng.normal_tensor({5, 8});
    auto base = predict(mu);
    const double c = rng.uniform(-50.0, 50.0);
    Tensor shifted = mu;
    for (std::size_t i = 0; i < shifted.size(); ++i) shifted[i] += c;
    CHECK(predict(shifted) == base);
  }
}

TEST_CASE("expected value of averaged samples is mu") {
  Rng rng(1001);
  HeadKind head = HeadKind::make_zclassifier(10.0, 4, 1);
  GaussianLogits g{Tensor({1, 2}, std::vector<double>{0.6, -0.4}), Tensor({1, 2}, std::vector<double>{0.3, -0.3})};
  const int n = 100000;
  double acc0 = 0.0, acc1 = 0.0;
  for (int i = 0; i < n; ++i) {
    Tensor zbar = sample_mean_logits(g, head, rng);
    acc0 += zbar[0];
    acc1 += zbar[1];
  }
  CHECK(std::fabs(acc0 / n - 0.6) < 0.01);
  CHECK(std::fabs(acc1 / n - -0.4) < 0.01);
}

TEST_CASE("loss graph gradients pass finite differences") {
  Rng rng(2718);
  const std::size_t n = 4, k = 5;
  Tensor mu0 = rng.normal_tensor({n, k});
  Tensor lv0 = rng.uniform_tensor({n, k}, -1.0, 1.0);
  std::vector<int> labels{1, 0, 4, 2};
  HeadKind head = HeadKind::make_zclassifier(10.0, 4, 1);

  SUBCASE("default mu-CE path") {
    auto builder = [&](const std::vector<Var>& p) {
      return build_loss(head, p[0], p[1], labels).total;
    };
    auto report = grad_check(builder, {mu0, lv0});
    INFO("max rel error ", report.max_rel_error);
    CHECK(report.pass);
  }
  SUBCASE("sampled-latent CE path with frozen eps") {
    Tensor eps = rng.normal_tensor({n, k, 4});
    auto builder = [&](const std::vector<Var>& p) {
      return build_loss(head, p[0], p[1], labels, &eps, true).total;
    };
    auto report = grad_check(builder, {mu0, lv0});
    INFO("max rel error ", report.max_rel_error);
    CHECK(report.pass);
  }
}

TEST_CASE("head kind invariants are validated") {
  CHECK_THROWS_AS(HeadKind::make_zclassifier(0.0), std::invalid_argument);
  CHECK_THROWS_AS(HeadKind::make_zclassifier(-1.0), std::invalid_argument);
  CHECK_THROWS_AS(HeadKind::make_zclassifier(10.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(HeadKind::make_zclassifier(10.0, 4, 0), std::invalid_argument);
  CHECK(HeadKind::make_nokl().effective_lambda() == 0.0);
}
