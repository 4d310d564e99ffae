#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "zclassifier/rng.hpp"

using namespace zc;

TEST_CASE("same seed and call sequence give identical streams") {
  Rng a(1234), b(1234);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng c(77), d(77);
  Tensor tc = c.normal_tensor({64});
  Tensor td = d.normal_tensor({64});
  for (std::size_t i = 0; i < tc.size(); ++i) CHECK(tc[i] == td[i]);
}

TEST_CASE("different seeds and streams decorrelate") {
  Rng a(1), b(2);
  int equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (a.next_u64() == b.next_u64()) ++equal;
  CHECK(equal == 0);

  Rng root(9);
  Rng s0 = root.stream(0), s1 = root.stream(1);
  equal = 0;
  for (int i = 0; i < 1000; ++i)
    if (s0.next_u64() == s1.next_u64()) ++equal;
  CHECK(equal == 0);
}

TEST_CASE("normal draws match N(0,1) moments over 1e5 samples") {
  Rng rng(2024);
  const int n = 100000;
  double sum = 0.0, sumsq = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = rng.normal();
    sum += x;
    sumsq += x * x;
  }
  const double mean = sum / n;
  const double var = sumsq / n - mean * mean;
  CHECK(std::fabs(mean) < 0.02);
  CHECK(std::fabs(var - 1.0) < 0.05);
}

TEST_CASE("uniform draws match mean over 1e5 samples") {
  Rng rng(31);
  const int n = 100000;
  double sum = 0.0;
  for (int i = 0; i < n; ++i) sum += rng.uniform(0.0, 1.0);
  CHECK(std::fabs(sum / n - 0.5) < 0.01);
}

TEST_CASE("uniform range is respected and degenerate bounds rejected") {
  Rng rng(5);
  for (int i = 0; i < 1000; ++i) {
    double x = rng.uniform(-2.0, 3.0);
    CHECK(x >= -2.0);
    CHECK(x < 3.0);
  }
  CHECK_THROWS_AS(rng.uniform(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(rng.uniform_tensor({3}, 2.0, -1.0), std::invalid_argument);
}

TEST_CASE("permutation is a bijection and seed-stable") {
  Rng a(42), b(42);
  auto pa = a.permutation(257);
  auto pb = b.permutation(257);
  CHECK(pa == pb);
  std::vector<bool> seen(257, false);
  for (std::size_t v : pa) {
    CHECK_FALSE(seen[v]);
    seen[v] = true;
  }
}
