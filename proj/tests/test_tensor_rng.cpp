#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "icac/rng.hpp"
#include "icac/tensor.hpp"

using namespace icac;

TEST_CASE("tensor shape/data invariant") {
  Tensor t({2, 3}, {1, 2, 3, 4, 5, 6});
  CHECK(t.numel() == 6);
  CHECK_THROWS(Tensor({2, 3}, {1, 2, 3}));
  CHECK_THROWS(Tensor::zeros({0, 3}));
  CHECK_THROWS(Tensor::zeros({-1}));
}

TEST_CASE("tensor zeros, finite, cast") {
  Tensor t = Tensor::zeros({4, 4, 3});
  CHECK(t.numel() == 48);
  CHECK(t.all_finite());
  t.data[7] = std::nanf("");
  CHECK_FALSE(t.all_finite());

  Tensor a({3}, {1.5f, -2.0f, 0.25f});
  auto d = a.cast<double>();
  CHECK(d.data[0] == 1.5);
  auto back = d.cast<float>();
  CHECK(back.data == a.data);
}

TEST_CASE("rng determinism and stream fan-out") {
  Rng a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(a.next_u64() == b.next_u64());

  Rng n1(7), n2(7);
  for (int i = 0; i < 100; ++i) CHECK(n1.normal() == n2.normal());

  Rng s1 = Rng::stream(42, "env");
  Rng s2 = Rng::stream(42, "explore");
  Rng s3 = Rng::stream(42, "env");
  bool all_equal = true;
  for (int i = 0; i < 16; ++i) {
    const auto x = s1.next_u64();
    if (x != s2.next_u64()) all_equal = false;
    CHECK(x == s3.next_u64());
  }
  CHECK_FALSE(all_equal);
}

TEST_CASE("rng uniform range and normal moments") {
  Rng r(9);
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
  double mean = 0.0, var = 0.0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal();
    mean += z;
    var += z * z;
  }
  mean /= n;
  var = var / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.05);
}
