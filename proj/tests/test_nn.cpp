#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "icac/nn/grad_check.hpp"
#include "icac/nn/layers.hpp"
#include "icac/rng.hpp"

using namespace icac;

namespace {

// ||y - t||^2 against a fixed target, evaluated in double on the shadow path
ScalarLoss quadratic_loss(std::vector<double> target) {
  ScalarLoss loss;
  loss.value = [target](const std::vector<double>& y) {
    double acc = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      const double d = y[i] - target[i];
      acc += d * d;
    }
    return acc;
  };
  loss.grad = [target](const Tensor& y) {
    Tensor g = Tensor::zeros(y.shape);
    for (std::size_t i = 0; i < y.numel(); ++i)
      g.data[i] = static_cast<float>(2.0 * (static_cast<double>(y.data[i]) - target[i]));
    return g;
  };
  return loss;
}

Tensor random_tensor(std::vector<int> shape, Rng& rng, double lo = 0.0, double hi = 1.0) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform(lo, hi));
  return t;
}

// residual targets offset per output; correlated residuals would cancel in
// first-layer weight gradients and push them under the float32 noise floor
std::vector<double> forward_target_near(const Network& net, const Tensor& in, Rng& rng) {
  auto [out, cache] = forward(net, in);
  std::vector<double> t;
  for (float v : out.data) t.push_back(static_cast<double>(v) + rng.uniform(0.1, 0.6));
  return t;
}

}  // namespace

TEST_CASE("forward: identity dense maps input through") {
  Layer l = make_dense(3, 3);
  for (int i = 0; i < 3; ++i) l.weights.data[i * 3 + i] = 1.0f;
  Network net{"id", {l}};
  net.validate();
  auto [out, cache] = forward(net, Tensor({3}, {1, 2, 3}));
  CHECK(out.data == std::vector<float>{1, 2, 3});
}

TEST_CASE("forward: 1x1 conv scales a constant image") {
  Layer l = make_conv2d({4, 4, 1}, 1, 1, 1, 0);
  l.weights.data[0] = 2.0f;
  Network net{"scale2", {l}};
  auto [out, cache] = forward(net, Tensor({4, 4, 1}, std::vector<float>(16, 1.0f)));
  CHECK(out.shape == std::vector<int>{4, 4, 1});
  for (float v : out.data) CHECK(v == 2.0f);
}

TEST_CASE("forward: equals composing per-layer forwards") {
  Rng rng(11);
  Network net = NetBuilder("compose", {5, 5, 2})
                    .conv(3, 3, 1, 1)
                    .act(Act::tanh)
                    .dense(7)
                    .build(rng);
  const Tensor in = random_tensor({5, 5, 2}, rng);
  auto [full, cache] = forward(net, in);

  Tensor cur = in;
  for (const auto& layer : net.layers) {
    Network single{"one", {layer}};
    auto [out, c] = forward(single, cur);
    cur = out;
  }
  CHECK(cur.data == full.data);  // bitwise
}

TEST_CASE("forward: shape mismatch reports the offending stage") {
  Rng rng(3);
  Network net = NetBuilder("n", {4, 4, 1}).conv(2, 3, 1, 0).build(rng);
  CHECK_THROWS_WITH_AS(forward(net, Tensor::zeros({5, 4, 1})),
                       doctest::Contains("layer 0"), std::invalid_argument);
  CHECK_THROWS(Network{"bad", {make_dense(3, 2), make_dense(5, 1)}}.validate());
}

TEST_CASE("backprop: zero residual gives exactly zero gradients") {
  Rng rng(21);
  Network net = NetBuilder("z", {6}).dense(5).act(Act::tanh).dense(4).build(rng);
  const Tensor in = random_tensor({6}, rng, -1.0, 1.0);
  auto [out, cache] = forward(net, in);
  const Tensor zero_grad = Tensor::zeros(out.shape);  // y == t in 0.5*||y-t||^2
  const Grads g = backprop(net, cache, zero_grad);
  for (const auto& lg : g.layers) {
    for (float v : lg.dw.data) CHECK(v == 0.0f);
    for (float v : lg.db.data) CHECK(v == 0.0f);
  }
  for (float v : g.input_grad.data) CHECK(v == 0.0f);
}

TEST_CASE("backprop: linear dense with sum loss exposes the inputs") {
  Rng rng(5);
  Network net{"lin", {make_dense(4, 3)}};
  init_params(net, rng);
  const Tensor in({4}, {0.5f, -1.25f, 2.0f, 0.75f});
  auto [out, cache] = forward(net, in);
  const Tensor ones({3}, {1, 1, 1});  // d(sum)/dy
  const Grads g = backprop(net, cache, ones);
  for (int o = 0; o < 3; ++o) {
    for (int i = 0; i < 4; ++i) CHECK(g.layers[0].dw.data[o * 4 + i] == in.data[i]);
    CHECK(g.layers[0].db.data[o] == 1.0f);
  }
}

TEST_CASE("backprop: stale cache is rejected") {
  Rng rng(8);
  Network a = NetBuilder("a", {4}).dense(2).build(rng);
  Network b = NetBuilder("b", {4}).dense(2).build(rng);
  auto [out, cache] = forward(a, random_tensor({4}, rng));
  CHECK_THROWS(backprop(b, cache, Tensor::zeros({2})));
}

TEST_CASE("backprop: finite-difference agreement on a random mixed net") {
  Rng rng(31);
  Network net = NetBuilder("mixed", {6, 6, 2})
                    .conv(3, 3, 2, 1)
                    .act(Act::tanh)
                    .dense(5)
                    .act(Act::sigmoid)
                    .build(rng);
  const Tensor in = random_tensor({6, 6, 2}, rng);
  const double err = grad_check(net, in, quadratic_loss(forward_target_near(net, in, rng)));
  CHECK(err < 1e-3);
}

TEST_CASE("grad_check: linear net with quadratic loss is near-exact") {
  Rng rng(17);
  Network net = NetBuilder("lin", {8}).dense(4).build(rng);
  const Tensor in = random_tensor({8}, rng, -1.0, 1.0);
  const double err = grad_check(net, in, quadratic_loss(forward_target_near(net, in, rng)));
  CHECK(err < 1e-5);
}

TEST_CASE("grad_check: conv2d + tanh") {
  for (std::uint64_t seed = 100; seed < 110; ++seed) {
    Rng rng(seed);
    Network net = NetBuilder("conv", {8, 8, 2})
                      .conv(4, 3, 2, 1)
                      .act(Act::tanh)
                      .conv(3, 3, 1, 0)
                      .act(Act::tanh)
                      .build(rng);
    const Tensor in = random_tensor({8, 8, 2}, rng);
    const double err = grad_check(net, in, quadratic_loss(forward_target_near(net, in, rng)));
    CHECK(err < 1e-3);
  }
}

TEST_CASE("grad_check: deconv2d decoder stack") {
  for (std::uint64_t seed = 300; seed < 310; ++seed) {
    Rng rng(seed);
    Network net = NetBuilder("dec", {8})
                      .dense(3 * 3 * 4)
                      .act(Act::tanh)
                      .reshape({3, 3, 4})
                      .deconv(2, 3, 2, 1, 6, 6)
                      .act(Act::tanh)
                      .deconv(1, 3, 2, 1, 12, 12)
                      .act(Act::sigmoid)
                      .build(rng);
    const Tensor in = random_tensor({8}, rng, -1.0, 1.0);
    const double err = grad_check(net, in, quadratic_loss(forward_target_near(net, in, rng)));
    CHECK(err < 1e-3);
  }
}

TEST_CASE("grad_check: cost guard rejects large nets") {
  Rng rng(2);
  Network net = NetBuilder("big", {128}).dense(128).build(rng);  // 16512 params
  CHECK_THROWS(grad_check(net, random_tensor({128}, rng), quadratic_loss(std::vector<double>(128, 0))));
}

TEST_CASE("determinism: same seed gives bitwise-equal nets, outputs, gradients") {
  auto build = [](std::uint64_t seed) {
    Rng rng(seed);
    return NetBuilder("d", {5, 5, 1}).conv(2, 3, 1, 0).act(Act::tanh).dense(4).build(rng);
  };
  Network a = build(99), b = build(99);
  Rng in_rng1(4), in_rng2(4);
  const Tensor ia = random_tensor({5, 5, 1}, in_rng1);
  const Tensor ib = random_tensor({5, 5, 1}, in_rng2);
  auto [oa, ca] = forward(a, ia);
  auto [ob, cb] = forward(b, ib);
  CHECK(oa.data == ob.data);
  Tensor og = Tensor::zeros(oa.shape);
  for (std::size_t i = 0; i < og.numel(); ++i) og.data[i] = 0.1f * (1 + static_cast<int>(i));
  const Grads ga = backprop(a, ca, og);
  const Grads gb = backprop(b, cb, og);
  for (std::size_t i = 0; i < ga.layers.size(); ++i) {
    CHECK(ga.layers[i].dw.data == gb.layers[i].dw.data);
    CHECK(ga.layers[i].db.data == gb.layers[i].db.data);
  }
}

TEST_CASE("shape algebra over random geometries") {
  Rng rng(1234);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform_int(4));          // 1..4
    const int s = 1 + static_cast<int>(rng.uniform_int(2));          // 1..2
    const int p = static_cast<int>(rng.uniform_int(k));              // 0..k-1
    const int c = 1 + static_cast<int>(rng.uniform_int(3));
    const int oc = 1 + static_cast<int>(rng.uniform_int(4));
    const int h = k + static_cast<int>(rng.uniform_int(8));
    const int w = k + static_cast<int>(rng.uniform_int(8));

    Network net = NetBuilder("geo", {h, w, c}).conv(oc, k, s, p).build(rng);
    const auto& declared = net.layers[0].out_shape;
    const Tensor in = random_tensor({h, w, c}, rng);
    auto [out, cache] = forward(net, in);
    CHECK(out.shape == declared);

    Tensor og = random_tensor(out.shape, rng, -1.0, 1.0);
    const Grads g = backprop(net, cache, og);
    CHECK(g.input_grad.shape == in.shape);
    CHECK(g.layers[0].dw.shape == net.layers[0].weights.shape);
    CHECK(g.all_finite());

    // transpose direction round-trips the shapes exactly
    Network dec{"geo_t", {make_deconv2d(declared, c, k, s, p, h, w)}};
    const Tensor u = random_tensor(declared, rng, -1.0, 1.0);
    auto [back, c2] = forward(dec, u);
    CHECK(back.shape == in.shape);
  }
}

TEST_CASE("conv2d/deconv2d adjointness for linear layers") {
  Rng rng(555);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 1 + static_cast<int>(rng.uniform_int(4));
    const int s = 1 + static_cast<int>(rng.uniform_int(2));
    const int p = static_cast<int>(rng.uniform_int(k));
    const int c = 1 + static_cast<int>(rng.uniform_int(3));
    const int oc = 1 + static_cast<int>(rng.uniform_int(3));
    const int h = k + 3 + static_cast<int>(rng.uniform_int(5));
    const int w = k + 3 + static_cast<int>(rng.uniform_int(5));

    Layer conv = make_conv2d({h, w, c}, oc, k, s, p);
    Rng wr(trial + 77);
    for (auto& v : conv.weights.data) v = static_cast<float>(wr.uniform(-1.0, 1.0));
    Layer deconv = make_deconv2d(conv.out_shape, c, k, s, p, h, w);
    deconv.weights = conv.weights;  // identical geometry, shared kernel

    Network cnet{"c", {conv}}, dnet{"d", {deconv}};
    const Tensor x = random_tensor({h, w, c}, wr, -1.0, 1.0);
    const Tensor y = random_tensor(conv.out_shape, wr, -1.0, 1.0);
    auto [cx, cc] = forward(cnet, x);
    auto [dy, dc] = forward(dnet, y);

    double lhs = 0.0, rhs = 0.0;
    for (std::size_t i = 0; i < cx.numel(); ++i)
      lhs += static_cast<double>(cx.data[i]) * static_cast<double>(y.data[i]);
    for (std::size_t i = 0; i < dy.numel(); ++i)
      rhs += static_cast<double>(dy.data[i]) * static_cast<double>(x.data[i]);
    CHECK(std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1e-8}) < 1e-4);
  }
}

TEST_CASE("activations stay finite and act as declared") {
  Rng rng(66);
  Network net = NetBuilder("acts", {4})
                    .dense(4)
                    .act(Act::relu)
                    .dense(4)
                    .act(Act::sigmoid)
                    .dense(2)
                    .act(Act::linear)
                    .build(rng);
  const Tensor in = random_tensor({4}, rng, -3.0, 3.0);
  auto [out, cache] = forward(net, in);
  CHECK(out.all_finite());
  // relu output non-negative
  for (float v : cache.outs[1].data) CHECK(v >= 0.0f);
  // sigmoid output in (0,1)
  for (float v : cache.outs[3].data) {
    CHECK(v > 0.0f);
    CHECK(v < 1.0f);
  }
}
