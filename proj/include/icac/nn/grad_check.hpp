#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "icac/nn/layers.hpp"

namespace icac {

// Scalar loss over a network's output: value() is evaluated on the
// double-precision shadow path, grad() on the float path being verified.
struct ScalarLoss {
  std::function<double(const std::vector<double>&)> value;
  std::function<Tensor(const Tensor&)> grad;
};

// Max relative disagreement between analytic backprop gradients and central
// finite differences, over all parameters. The numeric side runs the network
// in double precision with a fourth-order central stencil at step h, so the
// float32 rounding of the checked path dominates the residual.
inline double grad_check(const Network& net, const Tensor& input, const ScalarLoss& loss,
                         double h = 1e-3) {
  if (net.param_count() >= 10000)
    throw std::invalid_argument("grad_check: network too large (>= 1e4 parameters)");

  auto [out, cache] = forward(net, input);
  const Grads analytic = backprop(net, cache, loss.grad(out));

  NetworkT<double> shadow = net.cast<double>();
  const TensorT<double> input_d = input.cast<double>();
  auto eval = [&]() {
    auto [y, c] = forward(shadow, input_d);
    return loss.value(y.data);
  };

  double max_rel = 0.0;
  for (std::size_t li = 0; li < shadow.layers.size(); ++li) {
    if (!shadow.layers[li].has_params()) continue;
    for (int which = 0; which < 2; ++which) {
      auto& p = which == 0 ? shadow.layers[li].weights.data : shadow.layers[li].bias.data;
      const auto& a = which == 0 ? analytic.layers[li].dw.data : analytic.layers[li].db.data;
      for (std::size_t j = 0; j < p.size(); ++j) {
        const double saved = p[j];
        auto at = [&](double delta) {
          p[j] = saved + delta;
          return eval();
        };
        const double numeric =
            (8.0 * (at(h) - at(-h)) - (at(2.0 * h) - at(-2.0 * h))) / (12.0 * h);
        p[j] = saved;
        const double ana = a[j];
        const double rel = std::abs(ana - numeric) /
                           std::max({std::abs(ana), std::abs(numeric), 1e-8});
        max_rel = std::max(max_rel, rel);
      }
    }
  }
  return max_rel;
}

}  // namespace icac
