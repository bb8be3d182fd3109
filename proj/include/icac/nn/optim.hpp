#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "icac/nn/layers.hpp"
#include "icac/tensor.hpp"

namespace icac {

struct AdamState {
  std::string name;  // reported in diagnostics
  std::int64_t step = 0;
  Tensor m, v;
  double lr = 1e-3, beta1 = 0.9, beta2 = 0.999, eps = 1e-8;

  static AdamState for_param(const Tensor& p, std::string name, double lr = 1e-3) {
    AdamState s;
    s.name = std::move(name);
    s.m = Tensor::zeros(p.shape);
    s.v = Tensor::zeros(p.shape);
    s.lr = lr;
    return s;
  }
};

// One bias-corrected Adam update. Moments and parameters stay float32;
// the per-element arithmetic runs in double.
inline void adam_step(Tensor& param, const Tensor& grad, AdamState& st) {
  if (!same_shape(param, grad) || !same_shape(param, st.m))
    throw std::invalid_argument("adam_step: shape mismatch on '" + st.name + "'");
  if (!grad.all_finite())
    throw std::runtime_error("adam_step: non-finite gradient for tensor '" + st.name + "'");
  st.step += 1;
  const double c1 = 1.0 - std::pow(st.beta1, static_cast<double>(st.step));
  const double c2 = 1.0 - std::pow(st.beta2, static_cast<double>(st.step));
  for (std::size_t i = 0; i < param.numel(); ++i) {
    const double g = grad.data[i];
    const double m = st.beta1 * st.m.data[i] + (1.0 - st.beta1) * g;
    const double v = st.beta2 * st.v.data[i] + (1.0 - st.beta2) * g * g;
    st.m.data[i] = static_cast<float>(m);
    st.v.data[i] = static_cast<float>(v);
    param.data[i] = static_cast<float>(param.data[i] - st.lr * (m / c1) / (std::sqrt(v / c2) + st.eps));
  }
}

inline void sgd_step(Tensor& param, const Tensor& grad, double lr) {
  if (!same_shape(param, grad)) throw std::invalid_argument("sgd_step: shape mismatch");
  if (!grad.all_finite()) throw std::runtime_error("sgd_step: non-finite gradient");
  for (std::size_t i = 0; i < param.numel(); ++i)
    param.data[i] = static_cast<float>(param.data[i] - lr * static_cast<double>(grad.data[i]));
}

// Adam over every parameter tensor of one network.
class AdamOpt {
 public:
  AdamOpt() = default;

  AdamOpt(const Network& net, double lr) {
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      if (!net.layers[i].has_params()) {
        states_.emplace_back();
        states_.emplace_back();
        continue;
      }
      const std::string base = net.name + "/L" + std::to_string(i);
      states_.push_back(AdamState::for_param(net.layers[i].weights, base + "/weights", lr));
      states_.push_back(AdamState::for_param(net.layers[i].bias, base + "/bias", lr));
    }
  }

  // applies mean gradients accumulated in 64-bit
  void step(Network& net, const GradAccum& acc) {
    Tensor g;
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      if (!net.layers[i].has_params()) continue;
      g.shape = net.layers[i].weights.shape;
      g.data.assign(acc.dw[i].begin(), acc.dw[i].end());
      adam_step(net.layers[i].weights, g, states_[2 * i]);
      g.shape = net.layers[i].bias.shape;
      g.data.assign(acc.db[i].begin(), acc.db[i].end());
      adam_step(net.layers[i].bias, g, states_[2 * i + 1]);
    }
  }

  bool finite(const GradAccum& acc) const {
    for (const auto& blk : acc.dw)
      for (double v : blk)
        if (!std::isfinite(v)) return false;
    for (const auto& blk : acc.db)
      for (double v : blk)
        if (!std::isfinite(v)) return false;
    return true;
  }

 private:
  std::vector<AdamState> states_;
};

}  // namespace icac
