#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "icac/rng.hpp"
#include "icac/tensor.hpp"

namespace icac {

enum class Act { linear, relu, tanh, sigmoid };
enum class LayerKind { dense, conv2d, deconv2d, activation };

inline const char* act_name(Act a) {
  switch (a) {
    case Act::linear: return "linear";
    case Act::relu: return "relu";
    case Act::tanh: return "tanh";
    case Act::sigmoid: return "sigmoid";
  }
  return "?";
}

using MatD = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// 32-bit storage, 64-bit accumulation in every contraction.
template <typename S>
using MapMat = Eigen::Map<const Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// out = floor((in + 2p - k)/s) + 1
inline int conv_out_dim(int in, int k, int s, int p) {
  const int num = in + 2 * p - k;
  if (num < 0 || s < 1) throw std::invalid_argument("conv geometry does not fit input");
  return num / s + 1;
}

template <typename S>
struct LayerT {
  LayerKind kind = LayerKind::dense;
  Act act = Act::linear;         // activation layers only
  TensorT<S> weights, bias;      // empty for activation layers
  std::vector<int> in_shape, out_shape;
  int kernel = 0, stride = 1, pad = 0;
  int in_ch = 0, out_ch = 0;

  bool has_params() const { return kind != LayerKind::activation; }
  std::size_t param_count() const { return weights.numel() + bias.numel(); }

  template <typename T>
  LayerT<T> cast() const {
    LayerT<T> l;
    l.kind = kind;
    l.act = act;
    l.weights = weights.template cast<T>();
    l.bias = bias.template cast<T>();
    l.in_shape = in_shape;
    l.out_shape = out_shape;
    l.kernel = kernel;
    l.stride = stride;
    l.pad = pad;
    l.in_ch = in_ch;
    l.out_ch = out_ch;
    return l;
  }
};

// A shape feeds the next layer if it matches exactly, or if only a flatten
// separates them (row-major data is identical either way).
inline bool shapes_feed(const std::vector<int>& prev, const std::vector<int>& next) {
  if (prev == next) return true;
  if (prev.size() != 1 && next.size() != 1) return false;
  return Tensor::numel_of(prev) == Tensor::numel_of(next);
}

template <typename S>
struct NetworkT {
  std::string name;
  std::vector<LayerT<S>> layers;

  const std::vector<int>& input_shape() const { return layers.front().in_shape; }
  const std::vector<int>& output_shape() const { return layers.back().out_shape; }

  std::size_t param_count() const {
    std::size_t n = 0;
    for (const auto& l : layers) n += l.param_count();
    return n;
  }

  void validate() const {
    if (layers.empty()) throw std::invalid_argument("network '" + name + "' has no layers");
    for (std::size_t i = 1; i < layers.size(); ++i) {
      if (!shapes_feed(layers[i - 1].out_shape, layers[i].in_shape))
        throw std::invalid_argument("network '" + name + "': layer " + std::to_string(i) +
                                    " input " + shape_str(layers[i].in_shape) +
                                    " incompatible with previous output " +
                                    shape_str(layers[i - 1].out_shape));
    }
  }

  template <typename T>
  NetworkT<T> cast() const {
    NetworkT<T> n;
    n.name = name;
    n.layers.reserve(layers.size());
    for (const auto& l : layers) n.layers.push_back(l.template cast<T>());
    return n;
  }
};

using Layer = LayerT<float>;
using Network = NetworkT<float>;

// ---- construction -------------------------------------------------------

inline Layer make_dense(int in_dim, int out_dim) {
  Layer l;
  l.kind = LayerKind::dense;
  l.in_shape = {in_dim};
  l.out_shape = {out_dim};
  l.weights = Tensor::zeros({out_dim, in_dim});
  l.bias = Tensor::zeros({out_dim});
  return l;
}

inline Layer make_conv2d(std::vector<int> in_hwc, int out_ch, int k, int s, int p) {
  if (in_hwc.size() != 3) throw std::invalid_argument("conv2d input must be HxWxC");
  Layer l;
  l.kind = LayerKind::conv2d;
  l.in_shape = in_hwc;
  l.in_ch = in_hwc[2];
  l.out_ch = out_ch;
  l.kernel = k;
  l.stride = s;
  l.pad = p;
  l.out_shape = {conv_out_dim(in_hwc[0], k, s, p), conv_out_dim(in_hwc[1], k, s, p), out_ch};
  l.weights = Tensor::zeros({out_ch, k, k, l.in_ch});
  l.bias = Tensor::zeros({out_ch});
  return l;
}

// Transpose of a conv2d with the same (k, s, p): maps the conv's output shape
// back to its input shape. out_hw resolves the one-pixel ambiguity of strided
// geometry.
inline Layer make_deconv2d(std::vector<int> in_hwc, int out_ch, int k, int s, int p,
                           int out_h, int out_w) {
  if (in_hwc.size() != 3) throw std::invalid_argument("deconv2d input must be HxWxC");
  if (conv_out_dim(out_h, k, s, p) != in_hwc[0] || conv_out_dim(out_w, k, s, p) != in_hwc[1])
    throw std::invalid_argument("deconv2d: declared output shape is not the matching conv input");
  Layer l;
  l.kind = LayerKind::deconv2d;
  l.in_shape = in_hwc;
  l.in_ch = in_hwc[2];
  l.out_ch = out_ch;
  l.kernel = k;
  l.stride = s;
  l.pad = p;
  l.out_shape = {out_h, out_w, out_ch};
  // identical weight geometry to the mirrored conv: {conv_out_ch, k, k, conv_in_ch}
  l.weights = Tensor::zeros({l.in_ch, k, k, out_ch});
  l.bias = Tensor::zeros({out_ch});
  return l;
}

inline Layer make_activation(Act a, std::vector<int> shape) {
  Layer l;
  l.kind = LayerKind::activation;
  l.act = a;
  l.in_shape = shape;
  l.out_shape = std::move(shape);
  return l;
}

inline int fan_in_of(const Layer& l) {
  switch (l.kind) {
    case LayerKind::dense: return l.in_shape[0];
    case LayerKind::conv2d: return l.kernel * l.kernel * l.in_ch;
    case LayerKind::deconv2d: return l.kernel * l.kernel * l.in_ch;
    default: return 1;
  }
}

// uniform(-1/sqrt(fan_in), +1/sqrt(fan_in)) weights, zero bias
inline void init_params(Network& net, Rng& rng) {
  for (auto& l : net.layers) {
    if (!l.has_params()) continue;
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in_of(l)));
    for (auto& w : l.weights.data) w = static_cast<float>(rng.uniform(-bound, bound));
    for (auto& b : l.bias.data) b = 0.0f;
  }
}

class NetBuilder {
 public:
  NetBuilder(std::string name, std::vector<int> input_shape) : shape_(std::move(input_shape)) {
    net_.name = std::move(name);
  }

  NetBuilder& dense(int out_dim) {
    net_.layers.push_back(make_dense(static_cast<int>(Tensor::numel_of(shape_)), out_dim));
    shape_ = {out_dim};
    return *this;
  }

  NetBuilder& conv(int out_ch, int k, int s, int p) {
    net_.layers.push_back(make_conv2d(as_hwc(), out_ch, k, s, p));
    shape_ = net_.layers.back().out_shape;
    return *this;
  }

  NetBuilder& deconv(int out_ch, int k, int s, int p, int out_h, int out_w) {
    net_.layers.push_back(make_deconv2d(as_hwc(), out_ch, k, s, p, out_h, out_w));
    shape_ = net_.layers.back().out_shape;
    return *this;
  }

  // reinterpret the current flat shape as HxWxC before a conv/deconv stage
  NetBuilder& reshape(std::vector<int> hwc) {
    if (Tensor::numel_of(hwc) != Tensor::numel_of(shape_))
      throw std::invalid_argument("reshape changes element count");
    shape_ = std::move(hwc);
    return *this;
  }

  NetBuilder& act(Act a) {
    net_.layers.push_back(make_activation(a, shape_));
    return *this;
  }

  Network build(Rng& rng) {
    net_.validate();
    init_params(net_, rng);
    return std::move(net_);
  }

 private:
  std::vector<int> as_hwc() const {
    if (shape_.size() == 3) return shape_;
    throw std::invalid_argument("conv stage needs an HxWxC shape; call reshape() first");
  }

  Network net_;
  std::vector<int> shape_;
};

// ---- im2col / col2im ----------------------------------------------------

template <typename S>
inline MatD im2col(const S* x, int h, int w, int c, int k, int s, int p) {
  const int oh = conv_out_dim(h, k, s, p);
  const int ow = conv_out_dim(w, k, s, p);
  MatD patches = MatD::Zero(static_cast<long>(oh) * ow, static_cast<long>(k) * k * c);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      double* row = patches.row(static_cast<long>(oy) * ow + ox).data();
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * s - p + ky;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * s - p + kx;
          if (ix < 0 || ix >= w) continue;
          const S* src = x + (static_cast<std::size_t>(iy) * w + ix) * c;
          double* dst = row + (static_cast<std::size_t>(ky) * k + kx) * c;
          for (int ic = 0; ic < c; ++ic) dst[ic] = static_cast<double>(src[ic]);
        }
      }
    }
  }
  return patches;
}

// adjoint of im2col: scatter-add patch rows back onto the image
inline void col2im(const MatD& patches, double* x, int h, int w, int c, int k, int s, int p) {
  const int oh = conv_out_dim(h, k, s, p);
  const int ow = conv_out_dim(w, k, s, p);
  for (int oy = 0; oy < oh; ++oy) {
    for (int ox = 0; ox < ow; ++ox) {
      const double* row = patches.row(static_cast<long>(oy) * ow + ox).data();
      for (int ky = 0; ky < k; ++ky) {
        const int iy = oy * s - p + ky;
        if (iy < 0 || iy >= h) continue;
        for (int kx = 0; kx < k; ++kx) {
          const int ix = ox * s - p + kx;
          if (ix < 0 || ix >= w) continue;
          double* dst = x + (static_cast<std::size_t>(iy) * w + ix) * c;
          const double* src = row + (static_cast<std::size_t>(ky) * k + kx) * c;
          for (int ic = 0; ic < c; ++ic) dst[ic] += src[ic];
        }
      }
    }
  }
}

// ---- forward -------------------------------------------------------------

template <typename S>
struct ForwardCacheT {
  const void* net_id = nullptr;
  TensorT<S> input;
  std::vector<TensorT<S>> outs;    // one per layer
  std::vector<MatD> patches;       // im2col reuse, conv2d layers only
};

using ForwardCache = ForwardCacheT<float>;

template <typename S>
inline S apply_act(Act a, S x) {
  switch (a) {
    case Act::linear: return x;
    case Act::relu: return x > S(0) ? x : S(0);
    case Act::tanh: return std::tanh(x);
    case Act::sigmoid: return S(1) / (S(1) + std::exp(-x));
  }
  return x;
}

// derivative expressed through the activation output
template <typename S>
inline double act_grad_from_out(Act a, S y) {
  switch (a) {
    case Act::linear: return 1.0;
    case Act::relu: return y > S(0) ? 1.0 : 0.0;
    case Act::tanh: return 1.0 - static_cast<double>(y) * static_cast<double>(y);
    case Act::sigmoid: return static_cast<double>(y) * (1.0 - static_cast<double>(y));
  }
  return 1.0;
}

template <typename S>
inline void layer_forward(const LayerT<S>& l, const TensorT<S>& x, TensorT<S>& out, MatD* patches) {
  switch (l.kind) {
    case LayerKind::dense: {
      const int n_in = l.in_shape[0], n_out = l.out_shape[0];
      MapMat<S> w(l.weights.data.data(), n_out, n_in);
      Eigen::Map<const Eigen::Vector<S, Eigen::Dynamic>> xv(x.data.data(), n_in);
      Eigen::VectorXd y = w.template cast<double>() * xv.template cast<double>();
      out = TensorT<S>::zeros({n_out});
      for (int i = 0; i < n_out; ++i)
        out.data[i] = static_cast<S>(y[i] + static_cast<double>(l.bias.data[i]));
      break;
    }
    case LayerKind::conv2d: {
      const int h = l.in_shape[0], w_ = l.in_shape[1], c = l.in_shape[2];
      MatD p = im2col(x.data.data(), h, w_, c, l.kernel, l.stride, l.pad);
      MapMat<S> wm(l.weights.data.data(), l.out_ch, l.kernel * l.kernel * c);
      MatD y = p * wm.template cast<double>().transpose();  // (oh*ow) x out_ch
      out = TensorT<S>::zeros(l.out_shape);
      for (long r = 0; r < y.rows(); ++r)
        for (int oc = 0; oc < l.out_ch; ++oc)
          out.data[static_cast<std::size_t>(r) * l.out_ch + oc] =
              static_cast<S>(y(r, oc) + static_cast<double>(l.bias.data[oc]));
      if (patches) *patches = std::move(p);
      break;
    }
    case LayerKind::deconv2d: {
      const int oh = l.out_shape[0], ow = l.out_shape[1];
      MapMat<S> um(x.data.data(), static_cast<long>(l.in_shape[0]) * l.in_shape[1], l.in_ch);
      MapMat<S> wm(l.weights.data.data(), l.in_ch, l.kernel * l.kernel * l.out_ch);
      MatD spread = um.template cast<double>() * wm.template cast<double>();
      std::vector<double> acc(static_cast<std::size_t>(oh) * ow * l.out_ch, 0.0);
      col2im(spread, acc.data(), oh, ow, l.out_ch, l.kernel, l.stride, l.pad);
      out = TensorT<S>::zeros(l.out_shape);
      for (std::size_t i = 0; i < acc.size(); ++i)
        out.data[i] = static_cast<S>(acc[i] + static_cast<double>(l.bias.data[i % l.out_ch]));
      break;
    }
    case LayerKind::activation: {
      out = x;
      out.shape = l.out_shape;
      for (auto& v : out.data) v = apply_act(l.act, v);
      break;
    }
  }
}

template <typename S>
inline std::pair<TensorT<S>, ForwardCacheT<S>> forward(const NetworkT<S>& net, const TensorT<S>& input) {
  if (!shapes_feed(input.shape, net.input_shape()))
    throw std::invalid_argument("network '" + net.name + "': input shape " + shape_str(input.shape) +
                                " does not match layer 0 input " + shape_str(net.input_shape()));
  ForwardCacheT<S> cache;
  cache.net_id = &net;
  cache.input = input;
  cache.outs.resize(net.layers.size());
  cache.patches.resize(net.layers.size());
  const TensorT<S>* cur = &cache.input;
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    layer_forward(net.layers[i], *cur, cache.outs[i], &cache.patches[i]);
    cur = &cache.outs[i];
  }
  return {cache.outs.back(), std::move(cache)};
}

// ---- backprop -------------------------------------------------------------

template <typename S>
struct LayerGradsT {
  TensorT<S> dw, db;  // empty for activation layers
};

template <typename S>
struct GradsT {
  std::vector<LayerGradsT<S>> layers;
  TensorT<S> input_grad;

  bool all_finite() const {
    if (!input_grad.all_finite()) return false;
    for (const auto& g : layers)
      if (!g.dw.all_finite() || !g.db.all_finite()) return false;
    return true;
  }
};

using Grads = GradsT<float>;

template <typename S>
inline GradsT<S> backprop(const NetworkT<S>& net, const ForwardCacheT<S>& cache,
                          const TensorT<S>& output_grad) {
  if (cache.net_id != static_cast<const void*>(&net) || cache.outs.size() != net.layers.size())
    throw std::invalid_argument("backprop: cache does not belong to network '" + net.name + "'");
  if (output_grad.numel() != cache.outs.back().numel())
    throw std::invalid_argument("backprop: output gradient has wrong size");

  GradsT<S> grads;
  grads.layers.resize(net.layers.size());

  std::vector<double> up(output_grad.data.begin(), output_grad.data.end());
  for (std::size_t li = net.layers.size(); li-- > 0;) {
    const LayerT<S>& l = net.layers[li];
    const TensorT<S>& x = li == 0 ? cache.input : cache.outs[li - 1];
    const TensorT<S>& y = cache.outs[li];
    std::vector<double> down;

    switch (l.kind) {
      case LayerKind::activation: {
        down.resize(up.size());
        for (std::size_t i = 0; i < up.size(); ++i)
          down[i] = up[i] * act_grad_from_out(l.act, y.data[i]);
        break;
      }
      case LayerKind::dense: {
        const int n_in = l.in_shape[0], n_out = l.out_shape[0];
        grads.layers[li].dw = TensorT<S>::zeros({n_out, n_in});
        grads.layers[li].db = TensorT<S>::zeros({n_out});
        down.assign(static_cast<std::size_t>(n_in), 0.0);
        for (int o = 0; o < n_out; ++o) {
          const double g = up[static_cast<std::size_t>(o)];
          grads.layers[li].db.data[o] = static_cast<S>(g);
          const S* wrow = l.weights.data.data() + static_cast<std::size_t>(o) * n_in;
          S* dwrow = grads.layers[li].dw.data.data() + static_cast<std::size_t>(o) * n_in;
          for (int i = 0; i < n_in; ++i) {
            dwrow[i] = static_cast<S>(g * static_cast<double>(x.data[i]));
            down[static_cast<std::size_t>(i)] += g * static_cast<double>(wrow[i]);
          }
        }
        break;
      }
      case LayerKind::conv2d: {
        const int h = l.in_shape[0], w_ = l.in_shape[1], c = l.in_shape[2];
        const long pos = static_cast<long>(l.out_shape[0]) * l.out_shape[1];
        Eigen::Map<const MatD> dy(up.data(), pos, l.out_ch);
        const MatD& p = cache.patches[li];
        MatD dwm = dy.transpose() * p;  // out_ch x (k*k*c)
        grads.layers[li].dw = TensorT<S>::zeros(l.weights.shape);
        for (std::size_t i = 0; i < grads.layers[li].dw.numel(); ++i)
          grads.layers[li].dw.data[i] = static_cast<S>(dwm.data()[i]);
        grads.layers[li].db = TensorT<S>::zeros({l.out_ch});
        Eigen::VectorXd dbv = dy.colwise().sum();
        for (int oc = 0; oc < l.out_ch; ++oc)
          grads.layers[li].db.data[oc] = static_cast<S>(dbv[oc]);
        MapMat<S> wm(l.weights.data.data(), l.out_ch, l.kernel * l.kernel * c);
        MatD dp = dy * wm.template cast<double>();
        down.assign(static_cast<std::size_t>(h) * w_ * c, 0.0);
        col2im(dp, down.data(), h, w_, c, l.kernel, l.stride, l.pad);
        break;
      }
      case LayerKind::deconv2d: {
        const int oh = l.out_shape[0], ow = l.out_shape[1];
        const long ipos = static_cast<long>(l.in_shape[0]) * l.in_shape[1];
        MatD pdy = im2col(up.data(), oh, ow, l.out_ch, l.kernel, l.stride, l.pad);
        MapMat<S> um(x.data.data(), ipos, l.in_ch);
        MatD dwm = um.template cast<double>().transpose() * pdy;  // in_ch x (k*k*out_ch)
        grads.layers[li].dw = TensorT<S>::zeros(l.weights.shape);
        for (std::size_t i = 0; i < grads.layers[li].dw.numel(); ++i)
          grads.layers[li].dw.data[i] = static_cast<S>(dwm.data()[i]);
        std::vector<double> dbd(static_cast<std::size_t>(l.out_ch), 0.0);
        for (std::size_t i = 0; i < up.size(); ++i) dbd[i % l.out_ch] += up[i];
        grads.layers[li].db = TensorT<S>::zeros({l.out_ch});
        for (int oc = 0; oc < l.out_ch; ++oc)
          grads.layers[li].db.data[oc] = static_cast<S>(dbd[oc]);
        MapMat<S> wm(l.weights.data.data(), l.in_ch, l.kernel * l.kernel * l.out_ch);
        MatD du = pdy * wm.template cast<double>().transpose();  // ipos x in_ch
        down.assign(du.data(), du.data() + du.size());
        break;
      }
    }
    up = std::move(down);
  }

  grads.input_grad = TensorT<S>::zeros(cache.input.shape);
  for (std::size_t i = 0; i < up.size(); ++i) grads.input_grad.data[i] = static_cast<S>(up[i]);
  return grads;
}

// ---- batch accumulation ---------------------------------------------------

struct GradAccum {
  std::vector<std::vector<double>> dw, db;

  explicit GradAccum(const Network& net) {
    dw.resize(net.layers.size());
    db.resize(net.layers.size());
    for (std::size_t i = 0; i < net.layers.size(); ++i) {
      dw[i].assign(net.layers[i].weights.numel(), 0.0);
      db[i].assign(net.layers[i].bias.numel(), 0.0);
    }
  }

  void add(const Grads& g, double scale) {
    for (std::size_t i = 0; i < dw.size(); ++i) {
      for (std::size_t j = 0; j < dw[i].size(); ++j)
        dw[i][j] += scale * static_cast<double>(g.layers[i].dw.data[j]);
      for (std::size_t j = 0; j < db[i].size(); ++j)
        db[i][j] += scale * static_cast<double>(g.layers[i].db.data[j]);
    }
  }
};

}  // namespace icac
