#include "icac/agents/cacla.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icac/checkpoint.hpp"

namespace icac {

void soft_update_net(Network& target, const Network& online, double tau) {
  if (tau < 0.0 || tau > 1.0) throw std::invalid_argument("soft_update: tau must be in [0,1]");
  for (std::size_t li = 0; li < target.layers.size(); ++li) {
    auto blend = [&](Tensor& t, const Tensor& o) {
      for (std::size_t i = 0; i < t.numel(); ++i)
        t.data[i] = static_cast<float>(tau * static_cast<double>(o.data[i]) +
                                       (1.0 - tau) * static_cast<double>(t.data[i]));
    };
    blend(target.layers[li].weights, online.layers[li].weights);
    blend(target.layers[li].bias, online.layers[li].bias);
  }
}

void add_network(CheckpointWriter& w, const std::string& prefix, const Network& net) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].has_params()) continue;
    const std::string base = prefix + "/L" + std::to_string(i);
    w.add(base + "/weights", net.layers[i].weights);
    w.add(base + "/bias", net.layers[i].bias);
  }
}

void load_network(const Checkpoint& ck, const std::string& prefix, Network& net) {
  for (std::size_t i = 0; i < net.layers.size(); ++i) {
    if (!net.layers[i].has_params()) continue;
    const std::string base = prefix + "/L" + std::to_string(i);
    const Tensor& w = ck.get(base + "/weights");
    const Tensor& b = ck.get(base + "/bias");
    if (w.shape != net.layers[i].weights.shape || b.shape != net.layers[i].bias.shape)
      throw std::runtime_error("checkpoint: shape mismatch for " + base);
    net.layers[i].weights = w;
    net.layers[i].bias = b;
  }
}

namespace {

void check_pixels(const Tensor& s) {
  for (float v : s.data)
    if (!(v >= -1e-5f && v <= 1.0f + 1e-5f))
      throw std::invalid_argument("encode: pixel values must lie in [0,1]");
}

Eigen::VectorXf feature_of(const Tensor& out) {
  Eigen::VectorXf phi(out.numel());
  for (std::size_t i = 0; i < out.numel(); ++i) phi[i] = out.data[i];
  return phi;
}

Tensor feature_tensor(const Eigen::VectorXf& phi) {
  Tensor t = Tensor::zeros({static_cast<int>(phi.size())});
  for (int i = 0; i < phi.size(); ++i) t.data[i] = phi[i];
  return t;
}

}  // namespace

CaclaAgent::CaclaAgent(std::vector<int> obs_shape, int action_dim, CaclaArch arch, CaclaHyper hyper,
                       std::uint64_t seed)
    : obs_shape_(std::move(obs_shape)), action_dim_(action_dim), arch_(arch), hyper_(hyper) {
  if (obs_shape_.size() != 3) throw std::invalid_argument("CaclaAgent: observation must be HxWxC");
  if (hyper_.tau <= 0.0 || hyper_.tau > 1.0) throw std::invalid_argument("CaclaAgent: tau in (0,1]");
  if (hyper_.sigma0 < 0.0) throw std::invalid_argument("CaclaAgent: sigma must be >= 0");

  const int h = obs_shape_[0], w = obs_shape_[1], c = obs_shape_[2];
  const int h1 = conv_out_dim(h, arch_.conv1_k, 2, arch_.conv1_k / 2);
  const int w1 = conv_out_dim(w, arch_.conv1_k, 2, arch_.conv1_k / 2);
  const int h2 = conv_out_dim(h1, arch_.conv2_k, 2, arch_.conv2_k / 2);
  const int w2 = conv_out_dim(w1, arch_.conv2_k, 2, arch_.conv2_k / 2);

  Rng init = Rng::stream(seed, "cacla-init");
  p_.encoder = NetBuilder("encoder", {h, w, c})
                   .conv(arch_.conv1_ch, arch_.conv1_k, 2, arch_.conv1_k / 2)
                   .act(Act::tanh)
                   .conv(arch_.conv2_ch, arch_.conv2_k, 2, arch_.conv2_k / 2)
                   .act(Act::tanh)
                   .dense(arch_.feature_dim)
                   .act(Act::tanh)
                   .build(init);
  p_.decoder = NetBuilder("decoder", {arch_.feature_dim})
                   .dense(h2 * w2 * arch_.conv2_ch)
                   .act(Act::tanh)
                   .reshape({h2, w2, arch_.conv2_ch})
                   .deconv(arch_.conv1_ch, arch_.conv2_k, 2, arch_.conv2_k / 2, h1, w1)
                   .act(Act::tanh)
                   .deconv(c, arch_.conv1_k, 2, arch_.conv1_k / 2, h, w)
                   .act(Act::sigmoid)
                   .build(init);
  p_.critic = NetBuilder("critic", {arch_.feature_dim})
                  .dense(arch_.critic_hidden)
                  .act(Act::tanh)
                  .dense(1)
                  .build(init);
  p_.actor = NetBuilder("actor", {arch_.feature_dim})
                 .dense(arch_.actor_hidden)
                 .act(Act::tanh)
                 .dense(action_dim_)
                 .act(Act::tanh)
                 .build(init);
  p_.target_encoder = p_.encoder;
  p_.target_encoder.name = "target_encoder";
  p_.target_critic = p_.critic;
  p_.target_critic.name = "target_critic";

  opt_encoder_ = AdamOpt(p_.encoder, hyper_.lr_encoder);
  opt_decoder_ = AdamOpt(p_.decoder, hyper_.lr_decoder);
  opt_critic_ = AdamOpt(p_.critic, hyper_.lr_critic);
  opt_actor_ = AdamOpt(p_.actor, hyper_.lr_actor);
}

CaclaAgent::CaclaAgent(CaclaParams params, std::vector<int> obs_shape, int action_dim,
                       CaclaHyper hyper)
    : obs_shape_(std::move(obs_shape)), action_dim_(action_dim), hyper_(hyper), p_(std::move(params)) {
  p_.encoder.validate();
  p_.decoder.validate();
  p_.critic.validate();
  p_.actor.validate();
  arch_.feature_dim = static_cast<int>(Tensor::numel_of(p_.encoder.output_shape()));
  if (p_.target_encoder.layers.empty()) {
    p_.target_encoder = p_.encoder;
    p_.target_encoder.name = "target_encoder";
  }
  if (p_.target_critic.layers.empty()) {
    p_.target_critic = p_.critic;
    p_.target_critic.name = "target_critic";
  }
  opt_encoder_ = AdamOpt(p_.encoder, hyper_.lr_encoder);
  opt_decoder_ = AdamOpt(p_.decoder, hyper_.lr_decoder);
  opt_critic_ = AdamOpt(p_.critic, hyper_.lr_critic);
  opt_actor_ = AdamOpt(p_.actor, hyper_.lr_actor);
}

Eigen::VectorXf CaclaAgent::encode(const Tensor& s) const {
  check_pixels(s);
  auto [out, cache] = forward(p_.encoder, s);
  return feature_of(out);
}

Eigen::VectorXf CaclaAgent::encode_target(const Tensor& s) const {
  check_pixels(s);
  auto [out, cache] = forward(p_.target_encoder, s);
  return feature_of(out);
}

std::vector<float> CaclaAgent::act(const Eigen::VectorXf& phi, bool explore, double sigma,
                                   Rng& rng) const {
  auto [out, cache] = forward(p_.actor, feature_tensor(phi));
  std::vector<float> a(out.data.begin(), out.data.end());
  if (explore) {
    for (float& v : a)
      v = std::clamp(static_cast<float>(v + sigma * rng.normal()), -1.0f, 1.0f);
  }
  return a;
}

std::vector<float> CaclaAgent::act_greedy(const Tensor& obs) {
  Rng unused(0);
  return act(encode(obs), false, 0.0, unused);
}

TdResult CaclaAgent::td_targets(std::span<const Transition* const> batch) const {
  TdResult out;
  out.y.reserve(batch.size());
  out.delta.reserve(batch.size());
  for (const Transition* t : batch) {
    double y = t->r;
    if (!t->terminal) {
      auto [vt, c] = forward(p_.target_critic, feature_tensor(encode_target(t->s_next)));
      y += hyper_.gamma * static_cast<double>(vt.data[0]);
    }
    auto [v, c2] = forward(p_.critic, feature_tensor(encode(t->s)));
    out.y.push_back(static_cast<float>(y));
    out.delta.push_back(static_cast<float>(y - static_cast<double>(v.data[0])));
  }
  return out;
}

void CaclaAgent::update_cae_critic(std::span<const Transition* const> batch,
                                   std::span<const float> per_weights, std::span<const float> y,
                                   CaclaDiag* diag) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("update_cae_critic: empty batch");
  if (per_weights.size() != n || y.size() != n)
    throw std::invalid_argument("update_cae_critic: weight/target size mismatch");

  GradAccum acc_enc(p_.encoder), acc_dec(p_.decoder), acc_crit(p_.critic);
  double recon_total = 0.0, value_total = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    const double wi = per_weights[i];

    auto [phi, cache_e] = forward(p_.encoder, t.s);
    auto [shat, cache_d] = forward(p_.decoder, phi);
    auto [v, cache_c] = forward(p_.critic, phi);

    const double inv_pixels = 1.0 / static_cast<double>(shat.numel());
    Tensor d_shat = Tensor::zeros(shat.shape);
    double recon = 0.0;
    for (std::size_t k = 0; k < shat.numel(); ++k) {
      const double diff = static_cast<double>(shat.data[k]) - static_cast<double>(t.s.data[k]);
      recon += diff * diff;
      d_shat.data[k] = static_cast<float>(2.0 * diff * inv_pixels);
    }
    recon *= inv_pixels;

    const double resid = static_cast<double>(y[i]) - static_cast<double>(v.data[0]);
    Tensor d_v = Tensor::zeros({1});
    d_v.data[0] = static_cast<float>(-2.0 * resid);

    Grads g_dec = backprop(p_.decoder, cache_d, d_shat);
    Grads g_crit = backprop(p_.critic, cache_c, d_v);

    Tensor d_phi = Tensor::zeros(phi.shape);
    for (std::size_t k = 0; k < d_phi.numel(); ++k)
      d_phi.data[k] = static_cast<float>(static_cast<double>(g_dec.input_grad.data[k]) +
                                         static_cast<double>(g_crit.input_grad.data[k]));
    Grads g_enc = backprop(p_.encoder, cache_e, d_phi);

    const double scale = wi / static_cast<double>(n);
    acc_enc.add(g_enc, scale);
    acc_dec.add(g_dec, scale);
    acc_crit.add(g_crit, scale);
    recon_total += wi * recon;
    value_total += wi * resid * resid;
  }

  recon_total /= static_cast<double>(n);
  value_total /= static_cast<double>(n);
  if (diag) {
    diag->recon_loss = recon_total;
    diag->value_loss = value_total;
  }
  if (!std::isfinite(recon_total) || !std::isfinite(value_total) || !opt_encoder_.finite(acc_enc) ||
      !opt_decoder_.finite(acc_dec) || !opt_critic_.finite(acc_crit)) {
    if (diag) {
      diag->aborted = true;
      diag->abort_reason = "non-finite phase-1 loss or gradient";
    }
    return;
  }
  opt_encoder_.step(p_.encoder, acc_enc);
  opt_decoder_.step(p_.decoder, acc_dec);
  opt_critic_.step(p_.critic, acc_crit);
}

int CaclaAgent::update_actor(std::span<const Transition* const> batch, std::span<const float> delta,
                             CaclaDiag* diag) {
  if (delta.size() != batch.size())
    throw std::invalid_argument("update_actor: delta size mismatch");
  std::vector<std::size_t> positive;
  for (std::size_t i = 0; i < batch.size(); ++i)
    if (delta[i] > 0.0f) positive.push_back(i);
  if (positive.empty()) return 0;

  GradAccum acc(p_.actor);
  double loss_total = 0.0;
  // phi is recomputed with the post-phase-1 encoder; its gradients stop here
  for (std::size_t i : positive) {
    const Transition& t = *batch[i];
    auto [a_hat, cache] = forward(p_.actor, feature_tensor(encode(t.s)));
    Tensor d_a = Tensor::zeros(a_hat.shape);
    for (std::size_t k = 0; k < a_hat.numel(); ++k) {
      const double diff = static_cast<double>(a_hat.data[k]) - static_cast<double>(t.a[k]);
      loss_total += diff * diff;
      d_a.data[k] = static_cast<float>(2.0 * diff);
    }
    Grads g = backprop(p_.actor, cache, d_a);
    acc.add(g, 1.0 / static_cast<double>(positive.size()));
  }
  loss_total /= static_cast<double>(positive.size());
  if (diag) diag->actor_loss = loss_total;
  if (!std::isfinite(loss_total) || !opt_actor_.finite(acc)) {
    if (diag) {
      diag->aborted = true;
      diag->abort_reason = "non-finite actor loss or gradient";
    }
    return 0;
  }
  opt_actor_.step(p_.actor, acc);
  return static_cast<int>(positive.size());
}

CaclaDiag CaclaAgent::train_step(std::span<const Transition* const> batch,
                                 std::span<const float> per_weights) {
  if (batch.empty()) throw std::invalid_argument("train_step: batch must have n >= 1");
  CaclaDiag diag;
  const TdResult td = td_targets(batch);  // pre-update critic gates the actor
  diag.deltas = td.delta;
  update_cae_critic(batch, per_weights, td.y, &diag);
  if (diag.aborted) return diag;
  diag.actor_updated = update_actor(batch, td.delta, &diag);
  return diag;
}

void CaclaAgent::soft_update(double tau) {
  soft_update_net(p_.target_encoder, p_.encoder, tau);
  soft_update_net(p_.target_critic, p_.critic, tau);
}

void CaclaAgent::save(const std::string& path) const {
  CheckpointWriter w;
  w.meta("agent cacla");
  add_network(w, "encoder", p_.encoder);
  add_network(w, "decoder", p_.decoder);
  add_network(w, "critic", p_.critic);
  add_network(w, "actor", p_.actor);
  add_network(w, "target_encoder", p_.target_encoder);
  add_network(w, "target_critic", p_.target_critic);
  w.write_file(path);
}

void CaclaAgent::load(const std::string& path) {
  const Checkpoint ck = Checkpoint::read_file(path);
  load_network(ck, "encoder", p_.encoder);
  load_network(ck, "decoder", p_.decoder);
  load_network(ck, "critic", p_.critic);
  load_network(ck, "actor", p_.actor);
  load_network(ck, "target_encoder", p_.target_encoder);
  load_network(ck, "target_critic", p_.target_critic);
}

}  // namespace icac
