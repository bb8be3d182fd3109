#include "icac/agents/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icac/agents/cacla.hpp"  // soft_update_net, checkpoint helpers
#include "icac/checkpoint.hpp"

namespace icac {

namespace {

Tensor concat_state_action(const Tensor& z, std::span<const float> a) {
  Tensor in = Tensor::zeros({static_cast<int>(z.numel() + a.size())});
  std::copy(z.data.begin(), z.data.end(), in.data.begin());
  std::copy(a.begin(), a.end(), in.data.begin() + z.numel());
  return in;
}

}  // namespace

DdpgAgent::DdpgAgent(std::vector<int> obs_shape, int action_dim, DdpgArch arch, DdpgHyper hyper,
                     std::uint64_t seed)
    : obs_shape_(std::move(obs_shape)), action_dim_(action_dim), arch_(arch), hyper_(hyper) {
  if (obs_shape_.size() != 3) throw std::invalid_argument("DdpgAgent: observation must be HxWxC");

  const int h = obs_shape_[0], w = obs_shape_[1];
  const int h1 = conv_out_dim(h, arch_.conv1_k, 2, arch_.conv1_k / 2);
  const int w1 = conv_out_dim(w, arch_.conv1_k, 2, arch_.conv1_k / 2);
  const int h2 = conv_out_dim(h1, arch_.conv2_k, 2, arch_.conv2_k / 2);
  const int w2 = conv_out_dim(w1, arch_.conv2_k, 2, arch_.conv2_k / 2);
  trunk_out_ = h2 * w2 * arch_.conv2_ch;

  Rng init = Rng::stream(seed, "ddpg-init");
  p_.actor = NetBuilder("actor", obs_shape_)
                 .conv(arch_.conv1_ch, arch_.conv1_k, 2, arch_.conv1_k / 2)
                 .act(Act::tanh)
                 .conv(arch_.conv2_ch, arch_.conv2_k, 2, arch_.conv2_k / 2)
                 .act(Act::tanh)
                 .dense(arch_.actor_feat)
                 .act(Act::tanh)
                 .dense(action_dim_)
                 .act(Act::tanh)
                 .build(init);
  p_.critic_trunk = NetBuilder("critic_trunk", obs_shape_)
                        .conv(arch_.conv1_ch, arch_.conv1_k, 2, arch_.conv1_k / 2)
                        .act(Act::tanh)
                        .conv(arch_.conv2_ch, arch_.conv2_k, 2, arch_.conv2_k / 2)
                        .act(Act::tanh)
                        .build(init);
  p_.critic_head = NetBuilder("critic_head", {trunk_out_ + action_dim_})
                       .dense(arch_.critic_hidden)
                       .act(Act::tanh)
                       .dense(1)
                       .build(init);
  p_.target_actor = p_.actor;
  p_.target_actor.name = "target_actor";
  p_.target_critic_trunk = p_.critic_trunk;
  p_.target_critic_trunk.name = "target_critic_trunk";
  p_.target_critic_head = p_.critic_head;
  p_.target_critic_head.name = "target_critic_head";

  opt_actor_ = AdamOpt(p_.actor, hyper_.lr_actor);
  opt_trunk_ = AdamOpt(p_.critic_trunk, hyper_.lr_critic);
  opt_head_ = AdamOpt(p_.critic_head, hyper_.lr_critic);
}

std::vector<float> DdpgAgent::act(const Tensor& obs, bool explore, double sigma, Rng& rng) const {
  auto [out, cache] = forward(p_.actor, obs);
  std::vector<float> a(out.data.begin(), out.data.end());
  if (explore) {
    for (float& v : a)
      v = std::clamp(static_cast<float>(v + sigma * rng.normal()), -1.0f, 1.0f);
  }
  return a;
}

std::vector<float> DdpgAgent::act_greedy(const Tensor& obs) {
  Rng unused(0);
  return act(obs, false, 0.0, unused);
}

float DdpgAgent::q_of(const Network& trunk, const Network& head, const Tensor& obs,
                      std::span<const float> action) const {
  auto [z, c1] = forward(trunk, obs);
  auto [q, c2] = forward(head, concat_state_action(z, action));
  return q.data[0];
}

float DdpgAgent::q_value(const Tensor& obs, std::span<const float> action) const {
  return q_of(p_.critic_trunk, p_.critic_head, obs, action);
}

float DdpgAgent::td_target(const Transition& t) const {
  double y = t.r;
  if (!t.terminal) {
    auto [a_next, ca] = forward(p_.target_actor, t.s_next);
    std::vector<float> an(a_next.data.begin(), a_next.data.end());
    y += hyper_.gamma *
         static_cast<double>(q_of(p_.target_critic_trunk, p_.target_critic_head, t.s_next, an));
  }
  return static_cast<float>(y);
}

std::vector<float> DdpgAgent::critic_update(std::span<const Transition* const> batch,
                                            std::span<const float> per_weights) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("critic_update: empty batch");
  if (per_weights.size() != n) throw std::invalid_argument("critic_update: weight size mismatch");

  GradAccum acc_trunk(p_.critic_trunk), acc_head(p_.critic_head);
  std::vector<float> deltas(n);
  double loss = 0.0;

  for (std::size_t i = 0; i < n; ++i) {
    const Transition& t = *batch[i];
    const double y = td_target(t);

    auto [z, cache_trunk] = forward(p_.critic_trunk, t.s);
    auto [q, cache_head] = forward(p_.critic_head, concat_state_action(z, t.a));
    const double resid = y - static_cast<double>(q.data[0]);
    deltas[i] = static_cast<float>(resid);
    loss += per_weights[i] * resid * resid;

    Tensor d_q = Tensor::zeros({1});
    d_q.data[0] = static_cast<float>(-2.0 * resid);
    Grads g_head = backprop(p_.critic_head, cache_head, d_q);
    Tensor d_z = Tensor::zeros(z.shape);
    std::copy(g_head.input_grad.data.begin(), g_head.input_grad.data.begin() + z.numel(),
              d_z.data.begin());
    Grads g_trunk = backprop(p_.critic_trunk, cache_trunk, d_z);

    const double scale = per_weights[i] / static_cast<double>(n);
    acc_head.add(g_head, scale);
    acc_trunk.add(g_trunk, scale);
  }

  loss /= static_cast<double>(n);
  if (!std::isfinite(loss) || !opt_head_.finite(acc_head) || !opt_trunk_.finite(acc_trunk))
    throw std::runtime_error("ddpg critic_update: non-finite loss or gradient; step aborted");
  opt_head_.step(p_.critic_head, acc_head);
  opt_trunk_.step(p_.critic_trunk, acc_trunk);
  return deltas;
}

void DdpgAgent::actor_update(std::span<const Transition* const> batch) {
  const std::size_t n = batch.size();
  if (n == 0) throw std::invalid_argument("actor_update: empty batch");

  GradAccum acc(p_.actor);
  for (const Transition* tp : batch) {
    const Transition& t = *tp;
    auto [a, cache_actor] = forward(p_.actor, t.s);
    std::vector<float> av(a.data.begin(), a.data.end());

    auto [z, cache_trunk] = forward(p_.critic_trunk, t.s);
    auto [q, cache_head] = forward(p_.critic_head, concat_state_action(z, av));
    (void)q;
    Tensor d_q = Tensor::zeros({1});
    d_q.data[0] = 1.0f;  // grad of Q wrt its own output
    Grads g_head = backprop(p_.critic_head, cache_head, d_q);

    // ascend Q: actor loss gradient is -grad_a Q; trunk gradients discarded
    Tensor d_a = Tensor::zeros(a.shape);
    for (int k = 0; k < action_dim_; ++k)
      d_a.data[k] = -g_head.input_grad.data[z.numel() + k];
    Grads g_actor = backprop(p_.actor, cache_actor, d_a);
    acc.add(g_actor, 1.0 / static_cast<double>(n));
  }
  if (!opt_actor_.finite(acc))
    throw std::runtime_error("ddpg actor_update: non-finite gradient; step aborted");
  opt_actor_.step(p_.actor, acc);
}

void DdpgAgent::soft_update(double tau) {
  soft_update_net(p_.target_actor, p_.actor, tau);
  soft_update_net(p_.target_critic_trunk, p_.critic_trunk, tau);
  soft_update_net(p_.target_critic_head, p_.critic_head, tau);
}

void DdpgAgent::save(const std::string& path) const {
  CheckpointWriter w;
  w.meta("agent ddpg");
  add_network(w, "actor", p_.actor);
  add_network(w, "critic_trunk", p_.critic_trunk);
  add_network(w, "critic_head", p_.critic_head);
  add_network(w, "target_actor", p_.target_actor);
  add_network(w, "target_critic_trunk", p_.target_critic_trunk);
  add_network(w, "target_critic_head", p_.target_critic_head);
  w.write_file(path);
}

void DdpgAgent::load(const std::string& path) {
  const Checkpoint ck = Checkpoint::read_file(path);
  load_network(ck, "actor", p_.actor);
  load_network(ck, "critic_trunk", p_.critic_trunk);
  load_network(ck, "critic_head", p_.critic_head);
  load_network(ck, "target_actor", p_.target_actor);
  load_network(ck, "target_critic_trunk", p_.target_critic_trunk);
  load_network(ck, "target_critic_head", p_.target_critic_head);
}

}  // namespace icac
