#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icac/agents/policy.hpp"
#include "icac/nn/layers.hpp"
#include "icac/nn/optim.hpp"
#include "icac/replay.hpp"
#include "icac/rng.hpp"

namespace icac {

struct DdpgArch {
  int conv1_ch = 8, conv1_k = 5;
  int conv2_ch = 16, conv2_k = 3;
  int actor_feat = 16;
  int critic_hidden = 32;
};

struct DdpgHyper {
  double gamma = 0.9;
  double tau = 0.01;
  int minibatch = 16;
  double lr_actor = 1e-4, lr_critic = 1e-3;
};

struct DdpgParams {
  Network actor;                      // image -> action
  Network critic_trunk, critic_head;  // image -> features; features ++ action -> scalar
  Network target_actor, target_critic_trunk, target_critic_head;
};

// Baseline DDPG on raw pixels: deterministic actor, action-value critic with
// the action concatenated at the first dense stage, target networks, sampled
// deterministic policy gradient.
class DdpgAgent : public Policy {
 public:
  DdpgAgent(std::vector<int> obs_shape, int action_dim, DdpgArch arch, DdpgHyper hyper,
            std::uint64_t seed);

  std::vector<float> act(const Tensor& obs, bool explore, double sigma, Rng& rng) const;
  std::vector<float> act_greedy(const Tensor& obs) override;

  float q_value(const Tensor& obs, std::span<const float> action) const;

  // Bellman target through the target networks
  float td_target(const Transition& t) const;

  // one Adam step on the weighted squared Bellman residual; returns the
  // TD errors for priority updates
  std::vector<float> critic_update(std::span<const Transition* const> batch,
                                   std::span<const float> per_weights);

  // ascent along grad_a Q backpropagated into the actor; critic untouched
  void actor_update(std::span<const Transition* const> batch);

  void soft_update(double tau);

  void save(const std::string& path) const;
  void load(const std::string& path);

  const DdpgParams& params() const { return p_; }
  DdpgParams& params_mut() { return p_; }
  int action_dim() const { return action_dim_; }
  const DdpgHyper& hyper() const { return hyper_; }

 private:
  float q_of(const Network& trunk, const Network& head, const Tensor& obs,
             std::span<const float> action) const;

  std::vector<int> obs_shape_;
  int action_dim_;
  int trunk_out_ = 0;
  DdpgArch arch_;
  DdpgHyper hyper_;
  DdpgParams p_;
  AdamOpt opt_actor_, opt_trunk_, opt_head_;
};

}  // namespace icac
