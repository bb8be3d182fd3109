#pragma once

#include <Eigen/Dense>
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

struct CaclaArch {
  int feature_dim = 16;
  int conv1_ch = 8, conv1_k = 5;
  int conv2_ch = 16, conv2_k = 3;
  int critic_hidden = 32;
  int actor_hidden = 16;
};

struct CaclaHyper {
  double gamma = 0.9;
  double tau = 0.01;
  double sigma0 = 0.4;         // exploration stddev, normalized action units
  double sigma_decay = 0.999;  // per episode
  double sigma_floor = 0.04;
  int minibatch = 16;
  double lr_encoder = 1e-3, lr_decoder = 1e-3, lr_critic = 1e-3, lr_actor = 1e-3;
};

struct CaclaParams {
  Network encoder, decoder, critic, actor;
  Network target_encoder, target_critic;
};

struct TdResult {
  std::vector<float> y;
  std::vector<float> delta;
};

struct CaclaDiag {
  std::vector<float> deltas;
  double recon_loss = 0.0, value_loss = 0.0, actor_loss = 0.0;
  int actor_updated = 0;
  bool aborted = false;
  std::string abort_reason;
};

// Deep CACLA: convolutional autoencoder with a shared encoder/critic, a small
// actor on the feature vector, target encoder/critic, and the two-phase
// update with TD-error-gated actor learning.
class CaclaAgent : public Policy {
 public:
  CaclaAgent(std::vector<int> obs_shape, int action_dim, CaclaArch arch, CaclaHyper hyper,
             std::uint64_t seed);

  // custom networks (targets copied from the online nets when empty)
  CaclaAgent(CaclaParams params, std::vector<int> obs_shape, int action_dim, CaclaHyper hyper);

  Eigen::VectorXf encode(const Tensor& s) const;
  Eigen::VectorXf encode_target(const Tensor& s) const;

  std::vector<float> act(const Eigen::VectorXf& phi, bool explore, double sigma, Rng& rng) const;
  std::vector<float> act_greedy(const Tensor& obs) override;

  TdResult td_targets(std::span<const Transition* const> batch) const;

  // phase 1 + phase 2, gated on the pre-update TD errors
  CaclaDiag train_step(std::span<const Transition* const> batch, std::span<const float> per_weights);

  // phase 1: one Adam step on the weighted CAE + value loss wrt encoder,
  // decoder and critic head
  void update_cae_critic(std::span<const Transition* const> batch, std::span<const float> per_weights,
                         std::span<const float> y, CaclaDiag* diag);

  // phase 2: one Adam step on the actor loss over positive-delta samples;
  // encoder/decoder/critic stay frozen. Returns the qualifying sample count.
  int update_actor(std::span<const Transition* const> batch, std::span<const float> delta,
                   CaclaDiag* diag = nullptr);

  void soft_update(double tau);

  void save(const std::string& path) const;
  void load(const std::string& path);

  const CaclaParams& params() const { return p_; }
  CaclaParams& params_mut() { return p_; }
  int feature_dim() const { return arch_.feature_dim; }
  int action_dim() const { return action_dim_; }
  const CaclaHyper& hyper() const { return hyper_; }

 private:
  std::vector<int> obs_shape_;
  int action_dim_;
  CaclaArch arch_;
  CaclaHyper hyper_;
  CaclaParams p_;
  AdamOpt opt_encoder_, opt_decoder_, opt_critic_, opt_actor_;
};

// target <- tau * online + (1 - tau) * target, elementwise
void soft_update_net(Network& target, const Network& online, double tau);

// stable-name serialization shared by both agents
void add_network(class CheckpointWriter& w, const std::string& prefix, const Network& net);
void load_network(const class Checkpoint& ck, const std::string& prefix, Network& net);

}  // namespace icac
