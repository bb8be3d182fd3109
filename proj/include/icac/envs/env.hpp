#pragma once

#include <span>
#include <vector>

#include "icac/rng.hpp"
#include "icac/tensor.hpp"

namespace icac {

struct StepResult {
  Tensor obs;
  float r_dense = 0.0f;
  float r_sparse = 0.0f;
  bool terminal = false;
  bool success = false;
};

// Deterministic pixel environment. Actions arrive normalized in [-1,1]^d;
// each environment scales them to its physical per-step deltas.
class Env {
 public:
  virtual ~Env() = default;

  virtual Tensor reset(Rng& episode_rng) = 0;
  virtual Tensor reset_eval(int target_index) = 0;  // held-out episode setup
  virtual StepResult step(std::span<const float> action) = 0;

  virtual int action_dim() const = 0;
  virtual std::vector<int> observation_shape() const = 0;
  virtual int eval_target_count() const = 0;
  virtual int max_steps() const = 0;
};

}  // namespace icac
