#pragma once

#include <vector>

#include "icac/envs/env.hpp"

namespace icac {

struct GraspConfig {
  int image_h = 16, image_w = 32;
  int max_steps = 20;
  double max_shoulder_delta = 0.15;  // per step, shoulder space is [-1, 1]
  double max_hand_delta = 0.5;       // per step, hand open fraction
  double grasp_tol = 0.06;           // 0.03 of the joint range (2.0)
  double contact_tol = 0.18;         // closing inside this but outside grasp_tol topples
  double topple_speed = 0.10;        // max |shoulder delta| during a grasp
  int eval_targets = 20;
  double object_range = 0.8;         // object positions in [-range, range]
};

struct GraspState {
  double shoulder = 0.0;   // [-1, 1]
  double hand_open = 1.0;  // [0, 1], closed below 0.5
  double object_pos = 0.0;
  bool toppled = false;
  bool grasped = false;
  int step_count = 0;
  bool terminal = false;
};

// 1-DoF shoulder sweep plus hand open/close over a table scene. Topple is a
// scalar-overlap rule: closing the hand in the contact zone either grasps
// (centered and slow) or topples the object (off-center or too fast).
class GraspEnv : public Env {
 public:
  explicit GraspEnv(GraspConfig cfg = {});

  Tensor reset(Rng& episode_rng) override;
  Tensor reset_eval(int target_index) override;
  StepResult step(std::span<const float> action) override;

  int action_dim() const override { return 2; }
  std::vector<int> observation_shape() const override { return {cfg_.image_h, cfg_.image_w, 3}; }
  int eval_target_count() const override { return cfg_.eval_targets; }
  int max_steps() const override { return cfg_.max_steps; }

  Tensor render() const;
  const GraspState& state() const { return state_; }
  void set_state(const GraspState& s) { state_ = s; }
  const GraspConfig& config() const { return cfg_; }
  const std::vector<double>& eval_positions() const { return eval_positions_; }

 private:
  GraspConfig cfg_;
  GraspState state_;
  std::vector<double> eval_positions_;
};

}  // namespace icac
