#pragma once

#include <Eigen/Dense>
#include <array>
#include <memory>
#include <optional>

#include "icac/envs/env.hpp"

namespace icac {

struct ReachConfig {
  int image_size = 32;
  int max_steps = 10;
  double max_joint_delta = 0.25;         // rad per step per joint
  double success_area_fraction = 0.09;   // target zone share of reachable area
  int eval_targets = 20;
  std::array<double, 3> links = {1.0 / 3, 1.0 / 3, 1.0 / 3};  // arm length normalized to 1
};

struct ReachState {
  std::array<double, 3> joints = {0, 0, 0};  // each in [-pi/2, pi/2]
  Eigen::Vector2d target = {0, 0};
  int step_count = 0;
  bool terminal = false;
};

// Planar 3-DoF arm over a pixel canvas. The target zone radius is solved
// numerically so it covers the configured fraction of the reachable area.
class ReachEnv : public Env {
 public:
  explicit ReachEnv(ReachConfig cfg = {});

  Tensor reset(Rng& episode_rng) override;
  Tensor reset_eval(int target_index) override;
  StepResult step(std::span<const float> action) override;

  int action_dim() const override { return 3; }
  std::vector<int> observation_shape() const override { return {cfg_.image_size, cfg_.image_size, 3}; }
  int eval_target_count() const override { return cfg_.eval_targets; }
  int max_steps() const override { return cfg_.max_steps; }

  Tensor render() const;

  const ReachState& state() const { return state_; }
  void set_state(const ReachState& s) { state_ = s; }
  const ReachConfig& config() const { return cfg_; }

  double success_radius() const;
  double reachable_area() const;
  bool is_reachable(double x, double y) const;
  const std::vector<Eigen::Vector2d>& eval_targets() const;

  // Monte Carlo share of the reachable area covered by the target zone
  double success_zone_fraction(int samples = 100000, std::uint64_t seed = 0xC0FFEE,
                               std::optional<double> radius = std::nullopt) const;

  // gripper position; joint_positions fills base->joint1->joint2->gripper
  static Eigen::Vector2d forward_kin(const std::array<double, 3>& joints,
                                     const std::array<double, 3>& links,
                                     std::array<Eigen::Vector2d, 4>* joint_positions = nullptr);

  struct Geometry;  // shared reachable-set raster, defined in the .cpp

 private:
  Eigen::Vector2d sample_reachable(Rng& rng) const;

  ReachConfig cfg_;
  std::shared_ptr<const Geometry> geo_;
  ReachState state_;
};

}  // namespace icac
