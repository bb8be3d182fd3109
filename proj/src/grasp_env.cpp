#include "icac/envs/grasp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icac/envs/canvas.hpp"

namespace icac {

namespace {
constexpr double kEvalMargin = 0.02;
}

GraspEnv::GraspEnv(GraspConfig cfg) : cfg_(cfg) {
  if (cfg_.eval_targets < 1) throw std::invalid_argument("GraspEnv: eval_targets must be >= 1");
  eval_positions_.reserve(cfg_.eval_targets);
  for (int i = 0; i < cfg_.eval_targets; ++i) {
    const double f = cfg_.eval_targets == 1 ? 0.5 : static_cast<double>(i) / (cfg_.eval_targets - 1);
    eval_positions_.push_back(-cfg_.object_range + 2.0 * cfg_.object_range * f);
  }
}

Tensor GraspEnv::reset(Rng& episode_rng) {
  state_ = GraspState{};
  for (int tries = 0; tries < 10000; ++tries) {
    const double p = episode_rng.uniform(-cfg_.object_range, cfg_.object_range);
    bool near_eval = false;
    for (double e : eval_positions_)
      if (std::abs(p - e) < kEvalMargin) {
        near_eval = true;
        break;
      }
    if (!near_eval) {
      state_.object_pos = p;
      return render();
    }
  }
  throw std::runtime_error("GraspEnv: object sampling failed");
}

Tensor GraspEnv::reset_eval(int target_index) {
  state_ = GraspState{};
  state_.object_pos = eval_positions_[static_cast<std::size_t>(target_index) % eval_positions_.size()];
  return render();
}

StepResult GraspEnv::step(std::span<const float> action) {
  if (state_.terminal) throw std::runtime_error("GraspEnv::step: episode already terminal");
  if (action.size() != 2) throw std::invalid_argument("GraspEnv::step: action must have 2 dims");

  const double a0 = std::clamp(static_cast<double>(action[0]), -1.0, 1.0);
  const double a1 = std::clamp(static_cast<double>(action[1]), -1.0, 1.0);
  const double shoulder_delta = a0 * cfg_.max_shoulder_delta;
  const double prev_open = state_.hand_open;

  state_.shoulder = std::clamp(state_.shoulder + shoulder_delta, -1.0, 1.0);
  state_.hand_open = std::clamp(state_.hand_open + a1 * cfg_.max_hand_delta, 0.0, 1.0);
  state_.step_count += 1;

  const bool closing = prev_open > 0.5 && state_.hand_open <= 0.5;
  const double offset = std::abs(state_.shoulder - state_.object_pos);

  if (closing && offset <= cfg_.contact_tol) {
    if (offset <= cfg_.grasp_tol && std::abs(shoulder_delta) <= cfg_.topple_speed)
      state_.grasped = true;
    else
      state_.toppled = true;
  }

  StepResult out;
  out.success = state_.grasped;
  out.terminal = state_.grasped || state_.toppled || state_.step_count >= cfg_.max_steps;
  if (state_.grasped) {
    out.r_dense = 10.0f;
    out.r_sparse = 10.0f;
  } else if (state_.toppled) {
    out.r_dense = -10.0f;
    out.r_sparse = -10.0f;
  } else {
    out.r_dense = static_cast<float>(-offset);
    out.r_sparse = 0.0f;
  }
  state_.terminal = out.terminal;
  out.obs = render();
  return out;
}

Tensor GraspEnv::render() const {
  const int h = cfg_.image_h, w = cfg_.image_w;
  auto xpx = [&](double pos) { return static_cast<float>((pos + 1.0) * 0.5 * w); };

  Canvas cv(h, w, {0.05f, 0.06f, 0.08f});
  const float table_y = h - 3.0f;
  cv.rect(0.0f, table_y, static_cast<float>(w), static_cast<float>(h), {0.45f, 0.42f, 0.38f});
  cv.disc(xpx(state_.object_pos), table_y - 1.5f, 1.7f, {1.0f, 0.05f, 0.05f});

  const float hx = xpx(state_.shoulder);
  const float gap = 1.0f + 3.2f * static_cast<float>(state_.hand_open);
  const float top = 1.5f, bottom = table_y - 2.0f;
  cv.capsule(hx - gap, top, hx - gap, bottom, 0.7f, {0.90f, 0.90f, 0.95f});
  cv.capsule(hx + gap, top, hx + gap, bottom, 0.7f, {0.90f, 0.90f, 0.95f});
  cv.capsule(hx - gap, top, hx + gap, top, 0.7f, {0.55f, 0.60f, 0.95f});
  return cv.to_tensor();
}

}  // namespace icac
