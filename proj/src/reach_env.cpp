#include "icac/envs/reach.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <tuple>

#include "icac/envs/canvas.hpp"

namespace icac {

namespace {
constexpr double kHalfPi = 1.5707963267948966;
constexpr double kWorldHalf = 1.1;  // rendered world is [-1.1, 1.1]^2
constexpr double kEvalMargin = 0.05;
}  // namespace

// Reachable-set raster plus derived quantities; shared across instances with
// the same arm geometry.
struct ReachEnv::Geometry {
  static constexpr int kGrid = 110;
  static constexpr int kSweep = 160;

  std::vector<std::uint8_t> occupied;  // kGrid x kGrid
  double cell = 0.0;
  double area = 0.0;
  double success_radius = 0.0;
  std::vector<Eigen::Vector2d> eval_targets;

  int cell_index(double x, double y) const {
    const int ix = static_cast<int>((x + kWorldHalf) / cell);
    const int iy = static_cast<int>((y + kWorldHalf) / cell);
    if (ix < 0 || ix >= kGrid || iy < 0 || iy >= kGrid) return -1;
    return iy * kGrid + ix;
  }

  bool reachable(double x, double y) const {
    const int i = cell_index(x, y);
    return i >= 0 && occupied[i];
  }

  Eigen::Vector2d cell_center(int idx) const {
    const int iy = idx / kGrid, ix = idx % kGrid;
    return {-kWorldHalf + (ix + 0.5) * cell, -kWorldHalf + (iy + 0.5) * cell};
  }

  double zone_area(const Eigen::Vector2d& t, double r) const {
    // occupied cells whose center falls in the zone
    const int lo_x = std::max(0, static_cast<int>((t.x() - r + kWorldHalf) / cell) - 1);
    const int hi_x = std::min(kGrid - 1, static_cast<int>((t.x() + r + kWorldHalf) / cell) + 1);
    const int lo_y = std::max(0, static_cast<int>((t.y() - r + kWorldHalf) / cell) - 1);
    const int hi_y = std::min(kGrid - 1, static_cast<int>((t.y() + r + kWorldHalf) / cell) + 1);
    const double r2 = r * r;
    int count = 0;
    for (int iy = lo_y; iy <= hi_y; ++iy)
      for (int ix = lo_x; ix <= hi_x; ++ix) {
        const int idx = iy * kGrid + ix;
        if (!occupied[idx]) continue;
        if ((cell_center(idx) - t).squaredNorm() <= r2) ++count;
      }
    return count * cell * cell;
  }
};

Eigen::Vector2d ReachEnv::forward_kin(const std::array<double, 3>& joints,
                                      const std::array<double, 3>& links,
                                      std::array<Eigen::Vector2d, 4>* joint_positions) {
  Eigen::Vector2d p(0.0, 0.0);
  double angle = 0.0;  // measured from +y
  if (joint_positions) (*joint_positions)[0] = p;
  for (int i = 0; i < 3; ++i) {
    angle += joints[i];
    p += links[i] * Eigen::Vector2d(std::sin(angle), std::cos(angle));
    if (joint_positions) (*joint_positions)[i + 1] = p;
  }
  return p;
}

namespace {

std::shared_ptr<const ReachEnv::Geometry> build_geometry(const ReachConfig& cfg) {
  auto geo = std::make_shared<ReachEnv::Geometry>();
  geo->cell = 2.0 * kWorldHalf / ReachEnv::Geometry::kGrid;
  geo->occupied.assign(ReachEnv::Geometry::kGrid * ReachEnv::Geometry::kGrid, 0);

  const int n = ReachEnv::Geometry::kSweep;
  std::array<double, 3> joints;
  for (int i = 0; i < n; ++i) {
    joints[0] = -kHalfPi + (2.0 * kHalfPi * i) / (n - 1);
    for (int j = 0; j < n; ++j) {
      joints[1] = -kHalfPi + (2.0 * kHalfPi * j) / (n - 1);
      for (int k = 0; k < n; ++k) {
        joints[2] = -kHalfPi + (2.0 * kHalfPi * k) / (n - 1);
        const Eigen::Vector2d p = ReachEnv::forward_kin(joints, cfg.links);
        const int idx = geo->cell_index(p.x(), p.y());
        if (idx >= 0) geo->occupied[idx] = 1;
      }
    }
  }

  std::vector<int> occupied_cells;
  for (int i = 0; i < ReachEnv::Geometry::kGrid * ReachEnv::Geometry::kGrid; ++i)
    if (geo->occupied[i]) occupied_cells.push_back(i);
  geo->area = occupied_cells.size() * geo->cell * geo->cell;

  // solve zone_fraction(r) == success_area_fraction, averaging the zone/reach
  // overlap over a deterministic spread of target placements
  std::vector<Eigen::Vector2d> probes;
  const std::size_t stride = std::max<std::size_t>(1, occupied_cells.size() / 200);
  for (std::size_t i = 0; i < occupied_cells.size(); i += stride)
    probes.push_back(geo->cell_center(occupied_cells[i]));
  auto fraction_at = [&](double r) {
    double acc = 0.0;
    for (const auto& t : probes) acc += geo->zone_area(t, r);
    return acc / (static_cast<double>(probes.size()) * geo->area);
  };
  double lo = geo->cell, hi = 2.0 * kWorldHalf;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (fraction_at(mid) < cfg.success_area_fraction)
      lo = mid;
    else
      hi = mid;
  }
  geo->success_radius = 0.5 * (lo + hi);

  // held-out evaluation targets: greedy farthest-point spread over a
  // deterministic candidate pool
  Rng pool_rng(0x51CA7E5ULL);
  std::vector<Eigen::Vector2d> candidates;
  while (candidates.size() < 400) {
    const double x = pool_rng.uniform(-kWorldHalf, kWorldHalf);
    const double y = pool_rng.uniform(-kWorldHalf, kWorldHalf);
    if (geo->reachable(x, y)) candidates.emplace_back(x, y);
  }
  geo->eval_targets.push_back(candidates[0]);
  while (static_cast<int>(geo->eval_targets.size()) < cfg.eval_targets) {
    double best_d = -1.0;
    std::size_t best = 0;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
      double d = std::numeric_limits<double>::infinity();
      for (const auto& t : geo->eval_targets) d = std::min(d, (candidates[i] - t).norm());
      if (d > best_d) {
        best_d = d;
        best = i;
      }
    }
    geo->eval_targets.push_back(candidates[best]);
  }
  return geo;
}

std::shared_ptr<const ReachEnv::Geometry> geometry_for(const ReachConfig& cfg) {
  static std::mutex mu;
  static std::map<std::tuple<double, double, double, double, int>,
                  std::shared_ptr<const ReachEnv::Geometry>>
      cache;
  const auto key = std::make_tuple(cfg.links[0], cfg.links[1], cfg.links[2],
                                   cfg.success_area_fraction, cfg.eval_targets);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto geo = build_geometry(cfg);
  cache[key] = geo;
  return geo;
}

}  // namespace

ReachEnv::ReachEnv(ReachConfig cfg) : cfg_(cfg), geo_(geometry_for(cfg)) {
  if (cfg_.image_size < 8) throw std::invalid_argument("ReachEnv: image_size too small");
}

double ReachEnv::success_radius() const { return geo_->success_radius; }
double ReachEnv::reachable_area() const { return geo_->area; }
bool ReachEnv::is_reachable(double x, double y) const { return geo_->reachable(x, y); }
const std::vector<Eigen::Vector2d>& ReachEnv::eval_targets() const { return geo_->eval_targets; }

Eigen::Vector2d ReachEnv::sample_reachable(Rng& rng) const {
  for (int tries = 0; tries < 100000; ++tries) {
    const double x = rng.uniform(-kWorldHalf, kWorldHalf);
    const double y = rng.uniform(-kWorldHalf, kWorldHalf);
    if (!geo_->reachable(x, y)) continue;
    bool near_eval = false;
    for (const auto& t : geo_->eval_targets)
      if ((Eigen::Vector2d(x, y) - t).norm() < kEvalMargin) {
        near_eval = true;
        break;
      }
    if (!near_eval) return {x, y};
  }
  throw std::runtime_error("ReachEnv: target sampling failed");
}

Tensor ReachEnv::reset(Rng& episode_rng) {
  state_ = ReachState{};
  state_.target = sample_reachable(episode_rng);
  return render();
}

Tensor ReachEnv::reset_eval(int target_index) {
  state_ = ReachState{};
  state_.target = geo_->eval_targets[static_cast<std::size_t>(target_index) %
                                     geo_->eval_targets.size()];
  return render();
}

StepResult ReachEnv::step(std::span<const float> action) {
  if (state_.terminal) throw std::runtime_error("ReachEnv::step: episode already terminal");
  if (action.size() != 3) throw std::invalid_argument("ReachEnv::step: action must have 3 dims");

  for (int i = 0; i < 3; ++i) {
    const double a = std::clamp(static_cast<double>(action[i]), -1.0, 1.0);
    state_.joints[i] = std::clamp(state_.joints[i] + a * cfg_.max_joint_delta, -kHalfPi, kHalfPi);
  }
  state_.step_count += 1;

  const Eigen::Vector2d grip = forward_kin(state_.joints, cfg_.links);
  const double dist = (grip - state_.target).norm();
  const bool success = dist <= geo_->success_radius;

  StepResult out;
  out.success = success;
  out.terminal = success || state_.step_count >= cfg_.max_steps;
  out.r_dense = success ? 10.0f : static_cast<float>(-dist);
  out.r_sparse = success ? 10.0f : 0.0f;
  state_.terminal = out.terminal;
  out.obs = render();
  return out;
}

Tensor ReachEnv::render() const {
  const int s = cfg_.image_size;
  const double scale = s / (2.0 * kWorldHalf);
  auto px = [&](const Eigen::Vector2d& p) {
    return Eigen::Vector2f(static_cast<float>((p.x() + kWorldHalf) * scale),
                           static_cast<float>((kWorldHalf - p.y()) * scale));
  };

  Canvas cv(s, s, {0.05f, 0.06f, 0.08f});
  const Eigen::Vector2f t = px(state_.target);
  cv.disc(t.x(), t.y(), static_cast<float>(geo_->success_radius * scale), {1.0f, 0.05f, 0.05f});

  std::array<Eigen::Vector2d, 4> pts;
  forward_kin(state_.joints, cfg_.links, &pts);
  const Color link_colors[3] = {{0.15f, 0.45f, 0.95f}, {0.20f, 0.65f, 0.90f}, {0.30f, 0.85f, 0.60f}};
  const float halfw = std::max(1.0f, s / 30.0f);
  for (int i = 0; i < 3; ++i) {
    const Eigen::Vector2f a = px(pts[i]), b = px(pts[i + 1]);
    cv.capsule(a.x(), a.y(), b.x(), b.y(), halfw, link_colors[i]);
  }
  const Eigen::Vector2f g = px(pts[3]);
  cv.disc(g.x(), g.y(), std::max(1.4f, s / 22.0f), {0.95f, 0.95f, 0.95f});
  return cv.to_tensor();
}

double ReachEnv::success_zone_fraction(int samples, std::uint64_t seed,
                                       std::optional<double> radius) const {
  const double r = radius.value_or(geo_->success_radius);
  const double r2 = r * r;
  Rng rng(seed);
  auto draw_reachable = [&]() {
    while (true) {
      const double x = rng.uniform(-kWorldHalf, kWorldHalf);
      const double y = rng.uniform(-kWorldHalf, kWorldHalf);
      if (geo_->reachable(x, y)) return Eigen::Vector2d(x, y);
    }
  };
  int hit = 0;
  for (int i = 0; i < samples; ++i) {
    const Eigen::Vector2d target = draw_reachable();
    const Eigen::Vector2d point = draw_reachable();
    if ((point - target).squaredNorm() <= r2) ++hit;
  }
  return static_cast<double>(hit) / samples;
}

}  // namespace icac
