#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "icac/rng.hpp"
#include "icac/tensor.hpp"

namespace icac {

struct Transition {
  Tensor s;
  std::vector<float> a;  // normalized action, in [-1, 1]^d
  float r = 0.0f;        // combined reward at collection time
  Tensor s_next;
  bool terminal = false;
};

struct PerConfig {
  std::size_t capacity = 100000;
  double alpha = 0.6;
  double beta0 = 0.4;
  std::uint64_t beta_end_step = 20000;  // harness sets this to the planned run length
  double epsilon_p = 1e-3;
};

// Fixed-capacity ring with proportional prioritized sampling. Flat O(size)
// sampling; fine at desk scale.
class PerBuffer {
 public:
  explicit PerBuffer(PerConfig cfg);

  std::uint64_t push(Transition t);

  struct Batch {
    std::vector<const Transition*> items;
    std::vector<std::uint64_t> ids;
    std::vector<float> weights;  // normalized so max == 1
  };
  Batch sample(int n, std::uint64_t global_step, Rng& rng) const;

  void update_priorities(std::span<const std::uint64_t> ids, std::span<const float> td_errors);

  double beta_at(std::uint64_t global_step) const;

  // analytic P(i) over live entries, in storage order
  std::vector<double> probabilities() const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return cfg_.capacity; }
  const PerConfig& config() const { return cfg_; }
  std::uint64_t stale_skips() const { return stale_skips_; }
  bool live(std::uint64_t id) const;
  float priority_of(std::uint64_t id) const;
  const Transition& get(std::uint64_t id) const;

  void dump(const std::string& path) const;

 private:
  double max_priority() const;

  PerConfig cfg_;
  std::vector<Transition> entries_;
  std::vector<float> priorities_;
  std::vector<double> pow_alpha_;  // cached priority^alpha
  std::vector<std::uint64_t> ids_;
  std::size_t size_ = 0;
  std::uint64_t next_id_ = 0;
  std::uint64_t stale_skips_ = 0;
  mutable double cached_max_ = 1.0;
  mutable bool max_valid_ = true;
};

}  // namespace icac
