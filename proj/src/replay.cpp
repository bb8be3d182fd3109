#include "icac/replay.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "icac/checkpoint.hpp"

namespace icac {

PerBuffer::PerBuffer(PerConfig cfg) : cfg_(cfg) {
  if (cfg_.capacity == 0) throw std::invalid_argument("PerBuffer: capacity must be positive");
  if (cfg_.alpha < 0.0 || cfg_.alpha > 1.0) throw std::invalid_argument("PerBuffer: alpha in [0,1]");
  if (cfg_.beta0 <= 0.0 || cfg_.beta0 > 1.0) throw std::invalid_argument("PerBuffer: beta0 in (0,1]");
  if (cfg_.epsilon_p <= 0.0) throw std::invalid_argument("PerBuffer: epsilon_p must be positive");
  entries_.resize(cfg_.capacity);
  priorities_.assign(cfg_.capacity, 0.0f);
  pow_alpha_.assign(cfg_.capacity, 0.0);
  ids_.assign(cfg_.capacity, 0);
}

double PerBuffer::max_priority() const {
  if (!max_valid_) {
    double m = 0.0;
    for (std::size_t i = 0; i < size_; ++i) m = std::max(m, static_cast<double>(priorities_[i]));
    cached_max_ = m > 0.0 ? m : 1.0;
    max_valid_ = true;
  }
  return cached_max_;
}

std::uint64_t PerBuffer::push(Transition t) {
  if (!std::isfinite(t.r)) throw std::invalid_argument("PerBuffer::push: non-finite reward");
  for (float v : t.a)
    if (!std::isfinite(v)) throw std::invalid_argument("PerBuffer::push: non-finite action");
  if (!t.s.all_finite() || !t.s_next.all_finite())
    throw std::invalid_argument("PerBuffer::push: non-finite observation");

  // The evicted slot can hold the running max, but the new entry inherits
  // exactly that value, so the cached max stays correct.
  const double p = size_ == 0 ? 1.0 : max_priority();
  const std::uint64_t id = next_id_++;
  const std::size_t slot = static_cast<std::size_t>(id % cfg_.capacity);
  entries_[slot] = std::move(t);
  priorities_[slot] = static_cast<float>(p);
  pow_alpha_[slot] = std::pow(p, cfg_.alpha);
  ids_[slot] = id;
  if (size_ < cfg_.capacity) ++size_;
  if (max_valid_) cached_max_ = std::max(cached_max_, p);
  return id;
}

std::vector<double> PerBuffer::probabilities() const {
  std::vector<double> probs(size_);
  double total = 0.0;
  for (std::size_t i = 0; i < size_; ++i) total += pow_alpha_[i];
  for (std::size_t i = 0; i < size_; ++i) probs[i] = pow_alpha_[i] / total;
  return probs;
}

PerBuffer::Batch PerBuffer::sample(int n, std::uint64_t global_step, Rng& rng) const {
  if (n < 1) throw std::invalid_argument("PerBuffer::sample: n must be >= 1");
  if (static_cast<std::size_t>(n) > size_)
    throw std::invalid_argument("PerBuffer::sample: n exceeds buffer size");

  std::vector<double> cum(size_);
  double total = 0.0;
  for (std::size_t i = 0; i < size_; ++i) {
    total += pow_alpha_[i];
    cum[i] = total;
  }

  const double beta = beta_at(global_step);
  Batch out;
  out.items.reserve(n);
  out.ids.reserve(n);
  std::vector<double> raw(n);
  double wmax = 0.0;
  for (int k = 0; k < n; ++k) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cum.begin(), cum.end(), u);
    std::size_t i = static_cast<std::size_t>(it - cum.begin());
    if (i >= size_) i = size_ - 1;
    const double prob = pow_alpha_[i] / total;
    raw[k] = std::pow(static_cast<double>(size_) * prob, -beta);
    wmax = std::max(wmax, raw[k]);
    out.items.push_back(&entries_[i]);
    out.ids.push_back(ids_[i]);
  }
  out.weights.resize(n);
  for (int k = 0; k < n; ++k) out.weights[k] = static_cast<float>(raw[k] / wmax);
  return out;
}

void PerBuffer::update_priorities(std::span<const std::uint64_t> ids,
                                  std::span<const float> td_errors) {
  if (ids.size() != td_errors.size())
    throw std::invalid_argument("PerBuffer::update_priorities: size mismatch");
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const std::uint64_t id = ids[k];
    const std::size_t slot = static_cast<std::size_t>(id % cfg_.capacity);
    if (slot >= size_ || ids_[slot] != id) {
      ++stale_skips_;  // entry was overwritten since sampling
      continue;
    }
    const double p = std::abs(static_cast<double>(td_errors[k])) + cfg_.epsilon_p;
    if (p < priorities_[slot] && priorities_[slot] >= cached_max_) max_valid_ = false;
    priorities_[slot] = static_cast<float>(p);
    pow_alpha_[slot] = std::pow(p, cfg_.alpha);
    if (max_valid_) cached_max_ = std::max(cached_max_, p);
  }
}

double PerBuffer::beta_at(std::uint64_t global_step) const {
  if (global_step >= cfg_.beta_end_step) return 1.0;
  const double frac = static_cast<double>(global_step) / static_cast<double>(cfg_.beta_end_step);
  return cfg_.beta0 + (1.0 - cfg_.beta0) * frac;
}

bool PerBuffer::live(std::uint64_t id) const {
  const std::size_t slot = static_cast<std::size_t>(id % cfg_.capacity);
  return slot < size_ && ids_[slot] == id;
}

float PerBuffer::priority_of(std::uint64_t id) const {
  if (!live(id)) throw std::invalid_argument("PerBuffer: id not live");
  return priorities_[static_cast<std::size_t>(id % cfg_.capacity)];
}

const Transition& PerBuffer::get(std::uint64_t id) const {
  if (!live(id)) throw std::invalid_argument("PerBuffer: id not live");
  return entries_[static_cast<std::size_t>(id % cfg_.capacity)];
}

void PerBuffer::dump(const std::string& path) const {
  CheckpointWriter w;
  w.meta("table transitions " + std::to_string(size_));
  if (size_ == 0) {
    w.write_file(path);
    return;
  }
  const int n = static_cast<int>(size_);
  const int adim = static_cast<int>(entries_[0].a.size());
  std::vector<int> os = entries_[0].s.shape;
  std::vector<int> sshape = {n};
  sshape.insert(sshape.end(), os.begin(), os.end());
  Tensor s = Tensor::zeros(sshape), sn = Tensor::zeros(sshape);
  Tensor a = Tensor::zeros({n, adim});
  Tensor r = Tensor::zeros({n}), term = Tensor::zeros({n}), prio = Tensor::zeros({n});
  const std::size_t obs_n = entries_[0].s.numel();
  for (int i = 0; i < n; ++i) {
    const Transition& t = entries_[i];
    std::copy(t.s.data.begin(), t.s.data.end(), s.data.begin() + i * obs_n);
    std::copy(t.s_next.data.begin(), t.s_next.data.end(), sn.data.begin() + i * obs_n);
    std::copy(t.a.begin(), t.a.end(), a.data.begin() + static_cast<std::size_t>(i) * adim);
    r.data[i] = t.r;
    term.data[i] = t.terminal ? 1.0f : 0.0f;
    prio.data[i] = priorities_[i];
  }
  w.add("replay/s", s);
  w.add("replay/a", a);
  w.add("replay/r", r);
  w.add("replay/s_next", sn);
  w.add("replay/terminal", term);
  w.add("replay/priority", prio);
  w.write_file(path);
}

}  // namespace icac
