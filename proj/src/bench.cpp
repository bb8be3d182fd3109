#include "icac/harness/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "icac/agents/cacla.hpp"
#include "icac/agents/ddpg.hpp"

namespace icac {

namespace {

using Clock = std::chrono::steady_clock;

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Tensor random_image(std::vector<int> shape, Rng& rng) {
  Tensor t = Tensor::zeros(std::move(shape));
  for (auto& v : t.data) v = static_cast<float>(rng.uniform());
  return t;
}

}  // namespace

BenchTable bench_update_costs(const std::vector<int>& sizes, std::uint64_t seed) {
  for (int n : sizes)
    if (n < 1) throw std::invalid_argument("bench_update_costs: minibatch sizes must be >= 1");

  const std::vector<int> obs_shape = {32, 32, 3};
  const int action_dim = 3;
  Rng rng(seed);

  // CACLA-style: the phase-2 actor works on precomputed features
  CaclaArch ca;
  CaclaHyper ch;
  CaclaAgent cacla(obs_shape, action_dim, ca, ch, seed);
  Network& actor = cacla.params_mut().actor;
  AdamOpt actor_opt(actor, ch.lr_actor);

  DdpgArch da;
  DdpgHyper dh;
  DdpgAgent ddpg(obs_shape, action_dim, da, dh, seed + 1);

  const int max_n = *std::max_element(sizes.begin(), sizes.end());
  std::vector<Tensor> phis, targets, images;
  std::vector<Transition> transitions;
  for (int i = 0; i < max_n; ++i) {
    Tensor phi = Tensor::zeros({ca.feature_dim});
    for (auto& v : phi.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    phis.push_back(phi);
    Tensor tgt = Tensor::zeros({action_dim});
    for (auto& v : tgt.data) v = static_cast<float>(rng.uniform(-1.0, 1.0));
    targets.push_back(tgt);
    Transition t;
    t.s = random_image(obs_shape, rng);
    t.s_next = t.s;
    t.a = {0.1f, -0.2f, 0.3f};
    t.r = 0.0f;
    transitions.push_back(std::move(t));
  }

  auto cacla_actor_update = [&](int n) {
    GradAccum acc(actor);
    for (int i = 0; i < n; ++i) {
      auto [a_hat, cache] = forward(actor, phis[i]);
      Tensor d = Tensor::zeros(a_hat.shape);
      for (std::size_t k = 0; k < d.numel(); ++k)
        d.data[k] = 2.0f * (a_hat.data[k] - targets[i].data[k]);
      acc.add(backprop(actor, cache, d), 1.0 / n);
    }
    actor_opt.step(actor, acc);
  };

  auto ddpg_actor_update = [&](int n) {
    std::vector<const Transition*> batch;
    for (int i = 0; i < n; ++i) batch.push_back(&transitions[i]);
    ddpg.actor_update(batch);
  };

  auto time_us = [&](auto&& fn, int n, int inner) {
    std::vector<double> reps;
    fn(n);  // warm up
    for (int r = 0; r < 7; ++r) {
      const auto t0 = Clock::now();
      for (int i = 0; i < inner; ++i) fn(n);
      const auto t1 = Clock::now();
      reps.push_back(std::chrono::duration<double, std::micro>(t1 - t0).count() / inner);
    }
    return median(reps);
  };

  BenchTable out;
  for (int n : sizes) {
    BenchRow row;
    row.batch = n;
    row.cacla_us = time_us(cacla_actor_update, n, 64);
    row.ddpg_us = time_us(ddpg_actor_update, n, 2);
    out.rows.push_back(row);
  }

  for (std::size_t i = 1; i < out.rows.size(); ++i) {
    const double factor =
        std::log2(static_cast<double>(out.rows[i].batch) / out.rows[i - 1].batch);
    out.cacla_doubling.push_back(
        std::pow(out.rows[i].cacla_us / out.rows[i - 1].cacla_us, 1.0 / factor));
    out.ddpg_doubling.push_back(
        std::pow(out.rows[i].ddpg_us / out.rows[i - 1].ddpg_us, 1.0 / factor));
  }
  return out;
}

void print_bench(const BenchTable& t, std::ostream& os) {
  os << "batch  cacla_actor_us  ddpg_actor_us\n";
  for (const auto& r : t.rows) {
    os << r.batch << "  " << r.cacla_us << "  " << r.ddpg_us << "\n";
  }
  os << "per-doubling ratios (cacla): ";
  for (double v : t.cacla_doubling) os << v << " ";
  os << "\nper-doubling ratios (ddpg): ";
  for (double v : t.ddpg_doubling) os << v << " ";
  os << "\n";
}

}  // namespace icac
