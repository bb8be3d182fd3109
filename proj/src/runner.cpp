#include "icac/harness/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "icac/curiosity.hpp"

namespace icac {

namespace {

std::string fmt_g(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

// 1.5 x median pairwise distance, the desk-scale e_max calibration
double calibrated_e_max(const std::vector<Eigen::VectorXf>& phis) {
  std::vector<double> d;
  d.reserve(phis.size() * (phis.size() - 1) / 2);
  for (std::size_t i = 0; i < phis.size(); ++i)
    for (std::size_t j = i + 1; j < phis.size(); ++j)
      d.push_back((phis[i] - phis[j]).cast<double>().norm());
  if (d.empty()) return 6.0;
  std::nth_element(d.begin(), d.begin() + d.size() / 2, d.end());
  return 1.5 * d[d.size() / 2];
}

}  // namespace

std::unique_ptr<Env> make_env(const ExperimentConfig& cfg) {
  if (cfg.env == "reach") {
    ReachConfig rc = cfg.reach;
    if (cfg.steps_per_episode > 0) rc.max_steps = cfg.steps_per_episode;
    return std::make_unique<ReachEnv>(rc);
  }
  if (cfg.env == "grasp_toy") {
    GraspConfig gc = cfg.grasp;
    if (cfg.steps_per_episode > 0) gc.max_steps = cfg.steps_per_episode;
    return std::make_unique<GraspEnv>(gc);
  }
  throw std::runtime_error("make_env: unknown env '" + cfg.env + "'");
}

EvalResult run_eval(Policy& policy, Env& env, int k, bool dense_reward) {
  if (k < 1) throw std::invalid_argument("run_eval: k must be >= 1 (empty evaluation forbidden)");
  double total = 0.0;
  int successes = 0;
  for (int ep = 0; ep < k; ++ep) {
    Tensor obs = env.reset_eval(ep);
    double ret = 0.0;
    while (true) {
      const std::vector<float> a = policy.act_greedy(obs);
      const StepResult sr = env.step(a);
      ret += dense_reward ? sr.r_dense : sr.r_sparse;
      if (sr.success) ++successes;
      if (sr.terminal) break;
      obs = sr.obs;
    }
    total += ret;
  }
  return {total / k, static_cast<double>(successes) / k};
}

RunLog run_training(const ExperimentConfig& cfg, const std::string& out_dir, const RunHooks* hooks) {
  cfg.validate();
  auto env = make_env(cfg);
  const int steps_cap = env->max_steps();
  const bool dense = cfg.reward_mode == "dense";
  const bool is_ddpg = cfg.algorithm == "ddpg";
  const bool is_icac = cfg.algorithm == "deep_icac";
  const int minibatch = is_ddpg ? cfg.ddpg.minibatch : cfg.cacla.minibatch;
  const double tau = is_ddpg ? cfg.ddpg.tau : cfg.cacla.tau;

  Rng env_rng = Rng::stream(cfg.master_seed, "env");
  Rng explore_rng = Rng::stream(cfg.master_seed, "explore");
  Rng sample_rng = Rng::stream(cfg.master_seed, "per-sample");

  PerConfig pc = cfg.replay;
  if (pc.beta_end_step == 0)
    pc.beta_end_step = static_cast<std::uint64_t>(cfg.episodes) * steps_cap;
  PerBuffer buffer(pc);

  std::unique_ptr<CaclaAgent> cacla;
  std::unique_ptr<DdpgAgent> ddpg;
  if (is_ddpg)
    ddpg = std::make_unique<DdpgAgent>(env->observation_shape(), env->action_dim(), cfg.ddpg_arch,
                                       cfg.ddpg, cfg.master_seed);
  else
    cacla = std::make_unique<CaclaAgent>(env->observation_shape(), env->action_dim(), cfg.cacla_arch,
                                         cfg.cacla, cfg.master_seed);

  std::unique_ptr<Curiosity> curiosity;
  std::vector<Eigen::VectorXf> calib;
  bool calibrating = false;
  if (is_icac) {
    CuriosityConfig cc = cfg.curiosity;
    cc.feature_dim = cfg.cacla_arch.feature_dim;
    cc.action_dim = env->action_dim();
    if (cfg.e_max_auto) {
      cc.e_max = std::numeric_limits<double>::infinity();  // no growth until calibrated
      calibrating = true;
      calib.reserve(cfg.calibration_steps);
    }
    curiosity = std::make_unique<Curiosity>(cc, Rng::stream(cfg.master_seed, "curiosity").next_u64());
  }

  std::uint64_t t_global = 0;
  RunLog log;

  auto do_update = [&]() -> std::optional<double> {
    if (buffer.size() < static_cast<std::size_t>(cfg.warmup_factor) * minibatch)
      return std::nullopt;  // replay warm-up
    const PerBuffer::Batch batch = buffer.sample(minibatch, t_global, sample_rng);
    double mean_abs_delta = 0.0;
    if (is_ddpg) {
      const std::vector<float> deltas = ddpg->critic_update(batch.items, batch.weights);
      ddpg->actor_update(batch.items);
      buffer.update_priorities(batch.ids, deltas);
      ddpg->soft_update(tau);
      for (float d : deltas) mean_abs_delta += std::abs(d);
      mean_abs_delta /= deltas.size();
    } else {
      const CaclaDiag diag = cacla->train_step(batch.items, batch.weights);
      if (diag.aborted) throw std::runtime_error("train_step aborted: " + diag.abort_reason);
      buffer.update_priorities(batch.ids, diag.deltas);
      cacla->soft_update(tau);
      for (float d : diag.deltas) mean_abs_delta += std::abs(d);
      mean_abs_delta /= diag.deltas.size();
    }
    return mean_abs_delta;
  };

  for (int ep = 1; ep <= cfg.episodes; ++ep) {
    const double sigma =
        std::max(cfg.cacla.sigma_floor, cfg.cacla.sigma0 * std::pow(cfg.cacla.sigma_decay, ep - 1));
    int ep_step = 0;
    try {
      Tensor obs = env->reset(env_rng);
      EpisodeRecord rec;
      rec.episode = ep;
      int collected = 0;
      double delta_acc = 0.0;
      int delta_n = 0;

      for (int t = 0; t < steps_cap; ++t) {
        ep_step = t + 1;
        std::vector<float> a;
        Eigen::VectorXf phi;
        if (is_ddpg) {
          a = ddpg->act(obs, true, sigma, explore_rng);
        } else {
          phi = cacla->encode(obs);
          a = cacla->act(phi, true, sigma, explore_rng);
        }
        const StepResult sr = env->step(a);
        const double r_ext = dense ? sr.r_dense : sr.r_sparse;

        double r_int = 0.0;
        if (is_icac) {
          const Eigen::VectorXf phi_next = cacla->encode(sr.obs);
          if (hooks && hooks->intrinsic_override)
            r_int = hooks->intrinsic_override();
          else
            r_int = curiosity->step(phi, a, phi_next);
          if (calibrating) {
            calib.push_back(phi);
            if (static_cast<int>(calib.size()) >= cfg.calibration_steps) {
              curiosity->set_e_max(calibrated_e_max(calib));
              calib.clear();
              calibrating = false;
            }
          }
        }

        const double r = mix_rewards(r_ext, r_int, t_global, cfg.curiosity);
        buffer.push({obs, a, static_cast<float>(r), sr.obs, sr.terminal});
        rec.ext_return += r_ext;
        rec.int_return += r - r_ext;
        obs = sr.obs;
        ++t_global;
        ++collected;
        ++rec.steps;

        if (cfg.update_mode == "per_step") {
          if (const auto d = do_update()) {
            delta_acc += *d;
            ++delta_n;
          }
        }
        if (sr.terminal) break;
      }

      if (cfg.update_mode == "end_of_episode") {
        // one update per collected step, run at episode end
        for (int u = 0; u < collected; ++u) {
          const auto d = do_update();
          if (!d) break;
          delta_acc += *d;
          ++delta_n;
        }
      }

      rec.mean_abs_delta = delta_n > 0 ? delta_acc / delta_n : 0.0;
      rec.itm_nodes = is_icac ? static_cast<int>(curiosity->map().node_count()) : 0;
      log.episodes.push_back(rec);
    } catch (const std::exception& e) {
      throw std::runtime_error("run_training: episode " + std::to_string(ep) + " step " +
                               std::to_string(ep_step) + ": " + e.what());
    }

    if (ep % cfg.eval_every == 0) {
      Policy& pol = is_ddpg ? static_cast<Policy&>(*ddpg) : static_cast<Policy&>(*cacla);
      const EvalResult er = run_eval(pol, *env, cfg.eval_episodes, dense);
      log.evals.push_back({static_cast<int>(log.evals.size()) + 1, er.mean_return, er.success_rate});
    }
  }

  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    {
      std::ofstream f(out_dir + "/episodes.csv");
      write_episodes_csv(log, f);
    }
    {
      std::ofstream f(out_dir + "/evals.csv");
      write_evals_csv(log, f);
    }
    {
      std::ofstream f(out_dir + "/summary.json");
      f << summary_json(cfg, log);
    }
    {
      std::ofstream f(out_dir + "/run.cfg");
      f << cfg.resolved_text();
    }
    if (is_ddpg)
      ddpg->save(out_dir + "/final.ckpt");
    else
      cacla->save(out_dir + "/final.ckpt");
    if (is_icac) {
      std::ofstream f(out_dir + "/itm_map.txt");
      curiosity->dump(f);
    }
  }
  return log;
}

Summary summarize(const RunLog& log) {
  if (log.episodes.empty()) throw std::invalid_argument("summarize: empty log");
  Summary s;
  double acc = 0.0;
  for (const auto& e : log.episodes) acc += e.ext_return;
  s.learning_speed = acc / log.episodes.size();

  const std::size_t tail = std::min<std::size_t>(100, log.episodes.size());
  acc = 0.0;
  for (std::size_t i = log.episodes.size() - tail; i < log.episodes.size(); ++i)
    acc += log.episodes[i].ext_return;
  s.final_performance = acc / tail;

  if (!log.evals.empty()) {
    s.final_eval_mean_return = log.evals.back().mean_return;
    s.final_eval_success_rate = log.evals.back().success_rate;
  }
  return s;
}

void write_episodes_csv(const RunLog& log, std::ostream& os) {
  os << "episode,steps,ext_return,int_return,itm_nodes\n";
  for (const auto& e : log.episodes)
    os << e.episode << "," << e.steps << "," << fmt_g(e.ext_return) << "," << fmt_g(e.int_return)
       << "," << e.itm_nodes << "\n";
}

void write_evals_csv(const RunLog& log, std::ostream& os) {
  os << "trial,mean_return\n";
  for (const auto& e : log.evals) os << e.trial << "," << fmt_g(e.mean_return) << "\n";
}

std::string summary_json(const ExperimentConfig& cfg, const RunLog& log) {
  const Summary s = summarize(log);
  std::ostringstream o;
  o << "{\n";
  o << "  \"algorithm\": \"" << cfg.algorithm << "\",\n";
  o << "  \"env\": \"" << cfg.env << "\",\n";
  o << "  \"reward_mode\": \"" << cfg.reward_mode << "\",\n";
  o << "  \"master_seed\": " << cfg.master_seed << ",\n";
  o << "  \"episodes\": " << log.episodes.size() << ",\n";
  o << "  \"learning_speed\": " << fmt_g(s.learning_speed) << ",\n";
  o << "  \"final_performance\": " << fmt_g(s.final_performance) << ",\n";
  o << "  \"final_eval_mean_return\": " << fmt_g(s.final_eval_mean_return) << ",\n";
  o << "  \"final_eval_success_rate\": " << fmt_g(s.final_eval_success_rate) << "\n";
  o << "}\n";
  return o.str();
}

}  // namespace icac
