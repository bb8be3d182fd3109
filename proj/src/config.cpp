#include "icac/harness/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace icac {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Setter {
  const std::string& section;
  const std::string& key;
  const std::string& value;
  bool handled = false;

  bool is(const char* sec, const char* k) { return section == sec && key == k; }

  void to(int& out, const char* sec, const char* k) {
    if (is(sec, k)) { out = std::stoi(value); handled = true; }
  }
  void to(double& out, const char* sec, const char* k) {
    if (is(sec, k)) { out = std::stod(value); handled = true; }
  }
  void to(std::uint64_t& out, const char* sec, const char* k) {
    if (is(sec, k)) { out = std::stoull(value); handled = true; }
  }
  void to(std::string& out, const char* sec, const char* k) {
    if (is(sec, k)) { out = value; handled = true; }
  }
};

}  // namespace

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
  ExperimentConfig cfg;
  std::istringstream in(text);
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw std::runtime_error("config line " + std::to_string(line_no) + ": malformed section");
      section = trim(line.substr(1, line.size() - 2));
      if (section != "harness" && section != "replay" && section != "cacla" &&
          section != "ddpg" && section != "curiosity" && section != "env")
        throw std::runtime_error("config: unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw std::runtime_error("config: key '" + key + "' before any section");

    Setter s{section, key, value};
    s.to(cfg.algorithm, "harness", "algorithm");
    s.to(cfg.env, "harness", "env");
    s.to(cfg.reward_mode, "harness", "reward_mode");
    s.to(cfg.episodes, "harness", "episodes");
    s.to(cfg.steps_per_episode, "harness", "steps_per_episode");
    s.to(cfg.eval_every, "harness", "eval_every");
    s.to(cfg.eval_episodes, "harness", "eval_episodes");
    s.to(cfg.master_seed, "harness", "master_seed");
    s.to(cfg.update_mode, "harness", "update_mode");
    s.to(cfg.warmup_factor, "harness", "warmup_factor");

    s.to(cfg.replay.capacity, "replay", "capacity");
    s.to(cfg.replay.alpha, "replay", "alpha");
    s.to(cfg.replay.beta0, "replay", "beta0");
    s.to(cfg.replay.beta_end_step, "replay", "beta_end_step");
    s.to(cfg.replay.epsilon_p, "replay", "epsilon_p");

    s.to(cfg.cacla.gamma, "cacla", "gamma");
    s.to(cfg.cacla.tau, "cacla", "tau");
    s.to(cfg.cacla.sigma0, "cacla", "sigma0");
    s.to(cfg.cacla.sigma_decay, "cacla", "sigma_decay");
    s.to(cfg.cacla.sigma_floor, "cacla", "sigma_floor");
    s.to(cfg.cacla.minibatch, "cacla", "minibatch");
    s.to(cfg.cacla.lr_encoder, "cacla", "lr_encoder");
    s.to(cfg.cacla.lr_decoder, "cacla", "lr_decoder");
    s.to(cfg.cacla.lr_critic, "cacla", "lr_critic");
    s.to(cfg.cacla.lr_actor, "cacla", "lr_actor");
    s.to(cfg.cacla_arch.feature_dim, "cacla", "feature_dim");
    s.to(cfg.cacla_arch.conv1_ch, "cacla", "conv1_ch");
    s.to(cfg.cacla_arch.conv2_ch, "cacla", "conv2_ch");
    s.to(cfg.cacla_arch.critic_hidden, "cacla", "critic_hidden");
    s.to(cfg.cacla_arch.actor_hidden, "cacla", "actor_hidden");

    s.to(cfg.ddpg.gamma, "ddpg", "gamma");
    s.to(cfg.ddpg.tau, "ddpg", "tau");
    s.to(cfg.ddpg.minibatch, "ddpg", "minibatch");
    s.to(cfg.ddpg.lr_actor, "ddpg", "lr_actor");
    s.to(cfg.ddpg.lr_critic, "ddpg", "lr_critic");
    s.to(cfg.ddpg_arch.conv1_ch, "ddpg", "conv1_ch");
    s.to(cfg.ddpg_arch.conv2_ch, "ddpg", "conv2_ch");
    s.to(cfg.ddpg_arch.actor_feat, "ddpg", "actor_feat");
    s.to(cfg.ddpg_arch.critic_hidden, "ddpg", "critic_hidden");

    s.to(cfg.curiosity.mu, "curiosity", "mu");
    s.to(cfg.curiosity.lag, "curiosity", "lag");
    s.to(cfg.curiosity.decay, "curiosity", "decay");
    s.to(cfg.curiosity.predictor_hidden, "curiosity", "predictor_hidden");
    s.to(cfg.curiosity.predictor_lr, "curiosity", "predictor_lr");
    s.to(cfg.calibration_steps, "curiosity", "calibration_steps");
    if (section == "curiosity" && key == "e_max") {
      if (value == "auto") {
        cfg.e_max_auto = true;
      } else {
        cfg.e_max_auto = false;
        cfg.curiosity.e_max = std::stod(value);
      }
      s.handled = true;
    }

    s.to(cfg.reach.image_size, "env", "image_size");
    s.to(cfg.reach.max_joint_delta, "env", "max_joint_delta");
    s.to(cfg.reach.success_area_fraction, "env", "success_area_fraction");
    s.to(cfg.grasp.image_h, "env", "grasp_image_h");
    s.to(cfg.grasp.image_w, "env", "grasp_image_w");
    s.to(cfg.grasp.max_shoulder_delta, "env", "grasp_max_shoulder_delta");
    s.to(cfg.grasp.grasp_tol, "env", "grasp_tol");

    if (!s.handled)
      throw std::runtime_error("config: unknown key '" + key + "' in section [" + section + "]");
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig ExperimentConfig::parse_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

void ExperimentConfig::validate() const {
  if (algorithm != "deep_cacla" && algorithm != "deep_icac" && algorithm != "ddpg")
    throw std::runtime_error("config: algorithm must be deep_cacla, deep_icac or ddpg");
  if (env != "reach" && env != "grasp_toy")
    throw std::runtime_error("config: env must be reach or grasp_toy");
  if (reward_mode != "dense" && reward_mode != "sparse")
    throw std::runtime_error("config: reward_mode must be dense or sparse");
  if (update_mode != "end_of_episode" && update_mode != "per_step")
    throw std::runtime_error("config: update_mode must be end_of_episode or per_step");
  if (episodes < 1) throw std::runtime_error("config: episodes must be >= 1");
  if (eval_every < 1 || eval_episodes < 1)
    throw std::runtime_error("config: eval_every and eval_episodes must be >= 1");
  if (cacla.minibatch < 1 || ddpg.minibatch < 1)
    throw std::runtime_error("config: minibatch must be >= 1");
}

std::string ExperimentConfig::resolved_text() const {
  std::ostringstream o;
  o << "[harness]\n";
  o << "algorithm = " << algorithm << "\n";
  o << "env = " << env << "\n";
  o << "reward_mode = " << reward_mode << "\n";
  o << "episodes = " << episodes << "\n";
  o << "steps_per_episode = " << steps_per_episode << "\n";
  o << "eval_every = " << eval_every << "\n";
  o << "eval_episodes = " << eval_episodes << "\n";
  o << "master_seed = " << master_seed << "\n";
  o << "update_mode = " << update_mode << "\n";
  o << "warmup_factor = " << warmup_factor << "\n";
  o << "\n[replay]\n";
  o << "capacity = " << replay.capacity << "\n";
  o << "alpha = " << replay.alpha << "\n";
  o << "beta0 = " << replay.beta0 << "\n";
  o << "beta_end_step = " << replay.beta_end_step << "\n";
  o << "epsilon_p = " << replay.epsilon_p << "\n";
  o << "\n[cacla]\n";
  o << "gamma = " << cacla.gamma << "\n";
  o << "tau = " << cacla.tau << "\n";
  o << "sigma0 = " << cacla.sigma0 << "\n";
  o << "sigma_decay = " << cacla.sigma_decay << "\n";
  o << "sigma_floor = " << cacla.sigma_floor << "\n";
  o << "minibatch = " << cacla.minibatch << "\n";
  o << "lr_encoder = " << cacla.lr_encoder << "\n";
  o << "lr_decoder = " << cacla.lr_decoder << "\n";
  o << "lr_critic = " << cacla.lr_critic << "\n";
  o << "lr_actor = " << cacla.lr_actor << "\n";
  o << "feature_dim = " << cacla_arch.feature_dim << "\n";
  o << "conv1_ch = " << cacla_arch.conv1_ch << "\n";
  o << "conv2_ch = " << cacla_arch.conv2_ch << "\n";
  o << "critic_hidden = " << cacla_arch.critic_hidden << "\n";
  o << "actor_hidden = " << cacla_arch.actor_hidden << "\n";
  o << "\n[ddpg]\n";
  o << "gamma = " << ddpg.gamma << "\n";
  o << "tau = " << ddpg.tau << "\n";
  o << "minibatch = " << ddpg.minibatch << "\n";
  o << "lr_actor = " << ddpg.lr_actor << "\n";
  o << "lr_critic = " << ddpg.lr_critic << "\n";
  o << "conv1_ch = " << ddpg_arch.conv1_ch << "\n";
  o << "conv2_ch = " << ddpg_arch.conv2_ch << "\n";
  o << "actor_feat = " << ddpg_arch.actor_feat << "\n";
  o << "critic_hidden = " << ddpg_arch.critic_hidden << "\n";
  o << "\n[curiosity]\n";
  o << "mu = " << curiosity.mu << "\n";
  o << "lag = " << curiosity.lag << "\n";
  o << "decay = " << curiosity.decay << "\n";
  if (e_max_auto)
    o << "e_max = auto\n";
  else
    o << "e_max = " << curiosity.e_max << "\n";
  o << "calibration_steps = " << calibration_steps << "\n";
  o << "predictor_hidden = " << curiosity.predictor_hidden << "\n";
  o << "predictor_lr = " << curiosity.predictor_lr << "\n";
  o << "\n[env]\n";
  o << "image_size = " << reach.image_size << "\n";
  o << "max_joint_delta = " << reach.max_joint_delta << "\n";
  o << "success_area_fraction = " << reach.success_area_fraction << "\n";
  o << "grasp_image_h = " << grasp.image_h << "\n";
  o << "grasp_image_w = " << grasp.image_w << "\n";
  o << "grasp_max_shoulder_delta = " << grasp.max_shoulder_delta << "\n";
  o << "grasp_tol = " << grasp.grasp_tol << "\n";
  return o.str();
}

}  // namespace icac
