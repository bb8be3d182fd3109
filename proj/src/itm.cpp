#include "icac/curiosity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace icac {

int Itm::add_node(const Eigen::VectorXf& w, Network predictor, double predictor_lr) {
  const int id = next_id_++;
  ItmNode n;
  n.id = id;
  n.w = w;
  n.opt = AdamOpt(predictor, predictor_lr);
  n.predictor = std::move(predictor);
  nodes_.emplace(id, std::move(n));
  return id;
}

void Itm::connect(int a, int b) {
  if (a == b) return;  // no self-edges
  nodes_.at(a).neighbors.insert(b);
  nodes_.at(b).neighbors.insert(a);
}

std::pair<int, int> Itm::match(const Eigen::VectorXf& phi) const {
  if (nodes_.size() < 2) throw std::runtime_error("Itm::match: needs at least 2 nodes");
  int best = -1, second = -1;
  double dbest = std::numeric_limits<double>::infinity();
  double dsecond = dbest;
  for (const auto& [id, n] : nodes_) {  // ascending id, so ties keep the lower id
    const double d = (phi - n.w).cast<double>().norm();
    if (d < dbest) {
      second = best;
      dsecond = dbest;
      best = id;
      dbest = d;
    } else if (d < dsecond) {
      second = id;
      dsecond = d;
    }
  }
  return {best, second};
}

std::size_t Itm::edge_count() const {
  std::size_t twice = 0;
  for (const auto& [id, n] : nodes_) twice += n.neighbors.size();
  return twice / 2;
}

AdaptReport Itm::adapt(const Eigen::VectorXf& phi, int n, int n2,
                       const std::function<Network()>& make_predictor, double predictor_lr) {
  AdaptReport rep;
  ItmNode& nn = nodes_.at(n);
  const Eigen::VectorXf wn = nn.w;
  const Eigen::VectorXf wn2 = nodes_.at(n2).w;

  if (!nn.neighbors.contains(n2)) {
    connect(n, n2);
    rep.edge_added = true;
  }

  // drop the edge n-m when n' falls inside the Thales sphere through m and n;
  // m is removed outright if that leaves it edgeless
  const std::vector<int> neigh(nn.neighbors.begin(), nn.neighbors.end());
  for (int m : neigh) {
    if (m == n2) continue;
    const Eigen::VectorXf& wm = nodes_.at(m).w;
    const double dot = (wn - wn2).cast<double>().dot((wm - wn2).cast<double>());
    if (dot < 0.0) {
      nn.neighbors.erase(m);
      nodes_.at(m).neighbors.erase(n);
      rep.removed.emplace_back(std::min(n, m), std::max(n, m));
      if (nodes_.at(m).neighbors.empty()) {
        nodes_.erase(m);
        rep.nodes_removed.push_back(m);
      }
    }
  }

  // create a node when the stimulus is outside the Thales sphere through
  // n and n' and further than e_max from n
  const double outside = (wn - phi).cast<double>().dot((wn2 - phi).cast<double>());
  const double dist = (wn - phi).cast<double>().norm();
  if (outside > 0.0 && dist > e_max_) {
    const int v = add_node(phi, make_predictor(), predictor_lr);
    connect(v, n);
    rep.node_added = v;
  }
  return rep;
}

double predictor_update(ItmNode& node, const Eigen::VectorXf& phi, std::span<const float> action,
                        const Eigen::VectorXf& phi_next, const CuriosityConfig& cfg) {
  const int fd = static_cast<int>(phi.size());
  Tensor in = Tensor::zeros({fd + static_cast<int>(action.size())});
  for (int i = 0; i < fd; ++i) in.data[i] = phi[i];
  for (std::size_t i = 0; i < action.size(); ++i) in.data[fd + i] = action[i];

  auto [pred, cache] = forward(node.predictor, in);
  double sq = 0.0;
  Tensor dout = Tensor::zeros(pred.shape);
  for (int i = 0; i < fd; ++i) {
    const double diff = static_cast<double>(pred.data[i]) - static_cast<double>(phi_next[i]);
    sq += diff * diff;
    dout.data[i] = static_cast<float>(2.0 * diff);
  }
  const double e_prd = std::sqrt(sq);

  Grads g = backprop(node.predictor, cache, dout);
  GradAccum acc(node.predictor);
  acc.add(g, 1.0);
  node.opt.step(node.predictor, acc);

  node.errors.push_back(static_cast<float>(e_prd));
  const std::size_t cap = static_cast<std::size_t>(cfg.mu + cfg.lag);
  while (node.errors.size() > cap) node.errors.pop_front();
  return e_prd;
}

double learning_progress(const ItmNode& node, const CuriosityConfig& cfg) {
  const std::size_t mu = static_cast<std::size_t>(cfg.mu);
  const std::size_t lag = static_cast<std::size_t>(cfg.lag);
  if (node.errors.size() < mu + lag) return 0.0;
  const std::size_t sz = node.errors.size();
  double recent = 0.0, lagged = 0.0;
  for (std::size_t i = 0; i < mu; ++i) {
    recent += node.errors[sz - mu + i];
    lagged += node.errors[sz - lag - mu + i];
  }
  return std::abs(recent / static_cast<double>(mu) - lagged / static_cast<double>(mu));
}

double intrinsic_reward(const Itm& map, int n, const Eigen::VectorXf& phi,
                        const CuriosityConfig& cfg) {
  const ItmNode& node = map.node(n);
  const double e_per = (phi - node.w).cast<double>().norm();
  return learning_progress(node, cfg) + e_per;
}

double mix_rewards(double r_ext, double r_int, std::uint64_t t_global, const CuriosityConfig& cfg) {
  return r_ext + r_int / (1.0 + cfg.decay * static_cast<double>(t_global));
}

Curiosity::Curiosity(CuriosityConfig cfg, std::uint64_t seed)
    : cfg_(cfg), map_(cfg.e_max), rng_(seed) {
  if (cfg_.mu < 1 || cfg_.lag < 1) throw std::invalid_argument("Curiosity: mu and lag must be >= 1");
  if (cfg_.decay <= 0.0) throw std::invalid_argument("Curiosity: decay must be positive");
  if (cfg_.feature_dim < 1 || cfg_.action_dim < 1)
    throw std::invalid_argument("Curiosity: feature/action dims must be positive");
}

Network Curiosity::make_predictor() {
  return NetBuilder("predictor", {cfg_.feature_dim + cfg_.action_dim})
      .dense(cfg_.predictor_hidden)
      .act(Act::tanh)
      .dense(cfg_.feature_dim)
      .build(rng_);
}

double Curiosity::step(const Eigen::VectorXf& phi, std::span<const float> action,
                       const Eigen::VectorXf& phi_next) {
  if (map_.node_count() < 2) {
    const int id = map_.add_node(phi, make_predictor(), cfg_.predictor_lr);
    if (map_.node_count() == 2) map_.connect(map_.nodes().begin()->first, id);
    return 0.0;
  }
  const auto [n, n2] = map_.match(phi);
  predictor_update(map_.node(n), phi, action, phi_next, cfg_);
  map_.adapt(phi, n, n2, [this] { return make_predictor(); }, cfg_.predictor_lr);
  return intrinsic_reward(map_, n, phi, cfg_);
}

void Curiosity::dump(std::ostream& os) const {
  os << "itm-map nodes=" << map_.node_count() << " edges=" << map_.edge_count()
     << " e_max=" << map_.e_max() << " feature_dim=" << cfg_.feature_dim << "\n";
  for (const auto& [id, n] : map_.nodes()) {
    double mean_err = 0.0;
    for (float e : n.errors) mean_err += e;
    if (!n.errors.empty()) mean_err /= static_cast<double>(n.errors.size());
    os << "node " << id << " errors=" << n.errors.size() << " mean_err=" << mean_err
       << " lp=" << learning_progress(n, cfg_) << " w=";
    for (int i = 0; i < n.w.size(); ++i) os << (i ? "," : "") << n.w[i];
    os << "\n";
  }
  for (const auto& [id, n] : map_.nodes())
    for (int m : n.neighbors)
      if (id < m) os << "edge " << id << " " << m << "\n";
}

}  // namespace icac
