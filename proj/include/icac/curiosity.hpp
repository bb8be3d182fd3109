#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <deque>
#include <functional>
#include <iosfwd>
#include <map>
#include <set>
#include <span>
#include <vector>

#include "icac/nn/layers.hpp"
#include "icac/nn/optim.hpp"
#include "icac/rng.hpp"

namespace icac {

struct CuriosityConfig {
  int mu = 10;          // window length for the averaged prediction error
  int lag = 20;         // offset between the two averaged windows
  double decay = 0.1;   // D in the reward mixing
  double e_max = 6.0;   // node creation threshold in feature space
  int feature_dim = 16;
  int action_dim = 0;
  int predictor_hidden = 16;
  double predictor_lr = 1e-3;
};

struct ItmNode {
  int id = -1;
  Eigen::VectorXf w;
  std::set<int> neighbors;
  Network predictor;  // (phi ++ a) -> predicted next phi
  AdamOpt opt;
  std::deque<float> errors;  // most recent last, capped at mu + lag
};

struct AdaptReport {
  bool edge_added = false;                   // the n-n' edge
  std::vector<std::pair<int, int>> removed;  // edges dropped by the Thales test
  std::vector<int> nodes_removed;
  int node_added = -1;
};

// Growing self-organizing map over feature space: matching, Thales-sphere
// edge pruning, threshold-gated node creation. Node weights are frozen at
// creation.
class Itm {
 public:
  explicit Itm(double e_max) : e_max_(e_max) {}

  int add_node(const Eigen::VectorXf& w, Network predictor, double predictor_lr);
  void connect(int a, int b);

  // nearest and second-nearest node; ties break toward the lower id
  std::pair<int, int> match(const Eigen::VectorXf& phi) const;

  // edge/node adaptation for a stimulus matched to (n, n2)
  AdaptReport adapt(const Eigen::VectorXf& phi, int n, int n2,
                    const std::function<Network()>& make_predictor, double predictor_lr);

  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const;
  const ItmNode& node(int id) const { return nodes_.at(id); }
  ItmNode& node(int id) { return nodes_.at(id); }
  const std::map<int, ItmNode>& nodes() const { return nodes_; }
  double e_max() const { return e_max_; }
  void set_e_max(double v) { e_max_ = v; }

 private:
  std::map<int, ItmNode> nodes_;
  int next_id_ = 0;
  double e_max_;
};

// prediction error before the update; one Adam step on the squared error;
// error appended to the node's history
double predictor_update(ItmNode& node, const Eigen::VectorXf& phi, std::span<const float> action,
                        const Eigen::VectorXf& phi_next, const CuriosityConfig& cfg);

// |<e_t> - <e_{t-lag}>|, each window averaging mu errors; 0 while the
// history is shorter than mu + lag
double learning_progress(const ItmNode& node, const CuriosityConfig& cfg);

// LP(n) + ||phi - w_n||, n being the best-matching node for phi
double intrinsic_reward(const Itm& map, int n, const Eigen::VectorXf& phi,
                        const CuriosityConfig& cfg);

// r_ext + r_int / (1 + D * t)
double mix_rewards(double r_ext, double r_int, std::uint64_t t_global, const CuriosityConfig& cfg);

// Per-step orchestration in the fixed order: match, predictor update,
// map adaptation, reward. The first two observed feature vectors become the
// two connected initial nodes.
class Curiosity {
 public:
  Curiosity(CuriosityConfig cfg, std::uint64_t seed);

  double step(const Eigen::VectorXf& phi, std::span<const float> action,
              const Eigen::VectorXf& phi_next);

  const Itm& map() const { return map_; }
  Itm& map() { return map_; }
  const CuriosityConfig& config() const { return cfg_; }
  void set_e_max(double v) { map_.set_e_max(v); cfg_.e_max = v; }

  void dump(std::ostream& os) const;

 private:
  Network make_predictor();

  CuriosityConfig cfg_;
  Itm map_;
  Rng rng_;
};

}  // namespace icac
