#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "icac/curiosity.hpp"
#include "icac/rng.hpp"

using namespace icac;

namespace {

Network tiny_predictor(int in_dim, int out_dim, std::uint64_t seed) {
  Rng rng(seed);
  return NetBuilder("predictor", {in_dim}).dense(16).act(Act::tanh).dense(out_dim).build(rng);
}

Eigen::VectorXf vec2(float x, float y) {
  Eigen::VectorXf v(2);
  v << x, y;
  return v;
}

CuriosityConfig cfg2(double e_max = 6.0) {
  CuriosityConfig c;
  c.feature_dim = 2;
  c.action_dim = 1;
  c.e_max = e_max;
  return c;
}

Itm three_nodes_on_a_line(double e_max) {
  Itm map(e_max);
  map.add_node(vec2(0, 0), tiny_predictor(3, 2, 1), 1e-3);  // id 0 = n
  map.add_node(vec2(1, 0), tiny_predictor(3, 2, 2), 1e-3);  // id 1 = n'
  map.add_node(vec2(2, 0), tiny_predictor(3, 2, 3), 1e-3);  // id 2 = m
  map.connect(0, 2);
  return map;
}

}  // namespace

TEST_CASE("itm_match: nearest and second nearest in order") {
  Itm map(6.0);
  map.add_node(vec2(1, 0), tiny_predictor(3, 2, 1), 1e-3);
  map.add_node(vec2(2, 0), tiny_predictor(3, 2, 2), 1e-3);
  map.add_node(vec2(3, 0), tiny_predictor(3, 2, 3), 1e-3);
  const auto [n, n2] = map.match(vec2(0, 0));  // distances {1, 2, 3}
  CHECK(n == 0);
  CHECK(n2 == 1);
}

TEST_CASE("itm_match: exact hit and lowest-id tie break") {
  Itm map(6.0);
  map.add_node(vec2(0, 1), tiny_predictor(3, 2, 1), 1e-3);
  map.add_node(vec2(5, 5), tiny_predictor(3, 2, 2), 1e-3);
  CHECK(map.match(vec2(0, 1)).first == 0);

  Itm tie(6.0);
  tie.add_node(vec2(1, 0), tiny_predictor(3, 2, 1), 1e-3);
  tie.add_node(vec2(-1, 0), tiny_predictor(3, 2, 2), 1e-3);
  const auto [n, n2] = tie.match(vec2(0, 0));  // equidistant
  CHECK(n == 0);
  CHECK(n2 == 1);

  Itm single(6.0);
  single.add_node(vec2(0, 0), tiny_predictor(3, 2, 1), 1e-3);
  CHECK_THROWS(single.match(vec2(0, 0)));
}

TEST_CASE("itm_adapt: collinear neighbor loses its edge and is removed") {
  Itm map = three_nodes_on_a_line(6.0);
  // stimulus near n keeps node creation out of the picture
  const auto rep = map.adapt(vec2(0.1f, 0), 0, 1,
                             [] { return tiny_predictor(3, 2, 9); }, 1e-3);
  CHECK(rep.edge_added);  // n-n' edge was missing
  REQUIRE(rep.removed.size() == 1);
  CHECK(rep.removed[0] == std::pair<int, int>(0, 2));
  REQUIRE(rep.nodes_removed.size() == 1);
  CHECK(rep.nodes_removed[0] == 2);  // m had no other edges
  CHECK(rep.node_added == -1);
  CHECK(map.node_count() == 2);
}

TEST_CASE("itm_adapt: stimulus within e_max never adds a node") {
  Itm map(6.0);
  map.add_node(vec2(0, 0), tiny_predictor(3, 2, 1), 1e-3);
  map.add_node(vec2(1, 0), tiny_predictor(3, 2, 2), 1e-3);
  map.connect(0, 1);
  const auto rep = map.adapt(vec2(-3, 0), 0, 1, [] { return tiny_predictor(3, 2, 9); }, 1e-3);
  // outside the Thales sphere but within e_max of n
  CHECK(rep.node_added == -1);
  CHECK(map.node_count() == 2);
}

TEST_CASE("itm_adapt: far outside stimulus forces a node") {
  Itm map(6.0);
  map.add_node(vec2(0, 0), tiny_predictor(3, 2, 1), 1e-3);
  map.add_node(vec2(1, 0), tiny_predictor(3, 2, 2), 1e-3);
  map.connect(0, 1);
  // (w_n - phi).(w_n' - phi) = (-10)(-9) = 90 > 0 and |w_n - phi| = 10 > 6
  const auto rep = map.adapt(vec2(10, 0), 0, 1, [] { return tiny_predictor(3, 2, 9); }, 1e-3);
  CHECK(rep.node_added >= 0);
  CHECK(map.node_count() == 3);
  const ItmNode& v = map.node(rep.node_added);
  CHECK(v.w == vec2(10, 0));
  CHECK(v.neighbors.contains(0));
  CHECK(map.node(0).neighbors.contains(rep.node_added));
}

TEST_CASE("predictor_update: exact predictor gives zero error and a zero step") {
  CuriosityConfig cfg = cfg2();
  Itm map(cfg.e_max);
  Network pred = tiny_predictor(3, 2, 4);
  for (auto& l : pred.layers)
    for (auto& v : l.weights.data) v = 0.0f;  // predicts exactly zero
  const int id = map.add_node(vec2(0, 0), std::move(pred), cfg.predictor_lr);
  ItmNode& node = map.node(id);
  const Network before = node.predictor;

  const float a[1] = {0.3f};
  const double e = predictor_update(node, vec2(0.5f, -0.5f), a, vec2(0, 0), cfg);
  CHECK(e == 0.0);
  for (std::size_t li = 0; li < before.layers.size(); ++li) {
    CHECK(node.predictor.layers[li].weights.data == before.layers[li].weights.data);
    CHECK(node.predictor.layers[li].bias.data == before.layers[li].bias.data);
  }
  CHECK(node.errors.size() == 1);
}

TEST_CASE("predictor_update: error history ring caps at mu + lag") {
  CuriosityConfig cfg = cfg2();
  cfg.mu = 3;
  cfg.lag = 4;
  Itm map(cfg.e_max);
  const int id = map.add_node(vec2(0, 0), tiny_predictor(3, 2, 5), cfg.predictor_lr);
  ItmNode& node = map.node(id);
  const float a[1] = {0.1f};
  for (int i = 0; i < cfg.mu + cfg.lag + 5; ++i)
    predictor_update(node, vec2(0.1f, 0.2f), a, vec2(0.3f, -0.1f), cfg);
  CHECK(node.errors.size() == static_cast<std::size_t>(cfg.mu + cfg.lag));
}

TEST_CASE("predictor_update: learns fixed linear dynamics phi' = phi + a") {
  CuriosityConfig cfg;
  cfg.feature_dim = 4;
  cfg.action_dim = 4;
  cfg.predictor_lr = 1e-2;
  cfg.mu = 10;
  cfg.lag = 20;
  Itm map(cfg.e_max);
  Rng rng(9);
  Rng init(10);
  const int id = map.add_node(Eigen::VectorXf::Zero(4),
                              NetBuilder("p", {8}).dense(16).act(Act::tanh).dense(4).build(init),
                              cfg.predictor_lr);
  ItmNode& node = map.node(id);

  double initial = 0.0, final_err = 0.0;
  const int updates = 2000;
  for (int i = 0; i < updates; ++i) {
    Eigen::VectorXf phi(4), a(4);
    for (int k = 0; k < 4; ++k) {
      phi[k] = static_cast<float>(rng.uniform(-0.5, 0.5));
      a[k] = static_cast<float>(rng.uniform(-0.3, 0.3));
    }
    const Eigen::VectorXf next = phi + a;
    std::vector<float> av(a.data(), a.data() + 4);
    const double e = predictor_update(node, phi, av, next, cfg);
    if (i < 10) initial += e;  // untrained-predictor error level
    if (i >= updates - 100) final_err += e;
  }
  CHECK(final_err / 100.0 < 0.1 * (initial / 10.0));
}

TEST_CASE("learning_progress: constant history and short history give 0") {
  CuriosityConfig cfg = cfg2();
  cfg.mu = 2;
  cfg.lag = 2;
  ItmNode node;
  node.errors = {1.0f, 1.0f, 1.0f, 1.0f};
  CHECK(learning_progress(node, cfg) == 0.0);
  node.errors = {1.0f, 1.0f, 0.5f};  // length mu + lag - 1
  CHECK(learning_progress(node, cfg) == 0.0);
}

TEST_CASE("learning_progress: worked example mu=2 lag=2") {
  CuriosityConfig cfg = cfg2();
  cfg.mu = 2;
  cfg.lag = 2;
  ItmNode node;
  node.errors = {1.0f, 1.0f, 0.5f, 0.3f};  // oldest first
  CHECK(learning_progress(node, cfg) == doctest::Approx(0.6).epsilon(1e-6));
}

TEST_CASE("intrinsic_reward: both terms and their vanishing") {
  CuriosityConfig cfg = cfg2();
  cfg.mu = 2;
  cfg.lag = 2;
  Itm map(cfg.e_max);
  const int id = map.add_node(vec2(1, 1), tiny_predictor(3, 2, 6), cfg.predictor_lr);
  map.add_node(vec2(4, 4), tiny_predictor(3, 2, 7), cfg.predictor_lr);

  map.node(id).errors = {0.7f, 0.7f, 0.7f, 0.7f};  // LP = 0
  CHECK(intrinsic_reward(map, id, vec2(1, 1), cfg) == 0.0);

  const Eigen::VectorXf phi = vec2(1.5f, 1.0f);  // distance 0.5 from w_n
  CHECK(intrinsic_reward(map, id, phi, cfg) == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("intrinsic_reward: agrees with a straight-line oracle on random inputs") {
  Rng rng(100);
  CuriosityConfig cfg = cfg2();
  for (int trial = 0; trial < 500; ++trial) {
    cfg.mu = 1 + static_cast<int>(rng.uniform_int(8));
    cfg.lag = 1 + static_cast<int>(rng.uniform_int(8));
    ItmNode node;
    node.w = vec2(static_cast<float>(rng.uniform(-2, 2)), static_cast<float>(rng.uniform(-2, 2)));
    const int len = static_cast<int>(rng.uniform_int(cfg.mu + cfg.lag + 4));
    for (int i = 0; i < len; ++i)
      node.errors.push_back(static_cast<float>(rng.uniform(0.0, 3.0)));
    Itm map(cfg.e_max);
    const int id = map.add_node(node.w, tiny_predictor(3, 2, trial), cfg.predictor_lr);
    map.node(id).errors = node.errors;

    const Eigen::VectorXf phi =
        vec2(static_cast<float>(rng.uniform(-2, 2)), static_cast<float>(rng.uniform(-2, 2)));

    // straight-line recomputation of Eqs. LP and r_int
    double oracle_lp = 0.0;
    const int need = cfg.mu + cfg.lag;
    if (len >= need) {
      double recent = 0.0, lagged = 0.0;
      for (int i = 0; i < cfg.mu; ++i) {
        recent += node.errors[len - cfg.mu + i];
        lagged += node.errors[len - cfg.lag - cfg.mu + i];
      }
      oracle_lp = std::abs(recent / cfg.mu - lagged / cfg.mu);
    }
    const double dx = phi[0] - node.w[0], dy = phi[1] - node.w[1];
    const double oracle = oracle_lp + std::sqrt(dx * dx + dy * dy);

    CHECK(intrinsic_reward(map, id, phi, cfg) == doctest::Approx(oracle).epsilon(1e-6));
    CHECK(intrinsic_reward(map, id, phi, cfg) >= 0.0);
  }
}

TEST_CASE("mix_rewards: unit weight at t=0, halves at t=10 with D=0.1") {
  CuriosityConfig cfg = cfg2();
  cfg.decay = 0.1;
  CHECK(mix_rewards(1.5, 2.0, 0, cfg) == doctest::Approx(3.5));
  CHECK(mix_rewards(1.5, 2.0, 10, cfg) == doctest::Approx(1.5 + 1.0));
  for (std::uint64_t t : {0, 3, 100, 100000}) CHECK(mix_rewards(-0.7, 0.0, t, cfg) == doctest::Approx(-0.7));
}

TEST_CASE("mix_rewards: intrinsic weight strictly decreasing in t") {
  CuriosityConfig cfg = cfg2();
  double prev = mix_rewards(0.0, 1.0, 0, cfg);
  for (std::uint64_t t = 1; t < 2000; t += 7) {
    const double cur = mix_rewards(0.0, 1.0, t, cfg);
    CHECK(cur < prev);
    CHECK(cur > 0.0);
    prev = cur;
  }
}

TEST_CASE("map growth: stimuli within e_max never add nodes") {
  CuriosityConfig cfg = cfg2(6.0);
  Curiosity cur(cfg, 42);
  Rng rng(13);
  // init pair
  std::vector<float> a = {0.0f};
  cur.step(vec2(0, 0), a, vec2(0.1f, 0));
  cur.step(vec2(1, 0), a, vec2(1.1f, 0));
  REQUIRE(cur.map().node_count() == 2);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXf phi = vec2(static_cast<float>(rng.uniform(-2.0, 3.0)),
                                     static_cast<float>(rng.uniform(-2.0, 2.0)));
    a[0] = static_cast<float>(rng.uniform(-1.0, 1.0));
    cur.step(phi, a, phi);
  }
  CHECK(cur.map().node_count() == 2);
}

TEST_CASE("edge symmetry and no isolated nodes under random streams") {
  CuriosityConfig cfg = cfg2(0.4);  // small threshold forces growth
  Curiosity cur(cfg, 7);
  Rng rng(3);
  std::vector<float> a = {0.0f};
  for (int i = 0; i < 3000; ++i) {
    const Eigen::VectorXf phi = vec2(static_cast<float>(rng.uniform(-2.0, 2.0)),
                                     static_cast<float>(rng.uniform(-2.0, 2.0)));
    a[0] = static_cast<float>(rng.uniform(-1.0, 1.0));
    cur.step(phi, a, phi);

    for (const auto& [id, node] : cur.map().nodes()) {
      for (int m : node.neighbors) {
        CHECK(m != id);
        CHECK(cur.map().nodes().at(m).neighbors.contains(id));
      }
      if (cur.map().node_count() > 2) CHECK_FALSE(node.neighbors.empty());
    }
  }
  CHECK(cur.map().node_count() > 2);  // the stream actually grew the map
}

TEST_CASE("noise robustness: longer windows shrink LP on iid noise") {
  Rng rng(55);
  CuriosityConfig narrow = cfg2();
  narrow.mu = 2;
  narrow.lag = 2;
  CuriosityConfig wide = cfg2();
  wide.mu = 50;
  wide.lag = 2;

  int wide_smaller = 0;
  const int trials = 1000;
  for (int t = 0; t < trials; ++t) {
    ItmNode a, b;
    for (int i = 0; i < wide.mu + wide.lag; ++i) {
      const float e = static_cast<float>(1.0 + 0.5 * rng.normal());
      a.errors.push_back(e);
      b.errors.push_back(e);
    }
    while (a.errors.size() > static_cast<std::size_t>(narrow.mu + narrow.lag)) a.errors.pop_front();
    if (learning_progress(b, wide) < learning_progress(a, narrow)) ++wide_smaller;
  }
  CHECK(wide_smaller >= 900);
}

TEST_CASE("curiosity orchestration: two-node init, then rewards flow") {
  CuriosityConfig cfg = cfg2(6.0);
  Curiosity cur(cfg, 11);
  std::vector<float> a = {0.5f};
  CHECK(cur.step(vec2(0, 0), a, vec2(0.1f, 0)) == 0.0);
  CHECK(cur.map().node_count() == 1);
  CHECK(cur.step(vec2(1, 0), a, vec2(0.9f, 0)) == 0.0);
  CHECK(cur.map().node_count() == 2);
  CHECK(cur.map().edge_count() == 1);
  const double r = cur.step(vec2(0.4f, 0.3f), a, vec2(0.5f, 0.3f));
  CHECK(r > 0.0);  // perception error is positive away from both nodes

  std::ostringstream dump;
  cur.dump(dump);
  CHECK(dump.str().find("itm-map nodes=2") == 0);
  CHECK(dump.str().find("edge 0 1") != std::string::npos);
}
