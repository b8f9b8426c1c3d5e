#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "oracles.hpp"
#include "totsched/errors.hpp"
#include "totsched/rl.hpp"

using namespace totsched;
using namespace totsched::rl;

namespace {

Transition tr(double id) { return {{id, 0.0}, static_cast<int>(id) % 2, id, {id + 1, 0.0}, false}; }

TrainConfig small_train(int episodes) {
  TrainConfig t;
  t.episodes = episodes;
  t.hidden = {16, 16};
  t.batch_size = 8;
  t.warmup = 16;
  t.buffer_capacity = 1000;
  t.beta_max = 1.0;
  return t;
}

Matrix normal_matrix(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
  return m;
}

}  // namespace

TEST_SUITE("rl") {
  TEST_CASE("replay buffer evicts oldest first") {
    ReplayBuffer b(3);
    for (int i = 0; i < 5; ++i) b.push(tr(i));
    CHECK(b.size() == 3u);
    CHECK(b.at(0).reward == 2.0);
    CHECK(b.at(2).reward == 4.0);
    CHECK_THROWS_AS(b.at(3), UsageError);
  }

  TEST_CASE("sampling the whole buffer yields a permutation") {
    ReplayBuffer b(10);
    for (int i = 0; i < 10; ++i) b.push(tr(i));
    Rng rng = make_rng(1, 0);
    auto s = b.sample(10, rng);
    std::vector<double> ids;
    for (const auto& t : s) ids.push_back(t.reward);
    std::sort(ids.begin(), ids.end());
    for (int i = 0; i < 10; ++i) CHECK(ids[static_cast<std::size_t>(i)] == i);
    CHECK_THROWS_AS(b.sample(11, rng), UsageError);
  }

  TEST_CASE("batch sampling is uniform") {
    ReplayBuffer b(20);
    for (int i = 0; i < 20; ++i) b.push(tr(i));
    Rng rng = make_rng(2, 0);
    std::vector<int> hits(20, 0);
    const int draws = 20000;
    for (int d = 0; d < draws; ++d)
      for (const auto& t : b.sample(5, rng)) ++hits[static_cast<std::size_t>(t.reward)];
    // Each index appears with probability 1/4 per draw.
    for (int h : hits) CHECK(std::abs(h / double(draws) - 0.25) < 0.015);
  }

  TEST_CASE("epsilon schedule") {
    TrainConfig t;
    t.episodes = 1000;
    CHECK(epsilon_at(0, t) == 1.0);
    CHECK(epsilon_at(500, t) == doctest::Approx(0.05));
    CHECK(epsilon_at(900, t) == doctest::Approx(0.05));
    CHECK(epsilon_at(250, t) == doctest::Approx(0.525));
  }

  TEST_CASE("soft Bellman target by hand") {
    // Single-layer identity critics: Q(s) = W s + b.
    nn::DenseLayer l1{Matrix{{1.0, 0.0}, {0.0, 2.0}}, Vector{{0.0, 0.0}}, nn::Activation::identity};
    nn::DenseLayer l2{Matrix{{2.0, 0.0}, {0.0, 1.0}}, Vector{{0.0, 0.0}}, nn::Activation::identity};
    const nn::DenseNet q1({l1}), q2({l2});
    Batch b = make_batch({{{0, 0}, 0, -1.0, {1.0, 1.0}, false}, {{0, 0}, 1, -2.0, {1.0, 1.0}, true}});
    const Matrix logits = Matrix::Zero(2, 2);
    const auto y = soft_bellman_targets(b, logits, q1, q2, 0.9, 0.1);
    // min Q = (1, 1); pi = (0.5, 0.5); V = 1 - 0.1 log 0.5
    CHECK(y(0) == doctest::Approx(-1.0 + 0.9 * (1.0 + 0.1 * std::log(2.0))));
    CHECK(y(1) == -2.0);
  }

  TEST_CASE("critic and actor loss adjoints match central differences") {
    Rng rng = make_rng(3, 0);
    const Matrix q = normal_matrix(4, 6, rng);
    const Vector y = normal_matrix(6, 1, rng);
    const std::vector<int> actions{0, 3, 2, 1, 1, 0};
    const auto c = critic_loss(q, actions, y);
    std::vector<double> flat(q.data(), q.data() + q.size());
    auto num = oracle::numeric_gradient(flat, [&](const std::vector<double>& v) {
      return critic_loss(Eigen::Map<const Matrix>(v.data(), 4, 6), actions, y).loss;
    });
    CHECK(oracle::relative_error(std::vector<double>(c.adjoint.data(), c.adjoint.data() + c.adjoint.size()), num) < 1e-6);

    const Matrix logits = normal_matrix(4, 6, rng);
    const auto a = actor_loss(logits, q, 0.3);
    std::vector<double> lf(logits.data(), logits.data() + logits.size());
    num = oracle::numeric_gradient(lf, [&](const std::vector<double>& v) {
      return actor_loss(Eigen::Map<const Matrix>(v.data(), 4, 6), q, 0.3).loss;
    });
    CHECK(oracle::relative_error(std::vector<double>(a.adjoint.data(), a.adjoint.data() + a.adjoint.size()), num) < 1e-6);
    CHECK(a.entropy == doctest::Approx(policy_entropy(logits).mean()));
  }

  TEST_CASE("double-Q target uses the online argmax and the target value") {
    TrainConfig t = small_train(1);
    t.gamma = 0.5;
    nn::DenseLayer on{Matrix{{1.0}, {2.0}}, Vector{{0.0, 0.0}}, nn::Activation::identity};
    nn::DenseLayer tg{Matrix{{10.0}, {-10.0}}, Vector{{0.0, 0.0}}, nn::Activation::identity};
    DoubleDqn d(nn::DenseNet({on}), nn::DenseNet({tg}), t);
    Batch b = make_batch({{{0.0}, 0, 1.0, {1.0}, false}});
    // online picks action 1, target values it at -10
    CHECK(d.double_q_targets(b)(0) == doctest::Approx(1.0 - 5.0));
  }

  TEST_CASE("training is deterministic and checkpoints round-trip") {
    const auto env_cfg = oracle::tiny_frozen();
    for (auto kind : {LearnerKind::dsac, LearnerKind::sac_mlp, LearnerKind::ddqn}) {
      CAPTURE(to_string(kind));
      const auto t = small_train(12);
      auto a = make_learner(kind, env_cfg, t);
      auto b = make_learner(kind, env_cfg, t);
      const auto ma = train(*a, env_cfg, t);
      const auto mb = train(*b, env_cfg, t);
      std::ostringstream ca, cb;
      write_metrics_csv(ca, ma);
      write_metrics_csv(cb, mb);
      CHECK(ca.str() == cb.str());
      CHECK(ma.back().updates > 0);

      std::stringstream saved;
      a->save(saved);
      const std::string text = saved.str();
      auto loaded = load_checkpoint(saved);
      std::ostringstream again;
      loaded->save(again);
      CHECK(again.str() == text);
      Rng r1 = make_rng(9, 0), r2 = make_rng(9, 0);
      env::Environment e(env_cfg);
      const auto s = e.normalize(e.reset(1));
      CHECK(a->greedy(s, r1) == loaded->greedy(s, r2));
    }
  }

  TEST_CASE("non-finite parameters abort training") {
    const auto env_cfg = oracle::tiny_frozen();
    const auto t = small_train(10);
    auto learner = make_learner(LearnerKind::sac_mlp, env_cfg, t);
    auto& sac = dynamic_cast<SoftActorCritic&>(*learner);
    sac.critic1().layers()[0].weight(0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK(sac.non_finite_network() == "critic1");
    CHECK_THROWS_AS(train(*learner, env_cfg, t), TrainingError);
  }

  TEST_CASE("bad checkpoints") {
    std::istringstream junk("not a checkpoint");
    CHECK_THROWS_AS(load_checkpoint(junk), IoError);
    CHECK_THROWS_AS(load_checkpoint(std::string("/nonexistent/ckpt.txt")), IoError);
  }

  TEST_CASE("config validation") {
    TrainConfig t;
    t.gamma = 1.5;
    CHECK_THROWS_AS(t.validate(), ConfigError);
    CHECK(actor_q_from_string("q1") == ActorQ::q1);
    CHECK_THROWS_AS(actor_q_from_string("q3"), ConfigError);
  }
}
