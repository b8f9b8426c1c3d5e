#include <doctest.h>

#include <memory>

#include "oracles.hpp"
#include "totsched/errors.hpp"
#include "totsched/tot.hpp"

using namespace totsched;
using namespace totsched::tot;

namespace {

EdgeNetwork line_network() {
  // BS at the centre, SP1 20 m east, SP2 40 m north.
  EdgeNetwork net;
  net.profiles = {{10.0, 50.0, 0.085, 0.05, 0.1, genai::ServerRole::base_station},
                  {10.0, 40.0, 0.045, 0.03, 0.1, genai::ServerRole::service_provider},
                  {10.0, 45.0, 0.040, 0.02, 0.05, genai::ServerRole::service_provider}};
  net.positions = {{50, 50}, {70, 50}, {50, 90}};
  net.tx_power_w = {1.0, 0.1, 0.1};
  return net;
}

}  // namespace

TEST_SUITE("tot") {
  TEST_CASE("DAG layout") {
    Rng rng = make_rng(1, 0);
    const auto dag = ThoughtDag::build(3, 2, rng);
    CHECK(dag.size() == 8);
    CHECK(dag.output_index() == 7);
    CHECK(dag.step_of(0) == 0);
    CHECK(dag.step_of(1) == 1);
    CHECK(dag.step_of(2) == 1);
    CHECK(dag.step_of(6) == 3);
    CHECK(dag.step_of(7) == 4);
    // input -> 2, 2x2 twice, 2 -> output
    CHECK(dag.edges().size() == 2u + 4u + 4u + 2u);
    for (const auto& e : dag.edges()) {
      CHECK(dag.step_of(e.to) == dag.step_of(e.from) + 1);
      CHECK((e.bits >= 40000.0 && e.bits <= 80000.0));
    }
    CHECK_THROWS(dag.edge_bits(1, 2));
  }

  TEST_CASE("all-BS timeline is serial at 7.6 s per thought") {
    Rng rng = make_rng(2, 0);
    const auto dag = ThoughtDag::build(2, 3, rng);
    const auto net = line_network();
    const env::FrozenConditions cond(1.0, 100.0);
    ScheduleState st(dag, net.servers());
    for (int i = 0; i < dag.size(); ++i) commit_assignment(dag, st, i, 0, net, cond);
    CHECK(episode_totals(dag, st).t_tot == doctest::Approx(8 * 7.6).epsilon(1e-12));
    for (const auto& p : st.placements()) CHECK(p.tx_s == 0.0);
  }

  TEST_CASE("offloaded thought pays the BS->SP transfer and returns over SP->BS") {
    Rng rng = make_rng(3, 0);
    const auto dag = ThoughtDag::build(1, 1, rng);
    const auto net = line_network();
    const env::FrozenConditions cond(1.0, 100.0);
    ScheduleState st(dag, net.servers());
    commit_assignment(dag, st, 0, 0, net, cond);
    const auto& p1 = commit_assignment(dag, st, 1, 1, net, cond);
    const double r01 = channel::link_rate({2e6, 1.0, 4e-21}, 1.0, 0.02);
    CHECK(p1.ready_s == doctest::Approx(7.6 + dag.edge_bits(0, 1) / r01).epsilon(1e-12));
    CHECK(p1.finish_s == doctest::Approx(p1.ready_s + 0.03 * 100 + 0.1).epsilon(1e-12));
    const auto& p2 = commit_assignment(dag, st, 2, 0, net, cond);
    const double r10 = channel::link_rate({2e6, 0.1, 4e-21}, 1.0, 0.02);
    CHECK(p2.ready_s == doctest::Approx(p1.finish_s + dag.edge_bits(1, 2) / r10).epsilon(1e-12));
  }

  TEST_CASE("sequencing and action errors") {
    Rng rng = make_rng(4, 0);
    const auto dag = ThoughtDag::build(1, 2, rng);
    const auto net = line_network();
    const env::FrozenConditions cond(1.0, 100.0);
    ScheduleState st(dag, net.servers());
    CHECK_THROWS_AS(commit_assignment(dag, st, 0, 1, net, cond), ActionError);
    CHECK_THROWS_AS(commit_assignment(dag, st, 1, 0, net, cond), SequencingError);
    commit_assignment(dag, st, 0, 0, net, cond);
    CHECK_THROWS_AS(commit_assignment(dag, st, 1, 3, net, cond), ActionError);
    CHECK_THROWS_AS(st.placement(1), SequencingError);
    CHECK_THROWS_AS(episode_totals(dag, st), SequencingError);
    commit_assignment(dag, st, 1, 1, net, cond);
    commit_assignment(dag, st, 2, 2, net, cond);
    CHECK_THROWS_AS(commit_assignment(dag, st, 3, 2, net, cond), ActionError);
  }

  TEST_CASE("best predecessor breaks ties toward the lower index") {
    Rng rng = make_rng(5, 0);
    const auto dag = ThoughtDag::build(2, 2, rng);
    const auto net = line_network();
    const env::FrozenConditions cond(1.0, 100.0);
    ScheduleState st(dag, net.servers());
    commit_assignment(dag, st, 0, 0, net, cond);
    commit_assignment(dag, st, 1, 1, net, cond);
    commit_assignment(dag, st, 2, 1, net, cond);
    CHECK(best_predecessor(dag, st, 2) == 1);
  }

  TEST_CASE("scheduler agrees with the event-list recomputation on random instances") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      env::EnvConfig cfg;
      cfg.sps = 3;
      cfg.steps = 3;
      cfg.thoughts_per_step = 2;
      env::Environment e(cfg);
      e.reset(seed);
      Rng rng = make_rng(seed, 77);
      std::vector<int> servers{0};
      while (!e.done()) {
        const int a = uniform_int(rng, e.action_count());
        servers.push_back(a);
        e.step(a);
      }
      servers.push_back(0);
      const auto ref = oracle::recompute(e, servers);
      CHECK(e.totals().t_tot == ref.t_tot);
      CHECK(e.totals().score_tot == ref.score_tot);
    }
  }
}
