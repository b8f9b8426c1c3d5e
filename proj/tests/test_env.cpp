#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "totsched/env.hpp"
#include "totsched/errors.hpp"

using namespace totsched;
using namespace totsched::env;

TEST_SUITE("env") {
  TEST_CASE("stationary distribution solves pi P = pi") {
    const MarkovTokenModel m;
    const auto pi = m.stationary();
    double total = 0.0;
    for (int j = 0; j < 4; ++j) {
      double s = 0.0;
      for (int i = 0; i < 4; ++i) s += pi[i] * m.transition[i][j];
      CHECK(s == doctest::Approx(pi[j]).epsilon(1e-12));
      total += pi[j];
    }
    CHECK(total == doctest::Approx(1.0));
    // Rows 1-2 and 3-4 are mirror images, so mass splits evenly between the halves.
    CHECK(pi[0] + pi[1] == doctest::Approx(0.5).epsilon(1e-9));
  }

  TEST_CASE("inverse-CDF draws") {
    const MarkovTokenModel m;
    CHECK(m.next_state(0, 0.0) == 0);
    CHECK(m.next_state(0, 0.39) == 0);
    CHECK(m.next_state(0, 0.41) == 1);
    CHECK(m.next_state(0, 0.95) == 3);
    CHECK(m.next_state(3, 0.05) == 0);
  }

  TEST_CASE("invalid token models") {
    MarkovTokenModel m;
    m.transition[0][0] = 0.5;
    CHECK_THROWS_AS(m.validate(), ConfigError);
    MarkovTokenModel n;
    n.values.pop_back();
    CHECK_THROWS_AS(n.validate(), ConfigError);
    EnvConfig c;
    c.tokens.values[0] = 200.0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }

  TEST_CASE("LG reference") {
    EnvConfig c;
    const auto lg = lg_reference(c);
    CHECK(lg.t_lg == doctest::Approx(288.8).epsilon(1e-12));
    CHECK(lg.score_lg == doctest::Approx(38 * (10.0 - 50.0 * std::exp(-0.085 * 150))).epsilon(1e-12));
  }

  TEST_CASE("state layout") {
    EnvConfig c;
    c.sps = 3;
    c.steps = 2;
    c.thoughts_per_step = 2;
    Environment e(c);
    const auto s = e.reset(5);
    CHECK(static_cast<int>(s.values.size()) == e.state_size());
    CHECK(e.state_size() == 4 * 3 + 3 + 6 + 1);
    CHECK(s.values[s.assignment_offset()] == 0.0);   // input thought on the BS
    CHECK(s.values[s.assignment_offset() + 1] == -1.0);
    const double payload = s.values[s.payload_offset()];
    CHECK((payload >= 40000.0 && payload <= 80000.0));
    const auto n = e.normalize(s);
    CHECK(n[s.assignment_offset() + 1] == -1.0);
    CHECK(n[s.payload_offset()] == doctest::Approx(payload / 80000.0));
  }

  TEST_CASE("rewards telescope to -T_tot minus penalties") {
    for (bool literal : {false, true}) {
      EnvConfig c;
      c.sps = 3;
      c.steps = 3;
      c.thoughts_per_step = 3;
      c.quality_threshold_pct = 95.0;
      c.literal_reward = literal;
      Environment e(c);
      e.reset(9);
      Rng rng = make_rng(1, 0);
      double sum = 0.0, pen = 0.0;
      while (!e.done()) {
        const auto r = e.step(uniform_int(rng, e.action_count()));
        sum += r.reward;
        pen += r.penalty;
        CHECK(r.penalty >= 0.0);
      }
      const double t = e.totals().t_tot;
      CHECK(pen == doctest::Approx(e.total_penalty()));
      CHECK(sum == doctest::Approx((literal ? t : -t) - pen).epsilon(1e-9));
    }
  }

  TEST_CASE("per-thought penalty is the shortfall against Score_min / |I|") {
    EnvConfig c = oracle::tiny_frozen();
    c.score_min = 4 * 9.9;
    Environment e(c);
    e.reset(1);
    const auto p = e.preview(1);
    const auto r = e.step(1);
    CHECK(r.penalty == doctest::Approx(std::max(0.0, 9.9 - p.score)));
  }

  TEST_CASE("misuse") {
    EnvConfig c = oracle::tiny_frozen();
    Environment e(c);
    CHECK_THROWS_AS(e.step(0), UsageError);
    e.reset(1);
    CHECK_THROWS_AS(e.step(3), ActionError);
    CHECK_THROWS_AS(e.step(-1), ActionError);
    for (int i = 0; i < 4; ++i) e.step(0);
    CHECK(e.done());
    CHECK_THROWS_AS(e.step(0), UsageError);
  }

  TEST_CASE("same seed gives the same episode; conditions are counter based") {
    EnvConfig c;
    c.sps = 2;
    c.steps = 2;
    c.thoughts_per_step = 2;
    Environment a(c), b(c);
    CHECK(a.reset(3).values == b.reset(3).values);
    const StochasticConditions s1(5, 2, MarkovTokenModel{}), s2(5, 2, MarkovTokenModel{});
    // Query order does not change the values.
    const double late = s1.sp_tokens(40, 1);
    CHECK(s2.sp_tokens(3, 1) == s1.sp_tokens(3, 1));
    CHECK(s2.sp_tokens(40, 1) == late);
    CHECK(s1.fading_gain(7, 0, 1) == s2.fading_gain(7, 0, 1));
    CHECK(s1.fading_gain(7, 0, 1) != s1.fading_gain(7, 1, 0));
  }

  TEST_CASE("U = 0 leaves only the BS") {
    EnvConfig c;
    c.sps = 0;
    c.steps = 2;
    c.thoughts_per_step = 2;
    Environment e(c);
    e.reset(1);
    CHECK(e.action_count() == 1);
    while (!e.done()) e.step(0);
    CHECK(e.totals().t_tot == doctest::Approx(6 * 7.6));
  }
}
