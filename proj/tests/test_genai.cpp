#include <doctest.h>

#include <cmath>

#include "totsched/errors.hpp"
#include "totsched/genai.hpp"

using namespace totsched;
using namespace totsched::genai;

TEST_SUITE("genai") {
  TEST_CASE("BS laws at the Table I constants") {
    const ServerProfile bs{10.0, 50.0, 0.085, 0.05, 0.1, ServerRole::base_station};
    CHECK(gen_delay(bs, 150.0) == doctest::Approx(7.6).epsilon(1e-15));
    CHECK(gen_quality(bs, 150.0) == doctest::Approx(10.0 - 50.0 * std::exp(-12.75)).epsilon(1e-15));
    CHECK(gen_quality(bs, 150.0) == doctest::Approx(9.99986).epsilon(1e-6));
  }

  TEST_CASE("qwen fit values") {
    const ServerProfile q{10.0, 49.13, 0.046, 0.025, 0.062, ServerRole::service_provider};
    CHECK(gen_quality(q, 100.0) == doctest::Approx(10.0 - 49.13 * std::exp(-4.6)));
    CHECK(gen_delay(q, 100.0) == doctest::Approx(2.562));
  }

  TEST_CASE("noiseless fits recover the constants") {
    const ServerProfile q{10.0, 49.13, 0.046, 0.025, 0.062, ServerRole::service_provider};
    std::vector<FitSample> qs, ds;
    for (double c = 50; c <= 150; c += 10) {
      qs.push_back({c, gen_quality(q, c)});
      ds.push_back({c, gen_delay(q, c)});
    }
    const auto fq = fit_quality(qs);
    const auto fd = fit_delay(ds);
    CHECK(fq.sigma == doctest::Approx(49.13).epsilon(1e-9));
    CHECK(fq.rho == doctest::Approx(0.046).epsilon(1e-9));
    CHECK(fd.eta == doctest::Approx(0.025).epsilon(1e-9));
    CHECK(fd.psi == doctest::Approx(0.062).epsilon(1e-9));
    CHECK(fq.rmse < 1e-9);
  }

  TEST_CASE("fit domain errors") {
    CHECK_THROWS_AS(fit_quality({{50, 9.0}}), SingularityError);
    CHECK_THROWS_AS(fit_quality({{50, 9.0}, {50, 9.1}}), SingularityError);
    CHECK_THROWS_AS(fit_quality({{50, 9.0}, {60, 10.0}}), FitDomainError);
    CHECK_THROWS_AS(fit_quality({{50, 9.5}, {60, 9.0}}), FitDomainError);
    CHECK_THROWS_AS(fit_delay({{50, 1.0}}), SingularityError);
  }

  TEST_CASE("sampled SP profiles stay inside their ranges") {
    Rng rng = make_rng(8, 0);
    const ProfileRanges r;
    for (int i = 0; i < 1000; ++i) {
      const auto p = sample_sp_profile(r, rng);
      CHECK((p.sigma > 30 && p.sigma < 55));
      CHECK((p.rho > 0.035 && p.rho < 0.055));
      CHECK((p.eta > 0.02 && p.eta < 0.04));
      CHECK((p.psi > 0.05 && p.psi < 0.15));
      CHECK(p.role == ServerRole::service_provider);
    }
  }

  TEST_CASE("profile validation") {
    ServerProfile p;
    p.rho = 0.0;
    CHECK_THROWS_AS(p.validate(), ConfigError);
  }
}
