#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "totsched/diffusion.hpp"
#include "totsched/errors.hpp"

using namespace totsched;
using namespace totsched::diffusion;

namespace {

Matrix normal_matrix(int r, int c, Rng& rng) {
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
  return m;
}

}  // namespace

TEST_SUITE("diffusion") {
  TEST_CASE("schedule values") {
    const auto s = beta_schedule(5, 0.1, 10.0);
    CHECK(s.beta_at(1) == doctest::Approx(1.0 - std::exp(-0.218)).epsilon(1e-14));
    CHECK(s.beta_at(1) == doctest::Approx(0.1959).epsilon(1e-3));
    double prod = 1.0;
    for (int k = 1; k <= 5; ++k) {
      prod *= 1.0 - s.beta_at(k);
      CHECK(s.alpha_bar_at(k) == doctest::Approx(prod).epsilon(1e-14));
    }
    // sum of exponents = beta_min + (beta_max - beta_min) / 2
    CHECK(s.alpha_bar_at(5) == doctest::Approx(std::exp(-5.05)).epsilon(1e-12));
    CHECK(s.alpha_bar_at(0) == 1.0);
    CHECK(s.posterior_variance(1) == 0.0);
    CHECK(s.posterior_variance(2) ==
          doctest::Approx((1 - s.alpha_bar_at(1)) / (1 - s.alpha_bar_at(2)) * s.beta_at(2)));
  }

  TEST_CASE("schedule preconditions") {
    CHECK_THROWS_AS(beta_schedule(0, 0.1, 10.0), ConfigError);
    CHECK_THROWS_AS(beta_schedule(5, 1.0, 1.0), ConfigError);
    CHECK_THROWS_AS(beta_schedule(5, -0.1, 1.0), ConfigError);
  }

  TEST_CASE("reverse step with a zero denoiser and k = 1 rescales only") {
    Rng rng = make_rng(1, 0);
    Denoiser d(3, 2, {8}, nn::Activation::mish, rng);
    for (auto& l : d.net().layers()) {
      l.weight.setZero();
      l.bias.setZero();
    }
    const auto s = beta_schedule(5, 0.1, 10.0);
    const Vector x{{1.0, -2.0, 0.5}};
    const Vector y = reverse_step(d, x, 1, Vector::Zero(2), s, Vector::Ones(3));
    for (int i = 0; i < 3; ++i) CHECK(y(i) == doctest::Approx(x(i) / std::sqrt(s.alpha_at(1))));
  }

  TEST_CASE("denoiser input stacks x, embedding and state") {
    Rng rng = make_rng(2, 0);
    Denoiser d(2, 3, {4}, nn::Activation::mish, rng);
    const Matrix in = d.input(Matrix::Constant(2, 1, 7.0), 4, Matrix::Constant(3, 1, -1.0));
    CHECK(in.rows() == 2 + 16 + 3);
    CHECK(in(0, 0) == 7.0);
    CHECK(in(2, 0) == doctest::Approx(std::sin(4.0)));
    CHECK(in(20, 0) == -1.0);
  }

  TEST_CASE("chain gradient matches central differences") {
    Rng rng = make_rng(3, 0);
    Denoiser d(3, 4, {12, 12}, nn::Activation::mish, rng);
    const auto s = beta_schedule(5, 0.1, 2.0);
    const Matrix states = normal_matrix(4, 3, rng);
    const auto noise = draw_noise(3, 3, s, rng);
    const Matrix w = normal_matrix(3, 3, rng);
    auto [x0, tape] = chain_forward(d, states, s, noise);
    CHECK((x0 - run_chain(d, states, s, noise)).cwiseAbs().maxCoeff() == 0.0);
    const auto analytic = nn::flatten(chain_backward(d, tape, w, s));
    const auto numeric = oracle::numeric_gradient(d.net().flatten(), [&](const std::vector<double>& p) {
      Denoiser copy = d;
      copy.net().assign(p);
      return run_chain(copy, states, s, noise).cwiseProduct(w).sum();
    });
    CHECK(oracle::relative_error(analytic, numeric) < 1e-6);
  }

  TEST_CASE("softmax helpers") {
    const Vector x{{1.0, 1.0, 0.0}};
    const Vector p = policy_distribution(x);
    CHECK(p.sum() == doctest::Approx(1.0));
    CHECK(p(0) == doctest::Approx(std::exp(1.0) / (2 * std::exp(1.0) + 1)));
    CHECK(greedy_action(x) == 0);
    const Matrix big = Matrix::Constant(2, 1, 1000.0);
    CHECK(softmax_columns(big)(0, 0) == doctest::Approx(0.5));
    CHECK_THROWS_AS(policy_distribution(Vector::Constant(2, std::nan(""))), NumericError);
  }

  TEST_CASE("noise draws are reproducible") {
    const auto s = beta_schedule(5, 0.1, 10.0);
    Rng a = make_rng(4, 1), b = make_rng(4, 1);
    const auto na = draw_noise(2, 3, s, a), nb = draw_noise(2, 3, s, b);
    CHECK(na.initial == nb.initial);
    CHECK(na.step.size() == 5u);
    CHECK(na.step[4] == nb.step[4]);
  }
}
