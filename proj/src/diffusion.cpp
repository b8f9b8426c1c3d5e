#include "totsched/diffusion.hpp"

#include <cmath>
#include <string>

#include "totsched/errors.hpp"

namespace totsched::diffusion {

double DiffusionSchedule::posterior_variance(int k) const {
  return (1.0 - alpha_bar_at(k - 1)) / (1.0 - alpha_bar_at(k)) * beta_at(k);
}

DiffusionSchedule beta_schedule(int steps, double beta_min, double beta_max) {
  if (steps < 1) throw ConfigError("diffusion needs K >= 1");
  if (!(beta_min > 0.0 && beta_max > beta_min)) throw ConfigError("diffusion needs 0 < beta_min < beta_max");
  DiffusionSchedule s;
  s.steps = steps;
  s.beta_min = beta_min;
  s.beta_max = beta_max;
  const double K = steps;
  double cumulative = 1.0;
  for (int k = 1; k <= steps; ++k) {
    const double exponent = beta_min / K + (2.0 * k - 1.0) / (2.0 * K * K) * (beta_max - beta_min);
    const double beta = -std::expm1(-exponent);
    s.beta.push_back(beta);
    s.alpha.push_back(1.0 - beta);
    cumulative *= 1.0 - beta;
    s.alpha_bar.push_back(cumulative);
  }
  for (int k = 1; k <= steps; ++k) {
    if (!(s.beta_at(k) > 0.0 && s.beta_at(k) < 1.0)) throw ConfigError("diffusion rate outside (0, 1)");
    if (k > 1 && !(s.beta_at(k) > s.beta_at(k - 1))) throw ConfigError("diffusion rates not increasing");
    if (!(s.alpha_bar_at(k) < s.alpha_bar_at(k - 1))) throw ConfigError("alpha_bar not decreasing");
  }
  return s;
}

Vector forward_marginal(const Vector& x0, int k, const Vector& z, const DiffusionSchedule& schedule) {
  const double ab = schedule.alpha_bar_at(k);
  return std::sqrt(ab) * x0 + std::sqrt(1.0 - ab) * z;
}

Vector forward_step(const Vector& x_prev, int k, const Vector& z, const DiffusionSchedule& schedule) {
  const double b = schedule.beta_at(k);
  return std::sqrt(1.0 - b) * x_prev + std::sqrt(b) * z;
}

Denoiser::Denoiser(int action_dim, int state_dim, const std::vector<int>& hidden, nn::Activation activation, Rng& rng,
                   int embed_dim)
    : action_dim_(action_dim), state_dim_(state_dim), embed_dim_(embed_dim) {
  if (action_dim < 1 || state_dim < 0) throw ConfigError("denoiser dims are invalid");
  std::vector<int> dims{action_dim + embed_dim + state_dim};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(action_dim);
  net_ = nn::DenseNet::make(dims, activation, nn::Activation::identity, rng);
}

Denoiser::Denoiser(nn::DenseNet net, int action_dim, int state_dim, int embed_dim)
    : net_(std::move(net)), action_dim_(action_dim), state_dim_(state_dim), embed_dim_(embed_dim) {
  if (net_.in_dim() != action_dim + embed_dim + state_dim || net_.out_dim() != action_dim)
    throw ConfigError("denoiser net dims do not match action/state sizes");
}

Matrix Denoiser::input(const Matrix& x_k, int k, const Matrix& states) const {
  if (x_k.rows() != action_dim_ || states.rows() != state_dim_ || x_k.cols() != states.cols())
    throw ConfigError("denoiser input shape mismatch");
  Matrix in(action_dim_ + embed_dim_ + state_dim_, x_k.cols());
  in.topRows(action_dim_) = x_k;
  in.middleRows(action_dim_, embed_dim_) = nn::sinusoidal_embed(k, embed_dim_).replicate(1, x_k.cols());
  in.bottomRows(state_dim_) = states;
  return in;
}

Matrix Denoiser::predict(const Matrix& x_k, int k, const Matrix& states) const {
  return net_(input(x_k, k, states));
}

namespace {

struct StepCoefficients {
  double scale;       // 1 / sqrt(alpha_k)
  double noise_gain;  // (1 - alpha_k) / sqrt(1 - alpha_bar_k)
  double sigma;       // sqrt(posterior variance)
};

StepCoefficients coefficients(const DiffusionSchedule& s, int k) {
  const double a = s.alpha_at(k);
  return {1.0 / std::sqrt(a), (1.0 - a) / std::sqrt(1.0 - s.alpha_bar_at(k)), std::sqrt(s.posterior_variance(k))};
}

void check_noise(const ChainNoise& noise, const DiffusionSchedule& s, Eigen::Index rows, Eigen::Index cols) {
  if (noise.initial.rows() != rows || noise.initial.cols() != cols ||
      noise.step.size() != static_cast<std::size_t>(s.steps))
    throw ConfigError("chain noise shape mismatch");
  for (const auto& z : noise.step)
    if (z.rows() != rows || z.cols() != cols) throw ConfigError("chain noise shape mismatch");
}

Matrix gaussian(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c)
    for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = standard_normal(rng);
  return m;
}

}  // namespace

Vector reverse_step(const Denoiser& denoiser, const Vector& x_k, int k, const Vector& state,
                    const DiffusionSchedule& schedule, const Vector& noise) {
  if (k < 1 || k > schedule.steps) throw ConfigError("reverse step index out of range");
  const auto c = coefficients(schedule, k);
  const Vector eps = denoiser.predict(Matrix(x_k), k, Matrix(state)).col(0);
  return c.scale * (x_k - c.noise_gain * eps) + c.sigma * noise;
}

ChainNoise draw_noise(int action_dim, int batch, const DiffusionSchedule& schedule, Rng& rng) {
  ChainNoise n;
  n.initial = gaussian(action_dim, batch, rng);
  n.step.resize(static_cast<std::size_t>(schedule.steps));
  for (int k = schedule.steps; k >= 1; --k) n.step[static_cast<std::size_t>(k - 1)] = gaussian(action_dim, batch, rng);
  return n;
}

Matrix run_chain(const Denoiser& denoiser, const Matrix& states, const DiffusionSchedule& schedule,
                 const ChainNoise& noise) {
  check_noise(noise, schedule, denoiser.action_dim(), states.cols());
  Matrix x = noise.initial;
  for (int k = schedule.steps; k >= 1; --k) {
    const auto c = coefficients(schedule, k);
    const Matrix eps = denoiser.predict(x, k, states);
    x = c.scale * (x - c.noise_gain * eps) + c.sigma * noise.step[static_cast<std::size_t>(k - 1)];
  }
  return x;
}

DiffusionSample sample_action_logits(const Denoiser& denoiser, const Vector& state, const DiffusionSchedule& schedule,
                                     Rng& rng) {
  DiffusionSample out;
  out.noise = draw_noise(denoiser.action_dim(), 1, schedule, rng);
  out.x0 = run_chain(denoiser, Matrix(state), schedule, out.noise).col(0);
  return out;
}

std::pair<Matrix, ChainTape> chain_forward(const Denoiser& denoiser, const Matrix& states,
                                           const DiffusionSchedule& schedule, const ChainNoise& noise) {
  check_noise(noise, schedule, denoiser.action_dim(), states.cols());
  ChainTape tape;
  Matrix x = noise.initial;
  for (int k = schedule.steps; k >= 1; --k) {
    const auto c = coefficients(schedule, k);
    auto [eps, t] = nn::forward(denoiser.net(), denoiser.input(x, k, states));
    tape.tapes_.push_back(std::move(t));
    x = c.scale * (x - c.noise_gain * eps) + c.sigma * noise.step[static_cast<std::size_t>(k - 1)];
  }
  return {std::move(x), std::move(tape)};
}

nn::Gradients chain_backward(const Denoiser& denoiser, ChainTape& tape, const Matrix& dx0,
                             const DiffusionSchedule& schedule) {
  if (tape.tapes_.size() != static_cast<std::size_t>(schedule.steps)) throw UsageError("chain tape does not match schedule");
  nn::Gradients total = denoiser.net().zero_gradients();
  Matrix g = dx0;
  // tapes_[K - k] holds step k.
  for (int k = 1; k <= schedule.steps; ++k) {
    const auto c = coefficients(schedule, k);
    auto& t = tape.tapes_[static_cast<std::size_t>(schedule.steps - k)];
    nn::Gradients step = nn::backward(t, -c.scale * c.noise_gain * g);
    total += step;
    g = c.scale * g + step.input.topRows(denoiser.action_dim());
  }
  tape.tapes_.clear();
  total.input = g;
  return total;
}

Matrix log_softmax_columns(const Matrix& logits) {
  if (!logits.allFinite()) throw NumericError("policy logits are not finite");
  Matrix out(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    const double m = logits.col(c).maxCoeff();
    const double lse = m + std::log((logits.col(c).array() - m).exp().sum());
    out.col(c) = logits.col(c).array() - lse;
  }
  return out;
}

Matrix softmax_columns(const Matrix& logits) { return log_softmax_columns(logits).array().exp().matrix(); }

Vector policy_distribution(const Vector& x0) { return softmax_columns(Matrix(x0)).col(0); }

int greedy_action(const Vector& x0) {
  if (x0.size() == 0) throw ConfigError("empty logit vector");
  int best = 0;
  for (int i = 1; i < x0.size(); ++i)
    if (x0(i) > x0(best)) best = i;
  return best;
}

}  // namespace totsched::diffusion
