#pragma once

#include <vector>

#include "totsched/nn.hpp"
#include "totsched/random.hpp"

namespace totsched::diffusion {

using nn::Matrix;
using nn::Vector;

/// Variance-preserving schedule over K steps. Arrays are indexed by k-1.
struct DiffusionSchedule {
  int steps = 0;
  double beta_min = 0.0;
  double beta_max = 0.0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;

  double beta_at(int k) const { return beta.at(static_cast<std::size_t>(k - 1)); }
  double alpha_at(int k) const { return alpha.at(static_cast<std::size_t>(k - 1)); }
  /// Cumulative product up to k, with alpha_bar(0) = 1.
  double alpha_bar_at(int k) const { return k == 0 ? 1.0 : alpha_bar.at(static_cast<std::size_t>(k - 1)); }
  /// (1 - alpha_bar(k-1)) / (1 - alpha_bar(k)) * beta(k); zero at k = 1.
  double posterior_variance(int k) const;
};

DiffusionSchedule beta_schedule(int steps, double beta_min, double beta_max);

/// x_k = sqrt(alpha_bar_k) x_0 + sqrt(1 - alpha_bar_k) z
Vector forward_marginal(const Vector& x0, int k, const Vector& z, const DiffusionSchedule& schedule);

/// x_k = sqrt(1 - beta_k) x_{k-1} + sqrt(beta_k) z
Vector forward_step(const Vector& x_prev, int k, const Vector& z, const DiffusionSchedule& schedule);

/// Noise predictor over concat(x_k, time embedding, state).
class Denoiser {
 public:
  Denoiser() = default;
  Denoiser(int action_dim, int state_dim, const std::vector<int>& hidden, nn::Activation activation, Rng& rng,
           int embed_dim = 16);
  Denoiser(nn::DenseNet net, int action_dim, int state_dim, int embed_dim = 16);

  int action_dim() const { return action_dim_; }
  int state_dim() const { return state_dim_; }
  int embed_dim() const { return embed_dim_; }

  /// Stacks the denoiser input for a batch of columns.
  Matrix input(const Matrix& x_k, int k, const Matrix& states) const;
  Matrix predict(const Matrix& x_k, int k, const Matrix& states) const;

  const nn::DenseNet& net() const { return net_; }
  nn::DenseNet& net() { return net_; }

 private:
  nn::DenseNet net_;
  int action_dim_ = 0;
  int state_dim_ = 0;
  int embed_dim_ = 16;
};

/// One denoising transition x_k -> x_{k-1} given externally drawn noise.
Vector reverse_step(const Denoiser& denoiser, const Vector& x_k, int k, const Vector& state,
                    const DiffusionSchedule& schedule, const Vector& noise);

/// All Gaussian draws of one batched reverse chain. `step[k-1]` is the noise
/// injected on the transition k -> k-1.
struct ChainNoise {
  Matrix initial;
  std::vector<Matrix> step;
};

ChainNoise draw_noise(int action_dim, int batch, const DiffusionSchedule& schedule, Rng& rng);

/// Runs K reverse steps from noise.initial, one column per state.
Matrix run_chain(const Denoiser& denoiser, const Matrix& states, const DiffusionSchedule& schedule,
                 const ChainNoise& noise);

struct DiffusionSample {
  Vector x0;
  ChainNoise noise;
};

DiffusionSample sample_action_logits(const Denoiser& denoiser, const Vector& state, const DiffusionSchedule& schedule,
                                     Rng& rng);

/// Differentiable reverse chain.
class ChainTape {
 public:
  bool empty() const { return tapes_.empty(); }

 private:
  friend std::pair<Matrix, ChainTape> chain_forward(const Denoiser&, const Matrix&, const DiffusionSchedule&,
                                                    const ChainNoise&);
  friend nn::Gradients chain_backward(const Denoiser&, ChainTape&, const Matrix&, const DiffusionSchedule&);
  std::vector<nn::Tape> tapes_;  // in execution order, k = K .. 1
};

std::pair<Matrix, ChainTape> chain_forward(const Denoiser& denoiser, const Matrix& states,
                                           const DiffusionSchedule& schedule, const ChainNoise& noise);

/// Parameter gradient of sum(dx0 .* x0) through every reverse step.
nn::Gradients chain_backward(const Denoiser& denoiser, ChainTape& tape, const Matrix& dx0,
                             const DiffusionSchedule& schedule);

/// Softmax of x0. Throws NumericError on non-finite input.
Vector policy_distribution(const Vector& x0);
Matrix softmax_columns(const Matrix& logits);
Matrix log_softmax_columns(const Matrix& logits);

/// argmax, lowest index on ties.
int greedy_action(const Vector& x0);

}  // namespace totsched::diffusion
