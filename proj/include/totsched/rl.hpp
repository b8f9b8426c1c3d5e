#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "totsched/diffusion.hpp"
#include "totsched/env.hpp"
#include "totsched/nn.hpp"
#include "totsched/random.hpp"

namespace totsched::rl {

using nn::Matrix;
using nn::Vector;

struct Transition {
  std::vector<double> state;
  int action = 0;
  double reward = 0.0;
  std::vector<double> next_state;
  bool done = false;
};

/// Column-stacked view of a list of transitions.
struct Batch {
  Matrix states;
  Matrix next_states;
  std::vector<int> actions;
  Vector rewards;
  Vector done;

  int size() const { return static_cast<int>(actions.size()); }
};

Batch make_batch(const std::vector<Transition>& transitions);

/// FIFO ring buffer with uniform sampling without replacement inside a batch.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(Transition t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return storage_.size(); }
  bool ready(std::size_t batch) const { return batch > 0 && size_ >= batch; }
  /// Oldest first.
  const Transition& at(std::size_t i) const;
  /// Throws UsageError when fewer than `batch` transitions are stored.
  std::vector<Transition> sample(std::size_t batch, Rng& rng) const;

 private:
  std::vector<Transition> storage_;
  std::size_t head_ = 0;  // next write position
  std::size_t size_ = 0;
};

enum class ActorQ { q1, min };
std::string to_string(ActorQ q);
ActorQ actor_q_from_string(const std::string& s);

struct TrainConfig {
  int episodes = 1000;
  double gamma = 0.99;
  double tau = 0.005;
  double alpha = 0.05;  // entropy temperature
  int batch_size = 64;
  std::size_t buffer_capacity = 100000;
  int warmup = 500;
  double actor_lr = 3e-4;
  double critic_lr = 3e-4;
  int diffusion_steps = 5;
  double beta_min = 0.1;
  double beta_max = 10.0;
  std::vector<int> hidden{400, 400};
  nn::Activation activation = nn::Activation::mish;
  ActorQ actor_q = ActorQ::min;
  double epsilon_start = 1.0;
  double epsilon_end = 0.05;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Linear anneal from epsilon_start to epsilon_end over the first half of training.
double epsilon_at(int episode, const TrainConfig& config);

/// Policy network producing action logits for a batch of states.
class Actor {
 public:
  virtual ~Actor() = default;
  virtual std::string kind() const = 0;
  virtual int action_dim() const = 0;
  virtual int state_dim() const = 0;
  virtual diffusion::ChainNoise draw_noise(int batch, Rng& rng) const = 0;
  virtual Matrix logits(const Matrix& states, const diffusion::ChainNoise& noise) const = 0;
  /// Like logits() but records what backward() needs.
  virtual Matrix forward(const Matrix& states, const diffusion::ChainNoise& noise) = 0;
  virtual nn::Gradients backward(const Matrix& dlogits) = 0;
  virtual const nn::DenseNet& net() const = 0;
  virtual nn::DenseNet& net() = 0;
  virtual std::unique_ptr<Actor> clone() const = 0;
};

/// Denoiser run through the K-step reverse chain; x0 are the logits.
class DiffusionActor final : public Actor {
 public:
  DiffusionActor(diffusion::Denoiser denoiser, diffusion::DiffusionSchedule schedule);

  std::string kind() const override { return "dsac"; }
  int action_dim() const override { return denoiser_.action_dim(); }
  int state_dim() const override { return denoiser_.state_dim(); }
  diffusion::ChainNoise draw_noise(int batch, Rng& rng) const override;
  Matrix logits(const Matrix& states, const diffusion::ChainNoise& noise) const override;
  Matrix forward(const Matrix& states, const diffusion::ChainNoise& noise) override;
  nn::Gradients backward(const Matrix& dlogits) override;
  const nn::DenseNet& net() const override { return denoiser_.net(); }
  nn::DenseNet& net() override { return denoiser_.net(); }
  std::unique_ptr<Actor> clone() const override;

  const diffusion::Denoiser& denoiser() const { return denoiser_; }
  const diffusion::DiffusionSchedule& schedule() const { return schedule_; }

 private:
  diffusion::Denoiser denoiser_;
  diffusion::DiffusionSchedule schedule_;
  diffusion::ChainTape tape_;
};

/// Plain state -> logits network.
class MlpActor final : public Actor {
 public:
  explicit MlpActor(nn::DenseNet net);

  std::string kind() const override { return "sac_mlp"; }
  int action_dim() const override { return net_.out_dim(); }
  int state_dim() const override { return net_.in_dim(); }
  diffusion::ChainNoise draw_noise(int, Rng&) const override { return {}; }
  Matrix logits(const Matrix& states, const diffusion::ChainNoise&) const override { return net_(states); }
  Matrix forward(const Matrix& states, const diffusion::ChainNoise& noise) override;
  nn::Gradients backward(const Matrix& dlogits) override;
  const nn::DenseNet& net() const override { return net_; }
  nn::DenseNet& net() override { return net_; }
  std::unique_ptr<Actor> clone() const override;

 private:
  nn::DenseNet net_;
  nn::Tape tape_;
};

/// y = r + gamma (1 - done) sum_a' pi(a'|s') (min_n Qbar_n(s', a') - alpha log pi(a'|s'))
Vector soft_bellman_targets(const Batch& batch, const Matrix& next_logits, const nn::DenseNet& q1_target,
                            const nn::DenseNet& q2_target, double gamma, double alpha);

struct LossWithAdjoint {
  double loss = 0.0;
  Matrix adjoint;  // d loss / d input matrix
  double entropy = 0.0;
};

/// 0.5 * mean (Q(s, a) - y)^2 over the batch.
LossWithAdjoint critic_loss(const Matrix& q_values, const std::vector<int>& actions, const Vector& targets);

/// mean_s sum_a pi(a|s) (alpha log pi(a|s) - Q(s, a)), pi = softmax(logits).
LossWithAdjoint actor_loss(const Matrix& logits, const Matrix& q_values, double alpha);

/// Entropy of softmax(logits) per column.
Vector policy_entropy(const Matrix& logits);

struct UpdateStats {
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;
  double entropy = 0.0;
};

/// Trainable agent behind a common act/update surface.
class Learner {
 public:
  virtual ~Learner() = default;
  virtual std::string kind() const = 0;
  virtual int state_dim() const = 0;
  virtual int action_dim() const = 0;
  /// Behaviour action during training.
  virtual int explore(const std::vector<double>& state, int episode, Rng& rng) = 0;
  /// Evaluation action.
  virtual int greedy(const std::vector<double>& state, Rng& rng) const = 0;
  virtual UpdateStats update(const Batch& batch, Rng& rng) = 0;
  /// First non-finite network, empty when all parameters are finite.
  virtual std::string non_finite_network() const = 0;
  virtual void save(std::ostream& os) const = 0;
};

/// Discrete soft actor-critic with twin critics and soft target updates.
class SoftActorCritic final : public Learner {
 public:
  SoftActorCritic(std::unique_ptr<Actor> actor, const TrainConfig& config, Rng& init_rng);
  /// Assembles an agent from existing networks (checkpoint loading).
  SoftActorCritic(std::unique_ptr<Actor> actor, nn::DenseNet q1, nn::DenseNet q2, nn::DenseNet q1_target,
                  nn::DenseNet q2_target, const TrainConfig& config);

  std::string kind() const override { return actor_->kind(); }
  int state_dim() const override { return actor_->state_dim(); }
  int action_dim() const override { return actor_->action_dim(); }
  int explore(const std::vector<double>& state, int episode, Rng& rng) override;
  int greedy(const std::vector<double>& state, Rng& rng) const override;
  UpdateStats update(const Batch& batch, Rng& rng) override;
  std::string non_finite_network() const override;
  void save(std::ostream& os) const override;

  Vector critic_targets(const Batch& batch, Rng& rng) const;
  std::pair<double, double> update_critics(const Batch& batch, const Vector& targets);
  /// One actor step with noise drawn from `rng`; returns loss and fills `entropy`.
  double update_actor(const Batch& batch, Rng& rng, double* entropy = nullptr);
  void soft_update_targets();

  Actor& actor() { return *actor_; }
  const Actor& actor() const { return *actor_; }
  const nn::DenseNet& critic1() const { return q1_; }
  const nn::DenseNet& critic2() const { return q2_; }
  const nn::DenseNet& target1() const { return q1_target_; }
  const nn::DenseNet& target2() const { return q2_target_; }
  nn::DenseNet& critic1() { return q1_; }
  nn::DenseNet& critic2() { return q2_; }
  nn::DenseNet& target1() { return q1_target_; }
  nn::DenseNet& target2() { return q2_target_; }
  const TrainConfig& config() const { return config_; }

 private:
  TrainConfig config_;
  std::unique_ptr<Actor> actor_;
  nn::DenseNet q1_, q2_, q1_target_, q2_target_;
  nn::Adam actor_opt_, q1_opt_, q2_opt_;
};

/// Double DQN: online net selects, target net evaluates.
class DoubleDqn final : public Learner {
 public:
  DoubleDqn(int state_dim, int action_dim, const TrainConfig& config, Rng& init_rng);
  DoubleDqn(nn::DenseNet q, nn::DenseNet q_target, const TrainConfig& config);

  std::string kind() const override { return "ddqn"; }
  int state_dim() const override { return q_.in_dim(); }
  int action_dim() const override { return q_.out_dim(); }
  int explore(const std::vector<double>& state, int episode, Rng& rng) override;
  int greedy(const std::vector<double>& state, Rng& rng) const override;
  UpdateStats update(const Batch& batch, Rng& rng) override;
  std::string non_finite_network() const override;
  void save(std::ostream& os) const override;

  Vector double_q_targets(const Batch& batch) const;
  const nn::DenseNet& online() const { return q_; }
  const nn::DenseNet& target() const { return q_target_; }

 private:
  TrainConfig config_;
  nn::DenseNet q_, q_target_;
  nn::Adam opt_;
};

enum class LearnerKind { dsac, sac_mlp, ddqn };
std::string to_string(LearnerKind k);
LearnerKind learner_kind_from_string(const std::string& s);

std::unique_ptr<Learner> make_learner(LearnerKind kind, const env::EnvConfig& env_config, const TrainConfig& config);

struct EpisodeMetrics {
  int episode = 0;
  double reward_sum = 0.0;
  double t_tot_s = 0.0;
  double score_tot = 0.0;
  double critic1_loss = 0.0;
  double critic2_loss = 0.0;
  double actor_loss = 0.0;
  double entropy = 0.0;
  int updates = 0;
};

/// Seed of training episode `episode`.
std::uint64_t episode_seed(std::uint64_t train_seed, int episode);

using EpisodeCallback = std::function<void(const EpisodeMetrics&)>;

/// Runs the interaction/update loop: one decision per internal thought, one
/// update round per decision once the buffer holds max(batch, warmup)
/// transitions. Throws TrainingError on non-finite parameters.
std::vector<EpisodeMetrics> train(Learner& learner, const env::EnvConfig& env_config, const TrainConfig& config,
                                  const EpisodeCallback& on_episode = {});

void write_metrics_csv(std::ostream& os, const std::vector<EpisodeMetrics>& metrics);

void save_checkpoint(const std::string& path, const Learner& learner);
std::unique_ptr<Learner> load_checkpoint(const std::string& path);
std::unique_ptr<Learner> load_checkpoint(std::istream& is);

}  // namespace totsched::rl
