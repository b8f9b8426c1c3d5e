#include "totsched/rl.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "totsched/errors.hpp"

namespace totsched::rl {

namespace {

enum Stream : std::uint64_t { kInitStream = 1, kExploreStream = 2, kUpdateStream = 3, kEpisodeStream = 1000 };

Matrix column(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

int sample_categorical(const Vector& probs, Rng& rng) {
  const double u = uniform01(rng);
  double acc = 0.0;
  for (int i = 0; i < probs.size(); ++i) {
    acc += probs(i);
    if (u < acc) return i;
  }
  return static_cast<int>(probs.size()) - 1;
}

int argmax(const Eigen::Ref<const Vector>& v) {
  int best = 0;
  for (int i = 1; i < v.size(); ++i)
    if (v(i) > v(best)) best = i;
  return best;
}

std::vector<int> dims_with(int in, const std::vector<int>& hidden, int out) {
  std::vector<int> dims{in};
  dims.insert(dims.end(), hidden.begin(), hidden.end());
  dims.push_back(out);
  return dims;
}

std::string number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

}  // namespace

Batch make_batch(const std::vector<Transition>& transitions) {
  if (transitions.empty()) throw UsageError("empty batch");
  const auto n = static_cast<Eigen::Index>(transitions.size());
  const auto dim = static_cast<Eigen::Index>(transitions.front().state.size());
  Batch b;
  b.states.resize(dim, n);
  b.next_states.resize(dim, n);
  b.rewards.resize(n);
  b.done.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& t = transitions[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(t.state.size()) != dim || static_cast<Eigen::Index>(t.next_state.size()) != dim)
      throw ConfigError("transitions have inconsistent state sizes");
    b.states.col(i) = column(t.state);
    b.next_states.col(i) = column(t.next_state);
    b.actions.push_back(t.action);
    b.rewards(i) = t.reward;
    b.done(i) = t.done ? 1.0 : 0.0;
  }
  return b;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : storage_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be positive");
}

void ReplayBuffer::push(Transition t) {
  storage_[head_] = std::move(t);
  head_ = (head_ + 1) % storage_.size();
  size_ = std::min(size_ + 1, storage_.size());
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw UsageError("replay index out of range");
  const std::size_t oldest = (head_ + storage_.size() - size_) % storage_.size();
  return storage_[(oldest + i) % storage_.size()];
}

std::vector<Transition> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
  if (!ready(batch)) throw UsageError("replay buffer holds fewer transitions than the batch size");
  // Floyd's algorithm: a uniform batch-subset of distinct indices.
  std::vector<std::size_t> picked;
  std::unordered_set<std::size_t> seen;
  for (std::size_t j = size_ - batch; j < size_; ++j) {
    const auto t = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(j + 1));
    const std::size_t pick = seen.count(t) ? j : t;
    seen.insert(pick);
    picked.push_back(pick);
  }
  std::vector<Transition> out;
  out.reserve(batch);
  for (auto i : picked) out.push_back(at(i));
  return out;
}

std::string to_string(ActorQ q) { return q == ActorQ::q1 ? "q1" : "min"; }

ActorQ actor_q_from_string(const std::string& s) {
  if (s == "q1") return ActorQ::q1;
  if (s == "min") return ActorQ::min;
  throw ConfigError("actor_q must be 'q1' or 'min', got '" + s + "'");
}

void TrainConfig::validate() const {
  if (episodes < 0) throw ConfigError("train.episodes must be >= 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("train.gamma must lie in (0, 1]");
  if (!(tau > 0.0 && tau <= 1.0)) throw ConfigError("train.tau must lie in (0, 1]");
  if (!(alpha >= 0.0)) throw ConfigError("train.alpha must be >= 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (buffer_capacity < static_cast<std::size_t>(batch_size)) throw ConfigError("train.buffer_capacity must be >= batch_size");
  if (warmup < 0) throw ConfigError("train.warmup must be >= 0");
  if (!(actor_lr > 0.0 && critic_lr > 0.0)) throw ConfigError("train learning rates must be > 0");
  if (diffusion_steps < 1) throw ConfigError("train.diffusion_steps must be >= 1");
  if (!(beta_min > 0.0 && beta_max > beta_min)) throw ConfigError("train: need 0 < beta_min < beta_max");
  for (int h : hidden)
    if (h < 1) throw ConfigError("train.hidden widths must be >= 1");
  if (!(epsilon_start >= 0.0 && epsilon_start <= 1.0 && epsilon_end >= 0.0 && epsilon_end <= 1.0))
    throw ConfigError("train epsilons must lie in [0, 1]");
}

double epsilon_at(int episode, const TrainConfig& config) {
  const double horizon = config.episodes / 2.0;
  const double frac = horizon > 0.0 ? std::min(1.0, episode / horizon) : 1.0;
  return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;
}

DiffusionActor::DiffusionActor(diffusion::Denoiser denoiser, diffusion::DiffusionSchedule schedule)
    : denoiser_(std::move(denoiser)), schedule_(std::move(schedule)) {}

diffusion::ChainNoise DiffusionActor::draw_noise(int batch, Rng& rng) const {
  return diffusion::draw_noise(denoiser_.action_dim(), batch, schedule_, rng);
}

Matrix DiffusionActor::logits(const Matrix& states, const diffusion::ChainNoise& noise) const {
  return diffusion::run_chain(denoiser_, states, schedule_, noise);
}

Matrix DiffusionActor::forward(const Matrix& states, const diffusion::ChainNoise& noise) {
  auto [x0, tape] = diffusion::chain_forward(denoiser_, states, schedule_, noise);
  tape_ = std::move(tape);
  return x0;
}

nn::Gradients DiffusionActor::backward(const Matrix& dlogits) {
  return diffusion::chain_backward(denoiser_, tape_, dlogits, schedule_);
}

std::unique_ptr<Actor> DiffusionActor::clone() const {
  return std::make_unique<DiffusionActor>(denoiser_, schedule_);
}

MlpActor::MlpActor(nn::DenseNet net) : net_(std::move(net)) {}

Matrix MlpActor::forward(const Matrix& states, const diffusion::ChainNoise&) {
  auto [out, tape] = nn::forward(net_, states);
  tape_ = std::move(tape);
  return out;
}

nn::Gradients MlpActor::backward(const Matrix& dlogits) { return nn::backward(tape_, dlogits); }

std::unique_ptr<Actor> MlpActor::clone() const { return std::make_unique<MlpActor>(net_); }

Vector policy_entropy(const Matrix& logits) {
  const Matrix logp = diffusion::log_softmax_columns(logits);
  const Matrix p = logp.array().exp().matrix();
  return -(p.array() * logp.array()).colwise().sum().transpose();
}

Vector soft_bellman_targets(const Batch& batch, const Matrix& next_logits, const nn::DenseNet& q1_target,
                            const nn::DenseNet& q2_target, double gamma, double alpha) {
  const Matrix logp = diffusion::log_softmax_columns(next_logits);
  const Matrix p = logp.array().exp().matrix();
  const Matrix q = q1_target(batch.next_states).cwiseMin(q2_target(batch.next_states));
  Vector y(batch.size());
  for (int i = 0; i < batch.size(); ++i) {
    if (batch.done(i) > 0.5) {
      y(i) = batch.rewards(i);
      continue;
    }
    double v = 0.0;
    for (Eigen::Index a = 0; a < p.rows(); ++a) v += p(a, i) * (q(a, i) - alpha * logp(a, i));
    y(i) = batch.rewards(i) + gamma * v;
  }
  if (!y.allFinite()) throw NumericError("soft Bellman targets are not finite");
  return y;
}

LossWithAdjoint critic_loss(const Matrix& q_values, const std::vector<int>& actions, const Vector& targets) {
  const auto n = static_cast<Eigen::Index>(actions.size());
  if (n == 0 || q_values.cols() != n || targets.size() != n) throw ConfigError("critic loss shape mismatch");
  LossWithAdjoint out;
  out.adjoint = Matrix::Zero(q_values.rows(), n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const int a = actions[static_cast<std::size_t>(i)];
    const double delta = q_values(a, i) - targets(i);
    out.loss += 0.5 * delta * delta;
    out.adjoint(a, i) = delta / static_cast<double>(n);
  }
  out.loss /= static_cast<double>(n);
  return out;
}

LossWithAdjoint actor_loss(const Matrix& logits, const Matrix& q_values, double alpha) {
  if (logits.rows() != q_values.rows() || logits.cols() != q_values.cols() || logits.cols() == 0)
    throw ConfigError("actor loss shape mismatch");
  const auto n = static_cast<double>(logits.cols());
  const Matrix logp = diffusion::log_softmax_columns(logits);
  const Matrix p = logp.array().exp().matrix();
  LossWithAdjoint out;
  out.adjoint.resize(logits.rows(), logits.cols());
  for (Eigen::Index c = 0; c < logits.cols(); ++c) {
    // f_a = alpha log p_a - Q_a; d(sum_a p_a f_a)/dp_a = f_a + alpha.
    const Vector f = alpha * logp.col(c) - q_values.col(c);
    const double value = p.col(c).dot(f);
    out.loss += value;
    out.entropy += -p.col(c).dot(logp.col(c));
    const Vector g = f.array() + alpha;
    const double mean_g = p.col(c).dot(g);
    out.adjoint.col(c) = (p.col(c).array() * (g.array() - mean_g)).matrix() / n;
  }
  out.loss /= n;
  out.entropy /= n;
  return out;
}

SoftActorCritic::SoftActorCritic(std::unique_ptr<Actor> actor, const TrainConfig& config, Rng& init_rng)
    : config_(config), actor_(std::move(actor)) {
  config_.validate();
  const auto dims = dims_with(actor_->state_dim(), config_.hidden, actor_->action_dim());
  q1_ = nn::DenseNet::make(dims, config_.activation, nn::Activation::identity, init_rng);
  q2_ = nn::DenseNet::make(dims, config_.activation, nn::Activation::identity, init_rng);
  q1_target_ = q1_;
  q2_target_ = q2_;
  actor_opt_ = nn::Adam(actor_->net(), config_.actor_lr);
  q1_opt_ = nn::Adam(q1_, config_.critic_lr);
  q2_opt_ = nn::Adam(q2_, config_.critic_lr);
}

SoftActorCritic::SoftActorCritic(std::unique_ptr<Actor> actor, nn::DenseNet q1, nn::DenseNet q2,
                                 nn::DenseNet q1_target, nn::DenseNet q2_target, const TrainConfig& config)
    : config_(config),
      actor_(std::move(actor)),
      q1_(std::move(q1)),
      q2_(std::move(q2)),
      q1_target_(std::move(q1_target)),
      q2_target_(std::move(q2_target)) {
  actor_opt_ = nn::Adam(actor_->net(), config_.actor_lr);
  q1_opt_ = nn::Adam(q1_, config_.critic_lr);
  q2_opt_ = nn::Adam(q2_, config_.critic_lr);
}

int SoftActorCritic::explore(const std::vector<double>& state, int, Rng& rng) {
  const auto noise = actor_->draw_noise(1, rng);
  const Vector probs = diffusion::policy_distribution(actor_->logits(column(state), noise).col(0));
  return sample_categorical(probs, rng);
}

int SoftActorCritic::greedy(const std::vector<double>& state, Rng& rng) const {
  const auto noise = actor_->draw_noise(1, rng);
  return diffusion::greedy_action(actor_->logits(column(state), noise).col(0));
}

Vector SoftActorCritic::critic_targets(const Batch& batch, Rng& rng) const {
  const auto noise = actor_->draw_noise(batch.size(), rng);
  const Matrix next_logits = actor_->logits(batch.next_states, noise);
  return soft_bellman_targets(batch, next_logits, q1_target_, q2_target_, config_.gamma, config_.alpha);
}

std::pair<double, double> SoftActorCritic::update_critics(const Batch& batch, const Vector& targets) {
  auto step = [&](nn::DenseNet& q, nn::Adam& opt) {
    auto [values, tape] = nn::forward(q, batch.states);
    const auto loss = critic_loss(values, batch.actions, targets);
    opt.step(q, nn::backward(tape, loss.adjoint));
    return loss.loss;
  };
  const double l1 = step(q1_, q1_opt_);
  const double l2 = step(q2_, q2_opt_);
  return {l1, l2};
}

double SoftActorCritic::update_actor(const Batch& batch, Rng& rng, double* entropy) {
  const auto noise = actor_->draw_noise(batch.size(), rng);
  const Matrix logits = actor_->forward(batch.states, noise);
  Matrix q = q1_(batch.states);
  if (config_.actor_q == ActorQ::min) q = q.cwiseMin(q2_(batch.states));
  const auto loss = actor_loss(logits, q, config_.alpha);
  actor_opt_.step(actor_->net(), actor_->backward(loss.adjoint));
  if (entropy) *entropy = loss.entropy;
  return loss.loss;
}

void SoftActorCritic::soft_update_targets() {
  nn::soft_update(q1_target_, q1_, config_.tau);
  nn::soft_update(q2_target_, q2_, config_.tau);
}

UpdateStats SoftActorCritic::update(const Batch& batch, Rng& rng) {
  UpdateStats s;
  const Vector y = critic_targets(batch, rng);
  std::tie(s.critic1_loss, s.critic2_loss) = update_critics(batch, y);
  s.actor_loss = update_actor(batch, rng, &s.entropy);
  soft_update_targets();
  return s;
}

std::string SoftActorCritic::non_finite_network() const {
  if (!actor_->net().all_finite()) return "actor";
  if (!q1_.all_finite()) return "critic1";
  if (!q2_.all_finite()) return "critic2";
  if (!q1_target_.all_finite()) return "target1";
  if (!q2_target_.all_finite()) return "target2";
  return {};
}

void SoftActorCritic::save(std::ostream& os) const {
  os << "totsched_checkpoint 1\n";
  os << "kind " << kind() << '\n';
  os << "dims " << state_dim() << ' ' << action_dim() << '\n';
  if (const auto* d = dynamic_cast<const DiffusionActor*>(actor_.get())) {
    const auto& s = d->schedule();
    os << "diffusion " << s.steps << ' ' << number(s.beta_min) << ' ' << number(s.beta_max) << ' '
       << d->denoiser().embed_dim() << '\n';
  }
  os << "net actor\n";
  actor_->net().save(os);
  os << "net critic1\n";
  q1_.save(os);
  os << "net critic2\n";
  q2_.save(os);
  os << "net target1\n";
  q1_target_.save(os);
  os << "net target2\n";
  q2_target_.save(os);
  os << "end\n";
}

DoubleDqn::DoubleDqn(int state_dim, int action_dim, const TrainConfig& config, Rng& init_rng) : config_(config) {
  config_.validate();
  q_ = nn::DenseNet::make(dims_with(state_dim, config_.hidden, action_dim), config_.activation,
                          nn::Activation::identity, init_rng);
  q_target_ = q_;
  opt_ = nn::Adam(q_, config_.critic_lr);
}

DoubleDqn::DoubleDqn(nn::DenseNet q, nn::DenseNet q_target, const TrainConfig& config)
    : config_(config), q_(std::move(q)), q_target_(std::move(q_target)) {
  opt_ = nn::Adam(q_, config_.critic_lr);
}

int DoubleDqn::explore(const std::vector<double>& state, int episode, Rng& rng) {
  if (uniform01(rng) < epsilon_at(episode, config_)) return uniform_int(rng, action_dim());
  Rng unused(0);
  return greedy(state, unused);
}

int DoubleDqn::greedy(const std::vector<double>& state, Rng&) const {
  return argmax(q_(column(state)).col(0));
}

Vector DoubleDqn::double_q_targets(const Batch& batch) const {
  const Matrix online = q_(batch.next_states);
  const Matrix target = q_target_(batch.next_states);
  Vector y(batch.size());
  for (int i = 0; i < batch.size(); ++i) {
    y(i) = batch.rewards(i);
    if (batch.done(i) < 0.5) y(i) += config_.gamma * target(argmax(online.col(i)), i);
  }
  return y;
}

UpdateStats DoubleDqn::update(const Batch& batch, Rng&) {
  UpdateStats s;
  const Vector y = double_q_targets(batch);
  auto [values, tape] = nn::forward(q_, batch.states);
  const auto loss = critic_loss(values, batch.actions, y);
  opt_.step(q_, nn::backward(tape, loss.adjoint));
  nn::soft_update(q_target_, q_, config_.tau);
  s.critic1_loss = loss.loss;
  return s;
}

std::string DoubleDqn::non_finite_network() const {
  if (!q_.all_finite()) return "online";
  if (!q_target_.all_finite()) return "target";
  return {};
}

void DoubleDqn::save(std::ostream& os) const {
  os << "totsched_checkpoint 1\n";
  os << "kind ddqn\n";
  os << "dims " << state_dim() << ' ' << action_dim() << '\n';
  os << "net online\n";
  q_.save(os);
  os << "net target\n";
  q_target_.save(os);
  os << "end\n";
}

std::string to_string(LearnerKind k) {
  switch (k) {
    case LearnerKind::dsac: return "dsac";
    case LearnerKind::sac_mlp: return "sac_mlp";
    case LearnerKind::ddqn: return "ddqn";
  }
  return "dsac";
}

LearnerKind learner_kind_from_string(const std::string& s) {
  if (s == "dsac") return LearnerKind::dsac;
  if (s == "sac_mlp") return LearnerKind::sac_mlp;
  if (s == "ddqn") return LearnerKind::ddqn;
  throw ConfigError("unknown learner '" + s + "'");
}

std::unique_ptr<Learner> make_learner(LearnerKind kind, const env::EnvConfig& env_config, const TrainConfig& config) {
  config.validate();
  const int state_dim = env_config.state_size();
  const int action_dim = env_config.action_count();
  Rng rng = make_rng(config.seed, kInitStream);
  switch (kind) {
    case LearnerKind::dsac: {
      diffusion::Denoiser denoiser(action_dim, state_dim, config.hidden, config.activation, rng);
      auto actor = std::make_unique<DiffusionActor>(
          std::move(denoiser), diffusion::beta_schedule(config.diffusion_steps, config.beta_min, config.beta_max));
      return std::make_unique<SoftActorCritic>(std::move(actor), config, rng);
    }
    case LearnerKind::sac_mlp: {
      auto net = nn::DenseNet::make(dims_with(state_dim, config.hidden, action_dim), config.activation,
                                    nn::Activation::identity, rng);
      return std::make_unique<SoftActorCritic>(std::make_unique<MlpActor>(std::move(net)), config, rng);
    }
    case LearnerKind::ddqn:
      return std::make_unique<DoubleDqn>(state_dim, action_dim, config, rng);
  }
  throw ConfigError("unknown learner kind");
}

std::uint64_t episode_seed(std::uint64_t train_seed, int episode) {
  return stream_seed(train_seed, kEpisodeStream + static_cast<std::uint64_t>(episode));
}

std::vector<EpisodeMetrics> train(Learner& learner, const env::EnvConfig& env_config, const TrainConfig& config,
                                  const EpisodeCallback& on_episode) {
  config.validate();
  env::Environment environment(env_config);
  if (learner.state_dim() != environment.state_size() || learner.action_dim() != environment.action_count())
    throw ConfigError("learner dimensions do not match the environment");
  ReplayBuffer buffer(config.buffer_capacity);
  Rng explore_rng = make_rng(config.seed, kExploreStream);
  Rng update_rng = make_rng(config.seed, kUpdateStream);
  const auto ready_at = static_cast<std::size_t>(std::max(config.batch_size, config.warmup));

  std::vector<EpisodeMetrics> metrics;
  for (int e = 0; e < config.episodes; ++e) {
    EpisodeMetrics m;
    m.episode = e;
    auto state = environment.normalize(environment.reset(episode_seed(config.seed, e)));
    int decision = 0;
    while (!environment.done()) {
      const int action = learner.explore(state, e, explore_rng);
      auto result = environment.step(action);
      auto next = environment.normalize(result.next);
      m.reward_sum += result.reward;
      buffer.push({state, action, result.reward, next, result.done});
      state = std::move(next);
      if (buffer.size() >= ready_at) {
        const auto batch = make_batch(buffer.sample(static_cast<std::size_t>(config.batch_size), update_rng));
        UpdateStats s;
        try {
          s = learner.update(batch, update_rng);
        } catch (const NumericError& err) {
          throw TrainingError(std::string(err.what()) + " at episode " + std::to_string(e));
        }
        m.critic1_loss += s.critic1_loss;
        m.critic2_loss += s.critic2_loss;
        m.actor_loss += s.actor_loss;
        m.entropy += s.entropy;
        ++m.updates;
        const auto bad = learner.non_finite_network();
        if (!bad.empty())
          throw TrainingError("non-finite parameters in " + bad + " at episode " + std::to_string(e) + ", decision " +
                              std::to_string(decision));
      }
      ++decision;
    }
    if (m.updates > 0) {
      m.critic1_loss /= m.updates;
      m.critic2_loss /= m.updates;
      m.actor_loss /= m.updates;
      m.entropy /= m.updates;
    }
    const auto totals = environment.totals();
    m.t_tot_s = totals.t_tot;
    m.score_tot = totals.score_tot;
    const double expected =
        (env_config.literal_reward ? totals.t_tot : -totals.t_tot) - environment.total_penalty();
    if (std::abs(m.reward_sum - expected) > 1e-9 * std::max(1.0, std::abs(expected)))
      throw TrainingError("reward accounting mismatch at episode " + std::to_string(e));
    if (on_episode) on_episode(m);
    metrics.push_back(m);
  }
  return metrics;
}

void write_metrics_csv(std::ostream& os, const std::vector<EpisodeMetrics>& metrics) {
  os << "episode,reward_sum,t_tot_s,score_tot,critic1_loss,critic2_loss,actor_loss,entropy\n";
  for (const auto& m : metrics) {
    os << m.episode << ',' << number(m.reward_sum) << ',' << number(m.t_tot_s) << ',' << number(m.score_tot) << ','
       << number(m.critic1_loss) << ',' << number(m.critic2_loss) << ',' << number(m.actor_loss) << ','
       << number(m.entropy) << '\n';
  }
}

void save_checkpoint(const std::string& path, const Learner& learner) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot write checkpoint '" + path + "'");
  learner.save(os);
  if (!os) throw IoError("failed writing checkpoint '" + path + "'");
}

std::unique_ptr<Learner> load_checkpoint(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open checkpoint '" + path + "'");
  return load_checkpoint(is);
}

std::unique_ptr<Learner> load_checkpoint(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string tok;
    if (!(is >> tok) || tok != word) throw IoError("checkpoint: expected '" + word + "', got '" + tok + "'");
  };
  expect("totsched_checkpoint");
  int version = 0;
  if (!(is >> version) || version != 1) throw IoError("checkpoint: unsupported version");
  expect("kind");
  std::string kind;
  is >> kind;
  expect("dims");
  int state_dim = 0, action_dim = 0;
  if (!(is >> state_dim >> action_dim)) throw IoError("checkpoint: bad dims");
  TrainConfig config;
  auto read_net = [&](const std::string& name) {
    expect("net");
    expect(name);
    return nn::DenseNet::load(is);
  };
  std::unique_ptr<Learner> learner;
  if (kind == "ddqn") {
    auto q = read_net("online");
    auto t = read_net("target");
    learner = std::make_unique<DoubleDqn>(std::move(q), std::move(t), config);
  } else if (kind == "dsac" || kind == "sac_mlp") {
    std::unique_ptr<Actor> actor;
    if (kind == "dsac") {
      expect("diffusion");
      int steps = 0, embed = 0;
      std::string bmin, bmax;
      if (!(is >> steps >> bmin >> bmax >> embed)) throw IoError("checkpoint: bad diffusion header");
      const auto schedule = diffusion::beta_schedule(steps, std::stod(bmin), std::stod(bmax));
      auto net = read_net("actor");
      actor = std::make_unique<DiffusionActor>(diffusion::Denoiser(std::move(net), action_dim, state_dim, embed), schedule);
    } else {
      actor = std::make_unique<MlpActor>(read_net("actor"));
    }
    auto q1 = read_net("critic1");
    auto q2 = read_net("critic2");
    auto t1 = read_net("target1");
    auto t2 = read_net("target2");
    learner = std::make_unique<SoftActorCritic>(std::move(actor), std::move(q1), std::move(q2), std::move(t1),
                                                std::move(t2), config);
  } else {
    throw IoError("checkpoint: unknown kind '" + kind + "'");
  }
  expect("end");
  if (learner->state_dim() != state_dim || learner->action_dim() != action_dim)
    throw IoError("checkpoint: network dims disagree with header");
  return learner;
}

}  // namespace totsched::rl
