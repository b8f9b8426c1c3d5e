#include "totsched/policies.hpp"

#include "totsched/errors.hpp"

namespace totsched::harness {

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::dsac: return "dsac";
    case PolicyKind::sac_mlp: return "sac_mlp";
    case PolicyKind::ddqn: return "ddqn";
    case PolicyKind::greedy_eft: return "greedy_eft";
    case PolicyKind::random: return "random";
    case PolicyKind::local_only: return "local_only";
  }
  return "unknown";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  for (auto k : {PolicyKind::dsac, PolicyKind::sac_mlp, PolicyKind::ddqn, PolicyKind::greedy_eft, PolicyKind::random,
                 PolicyKind::local_only})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown policy '" + s + "'");
}

bool is_learned(PolicyKind k) {
  return k == PolicyKind::dsac || k == PolicyKind::sac_mlp || k == PolicyKind::ddqn;
}

rl::LearnerKind learner_kind(PolicyKind k) {
  switch (k) {
    case PolicyKind::dsac: return rl::LearnerKind::dsac;
    case PolicyKind::sac_mlp: return rl::LearnerKind::sac_mlp;
    case PolicyKind::ddqn: return rl::LearnerKind::ddqn;
    default: throw UsageError("policy '" + to_string(k) + "' is not a learner");
  }
}

int GreedyEftPolicy::act(const env::Environment& environment, Rng&) {
  const double threshold = environment.per_thought_threshold();
  int best = -1;
  double best_finish = 0.0;
  int fallback = 0;
  double fallback_score = 0.0;
  for (int m = 0; m < environment.action_count(); ++m) {
    const auto p = environment.preview(m);
    if (m == 0 || p.score > fallback_score) {
      fallback = m;
      fallback_score = p.score;
    }
    if (p.score >= threshold && (best < 0 || p.finish_s < best_finish)) {
      best = m;
      best_finish = p.finish_s;
    }
  }
  return best >= 0 ? best : fallback;
}

int RandomPolicy::act(const env::Environment& environment, Rng& rng) {
  return uniform_int(rng, environment.action_count());
}

LearnedPolicy::LearnedPolicy(std::shared_ptr<const rl::Learner> learner) : learner_(std::move(learner)) {
  if (!learner_) throw UsageError("learned policy needs a learner");
}

int LearnedPolicy::act(const env::Environment& environment, Rng& rng) {
  if (learner_->state_dim() != environment.state_size() || learner_->action_dim() != environment.action_count())
    throw ConfigError("checkpoint dimensions do not match the environment");
  return learner_->greedy(environment.normalize(environment.observe()), rng);
}

std::unique_ptr<Policy> make_baseline(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::greedy_eft: return std::make_unique<GreedyEftPolicy>();
    case PolicyKind::random: return std::make_unique<RandomPolicy>();
    case PolicyKind::local_only: return std::make_unique<LocalOnlyPolicy>();
    default: throw UsageError("policy '" + to_string(kind) + "' needs a trained learner");
  }
}

}  // namespace totsched::harness
