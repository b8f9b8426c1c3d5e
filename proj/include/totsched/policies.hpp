#pragma once

#include <memory>
#include <string>

#include "totsched/env.hpp"
#include "totsched/random.hpp"
#include "totsched/rl.hpp"

namespace totsched::harness {

enum class PolicyKind { dsac, sac_mlp, ddqn, greedy_eft, random, local_only };
std::string to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);
/// dsac, sac_mlp and ddqn need a trained learner.
bool is_learned(PolicyKind k);
rl::LearnerKind learner_kind(PolicyKind k);

/// Picks a server for the environment's pending thought.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual int act(const env::Environment& environment, Rng& rng) = 0;
};

/// Minimum predicted finish among servers meeting Score_min / |I|; the
/// highest-scoring server when none does. Ties go to the lower id.
class GreedyEftPolicy final : public Policy {
 public:
  std::string name() const override { return "greedy_eft"; }
  int act(const env::Environment& environment, Rng& rng) override;
};

class RandomPolicy final : public Policy {
 public:
  std::string name() const override { return "random"; }
  int act(const env::Environment& environment, Rng& rng) override;
};

/// Every thought at the BS.
class LocalOnlyPolicy final : public Policy {
 public:
  std::string name() const override { return "local_only"; }
  int act(const env::Environment&, Rng&) override { return 0; }
};

/// Greedy action of a trained learner on the normalized observation.
class LearnedPolicy final : public Policy {
 public:
  explicit LearnedPolicy(std::shared_ptr<const rl::Learner> learner);
  std::string name() const override { return learner_->kind(); }
  int act(const env::Environment& environment, Rng& rng) override;
  const rl::Learner& learner() const { return *learner_; }

 private:
  std::shared_ptr<const rl::Learner> learner_;
};

/// Heuristic policies only; learned kinds throw UsageError.
std::unique_ptr<Policy> make_baseline(PolicyKind kind);

}  // namespace totsched::harness
