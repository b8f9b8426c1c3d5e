#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include "totsched/channel.hpp"
#include "totsched/genai.hpp"
#include "totsched/random.hpp"
#include "totsched/tot.hpp"

namespace totsched::env {

/// Finite-state Markov chain over SP token capacities.
struct MarkovTokenModel {
  std::vector<double> values{125.0, 100.0, 75.0, 50.0};
  std::vector<std::vector<double>> transition{
      {0.4, 0.3, 0.2, 0.1},
      {0.3, 0.4, 0.2, 0.1},
      {0.1, 0.2, 0.4, 0.3},
      {0.1, 0.2, 0.3, 0.4},
  };

  int states() const { return static_cast<int>(values.size()); }
  /// Square, rows non-negative and summing to 1 within 1e-12, values positive.
  void validate() const;
  /// Row vector pi with pi P = pi, by power iteration.
  std::vector<double> stationary() const;
  /// Inverse-CDF draw of the successor of `state` for a uniform `u` in [0, 1).
  int next_state(int state, double u) const;
  /// Inverse-CDF draw from the stationary distribution.
  int initial_state(double u) const;
};

/// Evolves each entry of `states` independently for `slots` transitions.
void advance_tokens(const MarkovTokenModel& model, std::vector<int>& states, Rng& rng, std::int64_t slots);

enum class InstanceMode { per_episode, fixed };

struct EnvConfig {
  int sps = 4;
  int steps = 6;
  int thoughts_per_step = 6;
  /// Absolute quality threshold; ignored when quality_threshold_pct >= 0.
  double score_min = 0.0;
  /// Threshold as a percentage of the all-BS quality; negative disables.
  double quality_threshold_pct = -1.0;

  double bandwidth_hz = 2e6;
  double bs_power_w = 1.0;
  double sp_power_w = 0.1;
  double noise_psd = 4e-21;
  double field_m = 100.0;
  channel::DistanceUnit distance_unit = channel::DistanceUnit::kilometers;
  double slot_s = 1.0;

  genai::ServerProfile bs_profile{10.0, 50.0, 0.085, 0.05, 0.1, genai::ServerRole::base_station};
  double bs_tokens = 150.0;
  genai::ProfileRanges sp_ranges{};
  double edge_kb_min = 5.0;
  double edge_kb_max = 10.0;
  MarkovTokenModel tokens{};

  bool literal_reward = false;
  InstanceMode instance = InstanceMode::per_episode;
  /// Frozen instances keep every |g|^2 and SP capacity constant, and draw the
  /// DAG, positions and profiles once from `seed`.
  bool frozen = false;
  double frozen_gain = 1.0;
  double frozen_tokens = 100.0;
  std::uint64_t seed = 1;

  void validate() const;
  int internal_thoughts() const { return steps * thoughts_per_step; }
  int state_size() const;
  int action_count() const { return sps + 1; }
};

struct LgReference {
  double t_lg = 0.0;
  double score_lg = 0.0;
};

/// All-thoughts-at-the-BS totals for the config's DAG size.
LgReference lg_reference(const EnvConfig& config);

/// Score_min after resolving a percentage threshold.
double effective_score_min(const EnvConfig& config);

/// Raw observation: gains, SP tokens, assignment vector, payload.
struct StateVector {
  std::vector<double> values;
  int servers = 1;
  int thoughts = 0;

  int gains_offset() const { return 0; }
  int tokens_offset() const { return servers * (servers - 1); }
  int assignment_offset() const { return tokens_offset() + servers - 1; }
  int payload_offset() const { return assignment_offset() + thoughts; }
};

struct StepResult {
  StateVector next;
  double reward = 0.0;
  bool done = false;
  double penalty = 0.0;
  tot::Placement placement;
};

/// Counter-based per-slot fading and lazily simulated token chains.
class StochasticConditions final : public tot::SlotConditions {
 public:
  StochasticConditions(std::uint64_t seed, int sps, MarkovTokenModel model);
  double fading_gain(std::int64_t slot, int from, int to) const override;
  double sp_tokens(std::int64_t slot, int sp) const override;

 private:
  std::uint64_t seed_;
  MarkovTokenModel model_;
  mutable std::vector<std::vector<int>> chains_;  // per SP, state index per slot
};

class FrozenConditions final : public tot::SlotConditions {
 public:
  FrozenConditions(double gain, double tokens) : gain_(gain), tokens_(tokens) {}
  double fading_gain(std::int64_t, int, int) const override { return gain_; }
  double sp_tokens(std::int64_t, int) const override { return tokens_; }

 private:
  double gain_;
  double tokens_;
};

/// Episodic MDP over the ToT timeline: one decision per internal thought.
class Environment {
 public:
  explicit Environment(EnvConfig config);

  StateVector reset(std::uint64_t episode_seed);
  StepResult step(int action);

  bool done() const { return done_; }
  bool started() const { return started_; }
  int pending_thought() const { return schedule_.next_thought(); }
  int action_count() const { return config_.action_count(); }
  int state_size() const { return config_.state_size(); }
  double score_min() const { return score_min_; }
  /// Score_min / |I|.
  double per_thought_threshold() const;

  /// Placement of the pending thought on `server`, without committing.
  tot::Placement preview(int server) const;

  StateVector observe() const;
  /// Scaled copy for the learners: log10 gains, tokens / C0, assignment / U,
  /// payload / 10 KB.
  std::vector<double> normalize(const StateVector& s) const;

  tot::EpisodeTotals totals() const { return tot::episode_totals(dag_, schedule_); }
  double total_penalty() const { return total_penalty_; }

  const EnvConfig& config() const { return config_; }
  const tot::ThoughtDag& dag() const { return dag_; }
  const tot::ScheduleState& schedule() const { return schedule_; }
  const tot::EdgeNetwork& network() const { return network_; }
  const tot::SlotConditions& conditions() const { return *conditions_; }

 private:
  void build_instance(std::uint64_t instance_seed);

  EnvConfig config_;
  double score_min_ = 0.0;
  tot::ThoughtDag dag_;
  tot::EdgeNetwork network_;
  std::shared_ptr<const tot::SlotConditions> conditions_;
  tot::ScheduleState schedule_;
  double last_finish_ = 0.0;
  double total_penalty_ = 0.0;
  bool started_ = false;
  bool done_ = false;
};

}  // namespace totsched::env
