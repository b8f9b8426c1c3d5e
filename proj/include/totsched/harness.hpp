#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "totsched/env.hpp"
#include "totsched/policies.hpp"
#include "totsched/rl.hpp"

namespace totsched::harness {

/// Shortest round-trip decimal form.
std::string format_double(double v);

struct EpisodeOutcome {
  std::uint64_t seed = 0;
  double t_tot = 0.0;
  double score_tot = 0.0;
  double score_min = 0.0;
  bool constraint_satisfied = true;
  int decisions = 0;
  double act_seconds = 0.0;  // wall-clock spent inside act()
  std::vector<tot::Placement> timeline;
  std::vector<int> step_of;  // DAG step of each thought
};

/// One greedy episode of `policy` on the instance/conditions of `seed`.
EpisodeOutcome run_episode(Policy& policy, const env::EnvConfig& config, std::uint64_t seed);

struct ResultRow {
  std::string policy;
  std::string axis;  // empty outside sweeps
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  double t_tot_mean = 0.0;
  double score_tot_mean = 0.0;
  double score_min = 0.0;
  bool constraint_satisfied = false;
  double ms_per_decision = 0.0;
  std::string error;
};

/// One row per seed, rows in seed order. Policies act greedily.
std::vector<ResultRow> evaluate(Policy& policy, const env::EnvConfig& config, const std::vector<std::uint64_t>& seeds);

/// Deterministic columns only.
void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
/// policy,axis,axis_value,seed,ms_per_decision
void write_timing_csv(std::ostream& os, const std::vector<ResultRow>& rows);

enum class SweepAxis { num_sps, thoughts_per_step, tot_steps, quality_threshold_pct };
std::string to_string(SweepAxis a);
SweepAxis sweep_axis_from_string(const std::string& s);
/// Copy of `base` with the axis set to `value`.
env::EnvConfig apply_axis(const env::EnvConfig& base, SweepAxis axis, double value);

struct SweepSpec {
  SweepAxis axis = SweepAxis::num_sps;
  std::vector<double> values;
  std::vector<std::uint64_t> seeds;
  std::vector<PolicyKind> policies;
  env::EnvConfig env;
  /// Learned policies are trained from scratch in every cell with this config.
  rl::TrainConfig train;

  void validate() const;
};

/// Rows ordered value-major, then policy, then seed. Per-cell failures land
/// in the error column.
std::vector<ResultRow> run_sweep(const SweepSpec& spec);

/// JSON timeline of one episode.
std::string trace_json(const EpisodeOutcome& outcome, const std::string& policy);

}  // namespace totsched::harness
