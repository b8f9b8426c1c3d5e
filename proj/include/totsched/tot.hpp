#pragma once

#include <cstdint>
#include <vector>

#include "totsched/channel.hpp"
#include "totsched/genai.hpp"
#include "totsched/random.hpp"

namespace totsched::tot {

struct DagEdge {
  int from = 0;
  int to = 0;
  double bits = 0.0;
};

/// Layered Tree-of-Thoughts graph. Thought 0 is the input, thoughts
/// 1..steps*width are the internal thoughts in step-major order and the last
/// index is the output thought. Every thought of step l depends on every
/// thought of step l-1.
class ThoughtDag {
 public:
  /// Edge payloads are drawn uniformly in [min_bits, max_bits].
  static ThoughtDag build(int steps, int thoughts_per_step, Rng& rng, double min_bits = 5e3 * 8,
                          double max_bits = 10e3 * 8);

  int steps() const { return steps_; }
  int thoughts_per_step() const { return width_; }
  int internal_count() const { return steps_ * width_; }
  int size() const { return internal_count() + 2; }
  int output_index() const { return internal_count() + 1; }

  /// 0 for the input, 1..steps for internal thoughts, steps+1 for the output.
  int step_of(int thought) const;
  int first_of_step(int step) const;
  int step_width(int step) const;

  double edge_bits(int from, int to) const;
  const std::vector<DagEdge>& edges() const { return edges_; }

 private:
  int steps_ = 0;
  int width_ = 0;
  std::vector<DagEdge> edges_;
  std::vector<std::size_t> first_edge_;  // per thought: offset of its first incoming edge
};

/// Per-slot fading gains and SP token capacities.
class SlotConditions {
 public:
  virtual ~SlotConditions() = default;
  virtual double fading_gain(std::int64_t slot, int from, int to) const = 0;
  /// Token capacity of SP `sp` (1-based server id) during `slot`.
  virtual double sp_tokens(std::int64_t slot, int sp) const = 0;
};

/// Servers (index 0 = BS), their placement and their radio parameters.
struct EdgeNetwork {
  std::vector<genai::ServerProfile> profiles;
  std::vector<channel::NodePosition> positions;
  std::vector<double> tx_power_w;
  double bandwidth_hz = 2e6;
  double noise_psd = 4e-21;
  channel::DistanceUnit unit = channel::DistanceUnit::kilometers;
  double slot_s = 1.0;
  double bs_tokens = 150.0;
  double min_distance_m = 1.0;

  int servers() const { return static_cast<int>(profiles.size()); }
  double distance(int from, int to) const;
  double rate(int from, int to, double gain) const;
  double tokens(const SlotConditions& cond, std::int64_t slot, int server) const;
  std::int64_t slot_of(double time_s) const;
};

/// Outcome of placing one thought on one server.
struct Placement {
  int thought = -1;
  int server = -1;
  int source = -1;  // best predecessor j*, -1 for the input thought
  std::int64_t receive_slot = 0;
  std::int64_t start_slot = 0;
  double ready_s = 0.0;
  double start_s = 0.0;
  double finish_s = 0.0;
  double gen_s = 0.0;
  double tokens = 0.0;
  double score = 0.0;
  double tx_bits = 0.0;
  double tx_s = 0.0;
};

class ScheduleState {
 public:
  ScheduleState() = default;
  ScheduleState(const ThoughtDag& dag, int servers);

  int next_thought() const { return next_; }
  bool complete() const { return next_ == static_cast<int>(placements_.size()); }
  bool committed(int thought) const { return thought >= 0 && thought < next_; }
  const Placement& placement(int thought) const;
  const std::vector<Placement>& placements() const { return placements_; }
  double server_available(int server) const { return available_.at(static_cast<std::size_t>(server)); }
  int servers() const { return static_cast<int>(available_.size()); }

 private:
  friend const Placement& commit_assignment(const ThoughtDag&, ScheduleState&, int, int, const EdgeNetwork&,
                                            const SlotConditions&);
  std::vector<double> available_;
  std::vector<Placement> placements_;
  int next_ = 0;
};

/// Highest-scoring thought of step `step - 1`, lowest index on ties.
int best_predecessor(const ThoughtDag& dag, const ScheduleState& state, int step);

/// Slot t_i = floor(max predecessor finish / slot_s) in which `thought` starts
/// receiving its input.
std::int64_t receive_slot(const ThoughtDag& dag, const ScheduleState& state, int thought, const EdgeNetwork& net);

/// Ready/start/finish/score of `thought` on `server` without mutating state.
Placement predict_finish(const ThoughtDag& dag, const ScheduleState& state, int thought, int server,
                         const EdgeNetwork& net, const SlotConditions& cond);

/// Commits the next thought in index order.
const Placement& commit_assignment(const ThoughtDag& dag, ScheduleState& state, int thought, int server,
                                   const EdgeNetwork& net, const SlotConditions& cond);

struct EpisodeTotals {
  double t_tot = 0.0;
  double score_tot = 0.0;
};

EpisodeTotals episode_totals(const ThoughtDag& dag, const ScheduleState& state);

}  // namespace totsched::tot
