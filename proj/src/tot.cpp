#include "totsched/tot.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "totsched/errors.hpp"

namespace totsched::tot {

ThoughtDag ThoughtDag::build(int steps, int thoughts_per_step, Rng& rng, double min_bits, double max_bits) {
  if (steps < 1 || thoughts_per_step < 1) throw ConfigError("ToT needs at least one step and one thought per step");
  if (!(min_bits >= 0.0 && max_bits >= min_bits)) throw ConfigError("edge payload bounds are invalid");
  ThoughtDag dag;
  dag.steps_ = steps;
  dag.width_ = thoughts_per_step;
  dag.first_edge_.assign(static_cast<std::size_t>(dag.size()), 0);
  for (int to = 1; to < dag.size(); ++to) {
    const int l = dag.step_of(to);
    dag.first_edge_[static_cast<std::size_t>(to)] = dag.edges_.size();
    const int first = dag.first_of_step(l - 1);
    for (int from = first; from < first + dag.step_width(l - 1); ++from)
      dag.edges_.push_back({from, to, uniform(rng, min_bits, max_bits)});
  }
  return dag;
}

int ThoughtDag::step_of(int thought) const {
  if (thought < 0 || thought >= size()) throw ConfigError("thought index " + std::to_string(thought) + " out of range");
  if (thought == 0) return 0;
  if (thought == output_index()) return steps_ + 1;
  return (thought - 1) / width_ + 1;
}

int ThoughtDag::first_of_step(int step) const {
  if (step <= 0) return 0;
  if (step > steps_) return output_index();
  return 1 + (step - 1) * width_;
}

int ThoughtDag::step_width(int step) const {
  if (step <= 0 || step > steps_) return 1;
  return width_;
}

double ThoughtDag::edge_bits(int from, int to) const {
  const int l = step_of(to);
  if (l == 0 || step_of(from) != l - 1) throw ConfigError("no edge between thoughts " + std::to_string(from) + " and " + std::to_string(to));
  return edges_[first_edge_[static_cast<std::size_t>(to)] + static_cast<std::size_t>(from - first_of_step(l - 1))].bits;
}

double EdgeNetwork::distance(int from, int to) const {
  const auto& a = positions.at(static_cast<std::size_t>(from));
  const auto& b = positions.at(static_cast<std::size_t>(to));
  const double meters = std::max(std::hypot(a.x - b.x, a.y - b.y), min_distance_m);
  return unit == channel::DistanceUnit::kilometers ? meters / 1000.0 : meters;
}

double EdgeNetwork::rate(int from, int to, double gain) const {
  const channel::LinkParams params{bandwidth_hz, tx_power_w.at(static_cast<std::size_t>(from)), noise_psd};
  return channel::link_rate(params, gain, distance(from, to));
}

double EdgeNetwork::tokens(const SlotConditions& cond, std::int64_t slot, int server) const {
  return server == 0 ? bs_tokens : cond.sp_tokens(slot, server);
}

std::int64_t EdgeNetwork::slot_of(double time_s) const {
  return static_cast<std::int64_t>(std::floor(time_s / slot_s));
}

ScheduleState::ScheduleState(const ThoughtDag& dag, int servers)
    : available_(static_cast<std::size_t>(servers), 0.0), placements_(static_cast<std::size_t>(dag.size())) {
  if (servers < 1) throw ConfigError("schedule needs at least the base station");
}

const Placement& ScheduleState::placement(int thought) const {
  if (!committed(thought)) throw SequencingError("thought " + std::to_string(thought) + " is not committed");
  return placements_[static_cast<std::size_t>(thought)];
}

int best_predecessor(const ThoughtDag& dag, const ScheduleState& state, int step) {
  if (step < 1 || step > dag.steps() + 1) throw ConfigError("step " + std::to_string(step) + " has no predecessors");
  const int first = dag.first_of_step(step - 1);
  const int count = dag.step_width(step - 1);
  int best = -1;
  double best_score = 0.0;
  for (int j = first; j < first + count; ++j) {
    if (!state.committed(j)) throw SequencingError("predecessor " + std::to_string(j) + " is not committed");
    const double s = state.placement(j).score;
    if (best < 0 || s > best_score) {
      best = j;
      best_score = s;
    }
  }
  return best;
}

namespace {

double latest_predecessor_finish(const ThoughtDag& dag, const ScheduleState& state, int thought) {
  const int l = dag.step_of(thought);
  if (l == 0) return 0.0;
  const int first = dag.first_of_step(l - 1);
  double latest = 0.0;
  for (int j = first; j < first + dag.step_width(l - 1); ++j) {
    if (!state.committed(j)) throw SequencingError("predecessor " + std::to_string(j) + " is not committed");
    latest = std::max(latest, state.placement(j).finish_s);
  }
  return latest;
}

}  // namespace

std::int64_t receive_slot(const ThoughtDag& dag, const ScheduleState& state, int thought, const EdgeNetwork& net) {
  return net.slot_of(latest_predecessor_finish(dag, state, thought));
}

Placement predict_finish(const ThoughtDag& dag, const ScheduleState& state, int thought, int server,
                         const EdgeNetwork& net, const SlotConditions& cond) {
  if (server < 0 || server >= net.servers())
    throw ActionError("server " + std::to_string(server) + " out of range");
  if ((thought == 0 || thought == dag.output_index()) && server != 0)
    throw ActionError("input and output thoughts run on the base station");
  if (state.committed(thought)) throw SequencingError("thought " + std::to_string(thought) + " already committed");

  Placement p;
  p.thought = thought;
  p.server = server;
  const int l = dag.step_of(thought);
  const double latest = latest_predecessor_finish(dag, state, thought);
  p.receive_slot = net.slot_of(latest);
  p.ready_s = latest;
  if (l > 0) {
    p.source = best_predecessor(dag, state, l);
    const int from = state.placement(p.source).server;
    if (from != server) {
      p.tx_bits = dag.edge_bits(p.source, thought);
      const double rate = net.rate(from, server, cond.fading_gain(p.receive_slot, from, server));
      p.tx_s = channel::tx_time(p.tx_bits, rate);
      p.ready_s = latest + p.tx_s;
    }
  }
  p.start_s = std::max(p.ready_s, state.server_available(server));
  p.start_slot = net.slot_of(p.start_s);
  p.tokens = net.tokens(cond, p.start_slot, server);
  const auto& profile = net.profiles[static_cast<std::size_t>(server)];
  p.gen_s = genai::gen_delay(profile, p.tokens);
  p.finish_s = p.start_s + p.gen_s;
  p.score = genai::gen_quality(profile, p.tokens);
  return p;
}

const Placement& commit_assignment(const ThoughtDag& dag, ScheduleState& state, int thought, int server,
                                   const EdgeNetwork& net, const SlotConditions& cond) {
  if (state.complete()) throw SequencingError("schedule already complete");
  if (thought != state.next_) throw SequencingError("thoughts are committed in index order; expected " + std::to_string(state.next_));
  Placement p = predict_finish(dag, state, thought, server, net, cond);
  state.available_[static_cast<std::size_t>(server)] = p.finish_s;
  auto& slot = state.placements_[static_cast<std::size_t>(thought)];
  slot = p;
  ++state.next_;
  return slot;
}

EpisodeTotals episode_totals(const ThoughtDag& dag, const ScheduleState& state) {
  if (!state.complete()) throw SequencingError("episode totals need a complete schedule");
  EpisodeTotals t;
  t.t_tot = state.placement(dag.output_index()).finish_s;
  for (const auto& p : state.placements()) t.score_tot += p.score;
  return t;
}

}  // namespace totsched::tot
