#include "totsched/env.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "totsched/errors.hpp"

namespace totsched::env {

namespace {

enum Stream : std::uint64_t { kInstanceStream = 11, kConditionStream = 12 };

int inverse_cdf(const std::vector<double>& probs, double u) {
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size()) - 1;
}

}  // namespace

void MarkovTokenModel::validate() const {
  const auto n = values.size();
  if (n == 0 || transition.size() != n) throw ConfigError("token model: transition matrix must be square over the token values");
  for (std::size_t r = 0; r < n; ++r) {
    if (!(values[r] > 0.0)) throw ConfigError("token model: token values must be positive");
    if (transition[r].size() != n) throw ConfigError("token model: transition matrix must be square");
    double sum = 0.0;
    for (double p : transition[r]) {
      if (p < 0.0) throw ConfigError("token model: negative transition probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-12) throw ConfigError("token model: row " + std::to_string(r) + " does not sum to 1");
  }
}

std::vector<double> MarkovTokenModel::stationary() const {
  const auto n = values.size();
  std::vector<double> pi(n, 1.0 / static_cast<double>(n)), next(n);
  for (int it = 0; it < 100000; ++it) {
    std::fill(next.begin(), next.end(), 0.0);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t c = 0; c < n; ++c) next[c] += pi[r] * transition[r][c];
    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(next[i] - pi[i]));
    pi.swap(next);
    if (diff < 1e-15) break;
  }
  return pi;
}

int MarkovTokenModel::next_state(int state, double u) const {
  return inverse_cdf(transition.at(static_cast<std::size_t>(state)), u);
}

int MarkovTokenModel::initial_state(double u) const { return inverse_cdf(stationary(), u); }

void advance_tokens(const MarkovTokenModel& model, std::vector<int>& states, Rng& rng, std::int64_t slots) {
  if (slots < 0) throw ConfigError("advance_tokens: negative slot count");
  for (std::int64_t t = 0; t < slots; ++t)
    for (auto& s : states) s = model.next_state(s, uniform01(rng));
}

void EnvConfig::validate() const {
  if (sps < 0) throw ConfigError("env.sps must be >= 0");
  if (steps < 1) throw ConfigError("env.steps must be >= 1");
  if (thoughts_per_step < 1) throw ConfigError("env.thoughts_per_step must be >= 1");
  if (score_min < 0.0) throw ConfigError("env.score_min must be >= 0");
  if (!(bandwidth_hz > 0.0 && bs_power_w > 0.0 && sp_power_w > 0.0 && noise_psd > 0.0))
    throw ConfigError("env: bandwidth, powers and noise_psd must be > 0");
  if (!(field_m > 0.0)) throw ConfigError("env.field_m must be > 0");
  if (!(slot_s > 0.0)) throw ConfigError("env.slot_s must be > 0");
  if (!(bs_tokens > 0.0)) throw ConfigError("env.bs_tokens must be > 0");
  if (!(edge_kb_min >= 0.0 && edge_kb_max >= edge_kb_min)) throw ConfigError("env: edge payload bounds are invalid");
  bs_profile.validate();
  tokens.validate();
  for (double v : tokens.values)
    if (!(v < bs_tokens)) throw ConfigError("env: every SP token value must be below the BS token count");
  if (frozen && !(frozen_tokens > 0.0 && frozen_tokens < bs_tokens))
    throw ConfigError("env.frozen_tokens must lie in (0, bs_tokens)");
  if (frozen && !(frozen_gain >= 0.0)) throw ConfigError("env.frozen_gain must be >= 0");
}

int EnvConfig::state_size() const {
  const int servers = sps + 1;
  return servers * sps + sps + (internal_thoughts() + 2) + 1;
}

LgReference lg_reference(const EnvConfig& config) {
  config.validate();
  Rng rng(0);
  const auto dag = tot::ThoughtDag::build(config.steps, config.thoughts_per_step, rng);
  tot::EdgeNetwork net;
  net.profiles = {config.bs_profile};
  net.positions = {{config.field_m / 2, config.field_m / 2}};
  net.tx_power_w = {config.bs_power_w};
  net.bs_tokens = config.bs_tokens;
  net.slot_s = config.slot_s;
  const FrozenConditions cond(1.0, 1.0);
  tot::ScheduleState state(dag, 1);
  for (int i = 0; i < dag.size(); ++i) tot::commit_assignment(dag, state, i, 0, net, cond);
  const auto totals = tot::episode_totals(dag, state);
  return {totals.t_tot, totals.score_tot};
}

double effective_score_min(const EnvConfig& config) {
  if (config.quality_threshold_pct >= 0.0) return config.quality_threshold_pct / 100.0 * lg_reference(config).score_lg;
  return config.score_min;
}

StochasticConditions::StochasticConditions(std::uint64_t seed, int sps, MarkovTokenModel model)
    : seed_(seed), model_(std::move(model)), chains_(static_cast<std::size_t>(sps)) {}

double StochasticConditions::fading_gain(std::int64_t slot, int from, int to) const {
  const double u = to_unit(hash_keys({seed_, 1, static_cast<std::uint64_t>(slot), static_cast<std::uint64_t>(from),
                                      static_cast<std::uint64_t>(to)}));
  return -std::log(1.0 - u);
}

double StochasticConditions::sp_tokens(std::int64_t slot, int sp) const {
  if (sp < 1 || sp > static_cast<int>(chains_.size())) throw ConfigError("SP index " + std::to_string(sp) + " out of range");
  if (slot < 0) throw ConfigError("negative slot");
  auto& chain = chains_[static_cast<std::size_t>(sp - 1)];
  const auto key = [&](std::int64_t t) {
    return to_unit(hash_keys({seed_, 2, static_cast<std::uint64_t>(sp), static_cast<std::uint64_t>(t)}));
  };
  if (chain.empty()) chain.push_back(model_.initial_state(key(0)));
  while (static_cast<std::int64_t>(chain.size()) <= slot) {
    const auto t = static_cast<std::int64_t>(chain.size());
    chain.push_back(model_.next_state(chain.back(), key(t)));
  }
  return model_.values[static_cast<std::size_t>(chain[static_cast<std::size_t>(slot)])];
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) {
  config_.validate();
  score_min_ = effective_score_min(config_);
}

void Environment::build_instance(std::uint64_t instance_seed) {
  Rng rng = make_rng(instance_seed, kInstanceStream);
  const int servers = config_.sps + 1;
  network_ = tot::EdgeNetwork{};
  network_.bandwidth_hz = config_.bandwidth_hz;
  network_.noise_psd = config_.noise_psd;
  network_.unit = config_.distance_unit;
  network_.slot_s = config_.slot_s;
  network_.bs_tokens = config_.bs_tokens;
  network_.profiles.push_back(config_.bs_profile);
  network_.positions.push_back({config_.field_m / 2, config_.field_m / 2});
  network_.tx_power_w.push_back(config_.bs_power_w);
  for (int u = 1; u < servers; ++u) {
    const double x = uniform(rng, 0.0, config_.field_m);
    const double y = uniform(rng, 0.0, config_.field_m);
    network_.positions.push_back({x, y});
    network_.profiles.push_back(genai::sample_sp_profile(config_.sp_ranges, rng, config_.bs_profile.score_max));
    network_.tx_power_w.push_back(config_.sp_power_w);
  }
  dag_ = tot::ThoughtDag::build(config_.steps, config_.thoughts_per_step, rng, config_.edge_kb_min * 8e3,
                                config_.edge_kb_max * 8e3);
}

StateVector Environment::reset(std::uint64_t episode_seed) {
  const bool fixed = config_.frozen || config_.instance == InstanceMode::fixed;
  build_instance(fixed ? config_.seed : episode_seed);
  if (config_.frozen)
    conditions_ = std::make_shared<FrozenConditions>(config_.frozen_gain, config_.frozen_tokens);
  else
    conditions_ = std::make_shared<StochasticConditions>(stream_seed(episode_seed, kConditionStream), config_.sps,
                                                         config_.tokens);
  schedule_ = tot::ScheduleState(dag_, config_.sps + 1);
  tot::commit_assignment(dag_, schedule_, 0, 0, network_, *conditions_);
  // T_{-1} = 0: the first decision is also charged the input thought's finish.
  last_finish_ = 0.0;
  total_penalty_ = 0.0;
  started_ = true;
  done_ = false;
  return observe();
}

double Environment::per_thought_threshold() const {
  return score_min_ / static_cast<double>(config_.internal_thoughts());
}

tot::Placement Environment::preview(int server) const {
  if (!started_ || done_) throw UsageError("preview needs a running episode");
  return tot::predict_finish(dag_, schedule_, schedule_.next_thought(), server, network_, *conditions_);
}

StepResult Environment::step(int action) {
  if (!started_) throw UsageError("step called before reset");
  if (done_) throw UsageError("step called after the episode finished");
  if (action < 0 || action >= action_count())
    throw ActionError("action " + std::to_string(action) + " outside 0.." + std::to_string(action_count() - 1));

  StepResult out;
  const int thought = schedule_.next_thought();
  out.placement = tot::commit_assignment(dag_, schedule_, thought, action, network_, *conditions_);
  double delta = out.placement.finish_s - last_finish_;
  last_finish_ = out.placement.finish_s;
  out.penalty = std::max(0.0, per_thought_threshold() - out.placement.score);
  total_penalty_ += out.penalty;

  if (schedule_.next_thought() == dag_.output_index()) {
    const auto& last = tot::commit_assignment(dag_, schedule_, dag_.output_index(), 0, network_, *conditions_);
    delta += last.finish_s - last_finish_;
    last_finish_ = last.finish_s;
    done_ = true;
  }
  out.reward = (config_.literal_reward ? delta : -delta) - out.penalty;
  out.done = done_;
  out.next = observe();
  return out;
}

StateVector Environment::observe() const {
  if (!started_) throw UsageError("observe called before reset");
  StateVector s;
  const int servers = config_.sps + 1;
  s.servers = servers;
  s.thoughts = dag_.size();
  s.values.reserve(static_cast<std::size_t>(state_size()));

  const int pending = schedule_.complete() ? dag_.output_index() : schedule_.next_thought();
  const std::int64_t slot =
      schedule_.complete() ? schedule_.placement(pending).receive_slot : tot::receive_slot(dag_, schedule_, pending, network_);
  for (int a = 0; a < servers; ++a)
    for (int b = 0; b < servers; ++b)
      if (a != b) s.values.push_back(conditions_->fading_gain(slot, a, b));
  for (int u = 1; u < servers; ++u) s.values.push_back(conditions_->sp_tokens(slot, u));
  for (int i = 0; i < dag_.size(); ++i)
    s.values.push_back(schedule_.committed(i) ? static_cast<double>(schedule_.placement(i).server) : -1.0);
  double payload = 0.0;
  if (!schedule_.complete()) {
    const int source = tot::best_predecessor(dag_, schedule_, dag_.step_of(pending));
    payload = dag_.edge_bits(source, pending);
  }
  s.values.push_back(payload);
  return s;
}

std::vector<double> Environment::normalize(const StateVector& s) const {
  std::vector<double> out = s.values;
  const int servers = s.servers;
  for (int i = s.gains_offset(); i < s.tokens_offset(); ++i) out[i] = std::log10(std::max(out[i], 1e-12));
  for (int i = s.tokens_offset(); i < s.assignment_offset(); ++i) out[i] /= config_.bs_tokens;
  const double scale = std::max(servers - 1, 1);
  for (int i = s.assignment_offset(); i < s.payload_offset(); ++i)
    if (out[i] >= 0.0) out[i] /= scale;
  out[s.payload_offset()] /= 80e3;
  return out;
}

}  // namespace totsched::env
