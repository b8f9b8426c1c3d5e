#include "totsched/harness.hpp"

#include <chrono>
#include <charconv>
#include <ostream>

#include <json.hpp>

#include "totsched/errors.hpp"

namespace totsched::harness {

std::string format_double(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, r.ptr);
}

EpisodeOutcome run_episode(Policy& policy, const env::EnvConfig& config, std::uint64_t seed) {
  env::Environment environment(config);
  environment.reset(seed);
  Rng rng = make_rng(seed, 21);
  EpisodeOutcome out;
  out.seed = seed;
  while (!environment.done()) {
    const auto t0 = std::chrono::steady_clock::now();
    const int action = policy.act(environment, rng);
    out.act_seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    environment.step(action);
    ++out.decisions;
  }
  const auto totals = environment.totals();
  out.t_tot = totals.t_tot;
  out.score_min = environment.score_min();
  out.timeline = environment.schedule().placements();
  // Constraint flag comes from the emitted timeline, not the running totals.
  for (const auto& p : out.timeline) out.score_tot += p.score;
  out.constraint_satisfied = out.score_tot >= out.score_min;
  for (int i = 0; i < environment.dag().size(); ++i) out.step_of.push_back(environment.dag().step_of(i));
  return out;
}

std::vector<ResultRow> evaluate(Policy& policy, const env::EnvConfig& config, const std::vector<std::uint64_t>& seeds) {
  if (seeds.empty()) throw ConfigError("evaluation needs at least one seed");
  std::vector<ResultRow> rows;
  for (auto seed : seeds) {
    const auto o = run_episode(policy, config, seed);
    ResultRow r;
    r.policy = policy.name();
    r.seed = seed;
    r.t_tot_mean = o.t_tot;
    r.score_tot_mean = o.score_tot;
    r.score_min = o.score_min;
    r.constraint_satisfied = o.constraint_satisfied;
    r.ms_per_decision = o.decisions > 0 ? 1e3 * o.act_seconds / o.decisions : 0.0;
    rows.push_back(std::move(r));
  }
  return rows;
}

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "policy,axis,axis_value,seed,t_tot_s,score_tot,score_min,constraint_satisfied,error\n";
  for (const auto& r : rows) {
    std::string err = r.error;
    for (auto& c : err)
      if (c == ',' || c == '\n' || c == '"') c = ' ';
    os << r.policy << ',' << r.axis << ',' << format_double(r.axis_value) << ',' << r.seed << ','
       << format_double(r.t_tot_mean) << ',' << format_double(r.score_tot_mean) << ',' << format_double(r.score_min)
       << ',' << (r.constraint_satisfied ? 1 : 0) << ',' << err << '\n';
  }
}

void write_timing_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  os << "policy,axis,axis_value,seed,ms_per_decision\n";
  for (const auto& r : rows)
    os << r.policy << ',' << r.axis << ',' << format_double(r.axis_value) << ',' << r.seed << ','
       << format_double(r.ms_per_decision) << '\n';
}

std::string to_string(SweepAxis a) {
  switch (a) {
    case SweepAxis::num_sps: return "num_sps";
    case SweepAxis::thoughts_per_step: return "thoughts_per_step";
    case SweepAxis::tot_steps: return "tot_steps";
    case SweepAxis::quality_threshold_pct: return "quality_threshold_pct";
  }
  return "unknown";
}

SweepAxis sweep_axis_from_string(const std::string& s) {
  for (auto a : {SweepAxis::num_sps, SweepAxis::thoughts_per_step, SweepAxis::tot_steps,
                 SweepAxis::quality_threshold_pct})
    if (to_string(a) == s) return a;
  throw ConfigError("unknown sweep axis '" + s + "'");
}

env::EnvConfig apply_axis(const env::EnvConfig& base, SweepAxis axis, double value) {
  env::EnvConfig c = base;
  auto as_int = [&](const char* what) {
    const int v = static_cast<int>(value);
    if (static_cast<double>(v) != value) throw ConfigError(std::string(what) + " sweep values must be integers");
    return v;
  };
  switch (axis) {
    case SweepAxis::num_sps: c.sps = as_int("num_sps"); break;
    case SweepAxis::thoughts_per_step: c.thoughts_per_step = as_int("thoughts_per_step"); break;
    case SweepAxis::tot_steps: c.steps = as_int("tot_steps"); break;
    case SweepAxis::quality_threshold_pct: c.quality_threshold_pct = value; break;
  }
  c.validate();
  return c;
}

void SweepSpec::validate() const {
  if (values.empty()) throw ConfigError("sweep.values must not be empty");
  if (seeds.empty()) throw ConfigError("sweep.seeds must not be empty");
  if (policies.empty()) throw ConfigError("sweep.policies must not be empty");
}

std::vector<ResultRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<ResultRow> rows;
  for (double value : spec.values) {
    for (auto kind : spec.policies) {
      auto fail_all = [&](const std::string& message) {
        for (auto seed : spec.seeds) {
          ResultRow r;
          r.policy = to_string(kind);
          r.axis = to_string(spec.axis);
          r.axis_value = value;
          r.seed = seed;
          r.error = message;
          rows.push_back(std::move(r));
        }
      };
      std::unique_ptr<Policy> policy;
      env::EnvConfig cell_env;
      try {
        cell_env = apply_axis(spec.env, spec.axis, value);
        if (is_learned(kind)) {
          std::shared_ptr<rl::Learner> learner = rl::make_learner(learner_kind(kind), cell_env, spec.train);
          rl::train(*learner, cell_env, spec.train);
          policy = std::make_unique<LearnedPolicy>(learner);
        } else {
          policy = make_baseline(kind);
        }
      } catch (const std::exception& e) {
        fail_all(e.what());
        continue;
      }
      for (auto seed : spec.seeds) {
        ResultRow r;
        try {
          r = evaluate(*policy, cell_env, {seed}).front();
        } catch (const std::exception& e) {
          r = ResultRow{};
          r.seed = seed;
          r.error = e.what();
        }
        r.policy = to_string(kind);
        r.axis = to_string(spec.axis);
        r.axis_value = value;
        rows.push_back(std::move(r));
      }
    }
  }
  return rows;
}

std::string trace_json(const EpisodeOutcome& outcome, const std::string& policy) {
  nlohmann::ordered_json j;
  j["policy"] = policy;
  j["seed"] = outcome.seed;
  j["t_tot_s"] = outcome.t_tot;
  j["score_tot"] = outcome.score_tot;
  j["score_min"] = outcome.score_min;
  j["constraint_satisfied"] = outcome.constraint_satisfied;
  auto& thoughts = j["thoughts"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < outcome.timeline.size(); ++i) {
    const auto& p = outcome.timeline[i];
    thoughts.push_back({{"index", p.thought},
                        {"step", outcome.step_of.at(i)},
                        {"server", p.server},
                        {"ready_s", p.ready_s},
                        {"start_s", p.start_s},
                        {"finish_s", p.finish_s},
                        {"score", p.score},
                        {"tx_bits", p.tx_bits},
                        {"tx_s", p.tx_s}});
  }
  return j.dump(2);
}

}  // namespace totsched::harness
