// totsched command line: fit, train, eval, sweep, trace.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "totsched/config.hpp"
#include "totsched/errors.hpp"
#include "totsched/genai.hpp"
#include "totsched/harness.hpp"
#include "totsched/rl.hpp"

namespace fs = std::filesystem;
using namespace totsched;

namespace {

struct CommonOptions {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir = ".";
  std::string distance_unit;
  std::string actor_q;
  bool literal_reward = false;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("-c,--config", o.config_path, "JSON config file");
  cmd->add_option("-s,--seed", o.seed, "seed for the instance and training streams")->each([&](const std::string&) {
    o.seed_set = true;
  });
  cmd->add_option("-o,--out-dir", o.out_dir, "directory for output files");
  cmd->add_option("--distance-unit", o.distance_unit, "path-loss distance unit")->check(CLI::IsMember({"km", "m"}));
  cmd->add_option("--actor-q", o.actor_q, "critic used by the actor loss")->check(CLI::IsMember({"min", "q1"}));
  cmd->add_flag("--literal-reward", o.literal_reward, "use +delta T as the delay reward term");
}

config::RunConfig resolve(const CommonOptions& o) {
  config::RunConfig c = o.config_path.empty() ? config::parse_config("{}") : config::load_config(o.config_path);
  if (o.seed_set) {
    c.env.seed = o.seed;
    c.train.seed = o.seed;
  }
  if (!o.distance_unit.empty()) c.env.distance_unit = channel::distance_unit_from_string(o.distance_unit);
  if (!o.actor_q.empty()) c.train.actor_q = rl::actor_q_from_string(o.actor_q);
  if (o.literal_reward) c.env.literal_reward = true;
  config::validate(c);
  return c;
}

fs::path out_file(const CommonOptions& o, const std::string& name) {
  fs::create_directories(o.out_dir);
  return fs::path(o.out_dir) / name;
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw IoError("cannot write '" + p.string() + "'");
  return os;
}

std::vector<genai::FitSample> read_fit_csv(const std::string& path, std::string& column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::string header;
  std::getline(in, header);
  if (!header.empty() && header.back() == '\r') header.pop_back();
  if (header == "tokens,score") column = "score";
  else if (header == "tokens,delay_s") column = "delay_s";
  else throw ConfigError(path + ": header must be 'tokens,score' or 'tokens,delay_s'");
  std::vector<genai::FitSample> samples;
  std::string line;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    genai::FitSample s;
    char comma = 0;
    if (!(ls >> s.tokens >> comma >> s.value) || comma != ',')
      throw ConfigError(path + ": line " + std::to_string(line_no) + " is not 'number,number'");
    samples.push_back(s);
  }
  return samples;
}

std::unique_ptr<harness::Policy> make_policy(harness::PolicyKind kind, const std::string& checkpoint) {
  if (!harness::is_learned(kind)) return harness::make_baseline(kind);
  if (checkpoint.empty()) throw IoError("policy '" + harness::to_string(kind) + "' needs --checkpoint");
  std::shared_ptr<rl::Learner> learner = rl::load_checkpoint(checkpoint);
  if (learner->kind() != harness::to_string(kind))
    throw ConfigError("checkpoint holds a '" + learner->kind() + "' learner, not '" + harness::to_string(kind) + "'");
  return std::make_unique<harness::LearnedPolicy>(learner);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Schedule tree-of-thought generation across a BS and edge service providers"};
  app.require_subcommand(1);

  CommonOptions common;

  auto* fit = app.add_subcommand("fit", "fit quality or delay constants to a token CSV");
  add_common(fit, common);
  std::string fit_input;
  double score_max = 10.0;
  fit->add_option("-i,--input", fit_input, "CSV with header tokens,score or tokens,delay_s")->required();
  fit->add_option("--score-max", score_max, "quality ceiling");

  auto* train = app.add_subcommand("train", "train a learner and write metrics.csv and checkpoint.txt");
  add_common(train, common);
  std::string learner_name;
  int episodes = -1;
  train->add_option("--learner", learner_name, "dsac, sac_mlp or ddqn")->check(CLI::IsMember({"dsac", "sac_mlp", "ddqn"}));
  train->add_option("--episodes", episodes, "training episodes")->check(CLI::NonNegativeNumber);

  auto* eval = app.add_subcommand("eval", "evaluate a policy per seed and write eval.csv");
  add_common(eval, common);
  std::string policy_name;
  std::string checkpoint;
  std::vector<std::uint64_t> seeds;
  eval->add_option("--policy", policy_name, "policy to evaluate");
  eval->add_option("--checkpoint", checkpoint, "checkpoint for learned policies");
  eval->add_option("--seeds", seeds, "evaluation seeds");

  auto* sweep = app.add_subcommand("sweep", "run a parameter sweep and write sweep.csv");
  add_common(sweep, common);
  std::string axis;
  std::vector<double> values;
  std::vector<std::string> policies;
  std::vector<std::uint64_t> sweep_seeds;
  sweep->add_option("--axis", axis, "num_sps, thoughts_per_step, tot_steps or quality_threshold_pct");
  sweep->add_option("--values", values, "axis values");
  sweep->add_option("--policies", policies, "policies per cell");
  sweep->add_option("--seeds", sweep_seeds, "seeds per cell");

  auto* trace = app.add_subcommand("trace", "write the timeline of one episode as trace.json");
  add_common(trace, common);
  std::string trace_policy;
  std::string trace_checkpoint;
  std::uint64_t episode_seed = 1;
  trace->add_option("--policy", trace_policy, "policy to trace");
  trace->add_option("--checkpoint", trace_checkpoint, "checkpoint for learned policies");
  trace->add_option("--episode-seed", episode_seed, "seed of the traced episode");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*fit) {
      std::string column;
      const auto samples = read_fit_csv(fit_input, column);
      nlohmann::ordered_json j;
      if (column == "score") {
        const auto f = genai::fit_quality(samples, score_max);
        j = {{"sigma", f.sigma}, {"rho", f.rho}, {"rmse", f.rmse}};
      } else {
        const auto f = genai::fit_delay(samples);
        j = {{"eta", f.eta}, {"psi", f.psi}, {"rmse", f.rmse}};
      }
      const auto text = j.dump(2);
      auto os = open_out(out_file(common, "fit.json"));
      os << text << '\n';
      std::cout << text << '\n';
    } else if (*train) {
      auto c = resolve(common);
      if (!learner_name.empty()) c.learner = rl::learner_kind_from_string(learner_name);
      if (episodes >= 0) c.train.episodes = episodes;
      auto learner = rl::make_learner(c.learner, c.env, c.train);
      const auto metrics = rl::train(*learner, c.env, c.train);
      auto os = open_out(out_file(common, "metrics.csv"));
      rl::write_metrics_csv(os, metrics);
      rl::save_checkpoint(out_file(common, "checkpoint.txt").string(), *learner);
      if (!metrics.empty())
        std::cout << "trained " << learner->kind() << " for " << metrics.size()
                  << " episodes; last T_tot = " << metrics.back().t_tot_s << " s\n";
    } else if (*eval) {
      auto c = resolve(common);
      if (!policy_name.empty()) c.eval.policy = harness::policy_kind_from_string(policy_name);
      if (!checkpoint.empty()) c.eval.checkpoint = checkpoint;
      if (!seeds.empty()) c.eval.seeds = seeds;
      auto policy = make_policy(c.eval.policy, c.eval.checkpoint);
      const auto rows = harness::evaluate(*policy, c.env, c.eval.seeds);
      auto os = open_out(out_file(common, "eval.csv"));
      harness::write_results_csv(os, rows);
      auto ts = open_out(out_file(common, "eval_timing.csv"));
      harness::write_timing_csv(ts, rows);
      double mean = 0.0;
      for (const auto& r : rows) mean += r.t_tot_mean / static_cast<double>(rows.size());
      std::cout << policy->name() << ": mean T_tot = " << mean << " s over " << rows.size() << " seeds\n";
    } else if (*sweep) {
      auto c = resolve(common);
      if (!axis.empty()) c.sweep.axis = harness::sweep_axis_from_string(axis);
      if (!values.empty()) c.sweep.values = values;
      if (!sweep_seeds.empty()) c.sweep.seeds = sweep_seeds;
      if (!policies.empty()) {
        c.sweep.policies.clear();
        for (const auto& p : policies) c.sweep.policies.push_back(harness::policy_kind_from_string(p));
      }
      const auto rows = harness::run_sweep(c.sweep);
      auto os = open_out(out_file(common, "sweep.csv"));
      harness::write_results_csv(os, rows);
      auto ts = open_out(out_file(common, "sweep_timing.csv"));
      harness::write_timing_csv(ts, rows);
      std::cout << "wrote " << rows.size() << " rows\n";
    } else if (*trace) {
      auto c = resolve(common);
      auto kind = trace_policy.empty() ? c.eval.policy : harness::policy_kind_from_string(trace_policy);
      auto policy = make_policy(kind, trace_checkpoint.empty() ? c.eval.checkpoint : trace_checkpoint);
      const auto outcome = harness::run_episode(*policy, c.env, episode_seed);
      auto os = open_out(out_file(common, "trace.json"));
      os << harness::trace_json(outcome, policy->name()) << '\n';
      std::cout << "T_tot = " << outcome.t_tot << " s\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
