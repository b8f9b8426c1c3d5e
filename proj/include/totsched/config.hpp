#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "totsched/env.hpp"
#include "totsched/harness.hpp"
#include "totsched/rl.hpp"

namespace totsched::config {

struct EvalSettings {
  harness::PolicyKind policy = harness::PolicyKind::greedy_eft;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string checkpoint;
};

/// Everything one JSON config file can set. Sections: env, train, eval, sweep.
struct RunConfig {
  env::EnvConfig env;
  rl::TrainConfig train;
  rl::LearnerKind learner = rl::LearnerKind::dsac;
  EvalSettings eval;
  harness::SweepSpec sweep;  // env and train mirror the top-level sections
};

/// Throws ConfigError naming the offending key path, e.g. "env.sps".
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Re-runs every validation after command-line overrides.
void validate(RunConfig& config);

}  // namespace totsched::config
