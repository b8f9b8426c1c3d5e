#include "totsched/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "totsched/errors.hpp"

namespace totsched::config {

namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail("expected an object");
  }

  [[noreturn]] void fail(const std::string& message, const std::string& key = "") const {
    throw ConfigError(where(key) + ": " + message);
  }

  std::string where(const std::string& key) const {
    if (key.empty()) return path_.empty() ? "<root>" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return node_.contains(key);
  }

  void number(const std::string& key, double& out) {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number()) fail("expected a number", key);
    out = v.get<double>();
  }

  void integer(const std::string& key, int& out) {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number_integer()) fail("expected an integer", key);
    out = v.get<int>();
  }

  void unsigned_integer(const std::string& key, std::uint64_t& out) {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_number_unsigned()) fail("expected a non-negative integer", key);
    out = v.get<std::uint64_t>();
  }

  void size(const std::string& key, std::size_t& out) {
    std::uint64_t v = out;
    unsigned_integer(key, v);
    out = static_cast<std::size_t>(v);
  }

  void boolean(const std::string& key, bool& out) {
    if (!has(key)) return;
    const auto& v = node_.at(key);
    if (!v.is_boolean()) fail("expected true or false", key);
    out = v.get<bool>();
  }

  bool string(const std::string& key, std::string& out) {
    if (!has(key)) return false;
    const auto& v = node_.at(key);
    if (!v.is_string()) fail("expected a string", key);
    out = v.get<std::string>();
    return true;
  }

  template <class F>
  void enumerated(const std::string& key, F&& convert) {
    std::string s;
    if (!string(key, s)) return;
    try {
      convert(s);
    } catch (const ConfigError& e) {
      fail(e.what(), key);
    }
  }

  std::vector<double> numbers(const std::string& key, std::size_t min_size = 0) {
    const auto& v = node_.at(key);
    if (!v.is_array()) fail("expected an array of numbers", key);
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) fail("expected a number", key + "[" + std::to_string(i) + "]");
      out.push_back(v[i].get<double>());
    }
    if (out.size() < min_size) fail("expected at least " + std::to_string(min_size) + " entries", key);
    return out;
  }

  void range(const std::string& key, double& lo, double& hi) {
    if (!has(key)) return;
    const auto v = numbers(key);
    if (v.size() != 2) fail("expected [lo, hi]", key);
    lo = v[0];
    hi = v[1];
  }

  Reader child(const std::string& key) {
    seen_.insert(key);
    return Reader(node_.at(key), where(key));
  }

  const json& raw(const std::string& key) const { return node_.at(key); }

  void finish() const {
    for (auto it = node_.begin(); it != node_.end(); ++it)
      if (!seen_.count(it.key())) fail("unknown key", it.key());
  }

  template <class F>
  void check(const std::string& key, F&& validator) const {
    try {
      validator();
    } catch (const ConfigError& e) {
      fail(e.what(), key);
    }
  }

 private:
  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_env(Reader r, env::EnvConfig& c) {
  r.integer("sps", c.sps);
  r.integer("steps", c.steps);
  r.integer("thoughts_per_step", c.thoughts_per_step);
  r.number("score_min", c.score_min);
  r.number("quality_threshold_pct", c.quality_threshold_pct);
  r.number("bandwidth_hz", c.bandwidth_hz);
  r.number("bs_power_w", c.bs_power_w);
  r.number("sp_power_w", c.sp_power_w);
  r.number("noise_psd", c.noise_psd);
  r.number("field_m", c.field_m);
  r.enumerated("distance_unit", [&](const std::string& s) { c.distance_unit = channel::distance_unit_from_string(s); });
  r.number("slot_s", c.slot_s);
  r.number("bs_tokens", c.bs_tokens);
  r.number("edge_kb_min", c.edge_kb_min);
  r.number("edge_kb_max", c.edge_kb_max);
  r.boolean("literal_reward", c.literal_reward);
  r.enumerated("instance", [&](const std::string& s) {
    if (s == "per_episode") c.instance = env::InstanceMode::per_episode;
    else if (s == "fixed") c.instance = env::InstanceMode::fixed;
    else throw ConfigError("expected 'per_episode' or 'fixed'");
  });
  r.boolean("frozen", c.frozen);
  r.number("frozen_gain", c.frozen_gain);
  r.number("frozen_tokens", c.frozen_tokens);
  r.unsigned_integer("seed", c.seed);
  if (r.has("bs_profile")) {
    auto p = r.child("bs_profile");
    p.number("score_max", c.bs_profile.score_max);
    p.number("sigma", c.bs_profile.sigma);
    p.number("rho", c.bs_profile.rho);
    p.number("eta", c.bs_profile.eta);
    p.number("psi", c.bs_profile.psi);
    p.finish();
    p.check("", [&] { c.bs_profile.validate(); });
  }
  if (r.has("sp_ranges")) {
    auto p = r.child("sp_ranges");
    auto& s = c.sp_ranges;
    p.range("sigma", s.sigma_lo, s.sigma_hi);
    p.range("rho", s.rho_lo, s.rho_hi);
    p.range("eta", s.eta_lo, s.eta_hi);
    p.range("psi", s.psi_lo, s.psi_hi);
    p.finish();
  }
  if (r.has("tokens")) {
    auto t = r.child("tokens");
    if (t.has("values")) c.tokens.values = t.numbers("values", 1);
    if (t.has("transition")) {
      const auto& m = t.raw("transition");
      if (!m.is_array()) t.fail("expected an array of rows", "transition");
      c.tokens.transition.clear();
      for (std::size_t i = 0; i < m.size(); ++i) {
        const std::string key = "transition[" + std::to_string(i) + "]";
        if (!m[i].is_array()) t.fail("expected an array of numbers", key);
        std::vector<double> row;
        for (std::size_t k = 0; k < m[i].size(); ++k) {
          if (!m[i][k].is_number()) t.fail("expected a number", key + "[" + std::to_string(k) + "]");
          row.push_back(m[i][k].get<double>());
        }
        c.tokens.transition.push_back(std::move(row));
      }
    }
    t.finish();
    t.check("", [&] { c.tokens.validate(); });
  }
  r.finish();
}

void read_train(Reader r, rl::TrainConfig& c, rl::LearnerKind& learner) {
  r.enumerated("learner", [&](const std::string& s) { learner = rl::learner_kind_from_string(s); });
  r.integer("episodes", c.episodes);
  r.number("gamma", c.gamma);
  r.number("tau", c.tau);
  r.number("alpha", c.alpha);
  r.integer("batch_size", c.batch_size);
  r.size("buffer_capacity", c.buffer_capacity);
  r.integer("warmup", c.warmup);
  r.number("actor_lr", c.actor_lr);
  r.number("critic_lr", c.critic_lr);
  r.integer("diffusion_steps", c.diffusion_steps);
  r.number("beta_min", c.beta_min);
  r.number("beta_max", c.beta_max);
  if (r.has("hidden")) {
    c.hidden.clear();
    for (double h : r.numbers("hidden", 1)) {
      if (h != static_cast<double>(static_cast<int>(h)) || h < 1) r.fail("expected positive integers", "hidden");
      c.hidden.push_back(static_cast<int>(h));
    }
  }
  r.enumerated("activation", [&](const std::string& s) { c.activation = nn::activation_from_string(s); });
  r.enumerated("actor_q", [&](const std::string& s) { c.actor_q = rl::actor_q_from_string(s); });
  r.number("epsilon_start", c.epsilon_start);
  r.number("epsilon_end", c.epsilon_end);
  r.unsigned_integer("seed", c.seed);
  r.finish();
}

std::vector<std::uint64_t> read_seeds(Reader& r, const std::string& key) {
  const auto& v = r.raw(key);
  if (!v.is_array() || v.empty()) r.fail("expected a non-empty array of seeds", key);
  std::vector<std::uint64_t> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number_unsigned()) r.fail("expected a non-negative integer", key + "[" + std::to_string(i) + "]");
    out.push_back(v[i].get<std::uint64_t>());
  }
  return out;
}

void read_eval(Reader r, EvalSettings& c) {
  r.enumerated("policy", [&](const std::string& s) { c.policy = harness::policy_kind_from_string(s); });
  if (r.has("seeds")) c.seeds = read_seeds(r, "seeds");
  r.string("checkpoint", c.checkpoint);
  r.finish();
}

void read_sweep(Reader r, harness::SweepSpec& c) {
  r.enumerated("axis", [&](const std::string& s) { c.axis = harness::sweep_axis_from_string(s); });
  if (r.has("values")) c.values = r.numbers("values", 1);
  if (r.has("seeds")) c.seeds = read_seeds(r, "seeds");
  if (r.has("policies")) {
    const auto& v = r.raw("policies");
    if (!v.is_array()) r.fail("expected an array of policy names", "policies");
    c.policies.clear();
    for (std::size_t i = 0; i < v.size(); ++i) {
      const std::string key = "policies[" + std::to_string(i) + "]";
      if (!v[i].is_string()) r.fail("expected a string", key);
      try {
        c.policies.push_back(harness::policy_kind_from_string(v[i].get<std::string>()));
      } catch (const ConfigError& e) {
        r.fail(e.what(), key);
      }
    }
    if (c.policies.empty()) r.fail("must not be empty", "policies");
  }
  r.finish();
}

}  // namespace

void validate(RunConfig& c) {
  try {
    c.env.validate();
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    throw ConfigError(m.rfind("env", 0) == 0 ? m : "env: " + m);
  }
  try {
    c.train.validate();
  } catch (const ConfigError& e) {
    const std::string m = e.what();
    throw ConfigError(m.rfind("train", 0) == 0 ? m : "train: " + m);
  }
  if (c.eval.seeds.empty()) throw ConfigError("eval.seeds: must not be empty");
  c.sweep.env = c.env;
  c.sweep.train = c.train;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("<root>: invalid JSON: ") + e.what());
  }
  RunConfig c;
  c.sweep.values = {4, 8};
  c.sweep.seeds = {1, 2, 3, 4, 5};
  c.sweep.policies = {harness::PolicyKind::greedy_eft, harness::PolicyKind::local_only};
  Reader r(root, "");
  if (r.has("env")) read_env(r.child("env"), c.env);
  if (r.has("train")) read_train(r.child("train"), c.train, c.learner);
  if (r.has("eval")) read_eval(r.child("eval"), c.eval);
  if (r.has("sweep")) read_sweep(r.child("sweep"), c.sweep);
  r.finish();
  validate(c);
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace totsched::config
