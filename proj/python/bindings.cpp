#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "totsched/channel.hpp"
#include "totsched/diffusion.hpp"
#include "totsched/env.hpp"
#include "totsched/errors.hpp"
#include "totsched/genai.hpp"
#include "totsched/harness.hpp"
#include "totsched/rl.hpp"

namespace py = pybind11;
using namespace totsched;

namespace {

std::vector<genai::FitSample> samples(const std::vector<double>& tokens, const std::vector<double>& values) {
  if (tokens.size() != values.size()) throw ConfigError("tokens and values differ in length");
  std::vector<genai::FitSample> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({tokens[i], values[i]});
  return out;
}

std::unique_ptr<harness::Policy> policy_for(const std::string& name, const std::string& checkpoint) {
  const auto kind = harness::policy_kind_from_string(name);
  if (!harness::is_learned(kind)) return harness::make_baseline(kind);
  if (checkpoint.empty()) throw IoError("policy '" + name + "' needs a checkpoint");
  return std::make_unique<harness::LearnedPolicy>(rl::load_checkpoint(checkpoint));
}

}  // namespace

PYBIND11_MODULE(_totsched, m) {
  m.doc() = "Tree-of-thought scheduling across a base station and edge service providers";

  static py::exception<Error> base(m, "TotschedError");
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      py::set_error(config_error, e.what());
    } catch (const Error& e) {
      py::set_error(base, e.what());
    }
  });

  m.def("path_loss_db", &channel::path_loss_db, py::arg("distance"));
  m.def(
      "link_rate",
      [](double bandwidth_hz, double power_w, double noise_psd, double gain, double distance) {
        return channel::link_rate({bandwidth_hz, power_w, noise_psd}, gain, distance);
      },
      py::arg("bandwidth_hz"), py::arg("power_w"), py::arg("noise_psd"), py::arg("gain"), py::arg("distance"));

  m.def(
      "gen_quality",
      [](double sigma, double rho, double tokens, double score_max) {
        return genai::gen_quality({score_max, sigma, rho, 0.05, 0.1, genai::ServerRole::service_provider}, tokens);
      },
      py::arg("sigma"), py::arg("rho"), py::arg("tokens"), py::arg("score_max") = 10.0);
  m.def(
      "gen_delay",
      [](double eta, double psi, double tokens) {
        return genai::gen_delay({10.0, 50.0, 0.085, eta, psi, genai::ServerRole::service_provider}, tokens);
      },
      py::arg("eta"), py::arg("psi"), py::arg("tokens"));
  m.def(
      "fit_quality",
      [](const std::vector<double>& tokens, const std::vector<double>& scores, double score_max) {
        const auto f = genai::fit_quality(samples(tokens, scores), score_max);
        return py::dict(py::arg("sigma") = f.sigma, py::arg("rho") = f.rho, py::arg("rmse") = f.rmse);
      },
      py::arg("tokens"), py::arg("scores"), py::arg("score_max") = 10.0);
  m.def(
      "fit_delay",
      [](const std::vector<double>& tokens, const std::vector<double>& delays) {
        const auto f = genai::fit_delay(samples(tokens, delays));
        return py::dict(py::arg("eta") = f.eta, py::arg("psi") = f.psi, py::arg("rmse") = f.rmse);
      },
      py::arg("tokens"), py::arg("delays"));

  m.def(
      "beta_schedule",
      [](int steps, double beta_min, double beta_max) {
        const auto s = diffusion::beta_schedule(steps, beta_min, beta_max);
        return py::dict(py::arg("beta") = s.beta, py::arg("alpha") = s.alpha, py::arg("alpha_bar") = s.alpha_bar);
      },
      py::arg("steps") = 5, py::arg("beta_min") = 0.1, py::arg("beta_max") = 10.0);

  py::class_<env::EnvConfig>(m, "EnvConfig")
      .def(py::init<>())
      .def_readwrite("sps", &env::EnvConfig::sps)
      .def_readwrite("steps", &env::EnvConfig::steps)
      .def_readwrite("thoughts_per_step", &env::EnvConfig::thoughts_per_step)
      .def_readwrite("score_min", &env::EnvConfig::score_min)
      .def_readwrite("quality_threshold_pct", &env::EnvConfig::quality_threshold_pct)
      .def_readwrite("bandwidth_hz", &env::EnvConfig::bandwidth_hz)
      .def_readwrite("bs_power_w", &env::EnvConfig::bs_power_w)
      .def_readwrite("sp_power_w", &env::EnvConfig::sp_power_w)
      .def_readwrite("noise_psd", &env::EnvConfig::noise_psd)
      .def_readwrite("field_m", &env::EnvConfig::field_m)
      .def_readwrite("slot_s", &env::EnvConfig::slot_s)
      .def_readwrite("literal_reward", &env::EnvConfig::literal_reward)
      .def_readwrite("frozen", &env::EnvConfig::frozen)
      .def_readwrite("seed", &env::EnvConfig::seed)
      .def_property(
          "fixed_instance", [](const env::EnvConfig& c) { return c.instance == env::InstanceMode::fixed; },
          [](env::EnvConfig& c, bool v) { c.instance = v ? env::InstanceMode::fixed : env::InstanceMode::per_episode; })
      .def_property(
          "distance_unit", [](const env::EnvConfig& c) { return channel::to_string(c.distance_unit); },
          [](env::EnvConfig& c, const std::string& s) { c.distance_unit = channel::distance_unit_from_string(s); })
      .def("validate", &env::EnvConfig::validate)
      .def_property_readonly("state_size", &env::EnvConfig::state_size)
      .def_property_readonly("action_count", &env::EnvConfig::action_count);

  m.def(
      "lg_reference",
      [](const env::EnvConfig& c) {
        const auto r = env::lg_reference(c);
        return py::dict(py::arg("t_lg") = r.t_lg, py::arg("score_lg") = r.score_lg);
      },
      py::arg("config"));

  py::class_<env::Environment>(m, "Environment")
      .def(py::init<env::EnvConfig>(), py::arg("config"))
      .def(
          "reset", [](env::Environment& e, std::uint64_t seed) { return e.normalize(e.reset(seed)); },
          py::arg("seed"), "Starts an episode and returns the normalized state.")
      .def(
          "step",
          [](env::Environment& e, int action) {
            auto r = e.step(action);
            return py::make_tuple(e.normalize(r.next), r.reward, r.done);
          },
          py::arg("action"), "Returns (state, reward, done).")
      .def("raw_state", [](const env::Environment& e) { return e.observe().values; })
      .def_property_readonly("done", &env::Environment::done)
      .def_property_readonly("action_count", &env::Environment::action_count)
      .def_property_readonly("state_size", &env::Environment::state_size)
      .def_property_readonly("score_min", &env::Environment::score_min)
      .def("totals", [](const env::Environment& e) {
        const auto t = e.totals();
        return py::dict(py::arg("t_tot") = t.t_tot, py::arg("score_tot") = t.score_tot);
      });

  py::class_<rl::TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("episodes", &rl::TrainConfig::episodes)
      .def_readwrite("gamma", &rl::TrainConfig::gamma)
      .def_readwrite("tau", &rl::TrainConfig::tau)
      .def_readwrite("alpha", &rl::TrainConfig::alpha)
      .def_readwrite("batch_size", &rl::TrainConfig::batch_size)
      .def_readwrite("warmup", &rl::TrainConfig::warmup)
      .def_readwrite("actor_lr", &rl::TrainConfig::actor_lr)
      .def_readwrite("critic_lr", &rl::TrainConfig::critic_lr)
      .def_readwrite("diffusion_steps", &rl::TrainConfig::diffusion_steps)
      .def_readwrite("beta_min", &rl::TrainConfig::beta_min)
      .def_readwrite("beta_max", &rl::TrainConfig::beta_max)
      .def_readwrite("hidden", &rl::TrainConfig::hidden)
      .def_readwrite("seed", &rl::TrainConfig::seed)
      .def_property(
          "actor_q", [](const rl::TrainConfig& c) { return rl::to_string(c.actor_q); },
          [](rl::TrainConfig& c, const std::string& s) { c.actor_q = rl::actor_q_from_string(s); })
      .def("validate", &rl::TrainConfig::validate);

  m.def(
      "train",
      [](const std::string& learner, const env::EnvConfig& env_config, const rl::TrainConfig& train_config,
         const std::string& checkpoint) {
        auto l = rl::make_learner(rl::learner_kind_from_string(learner), env_config, train_config);
        std::vector<rl::EpisodeMetrics> metrics;
        {
          py::gil_scoped_release release;
          metrics = rl::train(*l, env_config, train_config);
        }
        if (!checkpoint.empty()) rl::save_checkpoint(checkpoint, *l);
        py::list rows;
        for (const auto& e : metrics)
          rows.append(py::dict(py::arg("episode") = e.episode, py::arg("reward_sum") = e.reward_sum,
                               py::arg("t_tot_s") = e.t_tot_s, py::arg("score_tot") = e.score_tot,
                               py::arg("critic1_loss") = e.critic1_loss, py::arg("critic2_loss") = e.critic2_loss,
                               py::arg("actor_loss") = e.actor_loss, py::arg("entropy") = e.entropy));
        return rows;
      },
      py::arg("learner"), py::arg("env_config"), py::arg("train_config"), py::arg("checkpoint") = "");

  m.def(
      "evaluate",
      [](const std::string& policy, const env::EnvConfig& config, const std::vector<std::uint64_t>& seeds,
         const std::string& checkpoint) {
        auto p = policy_for(policy, checkpoint);
        py::list rows;
        for (const auto& r : harness::evaluate(*p, config, seeds))
          rows.append(py::dict(py::arg("policy") = r.policy, py::arg("seed") = r.seed, py::arg("t_tot_s") = r.t_tot_mean,
                               py::arg("score_tot") = r.score_tot_mean, py::arg("score_min") = r.score_min,
                               py::arg("constraint_satisfied") = r.constraint_satisfied,
                               py::arg("ms_per_decision") = r.ms_per_decision));
        return rows;
      },
      py::arg("policy"), py::arg("config"), py::arg("seeds"), py::arg("checkpoint") = "");

  m.def(
      "trace",
      [](const std::string& policy, const env::EnvConfig& config, std::uint64_t seed, const std::string& checkpoint) {
        auto p = policy_for(policy, checkpoint);
        return harness::trace_json(harness::run_episode(*p, config, seed), p->name());
      },
      py::arg("policy"), py::arg("config"), py::arg("seed"), py::arg("checkpoint") = "",
      "JSON timeline of one greedy episode.");
}
