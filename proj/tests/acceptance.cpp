// Acceptance checks 1-10. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. `acceptance 3 5` runs a subset.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "totsched/diffusion.hpp"
#include "totsched/env.hpp"
#include "totsched/genai.hpp"
#include "totsched/harness.hpp"
#include "totsched/rl.hpp"

using namespace totsched;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const auto n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

// Hyper-parameters for the desk-scale learning runs.
rl::TrainConfig desk_train(int episodes, std::uint64_t seed) {
  rl::TrainConfig t;
  t.episodes = episodes;
  t.hidden = {64, 64};
  t.alpha = 0.3;
  t.beta_max = 1.0;
  t.actor_lr = 1e-3;
  t.critic_lr = 1e-3;
  t.tau = 0.02;
  t.warmup = 200;
  t.seed = seed;
  return t;
}

// 1. All-BS closed form.
Outcome lg_closed_form() {
  env::EnvConfig c;
  const auto lg = env::lg_reference(c);
  const double per_thought = 10.0 - 50.0 * std::exp(-0.085 * 150.0);
  harness::LocalOnlyPolicy local;
  const auto o = harness::run_episode(local, c, 1);
  double worst = 0.0;
  for (const auto& p : o.timeline) worst = std::max(worst, rel(p.score, per_thought));
  const bool ok = rel(lg.t_lg, 288.8) <= 1e-9 && rel(o.t_tot, 288.8) <= 1e-9 && worst <= 1e-9 &&
                  std::abs(per_thought - 9.99986) < 1e-5;
  return {ok, fmt("T_LG=%.10g s, per-thought score=%.8g, max rel err %.2g", lg.t_lg, per_thought, worst)};
}

// 2. Scheduler vs event-list recomputation over all 81 assignments.
Outcome timeline_oracle() {
  const auto cfg = oracle::tiny_frozen();
  env::Environment e(cfg);
  int total = 0, agree = 0;
  oracle::for_each_assignment(cfg.internal_thoughts(), cfg.sps + 1, [&](const std::vector<int>& a) {
    e.reset(1);
    for (int s : a) e.step(s);
    const auto ref = oracle::recompute(e, oracle::with_sentinels(a));
    bool same = e.totals().t_tot == ref.t_tot && e.totals().score_tot == ref.score_tot;
    for (std::size_t i = 0; i < ref.finish.size(); ++i)
      same = same && e.schedule().placements()[i].finish_s == ref.finish[i];
    ++total;
    agree += same;
  });
  return {total == 81 && agree == 81, fmt("%g/%g assignments identical", agree, total)};
}

// 3. Fit recovery.
Outcome fit_recovery() {
  const genai::ServerProfile q{10.0, 49.13, 0.046, 0.025, 0.062, genai::ServerRole::service_provider};
  std::vector<genai::FitSample> qs, ds;
  for (double c = 20; c <= 150; c += 10) {
    qs.push_back({c, genai::gen_quality(q, c)});
    ds.push_back({c, genai::gen_delay(q, c)});
  }
  const auto fq = genai::fit_quality(qs);
  const auto fd = genai::fit_delay(ds);
  const double clean = std::max({rel(fq.sigma, 49.13), rel(fq.rho, 0.046), rel(fd.eta, 0.025), rel(fd.psi, 0.062)});

  // Noisy trials: quality over C = 20..100 (kept below the ceiling), delay
  // over C = 10..150; 20 replicates per token count, noise std 0.1. The
  // intercept psi = 0.062 is small against the noise, so the trial size is
  // chosen to put 5% near three standard errors of the median.
  Rng rng = make_rng(2024, 3);
  std::vector<double> sig, rho, eta, psi;
  for (int t = 0; t < 100; ++t) {
    std::vector<genai::FitSample> nq, nd;
    for (int r = 0; r < 20; ++r) {
      for (double c = 20; c <= 100; c += 5) nq.push_back({c, genai::gen_quality(q, c) + 0.1 * standard_normal(rng)});
      for (double c = 10; c <= 150; c += 5) nd.push_back({c, genai::gen_delay(q, c) + 0.1 * standard_normal(rng)});
    }
    const auto a = genai::fit_quality(nq);
    const auto b = genai::fit_delay(nd);
    sig.push_back(a.sigma);
    rho.push_back(a.rho);
    eta.push_back(b.eta);
    psi.push_back(b.psi);
  }
  const double noisy = std::max({rel(median(sig), 49.13), rel(median(rho), 0.046), rel(median(eta), 0.025),
                                 rel(median(psi), 0.062)});
  return {clean <= 1e-6 && noisy <= 0.05, fmt("noiseless max rel err %.2g; noisy median max rel err %.3g", clean, noisy)};
}

// 4. Finite-difference checks of raw nets, critic loss and the full actor loss.
Outcome gradient_integrity() {
  Rng rng = make_rng(4, 4);
  auto randm = [&](int r, int c) {
    nn::Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = standard_normal(rng);
    return m;
  };
  // Compares on all coordinates when the net is small, on 60 random ones otherwise.
  auto compare = [&](const std::vector<double>& params, const std::vector<double>& analytic,
                     const std::function<double(const std::vector<double>&)>& f) {
    std::vector<std::size_t> idx;
    if (params.size() <= 3000) {
      for (std::size_t i = 0; i < params.size(); ++i) idx.push_back(i);
    } else {
      for (int i = 0; i < 60; ++i) idx.push_back(static_cast<std::size_t>(uniform01(rng) * params.size()));
    }
    std::vector<double> a, n;
    std::vector<double> p = params;
    const double h = 1e-5;
    for (auto i : idx) {
      const double keep = p[i];
      p[i] = keep + h;
      const double up = f(p);
      p[i] = keep - h;
      const double down = f(p);
      p[i] = keep;
      a.push_back(analytic[i]);
      n.push_back((up - down) / (2 * h));
    }
    return oracle::relative_error(a, n);
  };
  const nn::Activation acts[] = {nn::Activation::mish, nn::Activation::tanh, nn::Activation::identity};
  double worst = 0.0;
  int cases = 0;

  for (int c = 0; c < 40; ++c, ++cases) {  // raw nets
    const int in = 2 + c % 5, out = 1 + c % 4, batch = 1 + c % 3;
    auto net = nn::DenseNet::make({in, 8 + c % 7, 6, out}, acts[c % 3], nn::Activation::identity, rng);
    const auto x = randm(in, batch), w = randm(out, batch);
    auto [y, tape] = nn::forward(net, x);
    const auto g = nn::flatten(nn::backward(tape, w));
    worst = std::max(worst, compare(net.flatten(), g, [&](const std::vector<double>& p) {
      auto copy = net;
      copy.assign(p);
      return copy(x).cwiseProduct(w).sum();
    }));
  }

  for (int c = 0; c < 30; ++c, ++cases) {  // critic loss through the critic
    const int sdim = 4 + c % 3, adim = 2 + c % 3, batch = 4 + c % 5;
    const std::vector<int> hidden = c < 3 ? std::vector<int>{400, 400} : std::vector<int>{16, 16};
    std::vector<int> dims{sdim};
    dims.insert(dims.end(), hidden.begin(), hidden.end());
    dims.push_back(adim);
    auto net = nn::DenseNet::make(dims, nn::Activation::mish, nn::Activation::identity, rng);
    const auto s = randm(sdim, batch);
    const nn::Vector y = randm(batch, 1);
    std::vector<int> actions;
    for (int i = 0; i < batch; ++i) actions.push_back(uniform_int(rng, adim));
    auto [q, tape] = nn::forward(net, s);
    const auto loss = rl::critic_loss(q, actions, y);
    const auto g = nn::flatten(nn::backward(tape, loss.adjoint));
    worst = std::max(worst, compare(net.flatten(), g, [&](const std::vector<double>& p) {
      auto copy = net;
      copy.assign(p);
      return rl::critic_loss(copy(s), actions, y).loss;
    }));
  }

  for (int c = 0; c < 30; ++c, ++cases) {  // actor loss through all K reverse steps
    const int sdim = 5, adim = 3 + c % 3, batch = 3 + c % 4, K = 1 + c % 5;
    const std::vector<int> hidden = c < 3 ? std::vector<int>{400, 400} : std::vector<int>{16, 16};
    const double bmax = c % 2 ? 10.0 : 1.0;
    rl::DiffusionActor actor(diffusion::Denoiser(adim, sdim, hidden, nn::Activation::mish, rng),
                             diffusion::beta_schedule(K, 0.1, bmax));
    const auto s = randm(sdim, batch);
    const auto q = randm(adim, batch);
    const auto noise = actor.draw_noise(batch, rng);
    const nn::Matrix logits = actor.forward(s, noise);
    const auto loss = rl::actor_loss(logits, q, 0.3);
    const auto g = nn::flatten(actor.backward(loss.adjoint));
    worst = std::max(worst, compare(actor.net().flatten(), g, [&](const std::vector<double>& p) {
      rl::DiffusionActor copy = actor;
      copy.net().assign(p);
      return rl::actor_loss(copy.logits(s, noise), q, 0.3).loss;
    }));
  }
  return {cases >= 100 && worst < 1e-4, fmt("%g cases, worst relative error %.3g", cases, worst)};
}

// 5. Iterated forward steps vs the closed-form marginal; schedule monotonicity.
Outcome diffusion_consistency() {
  const auto s = diffusion::beta_schedule(5, 0.1, 10.0);
  const nn::Vector x0{{1.5, -0.75}};
  const int n = 10000;
  Rng rng = make_rng(5, 5);
  double worst_z = 0.0, worst_var = 0.0;
  for (int k = 1; k <= s.steps; ++k) {
    std::vector<nn::Vector> draws;
    for (int i = 0; i < n; ++i) {
      nn::Vector x = x0;
      for (int j = 1; j <= k; ++j) {
        nn::Vector z(2);
        z << standard_normal(rng), standard_normal(rng);
        x = diffusion::forward_step(x, j, z, s);
      }
      draws.push_back(x);
    }
    for (int d = 0; d < 2; ++d) {
      double m = 0.0, m2 = 0.0;
      for (const auto& x : draws) m += x(d);
      m /= n;
      for (const auto& x : draws) m2 += (x(d) - m) * (x(d) - m);
      const double var = m2 / (n - 1);
      const double mu = std::sqrt(s.alpha_bar_at(k)) * x0(d);
      const double sigma2 = 1.0 - s.alpha_bar_at(k);
      worst_z = std::max(worst_z, std::abs(m - mu) / std::sqrt(sigma2 / n));
      worst_var = std::max(worst_var, std::abs(var - sigma2) / sigma2);
    }
  }
  int monotone = 0;
  for (int t = 0; t < 100; ++t) {
    const int K = 1 + uniform_int(rng, 20);
    const double bmin = 0.01 + uniform01(rng);
    const double bmax = bmin + 0.01 + 20.0 * uniform01(rng);
    const auto r = diffusion::beta_schedule(K, bmin, bmax);
    bool ok = true;
    for (int k = 2; k <= K; ++k) ok = ok && r.beta_at(k) > r.beta_at(k - 1) && r.alpha_bar_at(k) < r.alpha_bar_at(k - 1);
    monotone += ok;
  }
  return {worst_z <= 3.0 && worst_var <= 0.05 && monotone == 100,
          fmt("worst mean z=%.2f, worst variance rel err %.3f, monotone schedules %g/100", worst_z, worst_var, monotone)};
}

// 6. Token chain as simulated by the environment.
Outcome markov_fidelity() {
  const env::MarkovTokenModel model;
  const env::StochasticConditions cond(66, 1, model);
  const std::int64_t slots = 5000001;
  std::vector<std::vector<double>> counts(4, std::vector<double>(4, 0.0));
  std::vector<double> occupancy(4, 0.0);
  auto index_of = [&](double tokens) {
    return static_cast<int>(std::find(model.values.begin(), model.values.end(), tokens) - model.values.begin());
  };
  int prev = index_of(cond.sp_tokens(0, 1));
  for (std::int64_t t = 1; t < slots; ++t) {
    const int cur = index_of(cond.sp_tokens(t, 1));
    counts[prev][cur] += 1.0;
    occupancy[cur] += 1.0;
    prev = cur;
  }
  double row_err = 0.0, row_min = 1e18;
  for (int i = 0; i < 4; ++i) {
    double total = 0.0;
    for (double c : counts[i]) total += c;
    row_min = std::min(row_min, total);
    for (int j = 0; j < 4; ++j) row_err = std::max(row_err, std::abs(counts[i][j] / total - model.transition[i][j]));
  }
  const auto pi = model.stationary();
  double occ_err = 0.0;
  for (int j = 0; j < 4; ++j) occ_err = std::max(occ_err, rel(occupancy[j] / (slots - 1), pi[j]));
  return {row_err <= 0.002 && occ_err <= 0.01 && row_min >= 1e6,
          fmt("max row err %.4g (min draws per row %.0f), max occupancy rel err %.4g", row_err, row_min, occ_err)};
}

double greedy_mean(const rl::Learner& learner, const env::EnvConfig& cfg, int episodes) {
  std::shared_ptr<const rl::Learner> view(&learner, [](const rl::Learner*) {});
  harness::LearnedPolicy policy(view);
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < episodes; ++i) seeds.push_back(500 + static_cast<std::uint64_t>(i));
  std::vector<double> t;
  for (const auto& r : harness::evaluate(policy, cfg, seeds)) t.push_back(r.t_tot_mean);
  return mean(t);
}

// 7. Learning on the tiny frozen instance.
Outcome desk_learning() {
  const auto cfg = oracle::tiny_frozen();
  const double best = oracle::brute_force_optimum(cfg, 1);
  const auto td = desk_train(500, 1);
  auto dsac = rl::make_learner(rl::LearnerKind::dsac, cfg, td);
  rl::train(*dsac, cfg, td);
  const double t_dsac = greedy_mean(*dsac, cfg, 20);
  const auto tq = desk_train(1000, 1);
  auto ddqn = rl::make_learner(rl::LearnerKind::ddqn, cfg, tq);
  rl::train(*ddqn, cfg, tq);
  const double t_ddqn = greedy_mean(*ddqn, cfg, 20);
  const bool ok = t_dsac <= 1.05 * best && t_ddqn <= 1.10 * best;
  return {ok, fmt("optimum %.4f s; DSAC %.4f s (x%.4f); DDQN %.4f s", best, t_dsac, t_dsac / best, t_ddqn)};
}

double sweep_mean(harness::SweepAxis axis, double value, env::EnvConfig base, harness::Policy& policy) {
  const auto cfg = harness::apply_axis(base, axis, value);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  std::vector<double> t;
  for (const auto& r : harness::evaluate(policy, cfg, seeds)) t.push_back(r.t_tot_mean);
  return mean(t);
}

// 8. Trends over 20 paired seeds, and DSAC against LG at an 80% threshold.
Outcome scaling_trends() {
  harness::GreedyEftPolicy greedy;
  env::EnvConfig base;
  const double u4 = sweep_mean(harness::SweepAxis::num_sps, 4, base, greedy);
  const double u8 = sweep_mean(harness::SweepAxis::num_sps, 8, base, greedy);
  const double w2 = sweep_mean(harness::SweepAxis::thoughts_per_step, 2, base, greedy);
  const double w4 = sweep_mean(harness::SweepAxis::thoughts_per_step, 4, base, greedy);
  const double s2 = sweep_mean(harness::SweepAxis::tot_steps, 2, base, greedy);
  const double s4 = sweep_mean(harness::SweepAxis::tot_steps, 4, base, greedy);

  env::EnvConfig desk;
  desk.sps = 4;
  desk.steps = 4;
  desk.thoughts_per_step = 4;
  desk.quality_threshold_pct = 80.0;
  const double t_lg = env::lg_reference(desk).t_lg;
  const auto td = desk_train(500, 3);
  std::shared_ptr<rl::Learner> dsac = rl::make_learner(rl::LearnerKind::dsac, desk, td);
  rl::train(*dsac, desk, td);
  harness::LearnedPolicy policy(dsac);
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 20; ++s) seeds.push_back(s);
  std::vector<double> t;
  int satisfied = 0;
  for (const auto& r : harness::evaluate(policy, desk, seeds)) {
    t.push_back(r.t_tot_mean);
    satisfied += r.constraint_satisfied;
  }
  const double t_dsac = mean(t);
  const bool ok = u8 <= u4 && w4 > w2 && s4 > s2 && t_dsac <= 0.5 * t_lg;
  std::ostringstream d;
  d << fmt("U 4->8: %.2f->%.2f s; tps 2->4: %.2f->%.2f s; ", u4, u8, w2, w4)
    << fmt("steps 2->4: %.2f->%.2f s; ", s2, s4)
    << fmt("DSAC@80%%: %.2f s vs T_LG %.1f s (%.1f%% lower), threshold met %g/20", t_dsac, t_lg,
           100.0 * (1.0 - t_dsac / t_lg), satisfied);
  return {ok, d.str()};
}

// 9. Bit-identical train metrics and sweep CSVs.
Outcome determinism() {
  const auto cfg = oracle::tiny_frozen();
  auto train_csv = [&] {
    auto t = desk_train(60, 11);
    env::EnvConfig stochastic = cfg;
    stochastic.frozen = false;
    stochastic.instance = env::InstanceMode::per_episode;
    auto learner = rl::make_learner(rl::LearnerKind::dsac, stochastic, t);
    std::ostringstream os;
    rl::write_metrics_csv(os, rl::train(*learner, stochastic, t));
    return os.str();
  };
  auto sweep_csv = [&] {
    harness::SweepSpec s;
    s.axis = harness::SweepAxis::num_sps;
    s.values = {2, 3};
    s.seeds = {1, 2, 3};
    s.policies = {harness::PolicyKind::dsac, harness::PolicyKind::ddqn, harness::PolicyKind::greedy_eft,
                  harness::PolicyKind::random};
    s.env.steps = 2;
    s.env.thoughts_per_step = 2;
    s.train = desk_train(30, 5);
    std::ostringstream os;
    harness::write_results_csv(os, harness::run_sweep(s));
    return os.str();
  };
  const auto a = train_csv(), b = train_csv();
  const auto c = sweep_csv(), d = sweep_csv();
  return {a == b && c == d && !a.empty() && !c.empty(),
          fmt("train CSV %g bytes identical=%g; sweep CSV %g bytes identical=%g", a.size(), a == b, c.size(), c == d)};
}

// 10. Per-decision wall-clock ordering at network width 400.
Outcome timing_order() {
  env::EnvConfig cfg;
  rl::TrainConfig t;
  t.hidden = {400, 400};
  std::vector<std::uint64_t> seeds{1, 2, 3};
  auto per_decision = [&](rl::LearnerKind kind) {
    std::shared_ptr<rl::Learner> l = rl::make_learner(kind, cfg, t);
    harness::LearnedPolicy p(l);
    std::vector<double> ms;
    for (const auto& r : harness::evaluate(p, cfg, seeds)) ms.push_back(r.ms_per_decision);
    return mean(ms);
  };
  const double d = per_decision(rl::LearnerKind::dsac);
  const double s = per_decision(rl::LearnerKind::sac_mlp);
  const double q = per_decision(rl::LearnerKind::ddqn);
  return {d > s && d > q, fmt("ms per decision: DSAC %.3f, SAC-MLP %.3f, DDQN %.3f", d, s, q)};
}

struct Criterion {
  int id;
  const char* name;
  double budget_s;
  Outcome (*run)();
};

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "LG closed form", 1, lg_closed_form},
      {2, "timeline oracle", 10, timeline_oracle},
      {3, "fit recovery", 5, fit_recovery},
      {4, "gradient integrity", 120, gradient_integrity},
      {5, "diffusion consistency", 60, diffusion_consistency},
      {6, "Markov fidelity", 60, markov_fidelity},
      {7, "learning at desk scale", 600, desk_learning},
      {8, "scaling trends", 1800, scaling_trends},
      {9, "determinism", 300, determinism},
      {10, "per-decision timing order", 600, timing_order},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failures = 0;
  for (const auto& c : all) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = o.pass && secs < c.budget_s;
    failures += !pass;
    std::printf("criterion %2d %-26s %s  %s [%.2f s / %.0f s]\n", c.id, c.name, pass ? "PASS" : "FAIL",
                o.detail.c_str(), secs, c.budget_s);
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
