// Acceptance checks A1..A11. `acceptance` runs all of them; `acceptance A7`
// runs one. Each prints a single PASS/FAIL line; the exit status is non-zero
// if any selected check fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <string>

#include "timelimits/core/returns.hpp"
#include "timelimits/harness/config.hpp"
#include "timelimits/harness/csv.hpp"
#include "timelimits/harness/run.hpp"
#include "timelimits/oracle/time_unaware_fixed_point.hpp"
#include "timelimits/oracle/value_iteration.hpp"
#include "timelimits/policy_grad/heatmap.hpp"
#include "timelimits/policy_grad/ppo.hpp"
#include "timelimits/tabular/q_learning.hpp"

using namespace timelimits;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

ExperimentConfig config(const std::string& name) {
  return load_experiment(fs::path(TIMELIMITS_CONFIG_DIR) / (name + ".cfg"));
}

fs::path output_root() {
  const char* v = std::getenv(kOutputRootVariable);
  return (v && *v) ? fs::path(v) / "acceptance" : fs::temp_directory_path() / "timelimits_acceptance";
}

RunSummary run(const ExperimentConfig& cfg, const std::string& dir) {
  RunOptions opt;
  opt.out = output_root() / dir;
  return run_experiment(cfg, opt);
}

// value of `metric` at the last evaluation step, per seed
std::map<std::uint64_t, double> final_metric(const RunSummary& s, const std::string& metric) {
  std::map<std::uint64_t, double> out;
  std::map<std::uint64_t, std::uint64_t> step;
  for (const auto& seed : s.seeds)
    for (const auto& r : seed.records)
      if (r.metric == metric && (!step.contains(r.seed) || r.step >= step[r.seed])) {
        step[r.seed] = r.step;
        out[r.seed] = r.value;
      }
  return out;
}

const AggregateRecord& final_aggregate(const RunSummary& s, const std::string& metric) {
  const AggregateRecord* best = nullptr;
  for (const auto& r : s.aggregate)
    if (r.metric == metric && (!best || r.step > best->step)) best = &r;
  if (!best) throw Error("no aggregate for metric " + metric);
  return *best;
}

QTable train_two_goal(const ExperimentConfig& cfg, std::uint64_t seed) {
  TwoGoalGridworldEnv base(TwoGoalConfig{}, detail::train_env_seed(seed));
  auto env = wrap_time_limit(base, {cfg.time_limit.horizon, false});
  QLearningConfig q;
  q.mode = cfg.mode;
  q.schedule = cfg.schedule;
  q.gamma = cfg.gamma;
  q.episodes = cfg.episodes;
  q.max_steps = cfg.steps;
  q.seed = seed;
  return q_learning_run(env, q).table;
}

double max_q(const QTable& q, std::size_t slice, StateIndex s) { return q.max_value(slice, s); }

// ---------------------------------------------------------------------------

Verdict a1() {
  // Independent case analysis of the one-step target.
  Rng rng(1);
  const double gamma = 0.9;
  QTable flat({3, 3, 3}, 1);
  QTable sliced({3, 3, 3}, 4);
  for (std::size_t k = 0; k < 4; ++k)
    for (StateIndex s = 0; s < 3; ++s)
      for (ActionIndex a = 0; a < 3; ++a) {
        sliced.value(k, s, a) = rng.normal();
        if (k == 0) flat.value(0, s, a) = rng.normal();
      }
  std::size_t cases = 0, wrong = 0;
  const std::optional<TerminationKind> kinds[] = {std::nullopt, TerminationKind::Environmental,
                                                  TerminationKind::Timeout};
  for (auto mode : {TimeoutMode::Standard, TimeoutMode::TimeAware, TimeoutMode::PEB})
    for (const auto& kind : kinds)
      for (StateIndex next = 0; next < 3; ++next)
        for (std::size_t remaining = 0; remaining <= 4; ++remaining) {
          // a timeout leaves no time; other transitions in a time-aware table need 1..slices
          if (kind == TerminationKind::Timeout && remaining != 0) continue;
          if (mode == TimeoutMode::TimeAware && !kind && remaining == 0) continue;
          if (mode != TimeoutMode::TimeAware && !kind && remaining == 0) continue;
          const double r = rng.normal();
          const Transition t{0, 0, r, next, kind, remaining};
          const QTable& q = mode == TimeoutMode::TimeAware ? sliced : flat;
          double expected = r;
          if (!kind) {
            const double v = mode == TimeoutMode::TimeAware ? max_q(sliced, remaining - 1, next)
                                                            : max_q(flat, 0, next);
            expected = r + gamma * v;
          } else if (*kind == TerminationKind::Timeout && mode == TimeoutMode::PEB) {
            expected = r + gamma * max_q(flat, 0, next);
          }
          ++cases;
          if (td_target(mode, t, q, gamma) != expected) ++wrong;
        }
  return {wrong == 0 && cases > 0, fmt("%zu/%zu (mode, termination, successor) cases exact", cases - wrong, cases)};
}

Verdict a2() {
  const auto cfg = config("two_goal_ta");
  const TwoGoalGridworldEnv base;
  const auto q = train_two_goal(cfg, cfg.seeds.front());
  const std::size_t T = cfg.time_limit.horizon;
  const auto sol = backward_induction(build_model(base), T, cfg.gamma);
  std::size_t pairs = 0, matched = 0, unreachable = 0, stays = 0;
  for (std::size_t h = 1; h <= T; ++h)
    for (StateIndex s = 0; s < base.num_states(); ++s) {
      const ActionIndex a = q.greedy(h - 1, s);
      ++pairs;
      matched += sol.is_greedy(h, s, a);
      const auto c = base.cell_of(s);
      const int d = std::min(grid::manhattan(c, base.far_goal()), grid::manhattan(c, base.near_goal()));
      if (d > static_cast<int>(h)) {
        ++unreachable;
        stays += a == TwoGoalGridworldEnv::kStay;
      }
    }
  return {matched == pairs && stays == unreachable,
          fmt("greedy in oracle set at %zu/%zu (h, state) pairs; stay at %zu/%zu out-of-reach pairs", matched,
              pairs, stays, unreachable)};
}

Verdict a3() {
  const auto cfg = config("two_goal_standard");
  const TwoGoalGridworldEnv base;
  const auto q = train_two_goal(cfg, cfg.seeds.front());
  const std::size_t T = cfg.time_limit.horizon;
  const auto fp = fixed_point_time_unaware(base, cfg.gamma, T);
  double worst_inner = 0.0, worst_adjacent = 0.0;
  StateIndex worst_state = 0;
  std::size_t far_cells = 0, toward = 0;
  for (StateIndex s = 0; s < base.num_states(); ++s) {
    const double err = std::abs(q.max_value(0, s) - fp.values[s]);
    if (fp.pinned[s]) {
      worst_adjacent = std::max(worst_adjacent, err);
    } else if (err > worst_inner) {
      worst_inner = err;
      worst_state = s;
    }
    const auto c = base.cell_of(s);
    const int d = std::min(grid::manhattan(c, base.far_goal()), grid::manhattan(c, base.near_goal()));
    if (d > static_cast<int>(T)) {
      ++far_cells;
      const auto& set = fp.greedy[s];
      toward += std::find(set.begin(), set.end(), q.greedy(0, s)) != set.end();
    }
  }
  const auto wc = base.cell_of(worst_state);
  return {worst_inner <= 0.5 && worst_adjacent <= 0.5 && toward == far_cells,
          fmt("max |v - oracle| = %.3f at (%d,%d) (tol 0.5); goal-adjacent max error %.3f; "
              "heads for the oracle goal from %zu/%zu out-of-reach cells",
              worst_inner, wc.row, wc.col, worst_adjacent, toward, far_cells)};
}

Verdict a4() {
  const auto cfg = config("two_goal_peb");
  const TwoGoalGridworldEnv base;
  const auto q = train_two_goal(cfg, cfg.seeds.front());
  const auto sol = value_iteration(build_model(base), cfg.gamma);
  std::size_t matched = 0;
  for (StateIndex s = 0; s < base.num_states(); ++s) matched += sol.is_greedy(s, q.greedy(0, s));
  return {matched == base.num_states(),
          fmt("greedy in value-iteration set at %zu/%zu states", matched, base.num_states())};
}

Verdict a5() {
  const auto ta = final_metric(run(config("last_moment_ta"), "last_moment_ta"), "return");
  const auto st = final_metric(run(config("last_moment_standard"), "last_moment_standard"), "return");
  std::size_t ta_ok = 0, st_ok = 0;
  for (const auto& [seed, v] : ta) ta_ok += v == 1.0;
  for (const auto& [seed, v] : st) st_ok += v == 0.0;
  return {ta.size() == 10 && st.size() == 10 && ta_ok == 10 && st_ok == 10,
          fmt("time-aware return 1.0 on %zu/%zu seeds; standard return 0.0 on %zu/%zu seeds", ta_ok, ta.size(),
              st_ok, st.size())};
}

Verdict a6() {
  const auto peb_cfg = config("replay_peb");
  const auto std_cfg = config("replay_standard");
  const auto peb = run(peb_cfg, "replay_peb");
  const auto plain = run(std_cfg, "replay_standard");

  ParamTable params = peb_cfg.env_params;
  const auto env = std::get<ReplayGridworldEnv>(make_environment(peb_cfg.env_name, params, 0));
  const auto vi = value_iteration(build_model(env), 1.0);
  const double shortest = -vi.values[env.index_of(env.config().start())];

  bool ok = true;
  std::string detail = fmt("shortest path %.0f; PEB final lengths", shortest);
  for (std::size_t b : peb_cfg.buffers) {
    const auto& r = final_aggregate(peb, "b" + std::to_string(b) + ".length");
    ok = ok && r.mean <= 1.1 * shortest;
    detail += fmt(" %zu:%.1f", b, r.mean);
  }
  const auto& small = final_aggregate(plain, "b" + std::to_string(std_cfg.buffers.front()) + ".length");
  const auto& large = final_aggregate(plain, "b" + std::to_string(std_cfg.buffers.back()) + ".length");
  const double margin = 2.0 * std::sqrt(small.stderr_ * small.stderr_ + large.stderr_ * large.stderr_);
  ok = ok && large.mean - small.mean > margin;
  detail += fmt("; no PEB largest %.1f vs smallest %.1f (need gap > %.1f)", large.mean, small.mean, margin);
  return {ok, detail};
}

Verdict a7() {
  const auto ta_cfg = config("queue_ta");
  const auto un_cfg = config("queue_unaware");
  const auto ta = run(ta_cfg, "queue_ta");
  const auto un = run(un_cfg, "queue_unaware");

  const QueueOfCarsConfig qc;
  std::size_t considered = 0, matched = 0;
  std::size_t monotone = 0, rows = 0;
  const auto oracle = backward_induction(build_model(QueueOfCarsEnv(qc)), ta_cfg.time_limit.horizon, ta_cfg.gamma);
  std::map<std::uint64_t, double> ta_success, un_success;
  auto analyze = [&](const RunSummary& s, const ExperimentConfig& cfg, std::map<std::uint64_t, double>& success,
                     bool count) {
    for (const auto& seed : s.seeds) {
      const auto& snap = *seed.snapshot;
      PpoAgent agent(snap.shape, cfg.ppo.ppo, 0);
      agent.set_parameters(snap.parameters);
      const auto report = analyze_queue_policy([&](const Observation& o) { return agent.probabilities(o); }, qc,
                                               cfg.time_limit.horizon, cfg.gamma, snap.time_aware);
      if (count) {
        considered += report.pairs_considered;
        matched += report.pairs_matched;
        // below the oracle's switch to "dangerous", its probability should not fall as time runs out
        const auto map = *seed.heatmap;
        for (StateIndex p = 0; p < qc.exit_distance; ++p) {
          std::size_t top = 0;
          for (std::size_t h = 1; h <= cfg.time_limit.horizon; ++h)
            if (oracle.is_greedy(h, p, QueueOfCarsEnv::kDangerous)) top = h;
          top = std::min(top + 1, cfg.time_limit.horizon);
          bool ok = true;
          for (std::size_t h = 1; h < top; ++h) ok = ok && map[p][h - 1] >= map[p][h];
          ++rows;
          monotone += ok;
        }
      }
      success[seed.seed] = report.success_probability;
    }
  };
  analyze(ta, ta_cfg, ta_success, true);
  analyze(un, un_cfg, un_success, false);

  std::size_t lower = 0;
  for (const auto& [seed, p] : un_success) lower += ta_success.contains(seed) && p < ta_success.at(seed);
  const auto sampled_ta = final_metric(ta, "success_rate"), sampled_un = final_metric(un, "success_rate");
  std::size_t sampled_lower = 0;
  for (const auto& [seed, p] : sampled_un) sampled_lower += p < sampled_ta.at(seed);

  const double fraction = considered ? static_cast<double>(matched) / static_cast<double>(considered) : 0.0;
  return {fraction >= 0.9 && lower >= 8,
          fmt("oracle match %zu/%zu = %.3f (need 0.90); unaware success lower on %zu/10 seeds "
              "(sampled evaluation: %zu/10); heatmap monotone below the switch on %zu/%zu rows",
              matched, considered, fraction, lower, sampled_lower, monotone, rows)};
}

Verdict a8() {
  PpoConfig cfg;
  cfg.entropy_coef = 0.01;
  const Mlp net({3, {8, 8}, 2});
  Rng rng(8);
  double worst = 0.0;
  for (int draw = 0; draw < 5; ++draw) {
    Eigen::VectorXd params = net.initial_parameters(rng);
    params += 0.3 * Eigen::VectorXd::NullaryExpr(params.size(), [&] { return rng.normal(); });
    PpoMinibatch mb;
    mb.observations = Eigen::MatrixXd::NullaryExpr(3, 32, [&] { return rng.normal(); });
    const Eigen::MatrixXd logp = log_softmax(net.forward(params, mb.observations).logits);
    for (Eigen::Index j = 0; j < 32; ++j) {
      const ActionIndex a = rng.below(2);
      const double lp = logp(static_cast<Eigen::Index>(a), j);
      double old;
      do old = lp + 0.4 * rng.normal();
      while (std::abs(std::abs(std::exp(lp - old) - 1.0) - cfg.clip) < 1e-3);
      mb.actions.push_back(a);
      mb.old_log_probs.push_back(old);
      mb.advantages.push_back(rng.normal());
      mb.targets.push_back(rng.normal());
    }
    const auto grad = ppo_loss_and_gradient(net, params, mb, cfg).second;
    for (Eigen::Index i = 0; i < params.size(); ++i) {
      const double h = 1e-5;
      Eigen::VectorXd up = params, down = params;
      up(i) += h;
      down(i) -= h;
      const double fd = (ppo_loss_and_gradient(net, up, mb, cfg).first.total -
                         ppo_loss_and_gradient(net, down, mb, cfg).first.total) / (2 * h);
      worst = std::max(worst, std::abs(fd - grad(i)) / std::max({std::abs(fd), std::abs(grad(i)), 1e-6}));
    }
  }
  return {worst < 1e-4, fmt("max relative error %.2e over 5 draws (tol 1e-4)", worst)};
}

Verdict a9() {
  auto mk = [](double r, double v, std::optional<TerminationKind> k = std::nullopt,
               std::optional<double> boot = std::nullopt) {
    return TrajectoryStep{{0.0}, 0, r, 0.0, v, k, boot};
  };
  Rng rng(9);
  // lambda = 1 without bootstrapping through timeouts: Monte Carlo return minus baseline
  double worst_mc = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 1 + rng.below(40);
    const double gamma = rng.uniform();
    TrajectoryBatch b;
    std::vector<double> rewards;
    for (std::size_t t = 0; t < n; ++t) {
      rewards.push_back(rng.normal());
      b.steps.push_back(mk(rewards.back(), rng.normal(),
                           t + 1 == n ? std::optional(TerminationKind::Environmental) : std::nullopt));
    }
    const auto adv = gae_advantages(b, gamma, 1.0, false).advantages;
    for (std::size_t t = 0; t < n; ++t)
      worst_mc = std::max(worst_mc, std::abs(adv[t] - (discounted_return(std::span(rewards).subspan(t), gamma) -
                                                       b.steps[t].value)));
  }
  // composition: a batch cut where a segment ends gives identical advantages
  std::size_t splits = 0, identical = 0;
  for (int trial = 0; trial < 200; ++trial) {
    TrajectoryBatch b;
    const std::size_t n = 2 + rng.below(60);
    for (std::size_t t = 0; t < n; ++t) {
      std::optional<TerminationKind> k;
      const double u = rng.uniform();
      if (u < 0.1) k = TerminationKind::Environmental;
      else if (u < 0.2) k = TerminationKind::Timeout;
      b.steps.push_back(mk(rng.normal(), rng.normal(), k, rng.normal()));
    }
    for (std::size_t cut = 1; cut < n; ++cut) {
      if (!b.steps[cut - 1].termination) continue;
      const bool peb = rng.bernoulli(0.5);
      const double gamma = rng.uniform(), lambda = rng.uniform();
      TrajectoryBatch first{{b.steps.begin(), b.steps.begin() + static_cast<std::ptrdiff_t>(cut)}};
      TrajectoryBatch second{{b.steps.begin() + static_cast<std::ptrdiff_t>(cut), b.steps.end()}};
      auto joined = gae_advantages(first, gamma, lambda, peb).advantages;
      const auto rest = gae_advantages(second, gamma, lambda, peb).advantages;
      joined.insert(joined.end(), rest.begin(), rest.end());
      ++splits;
      identical += joined == gae_advantages(b, gamma, lambda, peb).advantages;
    }
  }
  TrajectoryBatch worked{{mk(0.0, 0.5), mk(1.0, 0.2, TerminationKind::Timeout, 2.0)}};
  const double a0 = gae_advantages(worked, 1.0, 1.0, true).advantages[0];
  return {worst_mc < 1e-10 && identical == splits && splits > 0 && std::abs(a0 - 2.5) < 1e-12,
          fmt("MC error %.1e (tol 1e-10); %zu/%zu splits bit-identical; timeout example A_0 = %.15g", worst_mc,
              identical, splits, a0)};
}

Verdict a10() {
  const auto peb = final_metric(run(config("collector_peb"), "collector_peb"), "return");
  const auto plain = final_metric(run(config("collector_nopeb"), "collector_nopeb"), "return");
  std::vector<double> a, b;
  for (const auto& [s, v] : peb) a.push_back(v);
  for (const auto& [s, v] : plain) b.push_back(v);
  const auto ma = mean_stderr(a), mb = mean_stderr(b);
  return {a.size() == 10 && b.size() == 10 && ma.mean - ma.stderr_ > mb.mean + mb.stderr_,
          fmt("targets per 1000-step episode: PEB %.2f +- %.2f, no PEB %.2f +- %.2f", ma.mean, ma.stderr_,
              mb.mean, mb.stderr_)};
}

Verdict a11() {
  struct Case {
    std::string name;
    std::size_t ppo_steps;
  };
  std::size_t same = 0, total = 0;
  std::string detail;
  for (const Case& c : {Case{"last_moment_ta", 0}, Case{"two_goal_peb", 0}, Case{"queue_ta", 20000},
                        Case{"collector_peb", 20000}}) {
    auto cfg = config(c.name);
    if (c.ppo_steps) {
      cfg.ppo.total_steps = c.ppo_steps;
      cfg.ppo.eval_every = c.ppo_steps / 2;
      cfg.seeds.resize(2);
    }
    cfg.workers = 1;
    run(cfg, "determinism/" + c.name + "_1");
    cfg.workers = 2;
    run(cfg, "determinism/" + c.name + "_2");
    const auto dir = output_root() / "determinism";
    const bool eq = read_file(dir / (c.name + "_1") / "aggregate.csv") ==
                    read_file(dir / (c.name + "_2") / "aggregate.csv");
    ++total;
    same += eq;
    detail += " " + c.name + (eq ? ":identical" : ":DIFFERENT");
  }
  return {same == total, fmt("%zu/%zu configs byte-identical on rerun;", same, total) + detail};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> checks{
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4},  {"A5", a5},  {"A6", a6},
      {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10}, {"A11", a11}};
  std::vector<std::string> wanted(argv + 1, argv + argc);
  for (const auto& w : wanted)
    if (std::none_of(checks.begin(), checks.end(), [&](const auto& c) { return c.first == w; })) {
      std::fprintf(stderr, "unknown check '%s'\n", w.c_str());
      return 2;
    }
  int failures = 0;
  for (const auto& [id, check] : checks) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), id) == wanted.end()) continue;
    const auto start = std::chrono::steady_clock::now();
    Verdict o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %s %s [%.1fs]\n", id.c_str(), o.pass ? "PASS" : "FAIL", o.detail.c_str(), secs);
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
