#pragma once

#include <cstdint>
#include <vector>

#include "timelimits/core/stats.hpp"
#include "timelimits/envs/replay_gridworld.hpp"
#include "timelimits/harness/parallel.hpp"
#include "timelimits/tabular/q_learning.hpp"

namespace timelimits {

struct ReplayExperimentConfig {
  std::vector<std::size_t> buffer_sizes{100, 1000, 10000, 100000};
  TimeoutMode mode = TimeoutMode::Standard;
  std::vector<std::uint64_t> seeds;  // defaults to 0..29 when empty
  ReplayGridConfig grid;
  std::size_t horizon = 200;
  double gamma = 1.0;
  LearningSchedule schedule{1.0, 0.0, 0.1};
  std::size_t steps = 100'000;
  std::size_t eval_every = 10'000;
  std::size_t updates_per_step = 1;
  std::size_t workers = 1;
};

struct CurvePoint {
  std::size_t step = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

/// Greedy evaluation-episode lengths of one buffer size, per seed and aggregated.
struct ReplayCurve {
  std::size_t buffer_size = 0;
  std::vector<std::size_t> steps;
  std::vector<std::vector<double>> per_seed;  // [seed][eval point]
  std::vector<CurvePoint> aggregate;

  [[nodiscard]] const CurvePoint& final_point() const { return aggregate.back(); }
};

/// Q-learning with experience replay on the corner-to-corner gridworld, one run
/// per (buffer size, seed). Every `eval_every` steps the greedy policy is
/// played once from the start state; its episode length (capped by the
/// horizon) is the curve value.
inline std::vector<ReplayCurve> replay_experiment(const ReplayExperimentConfig& cfg) {
  std::vector<std::uint64_t> seeds = cfg.seeds;
  if (seeds.empty())
    for (std::uint64_t s = 0; s < 30; ++s) seeds.push_back(s);

  std::vector<std::size_t> eval_steps;
  for (std::size_t k = cfg.eval_every; k <= cfg.steps; k += cfg.eval_every) eval_steps.push_back(k);

  struct Job {
    std::size_t size_index;
    std::size_t seed_index;
  };
  std::vector<Job> jobs;
  for (std::size_t i = 0; i < cfg.buffer_sizes.size(); ++i)
    for (std::size_t j = 0; j < seeds.size(); ++j) jobs.push_back({i, j});

  std::vector<std::vector<std::vector<double>>> lengths(
      cfg.buffer_sizes.size(), std::vector<std::vector<double>>(seeds.size()));

  parallel_for(jobs.size(), cfg.workers, [&](std::size_t k) {
    const Job job = jobs[k];
    const std::uint64_t seed = seeds[job.seed_index];
    const TimeLimitConfig limit{cfg.horizon, false};
    auto env = wrap_time_limit(ReplayGridworldEnv(cfg.grid, seed), limit);
    auto eval_env = wrap_time_limit(ReplayGridworldEnv(cfg.grid, seed ^ 0x5eed), limit);

    QLearningConfig q;
    q.mode = cfg.mode;
    q.schedule = cfg.schedule;
    q.gamma = cfg.gamma;
    q.max_steps = cfg.steps;
    q.seed = seed;
    q.buffer_capacity = cfg.buffer_sizes[job.size_index];
    q.updates_per_step = cfg.updates_per_step;

    auto& out = lengths[job.size_index][job.seed_index];
    out.reserve(eval_steps.size());
    q_learning_run(env, q, [&](std::size_t step, const QTable& table) {
      if (step % cfg.eval_every == 0)
        out.push_back(static_cast<double>(greedy_episode(eval_env, table, cfg.mode).length));
    });
  });

  std::vector<ReplayCurve> curves;
  for (std::size_t i = 0; i < cfg.buffer_sizes.size(); ++i) {
    ReplayCurve c;
    c.buffer_size = cfg.buffer_sizes[i];
    c.steps = eval_steps;
    c.per_seed = lengths[i];
    for (std::size_t p = 0; p < eval_steps.size(); ++p) {
      std::vector<double> column;
      for (const auto& run : c.per_seed) column.push_back(run.at(p));
      const MeanStderr ms = mean_stderr(column);
      c.aggregate.push_back({eval_steps[p], ms.mean, ms.stderr_, ms.n});
    }
    curves.push_back(std::move(c));
  }
  return curves;
}

}  // namespace timelimits
