#pragma once

#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "timelimits/harness/config.hpp"
#include "timelimits/harness/csv.hpp"
#include "timelimits/harness/parallel.hpp"
#include "timelimits/oracle/backward_induction.hpp"
#include "timelimits/oracle/time_unaware_fixed_point.hpp"
#include "timelimits/oracle/value_iteration.hpp"
#include "timelimits/policy_grad/heatmap.hpp"
#include "timelimits/policy_grad/snapshot.hpp"
#include "timelimits/tabular/monte_carlo.hpp"

namespace timelimits {

/// An agent or environment failed after the configuration was accepted.
class RunFailure : public Error {
 public:
  using Error::Error;
};

/// 64-bit FNV-1a; byte-oriented, so identical text hashes identically everywhere.
inline std::uint64_t fnv1a(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  static constexpr char digits[] = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i, v >>= 4) out[static_cast<std::size_t>(i)] = digits[v & 0xf];
  return out;
}

inline constexpr const char* kOutputRootVariable = "TIMELIMITS_OUTPUT_ROOT";

/// Output root: $TIMELIMITS_OUTPUT_ROOT when set and non-empty, else "runs".
inline std::filesystem::path default_output_root() {
  const char* v = std::getenv(kOutputRootVariable);
  return (v && *v) ? std::filesystem::path(v) : std::filesystem::path("runs");
}

struct RunOptions {
  std::optional<std::vector<std::uint64_t>> seeds;
  std::optional<std::filesystem::path> out;  // replaces the configured directory
  std::optional<std::size_t> workers;
  std::filesystem::path output_root = default_output_root();
};

/// Everything one seed produced.
struct SeedRecord {
  std::uint64_t seed = 0;
  std::vector<RawRecord> records;
  double wall_seconds = 0.0;
  std::optional<PolicySnapshot> snapshot;
  std::optional<Heatmap> heatmap;
};

struct RunSummary {
  std::filesystem::path directory;
  std::uint64_t config_hash = 0;
  std::vector<SeedRecord> seeds;
  std::vector<AggregateRecord> aggregate;
};

inline std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::string text = cfg.source + "seeds=";
  for (auto s : cfg.seeds) text += std::to_string(s) + ",";
  return fnv1a(text);
}

namespace detail {

// Independent environment streams per seed: training and evaluation.
inline std::uint64_t train_env_seed(std::uint64_t seed) { return Rng(seed, 1)(); }
inline std::uint64_t eval_env_seed(std::uint64_t seed) { return Rng(seed, 3)(); }

template <FiniteEnvironment E>
double tabular_oracle_match(const E& base, const QTable& q, TimeoutMode mode, std::size_t horizon,
                            double gamma) {
  const TabularModel model = build_model(base);
  std::size_t total = 0, matched = 0;
  if (mode == TimeoutMode::TimeAware) {
    const auto sol = backward_induction(model, horizon, gamma);
    for (std::size_t h = 1; h <= horizon; ++h)
      for (StateIndex s = 0; s < model.num_states; ++s, ++total)
        matched += sol.is_greedy(h, s, q.greedy(h - 1, s));
  } else {
    const auto sol = value_iteration(model, gamma);
    for (StateIndex s = 0; s < model.num_states; ++s, ++total)
      matched += sol.is_greedy(s, q.greedy(0, s));
  }
  return static_cast<double>(matched) / static_cast<double>(total);
}

template <FiniteEnvironment E>
void tabular_eval(TimeLimit<E>& env, const QTable& q, TimeoutMode mode, std::size_t episodes,
                  std::uint64_t step, std::uint64_t seed, const std::string& prefix,
                  std::vector<RawRecord>& out) {
  double ret = 0.0, len = 0.0;
  for (std::size_t e = 0; e < episodes; ++e) {
    const EpisodeStats s = greedy_episode(env, q, mode);
    ret += s.total_reward;
    len += static_cast<double>(s.length);
  }
  const double n = static_cast<double>(episodes);
  out.push_back({step, seed, prefix + "return", ret / n});
  out.push_back({step, seed, prefix + "length", len / n});
}

template <FiniteEnvironment E>
void tabular_final(const TimeLimit<E>& env, const QTable& q, const ExperimentConfig& cfg,
                   std::uint64_t step, std::uint64_t seed, const std::string& prefix,
                   std::vector<RawRecord>& out) {
  if (cfg.mode == TimeoutMode::TimeAware || (cfg.mode == TimeoutMode::PEB && cfg.gamma < 1.0))
    out.push_back({step, seed, prefix + "oracle_match",
                   tabular_oracle_match(env.base(), q, cfg.mode, cfg.time_limit.horizon, cfg.gamma)});
  if constexpr (std::is_same_v<E, TwoGoalGridworldEnv>) {
    if (cfg.mode == TimeoutMode::Standard) {
      const auto fp = fixed_point_time_unaware(env.base(), cfg.gamma, cfg.time_limit.horizon);
      double worst = 0.0;
      for (StateIndex s = 0; s < fp.values.size(); ++s)
        worst = std::max(worst, std::abs(q.max_value(0, s) - fp.values[s]));
      out.push_back({step, seed, prefix + "fixed_point_max_error", worst});
    }
  }
}

template <class E>
SeedRecord run_tabular_seed(E train_base, E eval_base, const ExperimentConfig& cfg,
                            std::uint64_t seed) {
  SeedRecord rec{seed, {}, 0.0, std::nullopt, std::nullopt};
  if constexpr (!FiniteEnvironment<E>) {
    throw ConfigError("tabular agents need an enumerable environment");
  } else {
    const TimeLimitConfig train_limit{cfg.time_limit.horizon, false};
    const TimeLimitConfig eval_limit{cfg.effective_eval_horizon(), false};
    if (cfg.agent == AgentKind::MonteCarlo) {
      auto env = wrap_time_limit(train_base, train_limit);
      auto eval_env = wrap_time_limit(eval_base, eval_limit);
      MonteCarloConfig mc{cfg.mode == TimeoutMode::TimeAware, cfg.schedule, cfg.gamma,
                          cfg.episodes, seed, cfg.initial_value};
      const auto result = mc_control_run(env, mc);
      const auto step = static_cast<std::uint64_t>(result.metadata.steps);
      tabular_eval(eval_env, result.table, cfg.mode, cfg.eval_episodes, step, seed, "", rec.records);
      tabular_final(env, result.table, cfg, step, seed, "", rec.records);
      rec.records.push_back({step, seed, "late_policy_changes",
                             static_cast<double>(result.metadata.late_policy_changes)});
      return rec;
    }
    for (std::size_t buffer : cfg.buffers) {
      const std::string prefix = cfg.buffers.size() > 1 ? "b" + std::to_string(buffer) + "." : "";
      auto env = wrap_time_limit(train_base, train_limit);
      auto eval_env = wrap_time_limit(eval_base, eval_limit);
      QLearningConfig q;
      q.mode = cfg.mode;
      q.schedule = cfg.schedule;
      q.gamma = cfg.gamma;
      q.episodes = cfg.episodes;
      q.max_steps = cfg.steps;
      q.seed = seed;
      q.buffer_capacity = buffer;
      q.updates_per_step = cfg.updates_per_step;
      q.initial_value = cfg.initial_value;
      std::uint64_t last_eval = 0;
      const auto result = q_learning_run(env, q, [&](std::size_t step, const QTable& table) {
        if (cfg.eval_every && step % cfg.eval_every == 0) {
          tabular_eval(eval_env, table, cfg.mode, cfg.eval_episodes, step, seed, prefix, rec.records);
          last_eval = step;
        }
      });
      const auto step = static_cast<std::uint64_t>(result.metadata.steps);
      if (last_eval != step)
        tabular_eval(eval_env, result.table, cfg.mode, cfg.eval_episodes, step, seed, prefix,
                     rec.records);
      tabular_final(env, result.table, cfg, step, seed, prefix, rec.records);
      rec.records.push_back({step, seed, prefix + "late_policy_changes",
                             static_cast<double>(result.metadata.late_policy_changes)});
    }
    return rec;
  }
}

template <class E>
SeedRecord run_ppo_seed(E train_base, E eval_base, const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedRecord rec{seed, {}, 0.0, std::nullopt, std::nullopt};
  const bool ta = cfg.time_limit.append_remaining_time;
  auto env = wrap_time_limit(std::move(train_base), cfg.time_limit);
  auto eval_env = wrap_time_limit(std::move(eval_base), {cfg.effective_eval_horizon(), ta});
  const PpoTrainResult result = train_ppo(env, eval_env, cfg.ppo, seed);
  for (const auto& p : result.curve) {
    const auto step = static_cast<std::uint64_t>(p.step);
    rec.records.push_back({step, seed, "return", p.episode_return.mean});
    rec.records.push_back({step, seed, "length", p.episode_length.mean});
    rec.records.push_back({step, seed, "success_rate", p.success_rate});
    rec.records.push_back({step, seed, "entropy", p.loss.entropy});
    rec.records.push_back({step, seed, "approx_kl", p.loss.approx_kl});
    rec.records.push_back({step, seed, "clip_fraction", p.loss.clip_fraction});
  }
  rec.snapshot = PolicySnapshot{result.shape, ta, result.parameters};
  if constexpr (std::is_same_v<E, QueueOfCarsEnv>) {
    PpoAgent agent(result.shape, cfg.ppo.ppo, seed);
    agent.set_parameters(result.parameters);
    const PolicyFn policy = [&agent](const Observation& o) { return agent.probabilities(o); };
    const auto step = static_cast<std::uint64_t>(result.curve.back().step);
    const auto& qc = env.base().config();
    const auto report = analyze_queue_policy(policy, qc, cfg.time_limit.horizon, cfg.gamma, ta);
    rec.records.push_back({step, seed, "oracle_match", report.match_fraction()});
    rec.records.push_back({step, seed, "success_probability", report.success_probability});
    rec.heatmap = policy_heatmap(policy, qc, cfg.time_limit.horizon, ta);
  }
  return rec;
}

inline SeedRecord run_seed(const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  ParamTable params = cfg.env_params;  // per-thread copy; lookups mark keys as read
  AnyEnvironment train = make_environment(cfg.env_name, params, train_env_seed(seed));
  AnyEnvironment eval = make_environment(cfg.env_name, params, eval_env_seed(seed));
  SeedRecord rec = std::visit(
      [&](auto& t) -> SeedRecord {
        using E = std::decay_t<decltype(t)>;
        E& e = std::get<E>(eval);
        if (cfg.agent == AgentKind::Ppo) return run_ppo_seed(t, e, cfg, seed);
        return run_tabular_seed(t, e, cfg, seed);
      },
      train);
  rec.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return rec;
}

inline std::string seed_list(const std::vector<std::uint64_t>& seeds) {
  std::string out;
  for (std::size_t i = 0; i < seeds.size(); ++i) out += (i ? "," : "") + std::to_string(seeds[i]);
  return out;
}

}  // namespace detail

/// Resolves the run directory: --out wins, then the configured output, with
/// relative paths placed under the output root.
inline std::filesystem::path run_directory(const ExperimentConfig& cfg, const RunOptions& opt) {
  const std::filesystem::path p = opt.out ? *opt.out : cfg.output;
  return p.is_absolute() || opt.out ? p : opt.output_root / p;
}

/// Runs every seed, writing per-seed raw files as they finish, then the
/// merged raw table and the aggregate. Files that depend only on the config
/// and seeds are byte-identical across reruns; timings go to `timing.csv`.
inline RunSummary run_experiment(ExperimentConfig cfg, const RunOptions& opt = {}) {
  if (opt.seeds) cfg.seeds = *opt.seeds;
  if (opt.workers) cfg.workers = *opt.workers;
  if (cfg.seeds.empty()) throw ConfigError("no seeds to run");
  if (cfg.mode == TimeoutMode::TimeAware && cfg.agent != AgentKind::Ppo &&
      cfg.effective_eval_horizon() != cfg.time_limit.horizon)
    throw ConfigError("time-aware tables are only defined for the training horizon");

  RunSummary summary;
  summary.directory = run_directory(cfg, opt);
  summary.config_hash = config_hash(cfg);
  std::filesystem::create_directories(summary.directory);
  std::filesystem::remove(summary.directory / "aggregate.csv");
  std::filesystem::remove(summary.directory / "errors.txt");
  write_file_atomic(summary.directory / "config.txt", cfg.source);
  write_file_atomic(summary.directory / "meta.txt",
                    "name=" + cfg.name + "\nconfig_hash=" + hex64(summary.config_hash) +
                        "\nseeds=" + detail::seed_list(cfg.seeds) + "\n");

  std::vector<std::optional<SeedRecord>> slots(cfg.seeds.size());
  std::vector<std::string> failures(cfg.seeds.size());
  parallel_for(cfg.seeds.size(), cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seeds[i];
    try {
      SeedRecord rec = detail::run_seed(cfg, seed);
      const std::string stem = "seed_" + std::to_string(seed);
      write_file_atomic(summary.directory / (stem + ".csv"), emit_raw(rec.records));
      if (rec.snapshot) {
        std::ostringstream os;
        write_snapshot(os, *rec.snapshot);
        write_file_atomic(summary.directory / ("policy_" + stem + ".txt"), os.str());
      }
      if (rec.heatmap)
        write_file_atomic(summary.directory / ("heatmap_" + stem + ".csv"), heatmap_csv(*rec.heatmap));
      slots[i] = std::move(rec);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });

  std::vector<RawRecord> all;
  std::string timing = "seed,wall_seconds\n";
  std::string failed;
  for (std::size_t i = 0; i < slots.size(); ++i) {
    if (!slots[i]) {
      failed += "seed " + std::to_string(cfg.seeds[i]) + ": " + failures[i] + "\n";
      continue;
    }
    all.insert(all.end(), slots[i]->records.begin(), slots[i]->records.end());
    timing += std::to_string(slots[i]->seed) + "," + to_decimal(slots[i]->wall_seconds) + "\n";
    summary.seeds.push_back(std::move(*slots[i]));
  }
  write_file_atomic(summary.directory / "records.csv", emit_raw(all));
  write_file_atomic(summary.directory / "timing.csv", timing);
  if (!failed.empty()) {
    write_file_atomic(summary.directory / "errors.txt", failed);
    throw RunFailure("run failed; partial records kept in " + summary.directory.string() + "\n" +
                     failed);
  }
  summary.aggregate = aggregate(all);
  write_file_atomic(summary.directory / "aggregate.csv", emit_aggregate(summary.aggregate));
  return summary;
}

}  // namespace timelimits
