#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "timelimits/harness/config.hpp"
#include "timelimits/harness/csv.hpp"
#include "timelimits/oracle/backward_induction.hpp"
#include "timelimits/oracle/time_unaware_fixed_point.hpp"
#include "timelimits/oracle/value_iteration.hpp"

namespace timelimits {

namespace detail {

inline std::string action_set(const std::vector<ActionIndex>& set) {
  std::string out;
  for (std::size_t i = 0; i < set.size(); ++i) out += (i ? ";" : "") + std::to_string(set[i]);
  return out;
}

}  // namespace detail

/// Oracle tables for an experiment's environment, keyed by file name:
///   finite_horizon.csv    h,state,value,greedy    (h = 1..T)
///   infinite_horizon.csv  state,value,greedy      (value iteration, gamma < 1)
///   time_unaware.csv      state,value,greedy      (Two-Goal only)
/// Greedy sets list action indices separated by ';'.
inline std::vector<std::pair<std::string, std::string>> oracle_tables(const ExperimentConfig& cfg) {
  ParamTable params = cfg.env_params;
  const AnyEnvironment any = make_environment(cfg.env_name, params, 0);
  return std::visit(
      [&](const auto& env) {
        using E = std::decay_t<decltype(env)>;
        std::vector<std::pair<std::string, std::string>> files;
        if constexpr (!FiniteEnvironment<E>) {
          throw UnsupportedOperation("environment '" + cfg.env_name + "' cannot be enumerated");
        } else {
          const TabularModel model = build_model(env);
          const std::size_t T = cfg.time_limit.horizon;
          const auto fh = backward_induction(model, T, cfg.gamma);
          std::string csv = "h,state,value,greedy\n";
          for (std::size_t h = 1; h <= T; ++h)
            for (StateIndex s = 0; s < model.num_states; ++s)
              csv += std::to_string(h) + ',' + std::to_string(s) + ',' +
                     to_decimal(fh.values[h][s]) + ',' + detail::action_set(fh.greedy[h][s]) + '\n';
          files.emplace_back("finite_horizon.csv", std::move(csv));

          if (cfg.gamma < 1.0) {
            const auto ih = value_iteration(model, cfg.gamma);
            std::string v = "state,value,greedy\n";
            for (StateIndex s = 0; s < model.num_states; ++s)
              v += std::to_string(s) + ',' + to_decimal(ih.values[s]) + ',' +
                   detail::action_set(ih.greedy[s]) + '\n';
            files.emplace_back("infinite_horizon.csv", std::move(v));
          }
          if constexpr (std::is_same_v<E, TwoGoalGridworldEnv>) {
            const auto fp = fixed_point_time_unaware(env, cfg.gamma, T);
            std::string v = "state,value,greedy\n";
            for (StateIndex s = 0; s < fp.values.size(); ++s)
              v += std::to_string(s) + ',' + to_decimal(fp.values[s]) + ',' +
                   detail::action_set(fp.greedy[s]) + '\n';
            files.emplace_back("time_unaware.csv", std::move(v));
          }
        }
        return files;
      },
      any);
}

}  // namespace timelimits
