#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <variant>

#include "timelimits/core/params.hpp"
#include "timelimits/envs/infinite_collector.hpp"
#include "timelimits/envs/last_moment.hpp"
#include "timelimits/envs/queue_of_cars.hpp"
#include "timelimits/envs/replay_gridworld.hpp"
#include "timelimits/envs/two_goal_gridworld.hpp"

namespace timelimits {

using AnyEnvironment = std::variant<LastMomentEnv, TwoGoalGridworldEnv, QueueOfCarsEnv,
                                    ReplayGridworldEnv, InfiniteCollectorEnv>;

namespace detail {

inline std::vector<grid::Cell> parse_cells(std::string_view text, std::size_t line) {
  // "r:c;r:c"
  std::vector<grid::Cell> cells;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t semi = text.find(';', start);
    if (semi == std::string_view::npos) semi = text.size();
    const auto item = ParamTable::trim(text.substr(start, semi - start));
    const auto colon = item.find(':');
    if (colon == std::string_view::npos) throw ConfigError("walls expects r:c;r:c", line);
    const auto rc = ParamTable::parse_int_list("walls", item.substr(0, colon), line);
    const auto cc = ParamTable::parse_int_list("walls", item.substr(colon + 1), line);
    if (rc.size() != 1 || cc.size() != 1) throw ConfigError("walls expects r:c;r:c", line);
    cells.push_back({static_cast<int>(rc[0]), static_cast<int>(cc[0])});
    start = semi + 1;
  }
  return cells;
}

}  // namespace detail

/// Builds an environment from its registry name and parameter table. Unknown
/// names and unknown parameters are ConfigErrors.
inline AnyEnvironment make_environment(std::string_view name, const ParamTable& params,
                                       std::uint64_t seed) {
  auto finish = [&](auto env) -> AnyEnvironment {
    params.reject_unread("[env] for " + std::string(name));
    return env;
  };
  if (name == "last_moment") return finish(LastMomentEnv(seed));
  if (name == "two_goal") {
    TwoGoalConfig c;
    c.width = static_cast<int>(params.get_int("width", c.width));
    c.height = static_cast<int>(params.get_int("height", c.height));
    c.far_goal_reward = params.get_double("far_goal_reward", c.far_goal_reward);
    c.near_goal_reward = params.get_double("near_goal_reward", c.near_goal_reward);
    c.move_penalty = params.get_double("move_penalty", c.move_penalty);
    return finish(TwoGoalGridworldEnv(c, seed));
  }
  if (name == "queue_of_cars") {
    QueueOfCarsConfig c;
    c.exit_distance = static_cast<std::size_t>(params.get_int("exit_distance", 9));
    return finish(QueueOfCarsEnv(c, seed));
  }
  if (name == "replay_grid") {
    ReplayGridConfig c;
    c.width = static_cast<int>(params.get_int("width", c.width));
    c.height = static_cast<int>(params.get_int("height", c.height));
    if (params.contains("walls")) {
      const auto line = params.entries().at("walls").line;
      c.walls = detail::parse_cells(params.get_string("walls", ""), line);
    }
    return finish(ReplayGridworldEnv(c, seed));
  }
  if (name == "infinite_collector") {
    InfiniteCollectorConfig c;
    c.width = static_cast<int>(params.get_int("width", c.width));
    c.height = static_cast<int>(params.get_int("height", c.height));
    return finish(InfiniteCollectorEnv(c, seed));
  }
  throw ConfigError("unknown environment '" + std::string(name) + "'");
}

}  // namespace timelimits
