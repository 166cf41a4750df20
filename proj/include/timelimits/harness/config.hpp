#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "timelimits/core/params.hpp"
#include "timelimits/core/time_limit.hpp"
#include "timelimits/envs/registry.hpp"
#include "timelimits/harness/csv.hpp"
#include "timelimits/policy_grad/train.hpp"
#include "timelimits/tabular/q_learning.hpp"

namespace timelimits {

/// Sectioned key/value text. Blank lines and lines starting with '#' or ';'
/// are ignored; every other line is `[section]` or `key = value`.
struct IniDocument {
  std::map<std::string, ParamTable> sections;
  std::map<std::string, std::size_t> section_lines;

  [[nodiscard]] const ParamTable& section(const std::string& name) const {
    static const ParamTable empty;
    auto it = sections.find(name);
    return it == sections.end() ? empty : it->second;
  }
};

inline IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::istringstream is(text);
  std::string raw;
  std::string current;
  std::size_t line_no = 0;
  while (std::getline(is, raw)) {
    ++line_no;
    const std::string_view line = ParamTable::trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']' || line.size() < 3) throw ConfigError("malformed section header", line_no);
      current = std::string(ParamTable::trim(line.substr(1, line.size() - 2)));
      if (doc.section_lines.contains(current))
        throw ConfigError("duplicate section [" + current + "]", line_no);
      doc.section_lines[current] = line_no;
      doc.sections[current];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    if (current.empty()) throw ConfigError("key outside of any section", line_no);
    const std::string key(ParamTable::trim(line.substr(0, eq)));
    const std::string value(ParamTable::trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigError("empty key", line_no);
    auto& table = doc.sections[current];
    if (table.contains(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    table.set(key, value, line_no);
  }
  return doc;
}

enum class AgentKind { QLearning, MonteCarlo, Ppo };

inline AgentKind parse_agent_kind(const std::string& s, std::size_t line) {
  if (s == "q_learning") return AgentKind::QLearning;
  if (s == "monte_carlo") return AgentKind::MonteCarlo;
  if (s == "ppo") return AgentKind::Ppo;
  throw ConfigError("unknown agent '" + s + "' (expected q_learning, monte_carlo or ppo)", line);
}

inline const char* to_string(AgentKind k) {
  switch (k) {
    case AgentKind::QLearning: return "q_learning";
    case AgentKind::MonteCarlo: return "monte_carlo";
    case AgentKind::Ppo: return "ppo";
  }
  return "?";
}

/// Fully validated experiment description.
struct ExperimentConfig {
  std::string name;
  std::filesystem::path output;  // relative paths resolve against the output root
  std::vector<std::uint64_t> seeds{0};
  std::size_t workers = 1;

  std::string env_name;
  ParamTable env_params;

  TimeLimitConfig time_limit{1, false};
  std::size_t eval_horizon = 0;  // 0: same as training
  std::size_t eval_every = 1000;
  std::size_t eval_episodes = 10;

  AgentKind agent = AgentKind::QLearning;
  TimeoutMode mode = TimeoutMode::Standard;
  double gamma = 0.99;
  LearningSchedule schedule;
  std::size_t episodes = 0;
  std::size_t steps = 0;
  std::vector<std::size_t> buffers{0};  // q_learning: replay capacities, 0 = online
  std::size_t updates_per_step = 1;
  double initial_value = 0.0;
  PpoTrainConfig ppo;

  std::string source;  // normalised text used for the config hash

  [[nodiscard]] std::size_t effective_eval_horizon() const {
    return eval_horizon ? eval_horizon : time_limit.horizon;
  }
};

namespace detail {

inline std::string canonical_text(const IniDocument& doc) {
  std::string out;
  for (const auto& [name, table] : doc.sections) {
    out += "[" + name + "]\n";
    for (const auto& [key, entry] : table.entries()) out += key + "=" + entry.value + "\n";
  }
  return out;
}

template <class T>
T checked(const ParamTable& t, std::string_view key, T fallback, bool (*ok)(T), const char* rule) {
  T v;
  if constexpr (std::is_same_v<T, double>) v = t.get_double(key, fallback);
  else v = static_cast<T>(t.get_int(key, static_cast<std::int64_t>(fallback)));
  if (!ok(v)) {
    const std::size_t line = t.contains(key) ? t.entries().at(std::string(key)).line : 0;
    throw ConfigError("'" + std::string(key) + "' " + rule, line);
  }
  return v;
}

inline std::size_t line_of(const ParamTable& t, std::string_view key) {
  auto it = t.entries().find(std::string(key));
  return it == t.entries().end() ? 0 : it->second.line;
}

}  // namespace detail

/// Parses and validates an experiment. Every problem is a ConfigError naming
/// the offending line where one exists.
inline ExperimentConfig parse_experiment(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  for (const auto& [name, line] : doc.section_lines)
    if (name != "experiment" && name != "env" && name != "time_limit" && name != "agent" &&
        name != "eval")
      throw ConfigError("unknown section [" + name + "]", line);

  ExperimentConfig cfg;
  cfg.source = detail::canonical_text(doc);
  const auto positive = +[](std::int64_t v) { return v > 0; };
  const auto non_negative = +[](std::int64_t v) { return v >= 0; };
  const auto unit = +[](double v) { return v >= 0.0 && v <= 1.0; };

  const ParamTable& ex = doc.section("experiment");
  cfg.name = ex.require_string("name");
  cfg.output = ex.get_string("output", cfg.name);
  for (auto s : ex.get_int_list("seeds", {0})) {
    if (s < 0) throw ConfigError("seeds must be non-negative", detail::line_of(ex, "seeds"));
    cfg.seeds.push_back(static_cast<std::uint64_t>(s));
  }
  cfg.seeds.erase(cfg.seeds.begin());
  cfg.workers = static_cast<std::size_t>(detail::checked<std::int64_t>(ex, "workers", 1, positive, "must be positive"));
  ex.reject_unread("[experiment]");

  const ParamTable& env = doc.section("env");
  cfg.env_name = env.require_string("name");
  for (const auto& [key, entry] : env.entries())
    if (key != "name") cfg.env_params.set(key, entry.value, entry.line);
  env.reject_unread("[env]");

  const ParamTable& tl = doc.section("time_limit");
  cfg.time_limit.horizon = static_cast<std::size_t>(
      detail::checked<std::int64_t>(tl, "horizon", 0, positive, "must be a positive integer"));
  cfg.time_limit.append_remaining_time = tl.get_bool("remaining_time_input", false);
  tl.reject_unread("[time_limit]");

  const ParamTable& ev = doc.section("eval");
  cfg.eval_horizon = static_cast<std::size_t>(
      detail::checked<std::int64_t>(ev, "horizon", 0, non_negative, "must be non-negative"));
  cfg.eval_every = static_cast<std::size_t>(
      detail::checked<std::int64_t>(ev, "every", 1000, non_negative, "must be non-negative"));
  cfg.eval_episodes = static_cast<std::size_t>(
      detail::checked<std::int64_t>(ev, "episodes", 10, positive, "must be positive"));
  const bool greedy_eval = ev.get_bool("greedy", false);
  ev.reject_unread("[eval]");

  // Constructing the environment here makes unknown env keys fail before any run starts.
  const ParamTable& ag = doc.section("agent");
  cfg.agent = parse_agent_kind(ag.require_string("kind"), detail::line_of(ag, "kind"));
  cfg.gamma = detail::checked<double>(ag, "gamma", 0.99, unit, "must lie in [0, 1]");
  cfg.episodes = static_cast<std::size_t>(
      detail::checked<std::int64_t>(ag, "episodes", 0, non_negative, "must be non-negative"));
  cfg.steps = static_cast<std::size_t>(
      detail::checked<std::int64_t>(ag, "steps", 0, non_negative, "must be non-negative"));

  const AnyEnvironment probe = make_environment(cfg.env_name, cfg.env_params, 0);
  if (cfg.agent == AgentKind::Ppo) {
    if (std::holds_alternative<LastMomentEnv>(probe))
      throw ConfigError("ppo needs the same action set in every state, which last_moment lacks",
                        detail::line_of(ag, "kind"));
    auto& p = cfg.ppo;
    p.ppo.gamma = cfg.gamma;
    p.ppo.lambda = detail::checked<double>(ag, "lambda", p.ppo.lambda, unit, "must lie in [0, 1]");
    p.ppo.peb = ag.get_bool("peb", false);
    p.ppo.clip = detail::checked<double>(ag, "clip", p.ppo.clip, +[](double v) { return v > 0.0 && v < 1.0; },
                                         "must lie in (0, 1)");
    const auto nonneg = +[](double v) { return v >= 0.0; };
    p.ppo.entropy_coef = detail::checked<double>(ag, "entropy_coef", p.ppo.entropy_coef, nonneg, "must be non-negative");
    p.ppo.value_coef = detail::checked<double>(ag, "value_coef", p.ppo.value_coef, nonneg, "must be non-negative");
    p.ppo.epochs = static_cast<std::size_t>(
        detail::checked<std::int64_t>(ag, "epochs", 4, positive, "must be positive"));
    p.ppo.minibatch = static_cast<std::size_t>(
        detail::checked<std::int64_t>(ag, "minibatch", 64, positive, "must be positive"));
    p.ppo.horizon = static_cast<std::size_t>(
        detail::checked<std::int64_t>(ag, "batch_horizon", 512, positive, "must be positive"));
    p.ppo.learning_rate = detail::checked<double>(ag, "learning_rate", p.ppo.learning_rate,
                                                  +[](double v) { return v > 0.0; }, "must be positive");
    p.ppo.anneal_learning_rate = ag.get_bool("anneal_learning_rate", true);
    p.ppo.max_grad_norm = detail::checked<double>(ag, "max_grad_norm", p.ppo.max_grad_norm, nonneg, "must be non-negative");
    if (ag.contains("hidden")) {
      p.hidden.clear();
      for (auto h : ag.get_int_list("hidden", {})) {
        if (h <= 0) throw ConfigError("'hidden' sizes must be positive", detail::line_of(ag, "hidden"));
        p.hidden.push_back(static_cast<std::size_t>(h));
      }
    }
    if (cfg.steps == 0) throw ConfigError("ppo needs 'steps' > 0", detail::line_of(ag, "kind"));
    p.total_steps = cfg.steps;
    p.eval_every = cfg.eval_every;
    p.eval_episodes = cfg.eval_episodes;
    p.greedy_eval = greedy_eval;
  } else {
    if (std::holds_alternative<InfiniteCollectorEnv>(probe))
      throw ConfigError("tabular agents need an enumerable environment", detail::line_of(ag, "kind"));
    if (cfg.time_limit.append_remaining_time)
      throw ConfigError("remaining_time_input applies to ppo only; use mode = time_aware",
                        detail::line_of(tl, "remaining_time_input"));
    try {
      cfg.mode = parse_timeout_mode(ag.get_string("mode", "standard"));
    } catch (const InvalidInput& e) {
      throw ConfigError(e.what(), detail::line_of(ag, "mode"));
    }
    if (cfg.agent == AgentKind::MonteCarlo && cfg.mode == TimeoutMode::PEB)
      throw ConfigError("monte_carlo does not bootstrap; mode must be standard or time_aware",
                        detail::line_of(ag, "mode"));
    cfg.schedule.alpha0 = detail::checked<double>(ag, "alpha0", 1.0, +[](double v) { return v > 0.0 && v <= 1.0; },
                                                  "must lie in (0, 1]");
    cfg.schedule.omega = detail::checked<double>(ag, "omega", 0.8, unit, "must lie in [0, 1]");
    cfg.schedule.epsilon = detail::checked<double>(ag, "epsilon", 1.0, unit, "must lie in [0, 1]");
    cfg.initial_value = ag.get_double("initial_value", 0.0);
    if (cfg.agent == AgentKind::QLearning) {
      if (ag.contains("buffer")) {
        cfg.buffers.clear();
        for (auto b : ag.get_int_list("buffer", {})) {
          if (b < 0) throw ConfigError("'buffer' sizes must be non-negative", detail::line_of(ag, "buffer"));
          cfg.buffers.push_back(static_cast<std::size_t>(b));
        }
      }
      cfg.updates_per_step = static_cast<std::size_t>(
          detail::checked<std::int64_t>(ag, "updates_per_step", 1, positive, "must be positive"));
      if (cfg.episodes == 0 && cfg.steps == 0)
        throw ConfigError("q_learning needs 'episodes' or 'steps'", detail::line_of(ag, "kind"));
    } else {
      if (cfg.episodes == 0 || cfg.steps != 0)
        throw ConfigError("monte_carlo needs 'episodes' (and no 'steps')", detail::line_of(ag, "kind"));
    }
  }
  ag.reject_unread("[agent]");
  if (!std::isfinite(cfg.initial_value))
    throw ConfigError("'initial_value' must be finite", detail::line_of(ag, "initial_value"));
  return cfg;
}

inline ExperimentConfig load_experiment(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_file(path);
  } catch (const InvalidInput& e) {
    throw ConfigError(e.what());
  }
  return parse_experiment(text);
}

}  // namespace timelimits
