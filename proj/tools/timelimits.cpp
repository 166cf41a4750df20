// Command-line front end: run, compare, oracle, heatmap.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "timelimits/harness/compare.hpp"
#include "timelimits/harness/config.hpp"
#include "timelimits/harness/oracle_dump.hpp"
#include "timelimits/harness/run.hpp"
#include "timelimits/policy_grad/heatmap.hpp"
#include "timelimits/policy_grad/snapshot.hpp"

namespace tl = timelimits;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kRuntimeError = 3;

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (auto v : tl::ParamTable::parse_int_list("--seeds", text)) {
    if (v < 0) throw tl::ConfigError("--seeds must be non-negative");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

void emit(const std::optional<std::string>& out, const std::string& text) {
  if (out) tl::write_file_atomic(*out, text);
  else std::cout << text;
}

int cmd_run(const std::string& path, const std::optional<std::string>& seeds,
            const std::optional<std::string>& out, std::optional<std::size_t> workers) {
  tl::RunOptions opt;
  tl::ExperimentConfig cfg;
  try {
    cfg = tl::load_experiment(path);
    if (seeds) opt.seeds = parse_seeds(*seeds);
    if (out) opt.out = *out;
    if (workers) {
      if (*workers == 0) throw tl::ConfigError("--workers must be positive");
      opt.workers = workers;
    }
  } catch (const tl::InvalidInput& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const auto summary = tl::run_experiment(cfg, opt);
    std::cout << "wrote " << summary.directory.string() << " (config " << tl::hex64(summary.config_hash)
              << ", " << summary.seeds.size() << " seeds)\n";
    return kOk;
  } catch (const tl::ConfigError& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_compare(const std::vector<std::string>& dirs, const std::optional<std::string>& out) {
  std::vector<tl::ComparisonInput> inputs;
  try {
    for (const auto& d : dirs) inputs.push_back(tl::load_run(d));
    emit(out, tl::compare_runs(inputs));
    return kOk;
  } catch (const tl::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_oracle(const std::string& path, const std::optional<std::string>& out) {
  tl::ExperimentConfig cfg;
  try {
    cfg = tl::load_experiment(path);
  } catch (const tl::InvalidInput& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const std::filesystem::path dir =
        out ? std::filesystem::path(*out) : tl::default_output_root() / cfg.output / "oracle";
    for (const auto& [name, csv] : tl::oracle_tables(cfg)) tl::write_file_atomic(dir / name, csv);
    std::cout << "wrote " << dir.string() << '\n';
    return kOk;
  } catch (const tl::UnsupportedOperation& e) {
    std::cerr << path << ": " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

int cmd_heatmap(const std::string& snapshot_path, const std::string& env_path,
                const std::optional<std::string>& out) {
  tl::ExperimentConfig cfg;
  tl::PolicySnapshot snap;
  tl::QueueOfCarsConfig queue;
  try {
    cfg = tl::load_experiment(env_path);
    tl::ParamTable params = cfg.env_params;
    const auto env = tl::make_environment(cfg.env_name, params, 0);
    if (!std::holds_alternative<tl::QueueOfCarsEnv>(env))
      throw tl::ConfigError("heatmaps are defined for queue_of_cars only");
    queue = std::get<tl::QueueOfCarsEnv>(env).config();
    std::ifstream in(snapshot_path);
    if (!in) throw tl::InvalidInput("cannot open '" + snapshot_path + "'");
    snap = tl::read_snapshot(in);
    const std::size_t expected = queue.exit_distance + (snap.time_aware ? 1 : 0);
    if (snap.shape.input != expected || snap.shape.actions != 2)
      throw tl::InvalidInput("snapshot does not fit this environment");
  } catch (const tl::InvalidInput& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  try {
    const tl::Mlp net(snap.shape);
    const tl::PolicyFn policy = [&](const tl::Observation& obs) {
      Eigen::MatrixXd x = Eigen::Map<const Eigen::VectorXd>(obs.data(), static_cast<Eigen::Index>(obs.size()));
      const Eigen::MatrixXd logp = tl::log_softmax(net.forward(snap.parameters, x).logits);
      return std::vector<double>{std::exp(logp(0, 0)), std::exp(logp(1, 0))};
    };
    emit(out, tl::heatmap_csv(tl::policy_heatmap(policy, queue, cfg.time_limit.horizon, snap.time_aware)));
    return kOk;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-limit experiments: tabular agents, PPO and exact oracles"};
  app.require_subcommand(1);

  std::string config, snapshot;
  std::vector<std::string> dirs;
  std::optional<std::string> seeds, out;
  std::optional<std::size_t> workers;

  auto* run = app.add_subcommand("run", "Run an experiment config for every seed");
  run->add_option("config", config, "Experiment config file")->required();
  run->add_option("--seeds", seeds, "Seed list overriding the config, e.g. 0..9 or 0,1000,2000");
  run->add_option("--out", out, "Output directory (default: <output root>/<experiment output>)");
  run->add_option("--workers", workers, "Seeds run in parallel");

  auto* compare = app.add_subcommand("compare", "Join the aggregates of several runs");
  compare->add_option("dirs", dirs, "Run directories")->required();
  compare->add_option("--out", out, "Write the table here instead of stdout");

  auto* oracle = app.add_subcommand("oracle", "Dump exact values and greedy sets");
  oracle->add_option("config", config, "Experiment config file")->required();
  oracle->add_option("--out", out, "Output directory");

  auto* heatmap = app.add_subcommand("heatmap", "Dangerous-action probabilities of a Queue of Cars policy");
  heatmap->add_option("snapshot", snapshot, "Policy snapshot file")->required();
  heatmap->add_option("config", config, "Experiment config naming the environment and horizon")->required();
  heatmap->add_option("--out", out, "Write the CSV here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  if (*run) return cmd_run(config, seeds, out, workers);
  if (*compare) return cmd_compare(dirs, out);
  if (*oracle) return cmd_oracle(config, out);
  return cmd_heatmap(snapshot, config, out);
}
