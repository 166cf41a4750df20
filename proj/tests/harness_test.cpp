#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>

#include "timelimits/harness/compare.hpp"
#include "timelimits/harness/config.hpp"
#include "timelimits/harness/csv.hpp"
#include "timelimits/harness/oracle_dump.hpp"
#include "timelimits/harness/run.hpp"

using namespace timelimits;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("timelimits_harness_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

const char* kLastMoment = R"([experiment]
name = lm
seeds = 0,1,2

[env]
name = last_moment

[time_limit]
horizon = 5

[eval]
every = 200
episodes = 5

[agent]
kind = q_learning
mode = time_aware
gamma = 1.0
episodes = 1000
)";

std::size_t error_line(const std::string& text) {
  try {
    parse_experiment(text);
  } catch (const ConfigError& e) {
    return e.line();
  }
  ADD_FAILURE() << "config was accepted";
  return 0;
}

std::string replace(std::string text, const std::string& from, const std::string& to) {
  const auto pos = text.find(from);
  EXPECT_NE(pos, std::string::npos) << from;
  return text.replace(pos, from.size(), to);
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + TIMELIMITS_CLI + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Csv, RawRoundTrip) {
  Rng rng(3);
  std::vector<RawRecord> rows;
  for (int i = 0; i < 500; ++i) {
    double v = rng.normal() * std::exp(10.0 * rng.normal());
    if (i == 0) v = 0.1;
    if (i == 1) v = -0.0;
    if (i == 2) v = 5e-324;
    rows.push_back({rng.below(1'000'000), rng(), "metric_" + std::to_string(rng.below(4)), v});
  }
  const std::string text = emit_raw(rows);
  EXPECT_EQ(text.substr(0, text.find('\n')), kRawHeader);
  EXPECT_EQ(parse_raw(text), rows);
  EXPECT_EQ(emit_raw(parse_raw(text)), text);
}

TEST(Csv, AggregateMatchesDirectComputation) {
  Rng rng(5);
  std::vector<RawRecord> rows;
  std::map<std::pair<std::uint64_t, std::string>, std::vector<double>> groups;
  for (std::uint64_t seed = 0; seed < 7; ++seed)
    for (std::uint64_t step : {100u, 200u})
      for (const char* m : {"return", "length"}) {
        const double v = rng.normal();
        rows.push_back({step, seed, m, v});
        groups[{step, m}].push_back(v);
      }
  const auto agg = aggregate(rows);
  ASSERT_EQ(agg.size(), groups.size());
  for (const auto& a : agg) {
    const auto& xs = groups.at({a.step, a.metric});
    double mean = 0.0, ss = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    for (double x : xs) ss += (x - mean) * (x - mean);
    const double se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    EXPECT_NEAR(a.mean, mean, 1e-12);
    EXPECT_NEAR(a.stderr_, se, 1e-12);
    EXPECT_EQ(a.n, xs.size());
  }
  EXPECT_EQ(parse_aggregate(emit_aggregate(agg)), agg);
  rows.push_back(rows.front());
  EXPECT_THROW(aggregate(rows), InvalidInput);
}

TEST(Csv, RejectsMalformedTables) {
  EXPECT_THROW(parse_raw("step,seed,value\n"), InvalidInput);
  EXPECT_THROW(parse_raw(std::string(kRawHeader) + "\n1,2,x\n"), InvalidInput);
  EXPECT_THROW(parse_raw(std::string(kRawHeader) + "\n1,2,x,abc\n"), InvalidInput);
  EXPECT_THROW(parse_aggregate(std::string(kAggregateHeader) + "\n-1,x,1,0,1\n"), InvalidInput);
}

TEST(Csv, AtomicWriteCreatesDirectories) {
  const auto dir = scratch_dir("atomic");
  const auto file = dir / "a" / "b.csv";
  write_file_atomic(file, "hello\n");
  write_file_atomic(file, "again\n");
  EXPECT_EQ(read_file(file), "again\n");
  for (const auto& e : fs::directory_iterator(dir / "a")) EXPECT_EQ(e.path().filename(), "b.csv");
}

TEST(Config, ParsesShippedConfigs) {
  std::size_t count = 0;
  for (const auto& e : fs::directory_iterator(TIMELIMITS_CONFIG_DIR)) {
    if (e.path().extension() != ".cfg") continue;
    ++count;
    EXPECT_NO_THROW(load_experiment(e.path())) << e.path();
  }
  EXPECT_GE(count, 10u);
  const auto q = load_experiment(fs::path(TIMELIMITS_CONFIG_DIR) / "queue_ta.cfg");
  EXPECT_EQ(q.agent, AgentKind::Ppo);
  EXPECT_TRUE(q.time_limit.append_remaining_time);
  EXPECT_EQ(q.seeds.size(), 10u);
  const auto r = load_experiment(fs::path(TIMELIMITS_CONFIG_DIR) / "replay_peb.cfg");
  EXPECT_EQ(r.buffers, (std::vector<std::size_t>{100, 1000, 10000, 100000}));
  EXPECT_EQ(r.mode, TimeoutMode::PEB);
}

TEST(Config, ErrorsCarryLineNumbers) {
  EXPECT_EQ(error_line(replace(kLastMoment, "gamma = 1.0", "gamma = 1.5")), 18u);
  EXPECT_EQ(error_line(replace(kLastMoment, "episodes = 1000", "episodes = 1000\nlearning = fast")), 20u);
  EXPECT_EQ(error_line(replace(kLastMoment, "[eval]", "[evaluation]")), 11u);
  EXPECT_EQ(error_line(replace(kLastMoment, "horizon = 5", "horizon = 0")), 9u);
  EXPECT_EQ(error_line(replace(kLastMoment, "name = last_moment", "name = last_moment\nwidth = 3")), 7u);
  EXPECT_EQ(error_line(replace(kLastMoment, "mode = time_aware", "mode = sometimes")), 17u);
  EXPECT_EQ(error_line(replace(kLastMoment, "seeds = 0,1,2", "seeds = 0,1,2\nseeds = 4")), 4u);
  EXPECT_EQ(error_line(replace(kLastMoment, "kind = q_learning", "kind = ppo\nsteps = 10")), 16u);
  EXPECT_THROW(parse_experiment(replace(kLastMoment, "name = last_moment", "name = nowhere")), InvalidInput);
}

TEST(Config, CombinationRules) {
  const std::string collector = replace(kLastMoment, "name = last_moment", "name = infinite_collector");
  EXPECT_THROW(parse_experiment(collector), ConfigError);
  const std::string mc = replace(kLastMoment, "kind = q_learning", "kind = monte_carlo");
  EXPECT_NO_THROW(parse_experiment(mc));
  EXPECT_THROW(parse_experiment(replace(mc, "mode = time_aware", "mode = peb")), ConfigError);
  EXPECT_THROW(parse_experiment(replace(kLastMoment, "horizon = 5", "horizon = 5\nremaining_time_input = true")),
               ConfigError);
}

TEST(Run, DeterministicAcrossRerunsAndWorkers) {
  const auto root = scratch_dir("determinism");
  const auto cfg = parse_experiment(kLastMoment);
  RunOptions a;
  a.out = root / "a";
  RunOptions b;
  b.out = root / "b";
  b.workers = 3;
  const auto ra = run_experiment(cfg, a);
  run_experiment(cfg, b);
  EXPECT_EQ(read_file(root / "a" / "aggregate.csv"), read_file(root / "b" / "aggregate.csv"));
  EXPECT_EQ(read_file(root / "a" / "records.csv"), read_file(root / "b" / "records.csv"));
  for (std::uint64_t s : {0, 1, 2}) EXPECT_TRUE(fs::exists(root / "a" / ("seed_" + std::to_string(s) + ".csv")));
  EXPECT_NE(read_file(root / "a" / "meta.txt").find(hex64(ra.config_hash)), std::string::npos);

  bool saw_match = false;
  for (const auto& r : ra.aggregate)
    if (r.metric == "oracle_match") {
      saw_match = true;
      EXPECT_EQ(r.mean, 1.0);
    }
  EXPECT_TRUE(saw_match);
}

TEST(Run, OutputRootAndOverrides) {
  const auto root = scratch_dir("root");
  auto cfg = parse_experiment(kLastMoment);
  RunOptions opt;
  opt.output_root = root;
  opt.seeds = std::vector<std::uint64_t>{7};
  const auto summary = run_experiment(cfg, opt);
  EXPECT_EQ(summary.directory, root / "lm");
  EXPECT_EQ(summary.seeds.size(), 1u);
  EXPECT_EQ(read_file(root / "lm" / "meta.txt").find("seeds=7\n") != std::string::npos, true);
  opt.seeds = std::vector<std::uint64_t>{};
  EXPECT_THROW(run_experiment(cfg, opt), ConfigError);
}

TEST(Run, ConfigHashDependsOnSeeds) {
  auto cfg = parse_experiment(kLastMoment);
  const auto h = config_hash(cfg);
  EXPECT_EQ(h, config_hash(parse_experiment(kLastMoment)));
  cfg.seeds = {0, 1};
  EXPECT_NE(h, config_hash(cfg));
  // comments and blank lines do not change the hash
  EXPECT_EQ(h, config_hash(parse_experiment(std::string("# note\n\n") + kLastMoment)));
}

TEST(Compare, PassthroughAlignmentAndEmpty) {
  const auto root = scratch_dir("compare");
  const std::vector<AggregateRecord> rows{{10, "return", 1.5, 0.25, 3}, {20, "return", 2.0, 0.5, 3}};
  write_file_atomic(root / "one" / "aggregate.csv", emit_aggregate(rows));
  write_file_atomic(root / "two" / "aggregate.csv", emit_aggregate({rows[0]}));
  fs::create_directories(root / "empty");

  const auto one = load_run(root / "one");
  EXPECT_EQ(one.label, "one");
  EXPECT_EQ(compare_runs({one}), emit_aggregate(rows));
  EXPECT_EQ(compare_runs({one, ComparisonInput{"copy", rows}}),
            "step,metric,one_mean,one_stderr,copy_mean,copy_stderr\n"
            "10,return,1.5,0.25,1.5,0.25\n20,return,2,0.5,2,0.5\n");
  try {
    compare_runs({one, load_run(root / "two")});
    FAIL();
  } catch (const AlignmentError& e) {
    EXPECT_NE(std::string(e.what()).find("step 20 metric return missing from two"), std::string::npos);
  }
  EXPECT_THROW(load_run(root / "empty"), InvalidInput);
  EXPECT_THROW(compare_runs({one, one}), InvalidInput);
}

TEST(Oracle, DumpsTables) {
  const auto tables = oracle_tables(load_experiment(fs::path(TIMELIMITS_CONFIG_DIR) / "two_goal_standard.cfg"));
  ASSERT_EQ(tables.size(), 3u);
  EXPECT_EQ(tables[0].first, "finite_horizon.csv");
  EXPECT_EQ(tables[0].second.substr(0, 21), "h,state,value,greedy\n");
  EXPECT_EQ(std::count(tables[0].second.begin(), tables[0].second.end(), '\n'), 1 + 3 * 47);
  EXPECT_EQ(tables[1].first, "infinite_horizon.csv");
  EXPECT_EQ(tables[2].first, "time_unaware.csv");
  EXPECT_THROW(oracle_tables(load_experiment(fs::path(TIMELIMITS_CONFIG_DIR) / "collector_peb.cfg")),
               UnsupportedOperation);
  const auto lm = oracle_tables(parse_experiment(kLastMoment));
  EXPECT_EQ(lm.size(), 1u);  // undiscounted: finite horizon only
}

TEST(Cli, ExitCodes) {
  const auto root = scratch_dir("cli");
  std::ofstream(root / "good.cfg") << kLastMoment;
  std::ofstream(root / "bad.cfg") << replace(kLastMoment, "gamma = 1.0", "gamma = 1.5");
  const std::string r = root.string();
  EXPECT_EQ(run_cli("run " + r + "/good.cfg --out " + r + "/run --seeds 0,1"), 0);
  EXPECT_TRUE(fs::exists(root / "run" / "aggregate.csv"));
  EXPECT_EQ(run_cli("run " + r + "/bad.cfg --out " + r + "/bad"), 2);
  EXPECT_EQ(run_cli("run " + r + "/missing.cfg"), 2);
  EXPECT_EQ(run_cli("compare " + r + "/run --out " + r + "/cmp.csv"), 0);
  EXPECT_EQ(read_file(root / "cmp.csv"), read_file(root / "run" / "aggregate.csv"));
  fs::create_directories(root / "empty");
  EXPECT_EQ(run_cli("compare " + r + "/run " + r + "/empty"), 2);
  EXPECT_EQ(run_cli("oracle " + r + "/good.cfg --out " + r + "/oracle"), 0);
  EXPECT_TRUE(fs::exists(root / "oracle" / "finite_horizon.csv"));
  EXPECT_EQ(run_cli("oracle " + std::string(TIMELIMITS_CONFIG_DIR) + "/collector_peb.cfg --out " + r + "/o2"), 2);
  EXPECT_NE(run_cli("frobnicate"), 0);
}
