#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "timelimits/core/time_limit.hpp"
#include "timelimits/envs/registry.hpp"
#include "timelimits/oracle/value_iteration.hpp"

using namespace timelimits;

namespace {

template <FiniteEnvironment E>
void expect_rows_normalised(const E& env) {
  for (StateIndex s = 0; s < env.num_states(); ++s)
    for (ActionIndex a = 0; a < env.num_actions_in(s); ++a) {
      double total = 0.0;
      for (const auto& o : transition_model(env, s, a)) {
        EXPECT_GE(o.probability, 0.0);
        EXPECT_LE(o.next_state, env.num_states());
        if (o.next_state == env.num_states()) {
          EXPECT_TRUE(o.environmental_termination);
        }
        total += o.probability;
      }
      EXPECT_NEAR(total, 1.0, 1e-12) << "state " << s << " action " << a;
    }
}

// Key identifying an outcome as observed through step().
using OutcomeKey = std::tuple<StateIndex, double, bool>;

}  // namespace

TEST(LastMoment, Dynamics) {
  LastMomentEnv env;
  EXPECT_EQ(env.reset(), (Observation{1.0, 0.0}));
  EXPECT_EQ(env.state_index(), LastMomentEnv::kA);
  auto stay = env.step(LastMomentEnv::kStay);
  EXPECT_EQ(stay.reward, 0.0);
  EXPECT_FALSE(stay.terminated());
  auto jump = env.step(LastMomentEnv::kJump);
  EXPECT_EQ(env.state_index(), LastMomentEnv::kB);
  EXPECT_EQ(jump.reward, 1.0);
  EXPECT_FALSE(jump.terminated());
  for (int i = 0; i < 5; ++i) {
    auto b = env.step(LastMomentEnv::kOnly);
    EXPECT_EQ(b.reward, -1.0);
    EXPECT_FALSE(b.terminated());
    EXPECT_EQ(env.state_index(), LastMomentEnv::kB);
  }
  EXPECT_THROW(env.step(1), InvalidInput);  // B offers a single action
}

TEST(LastMoment, EnumerationAndModel) {
  LastMomentEnv env;
  const auto e = enumerate_states(env);
  EXPECT_EQ(e.non_terminal, (std::vector<StateIndex>{0, 1}));
  EXPECT_EQ(e.terminal, 2u);
  expect_rows_normalised(env);
}

TEST(LastMoment, NeverTerminatesEnvironmentally) {
  // exhaustive over all action sequences of length 10
  for (unsigned mask = 0; mask < (1u << 10); ++mask) {
    LastMomentEnv env;
    env.reset();
    for (int t = 0; t < 10; ++t) {
      const ActionIndex a = env.state_index() == LastMomentEnv::kA ? ((mask >> t) & 1u) : 0;
      ASSERT_FALSE(env.step(a).terminated());
    }
  }
}

TEST(TwoGoal, GoalEntryAndCounts) {
  TwoGoalGridworldEnv env;
  EXPECT_EQ(enumerate_states(env).non_terminal.size(), 47u);
  // (1, 6) sits directly below the top-right goal
  env.place(env.index_of({1, 6}));
  auto r = env.step(grid::North);
  EXPECT_EQ(r.reward, 49.0);  // goal reward plus the move penalty
  EXPECT_EQ(r.termination, TerminationKind::Environmental);
  env.place(env.index_of({6, 1}));
  r = env.step(grid::West);
  EXPECT_EQ(r.reward, 19.0);
  EXPECT_TRUE(r.environmental());
}

TEST(TwoGoal, StayAndWallBump) {
  TwoGoalGridworldEnv env;
  for (StateIndex s = 0; s < env.num_states(); ++s) {
    const auto row = transition_model(env, s, TwoGoalGridworldEnv::kStay);
    ASSERT_EQ(row.size(), 1u);
    EXPECT_EQ(row[0].next_state, s);
    EXPECT_EQ(row[0].probability, 1.0);
    EXPECT_EQ(row[0].reward, 0.0);
    EXPECT_FALSE(row[0].environmental_termination);
  }
  const StateIndex corner = env.index_of({0, 0});
  const auto bump = transition_model(env, corner, grid::North);
  EXPECT_EQ(bump[0].next_state, corner);
  EXPECT_EQ(bump[0].reward, -1.0);
  expect_rows_normalised(env);
}

TEST(TwoGoal, ResetIsUniformOverNonGoalCells) {
  TwoGoalGridworldEnv env({}, 17);
  std::vector<int> counts(env.num_states(), 0);
  const int n = 47000;
  for (int i = 0; i < n; ++i) {
    env.reset();
    ++counts[env.state_index()];
    ASSERT_FALSE(env.is_goal(env.cell_of(env.state_index())));
  }
  const double p = 1.0 / 47.0, se = std::sqrt(n * p * (1 - p));
  for (int c : counts) EXPECT_NEAR(c, n * p, 4.5 * se);
}

TEST(QueueOfCars, TransitionExamples) {
  QueueOfCarsEnv env;
  EXPECT_EQ(enumerate_states(env).non_terminal.size(), 9u);
  const auto d = transition_model(env, 3, QueueOfCarsEnv::kDangerous);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0].next_state, 4u);
  EXPECT_DOUBLE_EQ(d[0].probability, 0.8);
  EXPECT_EQ(d[0].reward, 0.0);
  EXPECT_FALSE(d[0].environmental_termination);
  EXPECT_EQ(d[1].next_state, env.num_states());
  EXPECT_DOUBLE_EQ(d[1].probability, 0.1);
  EXPECT_EQ(d[1].reward, 0.0);
  EXPECT_TRUE(d[1].environmental_termination);
  EXPECT_EQ(d[2].next_state, 3u);
  EXPECT_NEAR(d[2].probability, 0.1, 1e-12);

  const auto s = transition_model(env, 8, QueueOfCarsEnv::kSafe);
  ASSERT_EQ(s.size(), 2u);
  EXPECT_EQ(s[0].next_state, 9u);
  EXPECT_EQ(s[0].probability, 0.5);
  EXPECT_EQ(s[0].reward, 1.0);
  EXPECT_TRUE(s[0].environmental_termination);
  EXPECT_EQ(s[1].next_state, 8u);
  EXPECT_EQ(s[1].probability, 0.5);
  expect_rows_normalised(env);
}

TEST(QueueOfCars, ResetStartsAtZero) {
  QueueOfCarsEnv env({}, 3);
  for (int i = 0; i < 10; ++i) {
    env.reset();
    EXPECT_EQ(env.state_index(), 0u);
  }
}

TEST(QueueOfCars, SafeAdvanceFrequency) {
  QueueOfCarsEnv env({}, 2024);
  int advanced = 0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    env.reset();
    advanced += env.step(QueueOfCarsEnv::kSafe).observation[1] == 1.0;
  }
  EXPECT_NEAR(static_cast<double>(advanced) / n, 0.5, 0.01);
}

namespace {

// Drives every (state, action) of the queue 10^5 times through step() and
// compares outcome frequencies with the model within 3 binomial SEs.
void check_sampler_against_model(std::uint64_t seed) {
  QueueOfCarsEnv env({}, seed);
  const int n = 100000;
  for (StateIndex p = 0; p < env.num_states(); ++p)
    for (ActionIndex a = 0; a < 2; ++a) {
      std::map<OutcomeKey, int> counts;
      for (int i = 0; i < n; ++i) {
        env.reset();
        for (StateIndex k = 0; k < p; ++k) {
          // safe never crashes, so repeating it always reaches position p
          while (env.state_index() == k) env.step(QueueOfCarsEnv::kSafe);
        }
        auto r = env.step(a);
        const StateIndex next = r.environmental() ? env.num_states() : env.state_index();
        ++counts[{next, r.reward, r.environmental()}];
      }
      for (const auto& o : env.transitions(p, a)) {
        const double expected = o.probability * n;
        const double se = std::sqrt(n * o.probability * (1 - o.probability));
        const int seen = counts[{o.next_state, o.reward, o.environmental_termination}];
        EXPECT_NEAR(seen, expected, 4 * se + 1e-9) << "p=" << p << " a=" << a;
      }
    }
}

}  // namespace

TEST(QueueOfCars, SamplerMatchesModel) { check_sampler_against_model(77); }

TEST(ReplayGrid, ShortestPathMatchesOracle) {
  for (auto [w, h] : {std::pair{10, 10}, std::pair{6, 4}, std::pair{3, 8}}) {
    ReplayGridConfig cfg;
    cfg.width = w;
    cfg.height = h;
    ReplayGridworldEnv env(cfg);
    const auto sol = value_iteration(build_model(env), 1.0);
    env.reset();
    EXPECT_NEAR(sol.values[env.state_index()], -(w - 1 + h - 1), 1e-9);
    // follow the oracle policy and count steps
    double ret = 0.0;
    for (int t = 0; t < 1000; ++t) {
      auto r = env.step(sol.greedy[env.state_index()].front());
      ret += r.reward;
      if (r.terminated()) break;
    }
    EXPECT_EQ(ret, -(w - 1 + h - 1));
  }
}

TEST(ReplayGrid, Deterministic) {
  ReplayGridworldEnv env;
  expect_rows_normalised(env);
  for (StateIndex s = 0; s < env.num_states(); ++s)
    for (ActionIndex a = 0; a < 4; ++a) EXPECT_EQ(env.transitions(s, a).size(), 1u);
  env.reset();
  EXPECT_EQ(env.cell_of(env.state_index()), env.config().start());
}

TEST(ReplayGrid, WallsBlockMoves) {
  ReplayGridConfig cfg;
  cfg.walls = {{8, 0}};
  ReplayGridworldEnv env(cfg);
  env.reset();
  const StateIndex start = env.state_index();
  auto r = env.step(grid::North);
  EXPECT_EQ(env.state_index(), start);
  EXPECT_EQ(r.reward, -1.0);
}

TEST(InfiniteCollector, NeverTerminatesAndRespawns) {
  InfiniteCollectorEnv env({}, 5);
  env.reset();
  Rng rng(8);
  int rewards = 0;
  for (int t = 0; t < 100000; ++t) {
    const auto target = env.target();
    auto r = env.step(rng.below(4));
    ASSERT_FALSE(r.terminated());
    ASSERT_EQ(r.observation.size(), env.observation_dim());
    if (r.reward > 0) {
      ++rewards;
      ASSERT_EQ(env.agent(), target);
      ASSERT_FALSE(env.target() == env.agent());
    }
  }
  EXPECT_GT(rewards, 0);
}

TEST(InfiniteCollector, NotEnumerable) {
  InfiniteCollectorEnv env;
  EXPECT_THROW(enumerate_states(env), UnsupportedOperation);
  EXPECT_THROW(transition_model(env, 0, 0), UnsupportedOperation);
}

TEST(Environments, InvalidActionAndStepAfterTermination) {
  QueueOfCarsEnv q;
  q.reset();
  EXPECT_THROW(q.step(2), InvalidInput);
  TwoGoalGridworldEnv g;
  g.reset();
  EXPECT_THROW(g.step(5), InvalidInput);
  g.place(g.index_of({0, 5}));
  EXPECT_TRUE(g.step(grid::East).environmental());
  EXPECT_THROW(g.step(0), ContractViolation);
  EXPECT_THROW(transition_model(q, 9, 0), InvalidInput);
  EXPECT_THROW(transition_model(q, 0, 2), InvalidInput);
}

TEST(Registry, BuildsByNameAndRejectsUnknowns) {
  for (const char* name : {"last_moment", "two_goal", "queue_of_cars", "replay_grid", "infinite_collector"})
    EXPECT_NO_THROW(make_environment(name, ParamTable{}, 0)) << name;
  EXPECT_THROW(make_environment("nope", ParamTable{}, 0), ConfigError);
  ParamTable bad;
  bad.set("colour", "red", 4);
  try {
    make_environment("two_goal", bad, 0);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
  ParamTable walls;
  walls.set("walls", "1:1;2:3");
  const auto env = make_environment("replay_grid", walls, 0);
  EXPECT_EQ(std::get<ReplayGridworldEnv>(env).num_states(), 100u - 2u - 1u);
}
