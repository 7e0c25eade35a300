#include <gtest/gtest.h>

#include <set>
#include <string>

#include "safe_rl/env_io.hpp"
#include "safe_rl/gridworld.hpp"
#include "safe_rl/presets.hpp"

using namespace safe_rl;
using namespace safe_rl::grid;

namespace {

GridSpec open_grid(int cols, int rows) {
    GridSpec s;
    s.name = "open";
    s.cols = cols;
    s.rows = rows;
    s.start_cells = {{0, 0}};
    s.goal_cells = {{cols - 1, rows - 1}};
    return s;
}

}  // namespace

TEST(Transition, MovesAgent) {
    const auto spec = open_grid(4, 4);
    const CompositeState s{{1, 1}, {}};
    EXPECT_EQ(transition(s, Action::Right, spec).agent, (Cell{2, 1}));
    EXPECT_EQ(transition(s, Action::Up, spec).agent, (Cell{1, 2}));
    EXPECT_EQ(transition(s, Action::Left, spec).agent, (Cell{0, 1}));
    EXPECT_EQ(transition(s, Action::Down, spec).agent, (Cell{1, 0}));
}

TEST(Transition, AdvancesMovers) {
    auto spec = open_grid(6, 4);
    spec.movers = {MoverSpec{{{3, 1}, {3, 2}, {4, 2}, {4, 1}}, 1}};
    for (Action a : kActions) EXPECT_EQ(transition(CompositeState{{0, 0}, {0}}, a, spec).phases[0], 1);
    spec.movers[0].speed = 3;
    EXPECT_EQ(transition(CompositeState{{0, 0}, {2}}, Action::Up, spec).phases[0], 1);
}

TEST(Reward, UnitCost) {
    const auto spec = open_grid(2, 1);
    EXPECT_EQ(reward(CompositeState{{0, 0}, {}}, Action::Right, spec), -1.0);
    EXPECT_EQ(reward(CompositeState{{0, 0}, {}}, Action::Left, spec), -1.0);
}

TEST(Constraint, Components) {
    auto spec = open_grid(4, 4);
    spec.movers = {MoverSpec{{{2, 2}, {2, 3}}, 1}};
    EXPECT_EQ(constraint(CompositeState{{0, 0}, {0}}, spec), (ConstraintVector{-1, -1}));
    EXPECT_TRUE(satisfied(constraint(CompositeState{{0, 0}, {0}}, spec)));
    EXPECT_EQ(constraint(CompositeState{{-1, 0}, {0}}, spec), (ConstraintVector{+1, -1}));
    EXPECT_EQ(constraint(CompositeState{{2, 2}, {0}}, spec), (ConstraintVector{-1, +1}));
    EXPECT_FALSE(satisfied(constraint(CompositeState{{2, 2}, {0}}, spec)));
}

TEST(SafeActions, Corner) {
    auto spec = open_grid(4, 4);
    spec.obstacles = {{1, 0}};
    EXPECT_EQ(safe_actions(CompositeState{{0, 0}, {}}, spec), ActionSet{action_id(Action::Up)});
    EXPECT_EQ(safe_actions(CompositeState{{1, 2}, {}}, spec), ActionSet::all(4));
}

TEST(SafeActions, MoverArrivingNextStep) {
    auto spec = open_grid(5, 5);
    // Now at (4,2), next step at (3,2).
    spec.movers = {MoverSpec{{{4, 2}, {3, 2}}, 1}};
    const CompositeState s{{2, 2}, {0}};
    const auto safe = safe_actions(s, spec);
    EXPECT_FALSE(safe.contains(action_id(Action::Right)));
    EXPECT_EQ(safe.size(), 3);
}

TEST(SafeActions, SwapIsNotACollision) {
    auto spec = open_grid(5, 5);
    spec.movers = {MoverSpec{{{3, 2}, {2, 2}}, 1}};
    EXPECT_TRUE(safe_actions(CompositeState{{2, 2}, {0}}, spec).contains(action_id(Action::Right)));
}

TEST(StateSpace, Counts) {
    EXPECT_EQ(enumerate_states(open_grid(4, 4)).size(), 16u);
    auto spec = open_grid(15, 9);
    spec.movers = {MoverSpec{presets::rectangle_loop(4, 2, 6, 4), 1}};
    ASSERT_EQ(spec.movers[0].path.size(), 8u);
    EXPECT_EQ(enumerate_states(spec).size(), 1080u);
}

TEST(StateSpace, IndexBijection) {
    auto spec = open_grid(5, 3);
    spec.movers = {MoverSpec{{{0, 1}, {1, 1}, {2, 1}}, 1}, MoverSpec{{{4, 0}, {4, 2}}, 1}};
    const auto a = enumerate_states(spec);
    const auto b = enumerate_states(spec);
    ASSERT_EQ(a.size(), 5u * 3u * 3u * 2u);
    std::set<CompositeState> seen;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const auto st = a.state(i);
        EXPECT_EQ(a.index(st), i);
        EXPECT_EQ(b.state(i), st);
        seen.insert(st);
    }
    EXPECT_EQ(seen.size(), a.size());
    EXPECT_FALSE(a.index(CompositeState{{5, 0}, {0, 0}}).has_value());
    EXPECT_FALSE(a.index(CompositeState{{0, 0}, {3, 0}}).has_value());
    EXPECT_FALSE(a.index(CompositeState{{0, 0}, {0}}).has_value());
}

TEST(StateSpace, Capacity) {
    auto spec = open_grid(100, 100);
    std::vector<Cell> long_path;
    for (int c = 0; c < 100; ++c) long_path.push_back({c, 50});
    spec.movers = {MoverSpec{long_path, 1}, MoverSpec{long_path, 1}};
    EXPECT_THROW(enumerate_states(spec), CapacityError);
}

TEST(Validate, NamesFields) {
    auto spec = open_grid(3, 3);
    spec.movers = {MoverSpec{{{0, 1}}, 1}};
    try {
        spec.validate();
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.where, "movers[0].path");
    }
    spec.movers = {MoverSpec{{{0, 1}, {1, 1}}, 0}};
    EXPECT_THROW(spec.validate(), ConfigError);
    spec = open_grid(3, 3);
    spec.goal_cells.clear();
    EXPECT_THROW(spec.validate(), ConfigError);
}

TEST(Environment, TablesAgreeWithFreeFunctions) {
    for (const auto& spec : presets::all()) {
        if (spec.name == "crossy") continue;  // covered by the sampled check below
        const Environment env(spec);
        for (std::size_t s = 0; s < env.num_states(); ++s) {
            const auto st = env.state(s);
            ASSERT_EQ(env.is_safe(s), satisfied(constraint(st, spec))) << spec.name;
            ASSERT_EQ(env.safe_actions(s), safe_actions(st, spec)) << spec.name;
            for (Action a : kActions) {
                const auto next = transition(st, a, spec);
                const auto idx = env.index(next);
                ASSERT_EQ(env.successor(s, action_id(a)), idx ? *idx : Environment::kNone);
            }
        }
    }
}

TEST(Environment, SafetyClosureOnAllPresets) {
    for (const auto& spec : presets::all()) {
        const Environment env(spec);
        const std::size_t stride = env.num_states() > 50'000 ? 97 : 1;
        for (std::size_t s = 0; s < env.num_states(); s += stride) {
            if (!env.is_safe(s)) continue;
            const auto st = env.state(s);
            for (int a : env.safe_actions(s)) {
                ASSERT_TRUE(satisfied(constraint(transition(st, action_from_id(a), spec), spec))) << spec.name;
            }
        }
        for (std::size_t s = 0; s < env.num_states(); ++s) {
            if (env.is_reachable(s) && env.is_safe(s) && !env.is_terminal(s)) {
                ASSERT_FALSE(env.safe_actions(s).empty()) << spec.name;
            }
        }
    }
}

TEST(Environment, MoverPeriodicity) {
    for (const auto& spec : presets::all()) {
        if (spec.movers.empty()) continue;
        const Environment env(spec);
        const std::size_t period = env.mover_period();
        ASSERT_GT(period, 0u);
        for (const auto& start : initial_states(spec)) {
            auto st = start;
            for (std::size_t t = 0; t < period; ++t) {
                st = transition(st, Action::Up, spec);
                if (t + 1 < period && spec.movers.size() == 1) {
                    EXPECT_NE(st.phases, start.phases);
                }
            }
            EXPECT_EQ(st.phases, start.phases) << spec.name;
        }
    }
}

TEST(Environment, PeriodWithSpeed) {
    auto spec = open_grid(6, 6);
    spec.movers = {MoverSpec{presets::lane(3, 6, false), 2}, MoverSpec{presets::lane(1, 6, true), 3}};
    spec.start_phases = {{0, 0}};
    const Environment env(spec);
    // 6/gcd(6,2) = 3 and 6/gcd(6,3) = 2.
    EXPECT_EQ(env.mover_period(), 6u);
}

TEST(Environment, RejectsStartWithoutSafeAction) {
    EXPECT_THROW(Environment(io::spec_from_map("stuck", {"S#G"})), EmptySafeSet);
}

TEST(Environment, RejectsUnreachableGoal) {
    EXPECT_THROW(Environment(io::spec_from_map("walled", {"S.#G"})), ConfigError);
}

TEST(Environment, Distances) {
    const Environment env(io::spec_from_map("line", {"S..G"}));
    EXPECT_EQ(env.distance_to_goal(*env.index({{0, 0}, {}})), 3u);
    EXPECT_EQ(env.distance_to_goal(*env.index({{2, 0}, {}})), 1u);
    EXPECT_TRUE(env.is_terminal(*env.index({{3, 0}, {}})));
}

TEST(InitialStates, DropsCollisionsAndRejectsExplicitOnes) {
    auto spec = open_grid(4, 4);
    spec.movers = {MoverSpec{{{0, 0}, {1, 1}, {2, 2}}, 1}};
    EXPECT_EQ(initial_states(spec).size(), 2u);
    spec.start_phases = {{0}};
    EXPECT_THROW(initial_states(spec), ConfigError);
    spec.start_phases = {{1}};
    EXPECT_EQ(initial_states(spec).size(), 1u);
}

TEST(EnvIo, FlipsRows) {
    const auto spec = io::spec_from_map("t", {"..G", "#..", "S.."});
    EXPECT_EQ(spec.start_cells, (std::vector<Cell>{{0, 0}}));
    EXPECT_EQ(spec.goal_cells, (std::vector<Cell>{{2, 2}}));
    EXPECT_TRUE(spec.is_obstacle({0, 1}));
    EXPECT_EQ(io::render_map(spec), (std::vector<std::string>{"..G", "#..", "S.."}));
}

TEST(EnvIo, ReportsFields) {
    try {
        io::parse_spec(R"({"cols": 3, "rows": 1, "map": ["SxG"]})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.where, "map[0][1]");
    }
    try {
        io::parse_spec(R"({"cols": 3, "rows": 1, "map": ["S.G"], "movers": [{"path": [[0,0,1]]}]})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.where, "movers[0].path[0]");
    }
    try {
        io::parse_spec(R"({"rows": 1, "map": ["S.G"]})");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.where, "cols");
    }
    try {
        io::parse_spec("{\n  \"cols\": 3,\n  \"rows\": 1\n  \"map\": []\n}");
        FAIL();
    } catch (const ConfigError& e) {
        EXPECT_EQ(e.where.rfind("line 4", 0), 0u) << e.where;
    }
}

TEST(EnvIo, RoundTripPresets) {
    for (const auto& spec : presets::all()) {
        const auto text = io::dump_spec(spec);
        const auto back = io::parse_spec(text);
        EXPECT_EQ(back.name, spec.name);
        EXPECT_EQ(back.cols, spec.cols);
        EXPECT_EQ(back.rows, spec.rows);
        EXPECT_EQ(back.obstacles, spec.obstacles);
        EXPECT_EQ(back.start_cells, spec.start_cells);
        EXPECT_EQ(back.goal_cells, spec.goal_cells);
        EXPECT_EQ(back.movers, spec.movers);
        EXPECT_EQ(back.start_phases, spec.start_phases);
        EXPECT_EQ(io::dump_spec(back), text);
    }
}

TEST(Presets, Shapes) {
    const auto all = presets::all();
    ASSERT_EQ(all.size(), 9u);
    for (int n = 4; n <= 9; ++n) {
        const auto& g = all[static_cast<std::size_t>(n - 4)];
        EXPECT_EQ(g.name, "grid" + std::to_string(n));
        EXPECT_EQ(g.cols, n);
        EXPECT_EQ(g.rows, n);
        EXPECT_TRUE(g.movers.empty());
    }
    const auto moving = presets::by_name("moving15x9");
    EXPECT_EQ(moving.cols, 15);
    EXPECT_EQ(moving.rows, 9);
    EXPECT_EQ(moving.movers.size(), 1u);
    for (const auto& spec : all) EXPECT_NO_THROW(Environment{spec}) << spec.name;
}
