#include <gtest/gtest.h>

#include <array>
#include <vector>

#include "safe_rl/actor.hpp"

using namespace safe_rl;
using namespace safe_rl::actor;

TEST(Fit, BinarizesPerClass) {
    const auto p = fit_policy({1, 2, 1}, 4);
    const std::vector<std::int8_t> y1{+1, -1, +1}, y2{-1, +1, -1}, none{-1, -1, -1};
    EXPECT_TRUE(std::ranges::equal(p.binary_labels(1), y1));
    EXPECT_TRUE(std::ranges::equal(p.binary_labels(2), y2));
    EXPECT_TRUE(std::ranges::equal(p.binary_labels(3), none));
    EXPECT_TRUE(std::ranges::equal(p.binary_labels(4), none));
    EXPECT_EQ(p.n_pos(1), 2u);
    EXPECT_EQ(p.n_pos(2), 1u);
    EXPECT_THROW(fit_policy({}, 4), InputError);
}

TEST(Fit, Degenerate) {
    const auto p = fit_policy({3, 3, 3, 3}, 4);
    EXPECT_TRUE(p.degenerate());
    EXPECT_EQ(policy_action(p, 2), 3);
}

TEST(Fit, IdentityOnLabels) {
    Rng rng(4);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 2 + rng.below(49);
        std::vector<int> labels(n);
        for (auto& y : labels) y = 1 + static_cast<int>(rng.below(3));  // class 4 stays absent
        labels[1] = labels[0] % 3 + 1;
        const auto p = fit_policy(labels, 4);
        for (std::size_t i = 0; i < n; ++i) {
            ASSERT_EQ(policy_action(p, i), labels[i]);
            ASSERT_NE(policy_action(p, i), 4);
        }
    }
}

TEST(Select, GreedyWhenEpsilonZero) {
    const auto p = fit_policy({2, 1, 4}, 4);
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(select_action(p, 0, ActionSet{1, 2, 3}, 0.0, rng), 2);
}

TEST(Select, UniformWhenEpsilonOne) {
    const auto p = fit_policy({2, 1}, 4);
    Rng rng(12345);
    const ActionSet safe{1, 3, 4};
    std::array<int, 5> counts{};
    constexpr int kDraws = 100'000;
    for (int i = 0; i < kDraws; ++i) ++counts[static_cast<std::size_t>(select_action(p, 0, safe, 1.0, rng))];
    EXPECT_EQ(counts[2], 0);
    const double expected = kDraws / 3.0;
    double chi2 = 0.0;
    for (int a : safe) {
        const double d = counts[static_cast<std::size_t>(a)] - expected;
        chi2 += d * d / expected;
    }
    // 2 degrees of freedom, significance 0.001.
    EXPECT_LT(chi2, 13.816);
}

TEST(Select, SingletonSafeSet) {
    const auto p = fit_policy({2, 1}, 4);
    Rng rng(8);
    for (int i = 0; i < 1000; ++i) EXPECT_EQ(select_action(p, 0, ActionSet{2}, 0.5, rng), 2);
}

TEST(Select, AlwaysInSafeSet) {
    Rng rng(2);
    std::vector<int> labels(20);
    for (auto& y : labels) y = 1 + static_cast<int>(rng.below(4));
    labels[1] = labels[0] % 4 + 1;
    const auto p = fit_policy(labels, 4);
    for (int i = 0; i < 20'000; ++i) {
        const auto safe = ActionSet::from_bits(1 + static_cast<std::uint32_t>(rng.below(15)));
        const double eps = rng.uniform();
        EXPECT_TRUE(safe.contains(select_action(p, rng.below(20), safe, eps, rng)));
    }
}

TEST(Select, UnsafeGreedyFallsBack) {
    const auto p = fit_policy({1, 2}, 4);
    Rng rng(6);
    SelectionStats stats;
    for (int i = 0; i < 100; ++i) {
        const int a = select_action(p, 0, ActionSet{3, 4}, 0.0, rng, &stats);
        EXPECT_TRUE(a == 3 || a == 4);
    }
    EXPECT_EQ(stats.unsafe_greedy_fallbacks, 100u);
    EXPECT_EQ(stats.greedy, 0u);
    EXPECT_THROW(select_action(p, 0, ActionSet{}, 0.0, rng), EmptySafeSet);
}

TEST(Rng, Deterministic) {
    Rng a(42), b(42), c(43);
    bool differs = false;
    for (int i = 0; i < 100; ++i) {
        const auto x = a.next();
        EXPECT_EQ(x, b.next());
        differs = differs || x != c.next();
    }
    EXPECT_TRUE(differs);
    EXPECT_NE(Rng(42).split(1).next(), Rng(42).split(2).next());
    EXPECT_EQ(Rng(42).split(1).next(), Rng(42).split(1).next());
}

TEST(Rng, Ranges) {
    Rng r(0);
    for (int i = 0; i < 10'000; ++i) {
        const double u = r.uniform();
        EXPECT_GE(u, 0.0);
        EXPECT_LT(u, 1.0);
        EXPECT_LT(r.below(7), 7u);
    }
    EXPECT_THROW(r.below(0), InputError);
}

TEST(Exploration, Decay) {
    ExplorationParams p;
    EXPECT_EQ(p.epsilon_at(0), 0.1);
    EXPECT_EQ(p.epsilon_at(1'000'000), 0.1);
    p.decay_episodes = 100;
    EXPECT_EQ(p.epsilon_at(0), 0.1);
    EXPECT_NEAR(p.epsilon_at(50), 0.055, 1e-15);
    EXPECT_EQ(p.epsilon_at(100), 0.01);
    EXPECT_EQ(p.epsilon_at(500), 0.01);
    p.epsilon = 2.0;
    EXPECT_THROW(p.validate(), InputError);
}
