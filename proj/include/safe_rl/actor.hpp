#pragma once

// The actor: fits the one-vs-rest policy to the critic's policy table and
// picks actions epsilon-greedily among the safe ones.

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "safe_rl/action_set.hpp"
#include "safe_rl/errors.hpp"
#include "safe_rl/kernel_svm.hpp"

namespace safe_rl::actor {

using svm::PolicyParams;

struct ExplorationParams {
    double epsilon = 0.1;
    std::uint64_t seed = 0;
    /// Linear decay from epsilon to epsilon_min over this many episodes;
    /// 0 keeps epsilon fixed.
    std::size_t decay_episodes = 0;
    double epsilon_min = 0.01;

    void validate() const {
        if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw InputError("epsilon must lie in [0, 1]");
        if (!(epsilon_min >= 0.0 && epsilon_min <= 1.0)) throw InputError("epsilon_min must lie in [0, 1]");
    }

    /// Exploration rate for a 0-based episode index.
    double epsilon_at(std::size_t episode) const {
        if (decay_episodes == 0 || epsilon <= epsilon_min) return epsilon;
        if (episode >= decay_episodes) return epsilon_min;
        const double frac = static_cast<double>(episode) / static_cast<double>(decay_episodes);
        return epsilon + (epsilon_min - epsilon) * frac;
    }
};

/// Seedable, splittable generator. Draws are computed here rather than via
/// <random> distributions so sequences match across standard libraries.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : seed_(seed), engine_(mix(seed)) {}

    std::uint64_t seed() const { return seed_; }

    /// Independent stream derived from this generator's seed.
    Rng split(std::uint64_t stream) const { return Rng(mix(seed_ ^ mix(stream + 0x9e3779b97f4a7c15ULL))); }

    std::uint64_t next() { return engine_(); }

    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

    /// Uniform in [0, n), rejection-sampled.
    std::uint64_t below(std::uint64_t n) {
        if (n == 0) throw InputError("Rng::below(0)");
        const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
        std::uint64_t x;
        do {
            x = next();
        } while (x >= limit);
        return x % n;
    }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z += 0x9e3779b97f4a7c15ULL;
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }

    std::uint64_t seed_;
    std::mt19937_64 engine_;
};

inline PolicyParams fit_policy(std::vector<int> labels, int num_actions) {
    if (labels.empty()) throw InputError("cannot fit a policy to an empty label table");
    return PolicyParams(std::move(labels), num_actions);
}

inline int policy_action(const PolicyParams& params, std::size_t state) {
    return svm::multiclass_predict(params, state);
}

inline int uniform_choice(ActionSet safe, Rng& rng) {
    if (safe.empty()) throw InputError("uniform_choice on an empty set");
    return safe.nth(static_cast<int>(rng.below(static_cast<std::uint64_t>(safe.size()))));
}

struct SelectionStats {
    std::size_t greedy = 0;
    std::size_t explored = 0;
    /// Greedy branch chose an action outside the safe set and was replaced.
    std::size_t unsafe_greedy_fallbacks = 0;
};

/// ε-greedy over the safe set: the policy action with probability 1 − ε,
/// otherwise a uniform draw from `safe`. The result is always in `safe`.
inline int select_action(const PolicyParams& params, std::size_t state, ActionSet safe, double epsilon,
                         Rng& rng, SelectionStats* stats = nullptr) {
    if (safe.empty()) throw EmptySafeSet(state);
    const bool explore = rng.uniform() < epsilon;
    if (explore) {
        if (stats) ++stats->explored;
        return uniform_choice(safe, rng);
    }
    const int greedy = policy_action(params, state);
    if (safe.contains(greedy)) {
        if (stats) ++stats->greedy;
        return greedy;
    }
    if (stats) ++stats->unsafe_greedy_fallbacks;
    return uniform_choice(safe, rng);
}

}  // namespace safe_rl::actor
