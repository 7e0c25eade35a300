#pragma once

// Episodic actor-critic loop: ε-greedy action over safe actions, safe
// Q-update, policy-table refresh and closed-form refit at every step.

#include <chrono>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <vector>

#include "safe_rl/actor.hpp"
#include "safe_rl/critic.hpp"
#include "safe_rl/errors.hpp"
#include "safe_rl/gridworld.hpp"
#include "safe_rl/kernel_svm.hpp"

namespace safe_rl::trainer {

using grid::Environment;

struct TrainConfig {
    critic::LearningParams learning;
    actor::ExplorationParams exploration;
    double convergence_threshold = 1e-6;
    std::size_t max_episodes = 100'000;
    /// 0 selects 4·N.
    std::size_t max_steps_per_episode = 0;
    /// Refit θ every this many steps (1 = every step).
    std::size_t fit_every = 1;

    void validate() const {
        learning.validate();
        exploration.validate();
        if (!(convergence_threshold > 0.0)) throw InputError("convergence threshold must be positive");
        if (max_episodes == 0) throw InputError("max_episodes must be positive");
        if (fit_every == 0) throw InputError("fit_every must be at least 1");
    }

    std::size_t step_cap(std::size_t num_states) const {
        return max_steps_per_episode != 0 ? max_steps_per_episode : 4 * num_states;
    }
};

struct EpisodeRecord {
    std::size_t index = 0;
    double delta = 0.0;
    std::size_t steps = 0;
    std::size_t violations = 0;
    bool truncated = false;
    std::size_t start_state = 0;
    double wall_seconds = 0.0;
};

struct ConvergenceTrace {
    std::vector<EpisodeRecord> episodes;
    bool converged = false;

    std::size_t total_violations() const {
        std::size_t v = 0;
        for (const auto& e : episodes) v += e.violations;
        return v;
    }
};

/// Mutable training state owned by one training thread.
class Learner {
public:
    explicit Learner(const Environment& env)
        : q(env.num_states(), Environment::num_actions(), 0.0),
          policy_table(critic::build_policy_table(q, env.safe_sets(), env.inert_mask())),
          params(actor::fit_policy(policy_table, Environment::num_actions())),
          touched_mark_(q.values().size(), 0) {}

    critic::QTable q;
    /// Current labels y from Q; always up to date.
    std::vector<int> policy_table;
    /// Fitted θ; lags `policy_table` by at most fit_every − 1 steps.
    svm::PolicyParams params;
    actor::SelectionStats selection;

    /// Brings θ in line with the policy table. Only states whose label
    /// changed are touched, which is the same as fitting from scratch.
    void refit() {
        for (std::size_t s : pending_) params.relabel(s, policy_table[s]);
        pending_.clear();
    }

    void set_label(std::size_t s, int label) {
        if (policy_table[s] == label) return;
        policy_table[s] = label;
        pending_.push_back(s);
    }

    // Episode-delta bookkeeping: the first write to each entry in an episode
    // saves the original value.
    void begin_episode() {
        ++epoch_;
        touched_.clear();
        originals_.clear();
    }
    void remember(std::size_t s, int a) {
        const std::size_t e = s * static_cast<std::size_t>(q.num_actions()) + static_cast<std::size_t>(a - 1);
        if (touched_mark_[e] == epoch_) return;
        touched_mark_[e] = epoch_;
        touched_.push_back(e);
        originals_.push_back(q(s, a));
    }
    double episode_delta() const {
        double total = 0.0;
        const auto values = q.values();
        for (std::size_t i = 0; i < touched_.size(); ++i) total += std::abs(values[touched_[i]] - originals_[i]);
        return total;
    }

private:
    std::vector<std::size_t> pending_;
    std::vector<std::uint32_t> touched_mark_;
    std::uint32_t epoch_ = 0;
    std::vector<std::size_t> touched_;
    std::vector<double> originals_;
};

/// Safety monitor: the successor must be on the grid and satisfy every
/// constraint as evaluated directly from the spec, independent of the
/// compiled tables.
inline bool monitor_safe(const Environment& env, std::size_t s) {
    if (s == Environment::kNone) return false;
    return grid::satisfied(grid::constraint(env.state(s), env.spec()));
}

inline std::size_t draw_start(const Environment& env, actor::Rng& rng) {
    const auto& starts = env.start_states();
    if (starts.size() == 1) return starts.front();
    return starts[static_cast<std::size_t>(rng.below(starts.size()))];
}

/// One episode from a start drawn from 𝒳₀ until a goal is entered or the
/// step cap is hit. `episode` is the 0-based episode index (for ε decay).
inline EpisodeRecord run_episode(const Environment& env, Learner& learner, const TrainConfig& config,
                                 actor::Rng& rng, std::size_t episode) {
    const auto t0 = std::chrono::steady_clock::now();
    EpisodeRecord rec;
    rec.index = episode + 1;
    const double epsilon = config.exploration.epsilon_at(episode);
    const std::size_t cap = config.step_cap(env.num_states());

    std::size_t s = draw_start(env, rng);
    rec.start_state = s;
    if (!monitor_safe(env, s)) throw SafetyViolation(s);
    learner.begin_episode();

    bool reached = false;
    while (rec.steps < cap) {
        const ActionSet safe = env.safe_actions(s);
        if (safe.empty()) throw EmptySafeSet(s);
        const int u = actor::select_action(learner.params, s, safe, epsilon, rng, &learner.selection);

        const std::size_t next = env.successor(s, u);
        if (!monitor_safe(env, next)) {
            ++rec.violations;
            throw SafetyViolation(next);
        }
        const bool terminal = env.is_terminal(next);
        learner.remember(s, u);
        critic::q_update(learner.q, s, u, next, env.reward(s, u), config.learning,
                         terminal ? ActionSet{} : env.safe_actions(next), terminal);
        learner.set_label(s, critic::policy_label(learner.q, s, safe, env.is_inert(s)));
        ++rec.steps;
        if (rec.steps % config.fit_every == 0) learner.refit();
        s = next;
        if (terminal) {
            reached = true;
            break;
        }
    }
    learner.refit();
    rec.truncated = !reached;
    rec.delta = learner.episode_delta();
    rec.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

struct TrainResult {
    critic::QTable q;
    svm::PolicyParams params;
    ConvergenceTrace trace;
    actor::SelectionStats selection;
};

/// Repeats episodes until one changes the Q-table by less than the
/// threshold, or max_episodes is reached (trace.converged stays false).
inline TrainResult train(const Environment& env, const TrainConfig& config) {
    config.validate();
    Learner learner(env);
    actor::Rng rng(config.exploration.seed);
    TrainResult result;
    for (std::size_t ep = 0; ep < config.max_episodes; ++ep) {
        const auto rec = run_episode(env, learner, config, rng, ep);
        result.trace.episodes.push_back(rec);
        if (rec.delta < config.convergence_threshold) {
            result.trace.converged = true;
            break;
        }
    }
    result.q = std::move(learner.q);
    result.params = std::move(learner.params);
    result.selection = learner.selection;
    return result;
}

/// Step count of the shortest safe path from `start` to any goal, found by
/// BFS over composite states using the spec's transition and constraint
/// functions directly.
inline std::optional<std::size_t> shortest_safe_path_from(const grid::GridSpec& spec,
                                                          const grid::CompositeState& start) {
    if (!grid::satisfied(grid::constraint(start, spec))) return std::nullopt;
    if (spec.is_goal(start.agent)) return 0;
    std::map<grid::CompositeState, std::size_t> dist{{start, 0}};
    std::deque<grid::CompositeState> queue{start};
    while (!queue.empty()) {
        const auto cur = queue.front();
        queue.pop_front();
        const std::size_t d = dist[cur];
        for (grid::Action a : grid::kActions) {
            auto next = grid::transition(cur, a, spec);
            if (!grid::satisfied(grid::constraint(next, spec))) continue;
            if (spec.is_goal(next.agent)) return d + 1;
            if (dist.emplace(next, d + 1).second) queue.push_back(std::move(next));
        }
    }
    return std::nullopt;
}

/// Minimum over 𝒳₀ of the shortest safe path length; nullopt if no start
/// can reach a goal.
inline std::optional<std::size_t> shortest_safe_path(const grid::GridSpec& spec) {
    std::optional<std::size_t> best;
    for (const auto& st : grid::initial_states(spec)) {
        const auto d = shortest_safe_path_from(spec, st);
        if (d && (!best || *d < *best)) best = d;
    }
    return best;
}

struct Rollout {
    std::size_t start = 0;
    std::vector<std::size_t> path;  // visited states, start first
    std::size_t length = 0;         // steps taken
    bool reached_goal = false;
    bool safe = true;
    std::optional<std::size_t> optimal_length;
    bool optimal = false;
};

struct EvaluationReport {
    std::vector<Rollout> rollouts;
    bool safe = true;
    bool goal_reaching = true;
    bool optimal = true;
    std::size_t violations = 0;
};

/// Greedy (ε = 0) rollout of π from `start`.
inline Rollout greedy_rollout(const Environment& env, const svm::PolicyParams& params, std::size_t start,
                              std::size_t cap) {
    Rollout r;
    r.start = start;
    r.path.push_back(start);
    r.optimal_length = env.distance_to_goal(start);
    std::size_t s = start;
    r.safe = monitor_safe(env, s);
    while (r.safe && r.length < cap) {
        const int u = actor::policy_action(params, s);
        const std::size_t next = env.successor(s, u);
        if (!monitor_safe(env, next)) {
            r.safe = false;
            break;
        }
        ++r.length;
        r.path.push_back(next);
        s = next;
        if (env.is_terminal(s)) {
            r.reached_goal = true;
            break;
        }
    }
    r.optimal = r.safe && r.reached_goal && r.optimal_length && r.length == *r.optimal_length;
    return r;
}

/// Greedy rollout from every start state in 𝒳₀. A cap of 0 selects the
/// number of reachable states, which bounds any loop-free path.
inline EvaluationReport evaluate_policy(const Environment& env, const svm::PolicyParams& params,
                                        std::size_t cap = 0) {
    if (params.num_states() != env.num_states()) {
        throw InputError("policy has " + std::to_string(params.num_states()) + " states, environment has " +
                         std::to_string(env.num_states()));
    }
    if (cap == 0) cap = env.reachable_count() + 1;
    EvaluationReport report;
    for (std::size_t start : env.start_states()) {
        auto r = greedy_rollout(env, params, start, cap);
        if (!r.safe) ++report.violations;
        report.safe = report.safe && r.safe;
        report.goal_reaching = report.goal_reaching && r.reached_goal;
        report.optimal = report.optimal && r.optimal;
        report.rollouts.push_back(std::move(r));
    }
    return report;
}

}  // namespace safe_rl::trainer
