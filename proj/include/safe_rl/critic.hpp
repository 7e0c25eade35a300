#pragma once

// Tabular Q-function restricted to safe actions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "safe_rl/action_set.hpp"
#include "safe_rl/errors.hpp"

namespace safe_rl::critic {

/// Dense N x M table. Actions are 1-based ids, matching the class ids of the
/// policy.
class QTable {
public:
    QTable() = default;
    QTable(std::size_t num_states, int num_actions, double init_value = 0.0)
        : num_states_(num_states), num_actions_(num_actions), init_(init_value),
          values_(num_states * static_cast<std::size_t>(num_actions), init_value) {
        if (num_actions < 1) throw InputError("QTable needs at least one action");
    }

    std::size_t num_states() const { return num_states_; }
    int num_actions() const { return num_actions_; }
    double init_value() const { return init_; }

    double operator()(std::size_t s, int a) const { return values_[offset(s, a)]; }
    double& operator()(std::size_t s, int a) { return values_[offset(s, a)]; }

    std::span<const double> row(std::size_t s) const {
        return {values_.data() + s * static_cast<std::size_t>(num_actions_),
                static_cast<std::size_t>(num_actions_)};
    }
    std::span<const double> values() const { return values_; }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t offset(std::size_t s, int a) const {
        return s * static_cast<std::size_t>(num_actions_) + static_cast<std::size_t>(a - 1);
    }

    std::size_t num_states_ = 0;
    int num_actions_ = 0;
    double init_ = 0.0;
    std::vector<double> values_;
};

struct LearningParams {
    double beta = 0.07;
    double gamma = 1.0;

    void validate() const {
        if (!(beta >= 0.0 && beta <= 1.0)) throw InputError("beta must lie in [0, 1]");
        if (!(gamma > 0.0 && gamma <= 1.0)) throw InputError("gamma must lie in (0, 1]");
    }
};

/// max over `safe` of Q(s, ·). Only entries of safe actions are read.
inline double max_safe_value(const QTable& q, std::size_t s, ActionSet safe) {
    double best = -std::numeric_limits<double>::infinity();
    for (int a : safe) best = std::max(best, q(s, a));
    return best;
}

/// One safe Q-learning step on Q(s, a). A terminal successor contributes no
/// bootstrap. Returns the new entry.
inline double q_update(QTable& q, std::size_t s, int a, std::size_t next, double reward,
                       const LearningParams& params, ActionSet safe_next, bool terminal) {
    double target = reward;
    if (!terminal) {
        if (safe_next.empty()) throw EmptySafeSet(next);
        target += params.gamma * max_safe_value(q, next, safe_next);
    }
    double& entry = q(s, a);
    entry = (1.0 - params.beta) * entry + params.beta * target;
    return entry;
}

/// Best safe action for one state; lowest id on ties.
inline int greedy_safe_action(const QTable& q, std::size_t s, ActionSet safe) {
    int best = 0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (int a : safe) {
        if (best == 0 || q(s, a) > best_value) {
            best = a;
            best_value = q(s, a);
        }
    }
    return best;
}

/// Label of one state in the policy table. States flagged inert (terminal,
/// unsafe or unreachable) take their lowest safe action, or action 1 when
/// they have none.
inline int policy_label(const QTable& q, std::size_t s, ActionSet safe, bool inert) {
    if (inert) return safe.empty() ? 1 : safe.lowest();
    if (safe.empty()) throw EmptySafeSet(s);
    return greedy_safe_action(q, s, safe);
}

/// y⁽ⁱ⁾ = argmax over safe actions of Q(x⁽ⁱ⁾, ·) for every state. `inert`
/// may be empty, meaning every state is active.
inline std::vector<int> build_policy_table(const QTable& q, std::span<const ActionSet> safe_sets,
                                           const std::vector<bool>& inert = {}) {
    if (safe_sets.size() != q.num_states()) throw InputError("one safe set per state required");
    if (!inert.empty() && inert.size() != q.num_states()) throw InputError("inert mask has wrong length");
    std::vector<int> labels(q.num_states());
    for (std::size_t s = 0; s < labels.size(); ++s) {
        labels[s] = policy_label(q, s, safe_sets[s], !inert.empty() && inert[s]);
    }
    return labels;
}

/// Σ |after − before| over all entries.
inline double episode_delta(const QTable& before, const QTable& after) {
    if (before.num_states() != after.num_states() || before.num_actions() != after.num_actions()) {
        throw InputError("Q-tables differ in shape");
    }
    double total = 0.0;
    const auto a = before.values();
    const auto b = after.values();
    for (std::size_t i = 0; i < a.size(); ++i) total += std::abs(b[i] - a[i]);
    return total;
}

}  // namespace safe_rl::critic
