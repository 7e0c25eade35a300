#pragma once

// Deterministic grid environments with fixed obstacles and cyclic movers.
// Coordinates are (col, row) with the origin at the bottom-left cell.

#include <algorithm>
#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "safe_rl/action_set.hpp"
#include "safe_rl/errors.hpp"

namespace safe_rl::grid {

struct Cell {
    int col = 0;
    int row = 0;
    friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

enum class Action : int { Right = 1, Up = 2, Left = 3, Down = 4 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kActions{Action::Right, Action::Up, Action::Left,
                                                          Action::Down};

constexpr int action_id(Action a) { return static_cast<int>(a); }

inline Action action_from_id(int id) {
    if (id < 1 || id > kNumActions) throw InputError("action id " + std::to_string(id) + " out of range");
    return static_cast<Action>(id);
}

constexpr Cell displace(Cell c, Action a) {
    switch (a) {
        case Action::Right: return {c.col + 1, c.row};
        case Action::Up: return {c.col, c.row + 1};
        case Action::Left: return {c.col - 1, c.row};
        case Action::Down: return {c.col, c.row - 1};
    }
    return c;
}

constexpr std::string_view action_name(Action a) {
    switch (a) {
        case Action::Right: return "right";
        case Action::Up: return "up";
        case Action::Left: return "left";
        case Action::Down: return "down";
    }
    return "?";
}

constexpr std::string_view action_arrow(Action a) {
    switch (a) {
        case Action::Right: return "→";
        case Action::Up: return "↑";
        case Action::Left: return "←";
        case Action::Down: return "↓";
    }
    return "?";
}

struct MoverSpec {
    /// Cyclic; consecutive cells need not be adjacent.
    std::vector<Cell> path;
    int speed = 1;
    friend bool operator==(const MoverSpec&, const MoverSpec&) = default;
};

struct GridSpec {
    std::string name;
    int cols = 0;
    int rows = 0;
    std::set<Cell> obstacles;
    std::vector<Cell> start_cells;
    std::vector<Cell> goal_cells;
    std::vector<MoverSpec> movers;
    /// Initial mover phase vectors. Empty means every phase combination.
    std::vector<std::vector<int>> start_phases;

    bool in_bounds(Cell c) const { return c.col >= 0 && c.col < cols && c.row >= 0 && c.row < rows; }
    bool is_obstacle(Cell c) const { return obstacles.contains(c); }
    bool is_goal(Cell c) const {
        return std::find(goal_cells.begin(), goal_cells.end(), c) != goal_cells.end();
    }

    /// Structural checks only; reachability is checked by Environment.
    void validate() const {
        auto where = [](const char* field) { return std::string(field); };
        if (cols < 1) throw ConfigError(where("cols"), "must be positive");
        if (rows < 1) throw ConfigError(where("rows"), "must be positive");
        if (start_cells.empty()) throw ConfigError(where("map"), "no start cell (S)");
        if (goal_cells.empty()) throw ConfigError(where("map"), "no goal cell (G)");
        for (const auto& c : obstacles) {
            if (!in_bounds(c)) throw ConfigError(where("map"), "obstacle out of bounds");
            if (is_goal(c)) throw ConfigError(where("map"), "goal cell marked as obstacle");
        }
        for (const auto& c : start_cells) {
            if (!in_bounds(c) || is_obstacle(c)) {
                throw ConfigError(where("map"), "start cell out of bounds or blocked");
            }
            if (is_goal(c)) throw ConfigError(where("map"), "start cell is also a goal");
        }
        for (const auto& c : goal_cells) {
            if (!in_bounds(c)) throw ConfigError(where("map"), "goal cell out of bounds");
        }
        for (std::size_t m = 0; m < movers.size(); ++m) {
            const std::string f = "movers[" + std::to_string(m) + "]";
            if (movers[m].path.size() < 2) throw ConfigError(f + ".path", "needs at least 2 cells");
            if (movers[m].speed < 1) throw ConfigError(f + ".speed", "must be a positive integer");
            for (const auto& c : movers[m].path) {
                if (!in_bounds(c)) throw ConfigError(f + ".path", "cell out of bounds");
            }
        }
        for (std::size_t s = 0; s < start_phases.size(); ++s) {
            const std::string f = "start_phases[" + std::to_string(s) + "]";
            if (start_phases[s].size() != movers.size()) {
                throw ConfigError(f, "expected one phase per mover");
            }
            for (std::size_t m = 0; m < movers.size(); ++m) {
                const int p = start_phases[s][m];
                if (p < 0 || p >= static_cast<int>(movers[m].path.size())) {
                    throw ConfigError(f, "phase out of range");
                }
            }
        }
    }
};

struct CompositeState {
    Cell agent;
    std::vector<int> phases;
    friend auto operator<=>(const CompositeState&, const CompositeState&) = default;
};

/// Component 0: bounds and fixed obstacles. Component 1: movers.
/// The state is safe iff both are negative.
using ConstraintVector = std::array<double, 2>;

inline bool satisfied(const ConstraintVector& c) {
    return std::all_of(c.begin(), c.end(), [](double v) { return v < 0.0; });
}

inline CompositeState transition(const CompositeState& state, Action action, const GridSpec& spec) {
    CompositeState next{displace(state.agent, action), state.phases};
    for (std::size_t m = 0; m < spec.movers.size(); ++m) {
        const int len = static_cast<int>(spec.movers[m].path.size());
        next.phases[m] = (state.phases[m] + spec.movers[m].speed) % len;
    }
    return next;
}

/// Unit step cost; with γ = 1 the return is minus the path length.
inline double reward(const CompositeState&, Action, const GridSpec&) { return -1.0; }

inline ConstraintVector constraint(const CompositeState& state, const GridSpec& spec) {
    const Cell c = state.agent;
    const double statics = spec.in_bounds(c) && !spec.is_obstacle(c) ? -1.0 : 1.0;
    double moving = -1.0;
    for (std::size_t m = 0; m < spec.movers.size(); ++m) {
        if (spec.movers[m].path[static_cast<std::size_t>(state.phases[m])] == c) moving = 1.0;
    }
    return {statics, moving};
}

/// Actions whose successor satisfies every constraint, movers taken at
/// their post-transition positions. Callers decide what an empty set means.
inline ActionSet safe_actions(const CompositeState& state, const GridSpec& spec) {
    ActionSet out;
    for (Action a : kActions) {
        if (satisfied(constraint(transition(state, a, spec), spec))) out.insert(action_id(a));
    }
    return out;
}

inline constexpr std::size_t kMaxStates = 10'000'000;

/// Bijection between composite states and 0..N-1: agent cells row-major
/// (row 0 first), then mover phases lexicographically (first mover slowest).
class StateSpace {
public:
    explicit StateSpace(const GridSpec& spec) : cols_(spec.cols), rows_(spec.rows) {
        std::size_t total = static_cast<std::size_t>(spec.cols) * static_cast<std::size_t>(spec.rows);
        phase_count_ = 1;
        for (const auto& m : spec.movers) {
            periods_.push_back(static_cast<int>(m.path.size()));
            phase_count_ *= m.path.size();
            if (phase_count_ > kMaxStates || total * phase_count_ > kMaxStates) {
                throw CapacityError("composite state space exceeds " + std::to_string(kMaxStates) +
                                    " states");
            }
        }
        total *= phase_count_;
        size_ = total;
    }

    std::size_t size() const { return size_; }
    std::size_t phase_count() const { return phase_count_; }
    std::size_t cell_count() const { return static_cast<std::size_t>(cols_) * static_cast<std::size_t>(rows_); }

    std::size_t phase_index(const std::vector<int>& phases) const {
        std::size_t p = 0;
        for (std::size_t m = 0; m < periods_.size(); ++m) {
            p = p * static_cast<std::size_t>(periods_[m]) + static_cast<std::size_t>(phases[m]);
        }
        return p;
    }

    std::vector<int> phases_of(std::size_t phase_index) const {
        std::vector<int> phases(periods_.size());
        for (std::size_t m = periods_.size(); m-- > 0;) {
            phases[m] = static_cast<int>(phase_index % static_cast<std::size_t>(periods_[m]));
            phase_index /= static_cast<std::size_t>(periods_[m]);
        }
        return phases;
    }

    std::size_t cell_index(Cell c) const {
        return static_cast<std::size_t>(c.row) * static_cast<std::size_t>(cols_) +
               static_cast<std::size_t>(c.col);
    }
    Cell cell_of(std::size_t cell_index) const {
        return {static_cast<int>(cell_index % static_cast<std::size_t>(cols_)),
                static_cast<int>(cell_index / static_cast<std::size_t>(cols_))};
    }

    /// nullopt for off-grid agents or malformed phase vectors.
    std::optional<std::size_t> index(const CompositeState& s) const {
        if (s.agent.col < 0 || s.agent.col >= cols_ || s.agent.row < 0 || s.agent.row >= rows_) {
            return std::nullopt;
        }
        if (s.phases.size() != periods_.size()) return std::nullopt;
        for (std::size_t m = 0; m < periods_.size(); ++m) {
            if (s.phases[m] < 0 || s.phases[m] >= periods_[m]) return std::nullopt;
        }
        return cell_index(s.agent) * phase_count_ + phase_index(s.phases);
    }

    CompositeState state(std::size_t i) const {
        if (i >= size_) throw InputError("state index out of range");
        return {cell_of(i / phase_count_), phases_of(i % phase_count_)};
    }

private:
    int cols_;
    int rows_;
    std::vector<int> periods_;
    std::size_t phase_count_ = 1;
    std::size_t size_ = 0;
};

inline StateSpace enumerate_states(const GridSpec& spec) { return StateSpace(spec); }

/// 𝒳₀: start cells crossed with the configured initial phase vectors (all
/// combinations when none are given), minus states that start in a
/// collision. Explicit phase vectors that collide are a configuration error.
inline std::vector<CompositeState> initial_states(const GridSpec& spec) {
    const StateSpace space(spec);
    std::vector<std::vector<int>> phase_sets = spec.start_phases;
    const bool explicit_phases = !phase_sets.empty();
    if (!explicit_phases) {
        for (std::size_t p = 0; p < space.phase_count(); ++p) phase_sets.push_back(space.phases_of(p));
    }
    std::vector<CompositeState> out;
    for (const auto& cell : spec.start_cells) {
        for (const auto& ph : phase_sets) {
            CompositeState st{cell, ph};
            if (!satisfied(constraint(st, spec))) {
                if (explicit_phases) throw ConfigError("start_phases", "start state collides with a mover");
                continue;
            }
            out.push_back(std::move(st));
        }
    }
    if (out.empty()) throw ConfigError("map", "no collision-free start state");
    return out;
}

/// Validated environment with transition and safety tables precomputed over
/// the whole composite state space. Construction rejects layouts where some
/// start cannot reach a goal or where a reachable state has no safe action.
class Environment {
public:
    static constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

    explicit Environment(GridSpec spec) : spec_(std::move(spec)), space_((spec_.validate(), spec_)) {
        build_tables();
        build_starts();
        explore();
    }

    const GridSpec& spec() const { return spec_; }
    const StateSpace& space() const { return space_; }
    std::size_t num_states() const { return space_.size(); }
    static constexpr int num_actions() { return kNumActions; }

    CompositeState state(std::size_t i) const { return space_.state(i); }
    std::optional<std::size_t> index(const CompositeState& s) const { return space_.index(s); }

    /// kNone when the move leaves the grid.
    std::size_t successor(std::size_t s, int action) const {
        return succ_[s * kNumActions + static_cast<std::size_t>(action - 1)];
    }
    ActionSet safe_actions(std::size_t s) const { return ActionSet::from_bits(safe_mask_[s]); }
    bool is_safe(std::size_t s) const { return (flags_[s] & kSafe) != 0; }
    bool is_terminal(std::size_t s) const { return (flags_[s] & kTerminal) != 0; }
    bool is_reachable(std::size_t s) const { return (flags_[s] & kReachable) != 0; }
    /// States that never need a meaningful policy label.
    bool is_inert(std::size_t s) const { return !is_safe(s) || is_terminal(s) || !is_reachable(s); }
    double reward(std::size_t, int) const { return -1.0; }

    std::vector<ActionSet> safe_sets() const {
        std::vector<ActionSet> out(num_states());
        for (std::size_t s = 0; s < out.size(); ++s) out[s] = safe_actions(s);
        return out;
    }
    std::vector<bool> inert_mask() const {
        std::vector<bool> out(num_states());
        for (std::size_t s = 0; s < out.size(); ++s) out[s] = is_inert(s);
        return out;
    }

    const std::vector<std::size_t>& start_states() const { return starts_; }
    std::size_t reachable_count() const { return reachable_count_; }

    /// Shortest safe step count to any goal; nullopt if unreachable or if the
    /// state is not reachable from the starts.
    std::optional<std::size_t> distance_to_goal(std::size_t s) const {
        if (dist_[s] == kNone) return std::nullopt;
        return dist_[s];
    }

    /// Reachable non-terminal states with no safe route to a goal.
    std::size_t stranded_count() const { return stranded_; }

    std::vector<double> features(std::size_t s) const {
        const auto st = state(s);
        std::vector<double> f{static_cast<double>(st.agent.col), static_cast<double>(st.agent.row)};
        for (int p : st.phases) f.push_back(static_cast<double>(p));
        return f;
    }

    /// Whole-period length after which all mover phases repeat.
    std::size_t mover_period() const {
        std::size_t l = 1;
        for (const auto& m : spec_.movers) {
            const std::size_t len = m.path.size();
            const std::size_t step = len / std::gcd(len, static_cast<std::size_t>(m.speed));
            l = std::lcm(l, step);
        }
        return l;
    }

private:
    static constexpr std::uint8_t kSafe = 1;
    static constexpr std::uint8_t kTerminal = 2;
    static constexpr std::uint8_t kReachable = 4;

    void build_tables() {
        const std::size_t n = space_.size();
        const std::size_t phases = space_.phase_count();
        const std::size_t cells = space_.cell_count();

        // Per phase: successor phase and occupied cells.
        std::vector<std::size_t> next_phase(phases);
        std::vector<std::vector<std::size_t>> occupied(phases);
        for (std::size_t p = 0; p < phases; ++p) {
            CompositeState probe{{0, 0}, space_.phases_of(p)};
            next_phase[p] = space_.phase_index(transition(probe, Action::Right, spec_).phases);
            for (std::size_t m = 0; m < spec_.movers.size(); ++m) {
                occupied[p].push_back(space_.cell_index(
                    spec_.movers[m].path[static_cast<std::size_t>(probe.phases[m])]));
            }
        }
        std::vector<std::uint8_t> static_ok(cells);
        std::vector<std::uint8_t> goal(cells);
        for (std::size_t c = 0; c < cells; ++c) {
            const Cell cell = space_.cell_of(c);
            static_ok[c] = spec_.is_obstacle(cell) ? 0 : 1;
            goal[c] = spec_.is_goal(cell) ? 1 : 0;
        }
        auto collides = [&](std::size_t cell, std::size_t phase) {
            const auto& occ = occupied[phase];
            return std::find(occ.begin(), occ.end(), cell) != occ.end();
        };

        succ_.assign(n * kNumActions, kNone);
        safe_mask_.assign(n, 0);
        flags_.assign(n, 0);
        for (std::size_t s = 0; s < n; ++s) {
            const std::size_t c = s / phases;
            const std::size_t p = s % phases;
            if (static_ok[c] && !collides(c, p)) flags_[s] |= kSafe;
            if (goal[c]) flags_[s] |= kTerminal;
            const Cell cell = space_.cell_of(c);
            const std::size_t np = next_phase[p];
            for (Action a : kActions) {
                const Cell nc = displace(cell, a);
                if (!spec_.in_bounds(nc)) continue;
                const std::size_t ci = space_.cell_index(nc);
                succ_[s * kNumActions + static_cast<std::size_t>(action_id(a) - 1)] = ci * phases + np;
                if (static_ok[ci] && !collides(ci, np)) {
                    safe_mask_[s] |= static_cast<std::uint8_t>(1u << (action_id(a) - 1));
                }
            }
        }
    }

    void build_starts() {
        for (const auto& st : initial_states(spec_)) starts_.push_back(*space_.index(st));
    }

    void explore() {
        const std::size_t n = space_.size();
        std::vector<std::size_t> order;
        std::deque<std::size_t> queue;
        for (std::size_t s : starts_) {
            if (!is_reachable(s)) {
                flags_[s] |= kReachable;
                queue.push_back(s);
            }
        }
        while (!queue.empty()) {
            const std::size_t s = queue.front();
            queue.pop_front();
            order.push_back(s);
            if (is_terminal(s)) continue;
            const ActionSet safe = safe_actions(s);
            if (safe.empty()) throw EmptySafeSet(s);
            for (int a : safe) {
                const std::size_t t = successor(s, a);
                if (!is_reachable(t)) {
                    flags_[t] |= kReachable;
                    queue.push_back(t);
                }
            }
        }
        reachable_count_ = order.size();

        // Backward BFS from goals over the reachable subgraph.
        std::vector<std::vector<std::size_t>> preds(n);
        for (std::size_t s : order) {
            if (is_terminal(s)) continue;
            for (int a : safe_actions(s)) preds[successor(s, a)].push_back(s);
        }
        dist_.assign(n, kNone);
        for (std::size_t s : order) {
            if (is_terminal(s)) {
                dist_[s] = 0;
                queue.push_back(s);
            }
        }
        while (!queue.empty()) {
            const std::size_t t = queue.front();
            queue.pop_front();
            for (std::size_t s : preds[t]) {
                if (dist_[s] == kNone) {
                    dist_[s] = dist_[t] + 1;
                    queue.push_back(s);
                }
            }
        }
        for (std::size_t s : starts_) {
            if (dist_[s] == kNone) {
                const auto st = state(s);
                throw ConfigError("map", "goal unreachable from start (" + std::to_string(st.agent.col) +
                                             "," + std::to_string(st.agent.row) + ")");
            }
        }
        stranded_ = static_cast<std::size_t>(std::count_if(order.begin(), order.end(), [&](std::size_t s) {
            return !is_terminal(s) && dist_[s] == kNone;
        }));
    }

    GridSpec spec_;
    StateSpace space_;
    std::vector<std::size_t> succ_;
    std::vector<std::uint8_t> safe_mask_;
    std::vector<std::uint8_t> flags_;
    std::vector<std::size_t> starts_;
    std::vector<std::size_t> dist_;
    std::size_t reachable_count_ = 0;
    std::size_t stranded_ = 0;
};

}  // namespace safe_rl::grid
