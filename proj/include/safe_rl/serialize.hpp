#pragma once

// Run artifacts: policy.json, qtable.json, trace.csv, manifest.json and the
// evaluation report, plus a text rendering of a policy.

#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safe_rl/env_io.hpp"
#include "safe_rl/errors.hpp"
#include "safe_rl/gridworld.hpp"
#include "safe_rl/kernel_svm.hpp"
#include "safe_rl/trainer.hpp"

namespace safe_rl::io {

/// Shortest decimal text that round-trips the double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path, "cannot open file");
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

// policy.json -------------------------------------------------------------

inline constexpr const char* kPolicyFormat = "safe-rl-policy";

struct PolicyFile {
    std::string environment;
    svm::PolicyParams params;
};

inline std::string dump_policy(const svm::PolicyParams& params, const std::string& environment) {
    json j;
    j["format"] = kPolicyFormat;
    j["version"] = 1;
    j["environment"] = environment;
    j["num_states"] = params.num_states();
    j["num_actions"] = params.num_classes();
    j["degenerate"] = params.degenerate();
    json counts = json::array();
    for (int k = 1; k <= params.num_classes(); ++k) counts.push_back({params.n_pos(k), params.n_neg(k)});
    j["class_counts"] = counts;
    j["labels"] = params.labels();
    return j.dump() + "\n";
}

inline PolicyFile parse_policy(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    if (!j.is_object() || j.value("format", "") != kPolicyFormat) {
        throw ConfigError("format", "not a policy file");
    }
    PolicyFile out;
    out.environment = detail::get_field<std::string>(j, "environment", "");
    const auto n = detail::get_field<std::size_t>(j, "num_states", "");
    const auto m = detail::get_field<int>(j, "num_actions", "");
    auto labels = detail::get_field<std::vector<int>>(j, "labels", "");
    if (labels.size() != n) throw ConfigError("labels", "length differs from num_states");
    for (int y : labels) {
        if (y < 1 || y > m) throw ConfigError("labels", "label out of range");
    }
    out.params = svm::PolicyParams(std::move(labels), m);
    const auto counts = detail::get_field<std::vector<std::vector<std::size_t>>>(j, "class_counts", "");
    if (counts.size() != static_cast<std::size_t>(m)) throw ConfigError("class_counts", "one entry per action expected");
    for (int k = 1; k <= m; ++k) {
        const auto& c = counts[static_cast<std::size_t>(k - 1)];
        if (c.size() != 2 || c[0] != out.params.n_pos(k) || c[1] != out.params.n_neg(k)) {
            throw ConfigError("class_counts[" + std::to_string(k - 1) + "]", "inconsistent with labels");
        }
    }
    return out;
}

// qtable.json -------------------------------------------------------------

inline std::string dump_qtable(const critic::QTable& q, const std::string& environment) {
    std::ostringstream out;
    out << "{\"format\":\"safe-rl-qtable\",\"version\":1,\"environment\":" << json(environment).dump()
        << ",\"num_states\":" << q.num_states() << ",\"num_actions\":" << q.num_actions() << ",\"values\":[";
    for (std::size_t s = 0; s < q.num_states(); ++s) {
        out << (s == 0 ? "[" : ",[");
        const auto row = q.row(s);
        for (std::size_t a = 0; a < row.size(); ++a) out << (a == 0 ? "" : ",") << format_double(row[a]);
        out << "]";
    }
    out << "]}\n";
    return out.str();
}

inline critic::QTable parse_qtable(const std::string& text) {
    const json j = json::parse(text);
    const auto n = j.at("num_states").get<std::size_t>();
    const auto m = j.at("num_actions").get<int>();
    critic::QTable q(n, m);
    const auto& values = j.at("values");
    if (values.size() != n) throw ConfigError("values", "row count differs from num_states");
    for (std::size_t s = 0; s < n; ++s) {
        if (values[s].size() != static_cast<std::size_t>(m)) throw ConfigError("values", "ragged row");
        for (int a = 1; a <= m; ++a) q(s, a) = values[s][static_cast<std::size_t>(a - 1)].get<double>();
    }
    return q;
}

// trace.csv ---------------------------------------------------------------

inline std::string dump_trace(const trainer::ConvergenceTrace& trace) {
    std::string out = "episode,delta,steps,violations\n";
    for (const auto& e : trace.episodes) {
        out += std::to_string(e.index) + "," + format_double(e.delta) + "," + std::to_string(e.steps) + "," +
               std::to_string(e.violations) + "\n";
    }
    return out;
}

// evaluation report -------------------------------------------------------

inline json cell_json(grid::Cell c) { return json::array({c.col, c.row}); }

inline json report_to_json(const grid::Environment& env, const trainer::EvaluationReport& report) {
    json j;
    j["environment"] = env.spec().name;
    j["safe"] = report.safe;
    j["goal_reaching"] = report.goal_reaching;
    j["optimal"] = report.optimal;
    j["violations"] = report.violations;
    json rollouts = json::array();
    for (const auto& r : report.rollouts) {
        const auto start = env.state(r.start);
        json rj;
        rj["start"] = {{"cell", cell_json(start.agent)}, {"phases", start.phases}};
        rj["length"] = r.length;
        rj["optimal_length"] = r.optimal_length ? json(*r.optimal_length) : json(nullptr);
        rj["reached_goal"] = r.reached_goal;
        rj["safe"] = r.safe;
        rj["optimal"] = r.optimal;
        json path = json::array();
        for (std::size_t s : r.path) path.push_back(cell_json(env.state(s).agent));
        rj["path"] = path;
        rollouts.push_back(rj);
    }
    j["rollouts"] = rollouts;
    return j;
}

/// Arrow grid of the greedy policy for one mover phase vector, top row first.
/// '#' obstacle, 'G' goal, '*' mover.
inline std::string render_policy(const grid::Environment& env, const svm::PolicyParams& params,
                                 const std::vector<int>& phases) {
    const auto& spec = env.spec();
    std::string out;
    for (int row = spec.rows - 1; row >= 0; --row) {
        for (int col = 0; col < spec.cols; ++col) {
            const grid::Cell c{col, row};
            const grid::CompositeState st{c, phases};
            const auto idx = env.index(st);
            std::string glyph;
            if (spec.is_obstacle(c)) {
                glyph = "#";
            } else if (spec.is_goal(c)) {
                glyph = "G";
            } else if (!idx || !env.is_safe(*idx)) {
                glyph = "*";
            } else {
                glyph = std::string(grid::action_arrow(grid::action_from_id(actor::policy_action(params, *idx))));
            }
            out += glyph;
            out += (col + 1 < spec.cols) ? " " : "\n";
        }
    }
    return out;
}

}  // namespace safe_rl::io
