#pragma once

// Environment config files (JSON).
//
//   {
//     "name": "grid4",
//     "cols": 4, "rows": 4,
//     "map": ["...G", ".#..", ".#..", "S..."],       // top row first
//     "movers": [{"path": [[3,1],[3,2]], "speed": 1}], // [col,row], bottom-left origin
//     "start_phases": [[0]]                           // optional
//   }
//
// Map characters: '.' free, '#' obstacle, 'S' start, 'G' goal.

#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "safe_rl/errors.hpp"
#include "safe_rl/gridworld.hpp"

namespace safe_rl::io {

using json = nlohmann::ordered_json;

/// Builds a spec from map rows listed top-to-bottom.
inline grid::GridSpec spec_from_map(std::string name, const std::vector<std::string>& map,
                                    std::vector<grid::MoverSpec> movers = {},
                                    std::vector<std::vector<int>> start_phases = {}) {
    grid::GridSpec spec;
    spec.name = std::move(name);
    spec.rows = static_cast<int>(map.size());
    spec.cols = map.empty() ? 0 : static_cast<int>(map.front().size());
    for (std::size_t r = 0; r < map.size(); ++r) {
        const std::string field = "map[" + std::to_string(r) + "]";
        if (static_cast<int>(map[r].size()) != spec.cols) {
            throw ConfigError(field, "expected " + std::to_string(spec.cols) + " characters, got " +
                                         std::to_string(map[r].size()));
        }
        const int row = spec.rows - 1 - static_cast<int>(r);
        for (int col = 0; col < spec.cols; ++col) {
            const grid::Cell c{col, row};
            switch (map[r][static_cast<std::size_t>(col)]) {
                case '.': break;
                case '#': spec.obstacles.insert(c); break;
                case 'S': spec.start_cells.push_back(c); break;
                case 'G': spec.goal_cells.push_back(c); break;
                default:
                    throw ConfigError(field + "[" + std::to_string(col) + "]",
                                      std::string("unknown map character '") + map[r][static_cast<std::size_t>(col)] +
                                          "'");
            }
        }
    }
    std::sort(spec.start_cells.begin(), spec.start_cells.end());
    std::sort(spec.goal_cells.begin(), spec.goal_cells.end());
    spec.movers = std::move(movers);
    spec.start_phases = std::move(start_phases);
    return spec;
}

/// Map rows top-to-bottom.
inline std::vector<std::string> render_map(const grid::GridSpec& spec) {
    std::vector<std::string> rows;
    for (int row = spec.rows - 1; row >= 0; --row) {
        std::string line(static_cast<std::size_t>(spec.cols), '.');
        for (int col = 0; col < spec.cols; ++col) {
            const grid::Cell c{col, row};
            char ch = '.';
            if (spec.is_obstacle(c)) ch = '#';
            if (spec.is_goal(c)) ch = 'G';
            if (std::find(spec.start_cells.begin(), spec.start_cells.end(), c) != spec.start_cells.end()) ch = 'S';
            line[static_cast<std::size_t>(col)] = ch;
        }
        rows.push_back(std::move(line));
    }
    return rows;
}

namespace detail {

template <class T>
T get_field(const json& j, const std::string& key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + key, "missing field");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + key, std::string("wrong type: ") + e.what());
    }
}

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1;
    std::size_t col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

inline grid::GridSpec spec_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("<root>", "expected a JSON object");
    const auto name = j.contains("name") ? detail::get_field<std::string>(j, "name", "") : std::string("unnamed");
    const int cols = detail::get_field<int>(j, "cols", "");
    const int rows = detail::get_field<int>(j, "rows", "");
    const auto map = detail::get_field<std::vector<std::string>>(j, "map", "");
    if (static_cast<int>(map.size()) != rows) {
        throw ConfigError("map", "has " + std::to_string(map.size()) + " rows but rows = " + std::to_string(rows));
    }
    if (!map.empty() && static_cast<int>(map.front().size()) != cols) {
        throw ConfigError("map[0]", "has " + std::to_string(map.front().size()) + " columns but cols = " +
                                        std::to_string(cols));
    }

    std::vector<grid::MoverSpec> movers;
    if (j.contains("movers")) {
        if (!j.at("movers").is_array()) throw ConfigError("movers", "expected an array");
        for (std::size_t m = 0; m < j.at("movers").size(); ++m) {
            const auto& mj = j.at("movers")[m];
            const std::string where = "movers[" + std::to_string(m) + "].";
            grid::MoverSpec mover;
            const auto path = detail::get_field<std::vector<std::vector<int>>>(mj, "path", where);
            for (std::size_t p = 0; p < path.size(); ++p) {
                if (path[p].size() != 2) {
                    throw ConfigError(where + "path[" + std::to_string(p) + "]", "expected [col, row]");
                }
                mover.path.push_back({path[p][0], path[p][1]});
            }
            mover.speed = mj.contains("speed") ? detail::get_field<int>(mj, "speed", where) : 1;
            movers.push_back(std::move(mover));
        }
    }
    std::vector<std::vector<int>> start_phases;
    if (j.contains("start_phases")) {
        start_phases = detail::get_field<std::vector<std::vector<int>>>(j, "start_phases", "");
    }
    auto spec = spec_from_map(name, map, std::move(movers), std::move(start_phases));
    spec.validate();
    return spec;
}

inline grid::GridSpec parse_spec(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ConfigError(detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1), e.what());
    }
    return spec_from_json(j);
}

inline grid::GridSpec load_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError(path, "cannot open environment file");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
        return parse_spec(buf.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path + ": " + e.where, std::string(e.what()).substr(e.where.size() + 2));
    }
}

inline json spec_to_json(const grid::GridSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["cols"] = spec.cols;
    j["rows"] = spec.rows;
    j["map"] = render_map(spec);
    json movers = json::array();
    for (const auto& m : spec.movers) {
        json path = json::array();
        for (const auto& c : m.path) path.push_back({c.col, c.row});
        movers.push_back({{"path", path}, {"speed", m.speed}});
    }
    j["movers"] = movers;
    if (!spec.start_phases.empty()) j["start_phases"] = spec.start_phases;
    return j;
}

/// Pretty JSON with one map row per line and compact coordinate pairs.
inline std::string dump_spec(const grid::GridSpec& spec) {
    const json j = spec_to_json(spec);
    std::ostringstream out;
    out << "{\n";
    out << "  \"name\": " << json(spec.name).dump() << ",\n";
    out << "  \"cols\": " << spec.cols << ",\n";
    out << "  \"rows\": " << spec.rows << ",\n";
    out << "  \"map\": [\n";
    const auto& map = j["map"];
    for (std::size_t r = 0; r < map.size(); ++r) {
        out << "    " << map[r].dump() << (r + 1 < map.size() ? ",\n" : "\n");
    }
    out << "  ],\n";
    out << "  \"movers\": [";
    const auto& movers = j["movers"];
    for (std::size_t m = 0; m < movers.size(); ++m) {
        out << (m == 0 ? "\n" : ",\n") << "    {\"path\": " << movers[m]["path"].dump()
            << ", \"speed\": " << movers[m]["speed"].dump() << "}";
    }
    out << (movers.empty() ? "]" : "\n  ]");
    if (j.contains("start_phases")) out << ",\n  \"start_phases\": " << j["start_phases"].dump();
    out << "\n}\n";
    return out.str();
}

}  // namespace safe_rl::io
