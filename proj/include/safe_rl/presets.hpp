#pragma once

// Bundled environments: n x n grids (4..9), a 15x15 maze, a 15x9 grid with
// one mover circling a central block, and a lane-crossing game with cars,
// a truck and a train.

#include <string>
#include <vector>

#include "safe_rl/env_io.hpp"
#include "safe_rl/gridworld.hpp"

namespace safe_rl::presets {

/// Start bottom-left, goal top-left, with horizontal bars that force a
/// serpentine route.
inline grid::GridSpec square_grid(int n) {
    if (n < 4) throw InputError("square grid presets need n >= 4");
    std::vector<std::string> rows(static_cast<std::size_t>(n), std::string(static_cast<std::size_t>(n), '.'));
    auto at = [&](int col, int row) -> char& {
        return rows[static_cast<std::size_t>(n - 1 - row)][static_cast<std::size_t>(col)];
    };
    const int low_bar = (n - 1) / 2;
    for (int c = 0; c <= n - 2; ++c) at(c, low_bar) = '#';
    const int high_bar = low_bar + 2;
    if (high_bar <= n - 2) {
        for (int c = 1; c <= n - 1; ++c) at(c, high_bar) = '#';
    }
    at(0, 0) = 'S';
    at(0, n - 1) = 'G';
    return io::spec_from_map("grid" + std::to_string(n), rows);
}

inline grid::GridSpec maze15() {
    return io::spec_from_map("maze15", {
                                           ".....#........G",
                                           "##.#.#.#####.#.",
                                           ".....#.#...#.#.",
                                           ".#####.#.#.#.#.",
                                           ".........#...#.",
                                           ".#######.#####.",
                                           "...#.......#...",
                                           ".#.#.#####.#.##",
                                           ".#...#.....#...",
                                           ".#####.#.#####.",
                                           ".#.....#.......",
                                           ".###.#.###.####",
                                           "...#.....#.#...",
                                           "##.#.###.#.#.#.",
                                           "S..#...#.....#.",
                                       });
}

/// Clockwise loop around the rectangle [c0, c1] x [r0, r1], starting at
/// its bottom-left corner.
inline std::vector<grid::Cell> rectangle_loop(int c0, int r0, int c1, int r1) {
    std::vector<grid::Cell> path;
    for (int r = r0; r <= r1; ++r) path.push_back({c0, r});
    for (int c = c0 + 1; c <= c1; ++c) path.push_back({c, r1});
    for (int r = r1 - 1; r >= r0; --r) path.push_back({c1, r});
    for (int c = c1 - 1; c > c0; --c) path.push_back({c, r0});
    return path;
}

/// 15x9 grid; the mover circles the central block on the ring of cells
/// around it. Every initial mover phase is a start state.
inline grid::GridSpec moving15x9() {
    return io::spec_from_map("moving15x9",
                             {
                                 "..#.........#..",
                                 "..#.........#..",
                                 "..#.........#..",
                                 ".....#####.....",
                                 "S....#####....G",
                                 ".....#####.....",
                                 "..#.........#..",
                                 "..#.........#..",
                                 "..#.........#..",
                             },
                             {grid::MoverSpec{rectangle_loop(4, 2, 10, 6), 1}});
}

inline std::vector<grid::Cell> lane(int row, int cols, bool leftward) {
    std::vector<grid::Cell> path;
    for (int c = 0; c < cols; ++c) path.push_back({leftward ? cols - 1 - c : c, row});
    return path;
}

/// Lane-crossing game: two car lanes, a truck lane and a train track
/// between rows of trees and houses. One fixed initial traffic pattern.
inline grid::GridSpec crossy() {
    constexpr int kCols = 8;
    return io::spec_from_map("crossy",
                             {
                                 "...G....",  // 10
                                 "........",  // 9
                                 "##.##.##",  // 8 houses
                                 "........",  // 7
                                 "........",  // 6 train
                                 ".#...#..",  // 5 trees
                                 "........",  // 4 truck
                                 "........",  // 3 car, leftward
                                 "..#...#.",  // 2 trees
                                 "........",  // 1 car
                                 "....S...",  // 0
                             },
                             {
                                 grid::MoverSpec{lane(1, kCols, false), 1},
                                 grid::MoverSpec{lane(3, kCols, true), 1},
                                 grid::MoverSpec{lane(4, kCols, false), 2},
                                 grid::MoverSpec{lane(6, kCols, true), 3},
                             },
                             {{0, 3, 5, 2}});
}

/// Every bundled preset, in file order.
inline std::vector<grid::GridSpec> all() {
    std::vector<grid::GridSpec> out;
    for (int n = 4; n <= 9; ++n) out.push_back(square_grid(n));
    out.push_back(maze15());
    out.push_back(moving15x9());
    out.push_back(crossy());
    return out;
}

inline grid::GridSpec by_name(const std::string& name) {
    for (auto& spec : all()) {
        if (spec.name == name) return spec;
    }
    throw InputError("unknown preset '" + name + "'");
}

}  // namespace safe_rl::presets
