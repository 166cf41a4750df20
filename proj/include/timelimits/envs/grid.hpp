#pragma once

#include <array>
#include <cstddef>

namespace timelimits::grid {

/// Row 0 is the top row; column 0 is the left column.
struct Cell {
  int row = 0;
  int col = 0;
  friend constexpr bool operator==(Cell, Cell) = default;
};

enum Move : std::size_t { North = 0, South = 1, East = 2, West = 3 };

inline constexpr std::array<Cell, 4> kDeltas{{{-1, 0}, {1, 0}, {0, 1}, {0, -1}}};

/// Applies a cardinal move; moves off the board leave the cell unchanged.
constexpr Cell apply_move(Cell c, std::size_t move, int width, int height) {
  const Cell d = kDeltas[move];
  const Cell n{c.row + d.row, c.col + d.col};
  if (n.row < 0 || n.row >= height || n.col < 0 || n.col >= width) return c;
  return n;
}

constexpr int manhattan(Cell a, Cell b) {
  return (a.row > b.row ? a.row - b.row : b.row - a.row) +
         (a.col > b.col ? a.col - b.col : b.col - a.col);
}

}  // namespace timelimits::grid
