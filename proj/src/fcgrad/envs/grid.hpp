#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "fcgrad/common/rng.hpp"

namespace fcg::envs {

enum class Cell : std::uint8_t {
  Empty,
  Wall,
  Apple,
  Waste,
  CoinGreen,
  CoinRed,
  River,
  Orchard,
};
inline constexpr int kNumCellKinds = 8;

enum Action : int { Up = 0, Down, Left, Right, Stay, Clean };

struct Pos {
  int x = 0;
  int y = 0;
  friend bool operator==(const Pos&, const Pos&) = default;
};

inline Pos moved(Pos p, int action) {
  switch (action) {
    case Up: return {p.x, p.y - 1};
    case Down: return {p.x, p.y + 1};
    case Left: return {p.x - 1, p.y};
    case Right: return {p.x + 1, p.y};
    default: return p;
  }
}

// Parsed plain-text map. One character per cell:
//   .  empty      #  wall       @  apple     W  waste
//   G  green coin R  red coin   ~  river     O  orchard
//   0-9 spawn of that agent (the cell itself is empty)
// '~' and 'O' mark regions rather than contents.
struct Layout {
  int width = 0;
  int height = 0;
  std::vector<Cell> cells;
  std::vector<Pos> spawns;

  Cell at(int x, int y) const { return cells[std::size_t(y * width + x)]; }
};

// Throws fcg::Error(Config) on ragged rows, unknown characters, duplicate or
// non-contiguous spawn digits.
Layout parse_layout(std::string_view text);

struct GridWorld {
  int width = 0;
  int height = 0;
  // Current cell contents. Region cells (river, orchard) read as Empty here
  // when nothing is on them; the region itself lives in `region`.
  std::vector<Cell> cells;
  // River, Orchard or Empty per cell; fixed for the episode.
  std::vector<Cell> region;
  std::vector<Pos> agent_positions;
  std::vector<Pos> agent_spawns;
  // Last nonzero movement per agent; used as the facing direction.
  std::vector<int> facing;
  Rng rng{0};
  int step_count = 0;
  int episode_length = 0;

  bool in_bounds(Pos p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width && p.y < height;
  }
  std::size_t index(Pos p) const { return std::size_t(p.y * width + p.x); }
  Cell cell(Pos p) const { return in_bounds(p) ? cells[index(p)] : Cell::Wall; }
  void set(Pos p, Cell c) { cells[index(p)] = c; }
  // What an observer sees at p: the cell, or its region when the cell is
  // empty, or Wall out of bounds.
  Cell visible(Pos p) const;
  // Agent index at p, or -1.
  int agent_at(Pos p) const;
};

char cell_char(Cell c);

}  // namespace fcg::envs
