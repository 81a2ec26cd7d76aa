#include "fcgrad/envs/grid.hpp"

#include <map>

#include "fcgrad/common/error.hpp"

namespace fcg::envs {

Layout parse_layout(std::string_view text) {
  Layout out;
  std::map<int, Pos> spawns;
  int y = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) continue;
    if (out.width == 0) out.width = int(line.size());
    require(int(line.size()) == out.width,
            "layout row " + std::to_string(y) + " has width " +
                std::to_string(line.size()) + ", expected " +
                std::to_string(out.width),
            ErrorCode::Config);
    for (int x = 0; x < out.width; ++x) {
      const char ch = line[std::size_t(x)];
      Cell c = Cell::Empty;
      switch (ch) {
        case '.': c = Cell::Empty; break;
        case '#': c = Cell::Wall; break;
        case '@': c = Cell::Apple; break;
        case 'W': c = Cell::Waste; break;
        case 'G': c = Cell::CoinGreen; break;
        case 'R': c = Cell::CoinRed; break;
        case '~': c = Cell::River; break;
        case 'O': c = Cell::Orchard; break;
        default:
          require(ch >= '0' && ch <= '9',
                  std::string("unknown layout character '") + ch + "'",
                  ErrorCode::Config);
          require(!spawns.count(ch - '0'),
                  std::string("duplicate spawn '") + ch + "'", ErrorCode::Config);
          spawns[ch - '0'] = {x, y};
      }
      out.cells.push_back(c);
    }
    ++y;
  }
  out.height = y;
  require(out.width > 0 && out.height > 0, "empty layout", ErrorCode::Config);
  int expect = 0;
  for (const auto& [id, p] : spawns) {
    require(id == expect, "spawn digits must be contiguous from 0",
            ErrorCode::Config);
    out.spawns.push_back(p);
    ++expect;
  }
  return out;
}

Cell GridWorld::visible(Pos p) const {
  if (!in_bounds(p)) return Cell::Wall;
  const Cell c = cells[index(p)];
  if (c == Cell::Empty) return region[index(p)];
  return c;
}

int GridWorld::agent_at(Pos p) const {
  for (std::size_t i = 0; i < agent_positions.size(); ++i)
    if (agent_positions[i] == p) return int(i);
  return -1;
}

char cell_char(Cell c) {
  switch (c) {
    case Cell::Empty: return '.';
    case Cell::Wall: return '#';
    case Cell::Apple: return '@';
    case Cell::Waste: return 'W';
    case Cell::CoinGreen: return 'G';
    case Cell::CoinRed: return 'R';
    case Cell::River: return '~';
    case Cell::Orchard: return 'O';
  }
  return '?';
}

}  // namespace fcg::envs
