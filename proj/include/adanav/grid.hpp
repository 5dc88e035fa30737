#pragma once

#include <algorithm>
#include <cstddef>
#include <deque>
#include <string>
#include <utility>
#include <vector>

#include "adanav/errors.hpp"

namespace adanav {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

// Fixed action order. Every probability vector over actions uses this order.
enum class Action : int { Up = 0, Down = 1, Left = 2, Right = 3, Stay = 4 };
inline constexpr int kNumActions = 5;

inline Cell apply_action(Cell c, Action a) {
  switch (a) {
    case Action::Up: return {c.row - 1, c.col};
    case Action::Down: return {c.row + 1, c.col};
    case Action::Left: return {c.row, c.col - 1};
    case Action::Right: return {c.row, c.col + 1};
    case Action::Stay: return c;
  }
  return c;
}

// A rectangular gridworld with impassable wall cells. Construction validates
// that start and goal are open and that every open cell is reachable from
// start via 4-neighbor moves. Open cells receive compact row-major state ids;
// blocked cells have no id.
class GridSpec {
 public:
  GridSpec(int width, int height, std::vector<Cell> blocked, Cell start,
           Cell goal, std::string name)
      : width_(width),
        height_(height),
        start_(start),
        goal_(goal),
        name_(std::move(name)) {
    if (width_ <= 0 || height_ <= 0)
      throw ConfigError("GridSpec '" + name_ + "': width and height must be positive");
    blocked_mask_.assign(static_cast<std::size_t>(width_) * height_, 0);
    for (const Cell& c : blocked) {
      if (!in_bounds(c))
        throw ConfigError("GridSpec '" + name_ + "': blocked cell (" +
                          std::to_string(c.row) + "," + std::to_string(c.col) +
                          ") lies outside the grid");
      blocked_mask_[flat(c)] = 1;
    }
    check_open(start_, "start");
    check_open(goal_, "goal");
    build_index();
    check_connectivity();
  }

  int width() const { return width_; }
  int height() const { return height_; }
  Cell start() const { return start_; }
  Cell goal() const { return goal_; }
  const std::string& name() const { return name_; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  bool blocked(Cell c) const { return blocked_mask_[flat(c)]; }
  bool open(Cell c) const { return in_bounds(c) && !blocked(c); }

  int num_states() const { return static_cast<int>(cell_of_state_.size()); }
  int num_blocked() const {
    return width_ * height_ - num_states();
  }

  int state_of(Cell c) const { return state_of_cell_[flat(c)]; }
  Cell cell_of(int state) const { return cell_of_state_[static_cast<std::size_t>(state)]; }
  int start_state() const { return state_of(start_); }
  int goal_state() const { return state_of(goal_); }

 private:
  std::size_t flat(Cell c) const {
    return static_cast<std::size_t>(c.row) * width_ + c.col;
  }

  void check_open(Cell c, const char* what) const {
    if (!in_bounds(c))
      throw ConfigError("GridSpec '" + name_ + "': " + what + " cell (" +
                        std::to_string(c.row) + "," + std::to_string(c.col) +
                        ") lies outside the grid");
    if (blocked(c))
      throw ConfigError("GridSpec '" + name_ + "': " + what +
                        " cell is a blocked wall cell");
  }

  void build_index() {
    state_of_cell_.assign(blocked_mask_.size(), -1);
    for (int r = 0; r < height_; ++r)
      for (int c = 0; c < width_; ++c) {
        const Cell cell{r, c};
        if (!blocked(cell)) {
          state_of_cell_[flat(cell)] = static_cast<int>(cell_of_state_.size());
          cell_of_state_.push_back(cell);
        }
      }
  }

  void check_connectivity() const {
    std::vector<char> seen(cell_of_state_.size(), 0);
    std::deque<Cell> frontier{start_};
    seen[static_cast<std::size_t>(state_of(start_))] = 1;
    std::size_t reached = 1;
    while (!frontier.empty()) {
      const Cell c = frontier.front();
      frontier.pop_front();
      for (Action a : {Action::Up, Action::Down, Action::Left, Action::Right}) {
        const Cell n = apply_action(c, a);
        if (!open(n)) continue;
        char& s = seen[static_cast<std::size_t>(state_of(n))];
        if (!s) {
          s = 1;
          ++reached;
          frontier.push_back(n);
        }
      }
    }
    if (reached != cell_of_state_.size())
      throw ConfigError("GridSpec '" + name_ + "': " +
                        std::to_string(cell_of_state_.size() - reached) +
                        " open cell(s) unreachable from start");
  }

  int width_;
  int height_;
  Cell start_;
  Cell goal_;
  std::string name_;
  std::vector<char> blocked_mask_;
  std::vector<int> state_of_cell_;
  std::vector<Cell> cell_of_state_;
};

// The three documented 25x25 layouts. Walls are impassable cells; each layout
// starts at the top-left open cell and ends at the bottom-right open cell.
inline GridSpec builtin_grid(const std::string& name) {
  constexpr int kSide = 25;
  const Cell kStart{0, 0};
  const Cell kGoal{kSide - 1, kSide - 1};
  if (name == "empty25") {
    return GridSpec(kSide, kSide, {}, kStart, kGoal, name);
  }
  if (name == "four_walls25") {
    // Row 12 and column 12 blocked except doorways, splitting the grid into
    // four equal rooms connected through four openings.
    std::vector<Cell> blocked;
    for (int c = 0; c < kSide; ++c)
      if (c != 6 && c != 18) blocked.push_back({12, c});
    for (int r = 0; r < kSide; ++r)
      if (r != 6 && r != 18 && r != 12) blocked.push_back({r, 12});
    return GridSpec(kSide, kSide, std::move(blocked), kStart, kGoal, name);
  }
  if (name == "sixteen_walls25") {
    // Rows {6,12,18} and columns {6,12,18} blocked except doorways at
    // 3, 9, 15, 21, giving a 4x4 partition of connected rooms.
    const auto is_door = [](int i) { return i == 3 || i == 9 || i == 15 || i == 21; };
    const auto is_wall_line = [](int i) { return i == 6 || i == 12 || i == 18; };
    std::vector<Cell> blocked;
    for (int r = 0; r < kSide; ++r)
      for (int c = 0; c < kSide; ++c) {
        const bool on_row_wall = is_wall_line(r) && !is_door(c);
        const bool on_col_wall = is_wall_line(c) && !is_door(r);
        if (on_row_wall || on_col_wall) blocked.push_back({r, c});
      }
    return GridSpec(kSide, kSide, std::move(blocked), kStart, kGoal, name);
  }
  throw ConfigError("unknown builtin grid '" + name +
                    "'; valid names: empty25, four_walls25, sixteen_walls25");
}

}  // namespace adanav
