#include <catch2/catch_amalgamated.hpp>

#include "adanav/grid.hpp"

using namespace adanav;

TEST_CASE("apply_action moves one cell in the named direction") {
  const Cell c{3, 7};
  CHECK(apply_action(c, Action::Up) == Cell{2, 7});
  CHECK(apply_action(c, Action::Down) == Cell{4, 7});
  CHECK(apply_action(c, Action::Left) == Cell{3, 6});
  CHECK(apply_action(c, Action::Right) == Cell{3, 8});
  CHECK(apply_action(c, Action::Stay) == c);
}

TEST_CASE("empty25 indexes all 625 cells row-major") {
  const GridSpec g = builtin_grid("empty25");
  CHECK(g.width() == 25);
  CHECK(g.height() == 25);
  CHECK(g.num_states() == 625);
  CHECK(g.num_blocked() == 0);
  CHECK(g.start_state() == 0);
  CHECK(g.goal_state() == 624);
  CHECK(g.state_of({0, 1}) == 1);
  CHECK(g.state_of({1, 0}) == 25);
  CHECK(g.cell_of(624) == Cell{24, 24});
  for (int s = 0; s < g.num_states(); ++s)
    CHECK(g.state_of(g.cell_of(s)) == s);
}

TEST_CASE("four_walls25 blocks the two bisecting walls minus doorways") {
  const GridSpec g = builtin_grid("four_walls25");
  CHECK(g.num_blocked() == 45);
  CHECK(g.num_states() == 580);
  CHECK(g.blocked({12, 0}));
  CHECK(g.blocked({12, 12}));
  CHECK(g.blocked({0, 12}));
  CHECK(g.open({12, 6}));
  CHECK(g.open({12, 18}));
  CHECK(g.open({6, 12}));
  CHECK(g.open({18, 12}));
  CHECK(g.start() == Cell{0, 0});
  CHECK(g.goal() == Cell{24, 24});
}

TEST_CASE("sixteen_walls25 blocks three wall lines per axis with doors") {
  const GridSpec g = builtin_grid("sixteen_walls25");
  CHECK(g.num_blocked() == 117);
  CHECK(g.num_states() == 508);
  CHECK(g.blocked({6, 6}));
  CHECK(g.blocked({12, 0}));
  CHECK(g.blocked({0, 18}));
  CHECK(g.open({6, 3}));
  CHECK(g.open({9, 12}));
  CHECK(g.open({21, 18}));
}

TEST_CASE("unknown builtin grid name is a config error") {
  CHECK_THROWS_AS(builtin_grid("empty24"), ConfigError);
  CHECK_THROWS_WITH(builtin_grid("nope"),
                    Catch::Matchers::ContainsSubstring("empty25"));
}

TEST_CASE("grid construction rejects invalid layouts") {
  CHECK_THROWS_AS(GridSpec(0, 3, {}, {0, 0}, {0, 1}, "bad"), ConfigError);
  CHECK_THROWS_AS(GridSpec(3, 3, {{5, 5}}, {0, 0}, {2, 2}, "oob"), ConfigError);
  CHECK_THROWS_AS(GridSpec(3, 3, {{0, 0}}, {0, 0}, {2, 2}, "blocked-start"),
                  ConfigError);
  CHECK_THROWS_AS(GridSpec(3, 3, {{2, 2}}, {0, 0}, {2, 2}, "blocked-goal"),
                  ConfigError);
  // Middle column fully walled: the right column is unreachable.
  CHECK_THROWS_AS(
      GridSpec(3, 3, {{0, 1}, {1, 1}, {2, 1}}, {0, 0}, {2, 0}, "split"),
      ConfigError);
}

TEST_CASE("connected layout with walls passes validation") {
  const GridSpec g(3, 3, {{0, 1}, {1, 1}}, {0, 0}, {2, 2}, "l-shape");
  CHECK(g.num_states() == 7);
  CHECK(g.state_of({2, 2}) == 6);
  // Duplicate blocked cells collapse into one.
  const GridSpec d(2, 2, {{0, 1}, {0, 1}}, {0, 0}, {1, 1}, "dup");
  CHECK(d.num_states() == 3);
  CHECK(d.num_blocked() == 1);
}
