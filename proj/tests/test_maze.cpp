#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "lomap/error.hpp"
#include "lomap/maze.hpp"
#include "lomap/rng.hpp"

using namespace lomap;

namespace {

template <typename Fn>
int error_code(Fn&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return static_cast<int>(e.kind());
  }
  return 0;
}

// Diagonal checkerboards are not 4-connected, so corner-rule probes have to
// assemble the grid by hand instead of going through parse.
MazeSpec hand_maze(int rows, int cols, const std::string& cells) {
  MazeSpec m;
  m.rows = rows;
  m.cols = cols;
  m.cells.assign(cells.begin(), cells.end());
  return m;
}

}  // namespace

TEST_CASE("parse records regions and normalizes them to free cells") {
  const MazeSpec m = MazeSpec::parse(
      "#####\n"
      "#S.G#\n"
      "#####\n");
  CHECK(m.rows == 3);
  CHECK(m.cols == 5);
  CHECK(!m.wall(1, 1));
  CHECK(!m.wall(1, 3));
  REQUIRE(m.start_cells.size() == 1);
  REQUIRE(m.goal_cells.size() == 1);
  CHECK(m.start_cells[0] == std::make_pair(1, 1));
  CHECK(m.goal_cells[0] == std::make_pair(1, 3));
  CHECK(m.start_region() == m.start_cells);
  // normalized text keeps the markers
  CHECK(m.text.find('S') != std::string::npos);
  CHECK(m.free_count() == 3);
}

TEST_CASE("empty regions fall back to every free cell") {
  const MazeSpec m = MazeSpec::parse(
      "###\n"
      "#.#\n"
      "###\n");
  CHECK(m.start_region() == m.free_cells());
  CHECK(m.goal_region() == m.free_cells());
}

TEST_CASE("parse rejects bad grids") {
  CHECK(error_code([] { MazeSpec::parse(""); }) == 3);
  CHECK(error_code([] { MazeSpec::parse("##\n#\n"); }) == 3);    // ragged
  CHECK(error_code([] { MazeSpec::parse("#x\n..\n"); }) == 3);   // bad char
  CHECK(error_code([] { MazeSpec::parse("####\n####\n"); }) == 3);  // no free
  CHECK(error_code([] {
          MazeSpec::parse(
              "...#...\n"
              "#######\n");  // two free components
        }) == 3);
}

TEST_CASE("builtin mazes exist, connect, and carry no pinned regions") {
  for (const char* name : {"corridor", "four_room"}) {
    const MazeSpec m = MazeSpec::builtin(name);
    CHECK(m.free_count() > 0);
    CHECK(m.start_cells.empty());
    CHECK(m.goal_cells.empty());
  }
  CHECK(MazeSpec::builtin("corridor").rows == 3);
  CHECK(MazeSpec::builtin("four_room").rows == 13);
  CHECK(MazeSpec::builtin("four_room").cols == 13);
  CHECK(error_code([] { MazeSpec::builtin("labyrinth"); }) == 2);
}

TEST_CASE("world coordinates scale with cell_size") {
  MazeSpec m = MazeSpec::parse(
      "##\n"
      ".#\n");
  CHECK(m.center(1, 0) == Eigen::Vector2d(0.5, 1.5));
  CHECK(!m.wall_at(0.5, 1.5));
  CHECK(m.wall_at(1.5, 1.5));
  CHECK(m.wall_at(-0.1, 1.5));  // outside counts as wall
  CHECK(m.wall_at(0.5, 2.5));
  m.cell_size = 2.0;
  CHECK(m.center(1, 0) == Eigen::Vector2d(1.0, 3.0));
  CHECK(!m.wall_at(1.0, 3.0));
  CHECK(m.wall_at(3.0, 3.0));
}

TEST_CASE("straight segments detect walls exactly") {
  const MazeSpec m = MazeSpec::builtin("corridor");
  // corridor interior row is y in (1, 2)
  CHECK(!segment_hits_wall(m, {1.5, 1.5}, {10.5, 1.5}));
  CHECK(segment_hits_wall(m, {1.5, 1.5}, {1.5, 2.5}));   // into the top wall
  CHECK(segment_hits_wall(m, {0.5, 0.5}, {1.5, 1.5}));   // endpoint in wall
  CHECK(segment_hits_wall(m, {1.5, 1.5}, {-1.0, 1.5}));  // leaves the grid
  // zero-length segments reduce to a point test
  CHECK(!segment_hits_wall(m, {1.5, 1.5}, {1.5, 1.5}));
  CHECK(segment_hits_wall(m, {0.5, 0.5}, {0.5, 0.5}));
}

TEST_CASE("exact corner crossings step across the x face first") {
  // free cells on one diagonal, walls on the other; the segment runs corner
  // to corner. Stepping x first visits the wall cell on the x side, so both
  // orientations must report a hit.
  const MazeSpec a = hand_maze(2, 2, "#..#");  // walls at (0,0) and (1,1)
  CHECK(segment_hits_wall(a, {1.5, 0.5}, {0.5, 1.5}));
  const MazeSpec b = hand_maze(2, 2, ".##.");  // walls at (0,1) and (1,0)
  CHECK(segment_hits_wall(b, {0.5, 0.5}, {1.5, 1.5}));
  // fully free 2x2: the same corner crossings are fine
  const MazeSpec c = hand_maze(2, 2, "....");
  CHECK(!segment_hits_wall(c, {0.5, 0.5}, {1.5, 1.5}));
  CHECK(!segment_hits_wall(c, {1.5, 0.5}, {0.5, 1.5}));
}

TEST_CASE("segment tests are invariant under subdivision") {
  const MazeSpec m = MazeSpec::builtin("four_room");
  Rng rng(13);
  const double w = m.cols, h = m.rows;
  int checked = 0;
  for (int rep = 0; rep < 400; ++rep) {
    const Eigen::Vector2d p0(rng.uniform() * w, rng.uniform() * h);
    const Eigen::Vector2d p1(rng.uniform() * w, rng.uniform() * h);
    const Eigen::Vector2d mid = 0.5 * (p0 + p1);
    const bool whole = segment_hits_wall(m, p0, p1);
    const bool split =
        segment_hits_wall(m, p0, mid) || segment_hits_wall(m, mid, p1);
    CHECK(whole == split);
    ++checked;
  }
  CHECK(checked == 400);
}

TEST_CASE("trajectory collision scans consecutive states") {
  const MazeSpec m = MazeSpec::builtin("corridor");
  Trajectory t(3, 4, 2);
  t.state(0) << 1.5, 1.5, 0, 0;
  t.state(1) << 5.0, 1.5, 0, 0;
  t.state(2) << 10.0, 1.5, 0, 0;
  CHECK(!trajectory_hits_wall(m, t));
  t.state(1) << 5.0, 2.5, 0, 0;  // wall row
  CHECK(trajectory_hits_wall(m, t));
  t.state(1) << 5.0, 1.5, 0, 0;
  t.state(0) << 0.5, 0.5, 0, 0;  // starts inside a wall
  CHECK(trajectory_hits_wall(m, t));
}

TEST_CASE("env integrates drag and clamps the action") {
  const MazeSpec m = MazeSpec::builtin("corridor");
  const PointMassEnv env(m, EnvParams{});
  const Eigen::Vector4d s(2.0, 1.5, 0.4, -0.2);
  const Eigen::Vector2d a(0.3, 0.1);
  const Eigen::Vector4d next = env.step(s, a);
  // open space: velocity update is v + dt (a - damping v), position x + dt v'
  const double vx = 0.4 + 0.2 * (0.3 - 0.15 * 0.4);
  const double vy = -0.2 + 0.2 * (0.1 - 0.15 * -0.2);
  CHECK(next[2] == doctest::Approx(vx).epsilon(1e-12));
  CHECK(next[3] == doctest::Approx(vy).epsilon(1e-12));
  CHECK(next[0] == doctest::Approx(2.0 + 0.2 * vx).epsilon(1e-12));
  CHECK(next[1] == doctest::Approx(1.5 + 0.2 * vy).epsilon(1e-12));

  // oversized actions renormalize to amax
  const Eigen::Vector4d big = env.step(s, Eigen::Vector2d(30.0, 0.0));
  const Eigen::Vector4d capped = env.step(s, Eigen::Vector2d(1.5, 0.0));
  CHECK((big - capped).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(error_code([&] {
          env.step(Eigen::Vector4d(1, 1, 0, std::nan("")), a);
        }) == 2);
}

TEST_CASE("walls stop and slide instead of tunneling") {
  const MazeSpec m = MazeSpec::builtin("corridor");
  const PointMassEnv env(m, EnvParams{});
  // huge upward velocity: y must clip just below the wall at y = 2, vy -> 0
  Eigen::Vector4d s(5.0, 1.5, 0.0, 400.0);
  Eigen::Vector4d next = env.step(s, Eigen::Vector2d::Zero());
  CHECK(next[1] < 2.0);
  CHECK(next[1] > 1.9);
  CHECK(next[3] == 0.0);
  CHECK(!m.wall_at(next[0], next[1]));

  // diagonal push into the wall keeps the tangential component
  s = {5.0, 1.9, 0.0, 0.0};
  for (int it = 0; it < 10; ++it)
    s = env.step(s, Eigen::Vector2d(1.0, 1.0));
  CHECK(s[0] > 5.0);   // still moving along the corridor
  CHECK(s[1] < 2.0);   // never inside the wall band
  CHECK(!m.wall_at(s[0], s[1]));

  // fast horizontal motion crosses many cells when the run is open
  s = {1.5, 1.5, 20.0, 0.0};
  next = env.step(s, Eigen::Vector2d::Zero());
  CHECK(next[0] > 4.0);
}

TEST_CASE("dynamics error is zero exactly on rolled-out data") {
  const MazeSpec m = MazeSpec::builtin("corridor");
  const PointMassEnv env(m, EnvParams{});
  Trajectory t(5, 4, 2);
  Rng rng(19);
  Eigen::Vector4d s(2.0, 1.5, 0.1, 0.0);
  for (int k = 0; k < 5; ++k) {
    const Eigen::Vector2d a(rng.gaussian() * 0.3, rng.gaussian() * 0.3);
    t.state(k) = s;
    t.action(k) = a;
    s = env.step(s, a);
  }
  CHECK(dynamic_mse(env, t) == 0.0);
  t.state(2)[0] += 0.05;
  CHECK(dynamic_mse(env, t) > 0.0);
  Trajectory bad(1, 4, 2);
  CHECK(error_code([&] { dynamic_mse(env, bad); }) == 2);
}
