#pragma once

#include <array>
#include <string>
#include <vector>

#include "lomap/maze.hpp"
#include "lomap/trajectory.hpp"

namespace lomap {

// Top-down render of the maze with plan paths overlaid. Plans that collide
// with walls draw in the alert color so artifacts are visible at a glance.
void write_maze_figure(const std::string& path, const MazeSpec& maze,
                       const std::vector<Trajectory>& plans,
                       const std::string& title);

struct PlotSeries {
  std::string label;
  std::string color;  // e.g. "#2c7fb8"
  std::vector<std::array<double, 2>> pts;  // positive x and y
};

// Log-log scatter with decade gridlines and an optional power-law reference
// line y = exp(intercept) * x^slope.
void write_loglog_plot(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series, bool with_fit,
                       double slope, double intercept);

}  // namespace lomap
