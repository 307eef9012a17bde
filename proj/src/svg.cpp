#include "lomap/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "lomap/error.hpp"
#include "lomap/io.hpp"

namespace lomap {

namespace {

std::string esc(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&':
        out += "&amp;";
        break;
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      default:
        out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

void write_maze_figure(const std::string& path, const MazeSpec& maze,
                       const std::vector<Trajectory>& plans,
                       const std::string& title) {
  const double scale = 40.0;
  const double pad = 8.0;
  const double w = maze.cols * scale + 2 * pad;
  const double h = maze.rows * scale + 2 * pad + 24.0;
  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(w)
    << "\" height=\"" << num(h) << "\" viewBox=\"0 0 " << num(w) << " "
    << num(h) << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  if (!title.empty()) {
    s << "<text x=\"" << num(pad) << "\" y=\"16\" font-family=\"sans-serif\" "
      << "font-size=\"13\" fill=\"#333333\">" << esc(title) << "</text>\n";
  }
  const double oy = 24.0 + pad;
  const double ox = pad;
  for (int r = 0; r < maze.rows; ++r) {
    for (int c = 0; c < maze.cols; ++c) {
      if (!maze.wall(r, c)) continue;
      s << "<rect x=\"" << num(ox + c * scale) << "\" y=\""
        << num(oy + r * scale) << "\" width=\"" << num(scale)
        << "\" height=\"" << num(scale) << "\" fill=\"#4a4a4a\"/>\n";
    }
  }
  s << "<rect x=\"" << num(ox) << "\" y=\"" << num(oy) << "\" width=\""
    << num(maze.cols * scale) << "\" height=\"" << num(maze.rows * scale)
    << "\" fill=\"none\" stroke=\"#4a4a4a\"/>\n";

  for (const Trajectory& t : plans) {
    const bool bad = trajectory_hits_wall(maze, t);
    const char* color = bad ? "#d83933" : "#2c7fb8";
    s << "<polyline fill=\"none\" stroke=\"" << color
      << "\" stroke-width=\"1.5\" stroke-opacity=\"0.75\" points=\"";
    for (int k = 0; k < t.horizon; ++k) {
      const auto st = t.state(k);
      s << num(ox + st[0] * scale) << "," << num(oy + st[1] * scale);
      if (k + 1 < t.horizon) s << " ";
    }
    s << "\"/>\n";
    const auto first = t.state(0);
    const auto last = t.state(t.horizon - 1);
    s << "<circle cx=\"" << num(ox + first[0] * scale) << "\" cy=\""
      << num(oy + first[1] * scale) << "\" r=\"3.5\" fill=\"#1a7f37\"/>\n";
    s << "<circle cx=\"" << num(ox + last[0] * scale) << "\" cy=\""
      << num(oy + last[1] * scale) << "\" r=\"3.5\" fill=\"" << color
      << "\"/>\n";
  }
  s << "</svg>\n";
  io::write_text_file(path, s.str());
}

void write_loglog_plot(const std::string& path, const std::string& title,
                       const std::string& xlabel, const std::string& ylabel,
                       const std::vector<PlotSeries>& series, bool with_fit,
                       double slope, double intercept) {
  require_param(!series.empty(), "plot needs at least one series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = 0;
  double ymin = std::numeric_limits<double>::infinity(), ymax = 0;
  for (const PlotSeries& sr : series) {
    for (const auto& p : sr.pts) {
      require_param(p[0] > 0 && p[1] > 0, "log plot needs positive values");
      xmin = std::min(xmin, p[0]);
      xmax = std::max(xmax, p[0]);
      ymin = std::min(ymin, p[1]);
      ymax = std::max(ymax, p[1]);
    }
  }
  require_param(xmax > 0 && ymax > 0, "plot has no points");
  auto lg = [](double v) { return std::log10(v); };
  double lx0 = std::floor(lg(xmin)), lx1 = std::ceil(lg(xmax));
  double ly0 = std::floor(lg(ymin)), ly1 = std::ceil(lg(ymax));
  if (lx1 == lx0) lx1 = lx0 + 1;
  if (ly1 == ly0) ly1 = ly0 + 1;

  const double W = 520, H = 390;
  const double L = 64, R = 16, T = 34, B = 48;
  const double pw = W - L - R, ph = H - T - B;
  auto px = [&](double v) { return L + (lg(v) - lx0) / (lx1 - lx0) * pw; };
  auto py = [&](double v) { return T + (ly1 - lg(v)) / (ly1 - ly0) * ph; };

  std::ostringstream s;
  s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
  s << "<text x=\"" << L << "\" y=\"20\" font-family=\"sans-serif\" "
    << "font-size=\"13\" fill=\"#333333\">" << esc(title) << "</text>\n";

  for (int k = static_cast<int>(lx0); k <= static_cast<int>(lx1); ++k) {
    const double x = L + (k - lx0) / (lx1 - lx0) * pw;
    s << "<line x1=\"" << num(x) << "\" y1=\"" << num(T) << "\" x2=\""
      << num(x) << "\" y2=\"" << num(T + ph)
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << num(x) << "\" y=\"" << num(T + ph + 16)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
      << "text-anchor=\"middle\">1e" << k << "</text>\n";
  }
  for (int k = static_cast<int>(ly0); k <= static_cast<int>(ly1); ++k) {
    const double y = T + (ly1 - k) / (ly1 - ly0) * ph;
    s << "<line x1=\"" << num(L) << "\" y1=\"" << num(y) << "\" x2=\""
      << num(L + pw) << "\" y2=\"" << num(y)
      << "\" stroke=\"#dddddd\" stroke-width=\"1\"/>\n";
    s << "<text x=\"" << num(L - 6) << "\" y=\"" << num(y + 4)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
      << "text-anchor=\"end\">1e" << k << "</text>\n";
  }
  s << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\""
    << num(pw) << "\" height=\"" << num(ph)
    << "\" fill=\"none\" stroke=\"#888888\"/>\n";
  s << "<text x=\"" << num(L + pw / 2) << "\" y=\"" << num(H - 10)
    << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
    << "text-anchor=\"middle\">" << esc(xlabel) << "</text>\n";
  s << "<text x=\"14\" y=\"" << num(T + ph / 2)
    << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\"#333333\" "
    << "text-anchor=\"middle\" transform=\"rotate(-90 14 " << num(T + ph / 2)
    << ")\">" << esc(ylabel) << "</text>\n";

  if (with_fit) {
    // y = exp(intercept) * x^slope, drawn across the x range.
    const double xa = std::pow(10.0, lx0), xb = std::pow(10.0, lx1);
    const double ya = std::exp(intercept) * std::pow(xa, slope);
    const double yb = std::exp(intercept) * std::pow(xb, slope);
    auto clampy = [&](double v) {
      return std::min(std::pow(10.0, ly1), std::max(std::pow(10.0, ly0), v));
    };
    s << "<line x1=\"" << num(px(xa)) << "\" y1=\"" << num(py(clampy(ya)))
      << "\" x2=\"" << num(px(xb)) << "\" y2=\"" << num(py(clampy(yb)))
      << "\" stroke=\"#999999\" stroke-dasharray=\"5 4\"/>\n";
    char lbl[64];
    std::snprintf(lbl, sizeof(lbl), "slope %.3f", slope);
    s << "<text x=\"" << num(L + pw - 6) << "\" y=\"" << num(T + 16)
      << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#555555\" "
      << "text-anchor=\"end\">" << lbl << "</text>\n";
  }

  double ly = T + 16;
  for (const PlotSeries& sr : series) {
    for (const auto& p : sr.pts) {
      s << "<circle cx=\"" << num(px(p[0])) << "\" cy=\"" << num(py(p[1]))
        << "\" r=\"3.5\" fill=\"" << sr.color << "\"/>\n";
    }
    if (!sr.label.empty()) {
      s << "<circle cx=\"" << num(L + 12) << "\" cy=\"" << num(ly - 4)
        << "\" r=\"3.5\" fill=\"" << sr.color << "\"/>\n";
      s << "<text x=\"" << num(L + 20) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#333333\">"
        << esc(sr.label) << "</text>\n";
      ly += 15;
    }
  }
  s << "</svg>\n";
  io::write_text_file(path, s.str());
}

}  // namespace lomap
