#include "lace/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "lace/error.hpp"
#include "lace/text.hpp"

namespace lace::svg {
namespace {

constexpr std::array<std::array<int, 3>, 5> kAnchors{{
    {0x44, 0x01, 0x54}, {0x3b, 0x52, 0x8b}, {0x21, 0x91, 0x8c}, {0x5e, 0xc9, 0x62}, {0xfd, 0xe7, 0x25}}};

// Fixed-precision numbers keep the SVG compact and stable.
std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  std::string s = buf;
  if (s == "-0.000") s = "0.000";
  return s;
}

struct Frame {
  double xmin, ymax, scale, margin;
  double px(double x) const { return margin + (x - xmin) * scale; }
  double py(double y) const { return margin + (ymax - y) * scale; }
};

void legend(std::ostringstream& out, double x, double y, const std::string& title, double lo, double hi) {
  const double w = 160.0;
  const double h = 12.0;
  out << "<g class=\"legend\">\n";
  out << "<defs><linearGradient id=\"scale\" x1=\"0\" x2=\"1\" y1=\"0\" y2=\"0\">";
  for (int i = 0; i < 5; ++i)
    out << "<stop offset=\"" << num(i / 4.0) << "\" stop-color=\"" << hex_colour(i / 4.0) << "\"/>";
  out << "</linearGradient></defs>\n";
  out << "<text x=\"" << num(x) << "\" y=\"" << num(y - 4) << "\" font-size=\"11\">" << title << "</text>\n";
  out << "<rect x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\"" << num(w) << "\" height=\"" << num(h)
      << "\" fill=\"url(#scale)\" stroke=\"#333\" stroke-width=\"0.5\"/>\n";
  for (int i = 0; i <= 2; ++i) {
    const double v = lo + (hi - lo) * i / 2.0;
    out << "<text x=\"" << num(x + w * i / 2.0) << "\" y=\"" << num(y + h + 11) << "\" font-size=\"10\""
        << " text-anchor=\"middle\">" << text::format_double(std::round(v * 1000.0) / 1000.0) << "</text>\n";
  }
  out << "</g>\n";
}

}  // namespace

std::array<int, 3> viridis(double t) {
  if (!(t >= 0.0)) t = 0.0;
  if (t > 1.0) t = 1.0;
  const double pos = t * 4.0;
  const int i = std::min(3, static_cast<int>(pos));
  const double f = pos - i;
  std::array<int, 3> c{};
  for (int k = 0; k < 3; ++k)
    c[k] = static_cast<int>(std::lround(kAnchors[i][k] + f * (kAnchors[i + 1][k] - kAnchors[i][k])));
  return c;
}

std::string hex_colour(double t) {
  const auto c = viridis(t);
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", c[0], c[1], c[2]);
  return buf;
}

std::string render_arrows(const LaceModel& model, const ArrowOptions& options) {
  if (!model.trained()) throw DataError("export: model has no clusters");
  const auto& clusters = model.clusters();
  double xmin = clusters[0].centroid.x, xmax = xmin, ymin = clusters[0].centroid.y, ymax = ymin;
  for (const auto& c : clusters) {
    xmin = std::min(xmin, c.centroid.x);
    xmax = std::max(xmax, c.centroid.x);
    ymin = std::min(ymin, c.centroid.y);
    ymax = std::max(ymax, c.centroid.y);
  }
  double len = options.arrow_length;
  if (!(len > 0.0)) {
    const double area = std::max((xmax - xmin) * (ymax - ymin), 1.0);
    len = std::clamp(0.8 * std::sqrt(area / static_cast<double>(clusters.size())), 0.3, 5.0);
  }
  xmin -= len;
  xmax += len;
  ymin -= len;
  ymax += len;
  const Frame f{xmin, ymax, options.pixels_per_meter, 20.0};
  const double width = 2 * f.margin + (xmax - xmin) * f.scale;
  const double height = 2 * f.margin + (ymax - ymin) * f.scale + 50.0;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  out << "<title>LaCE model: most likely direction per cluster</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n";
  out << "<g class=\"arrows\" stroke-linecap=\"round\">\n";
  const BinGeometry& g = model.geometry();
  for (std::size_t c = 0; c < clusters.size(); ++c) {
    const auto& m = model.direction_marginal(static_cast<int>(c));
    const int best = static_cast<int>(std::max_element(m.begin(), m.end()) - m.begin());
    const double w = g.direction_center(best);
    const double p = m[best];
    const std::string col = hex_colour(p);
    const Vec2 a = clusters[c].centroid;
    const Vec2 b{a.x + len * std::cos(w), a.y + len * std::sin(w)};
    const double x1 = f.px(a.x), y1 = f.py(a.y), x2 = f.px(b.x), y2 = f.py(b.y);
    // head in screen space
    const double sa = std::atan2(y2 - y1, x2 - x1);
    const double hl = std::min(8.0, 0.35 * len * f.scale);
    const double lx = x2 - hl * std::cos(sa - 0.45), ly = y2 - hl * std::sin(sa - 0.45);
    const double rx = x2 - hl * std::cos(sa + 0.45), ry = y2 - hl * std::sin(sa + 0.45);
    out << "<g class=\"arrow\" data-cluster=\"" << c << "\" data-direction-bin=\"" << best << "\" data-probability=\""
        << text::format_double(p) << "\">";
    out << "<line x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\"" << num(x2) << "\" y2=\"" << num(y2)
        << "\" stroke=\"" << col << "\" stroke-width=\"1.5\"/>";
    out << "<polygon points=\"" << num(x2) << "," << num(y2) << " " << num(lx) << "," << num(ly) << " " << num(rx)
        << "," << num(ry) << "\" fill=\"" << col << "\"/>";
    out << "</g>\n";
  }
  out << "</g>\n";
  legend(out, f.margin, height - 30.0, "probability of the most likely direction", 0.0, 1.0);
  out << "</svg>\n";
  return out.str();
}

std::string render_heatmap(const HeatmapGrid& grid, const HeatmapOptions& options) {
  double hi = 0.0;
  for (int iy = 0; iy < grid.ny; ++iy)
    for (int ix = 0; ix < grid.nx; ++ix)
      if (const auto m = grid.mean(ix, iy)) hi = std::max(hi, *m);
  const double span = hi > 0.0 ? hi : 1.0;
  const double xmax = grid.bounds.xmin + grid.nx * grid.cell_size;
  const double ymax = grid.bounds.ymin + grid.ny * grid.cell_size;
  const Frame f{grid.bounds.xmin, ymax, options.pixels_per_meter, 20.0};
  const double width = 2 * f.margin + (xmax - grid.bounds.xmin) * f.scale;
  const double height = 2 * f.margin + (ymax - grid.bounds.ymin) * f.scale + 50.0;

  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" viewBox=\"0 0 " << num(width) << " " << num(height) << "\">\n";
  out << "<title>FDE heatmap (m), keyed by ground-truth final position</title>\n";
  out << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height) << "\" fill=\"white\"/>\n";
  out << "<g class=\"cells\" stroke=\"#999\" stroke-width=\"0.25\">\n";
  const double cs = grid.cell_size * f.scale;
  for (int iy = 0; iy < grid.ny; ++iy) {
    for (int ix = 0; ix < grid.nx; ++ix) {
      const double x0 = grid.bounds.xmin + ix * grid.cell_size;
      const double y1 = grid.bounds.ymin + (iy + 1) * grid.cell_size;
      const auto m = grid.mean(ix, iy);
      out << "<rect class=\"cell\" x=\"" << num(f.px(x0)) << "\" y=\"" << num(f.py(y1)) << "\" width=\"" << num(cs)
          << "\" height=\"" << num(cs) << "\"";
      if (m) {
        out << " fill=\"" << hex_colour(*m / span) << "\" data-mean-fde=\"" << text::format_double(*m)
            << "\" data-count=\"" << grid.count[static_cast<std::size_t>(iy) * grid.nx + ix] << "\"";
      } else {
        out << " fill=\"none\"";
      }
      out << "/>\n";
    }
  }
  out << "</g>\n";
  legend(out, f.margin, height - 30.0, "mean FDE (m)", 0.0, span);
  out << "</svg>\n";
  return out.str();
}

}  // namespace lace::svg
