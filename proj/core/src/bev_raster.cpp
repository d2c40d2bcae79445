#include "scenforge/bev_raster.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace scenforge::bev {

namespace {

// Continuous pixel coordinates (no rounding); row/col grow down/right.
struct Pt {
  double row;
  double col;
};

Pt continuous_pixel(Vec2 m, const RasterParams& rp) {
  return {0.5 * rp.height - m.x / rp.meters_per_pixel,
          0.5 * rp.width - m.y / rp.meters_per_pixel};
}

// Liang-Barsky clip of segment a-b to [0, H-1] x [0, W-1]; false if fully out.
bool clip_segment(Pt& a, Pt& b, const RasterParams& rp) {
  const double dr = b.row - a.row, dc = b.col - a.col;
  double t0 = 0.0, t1 = 1.0;
  const double p[4] = {-dr, dr, -dc, dc};
  const double q[4] = {a.row - 0.0, (rp.height - 1.0) - a.row, a.col - 0.0,
                       (rp.width - 1.0) - a.col};
  for (int i = 0; i < 4; ++i) {
    if (p[i] == 0.0) {
      if (q[i] < 0.0) return false;  // parallel and outside
      continue;
    }
    const double r = q[i] / p[i];
    if (p[i] < 0.0) {
      if (r > t1) return false;
      if (r > t0) t0 = r;
    } else {
      if (r < t0) return false;
      if (r < t1) t1 = r;
    }
  }
  const Pt na{a.row + t0 * dr, a.col + t0 * dc};
  const Pt nb{a.row + t1 * dr, a.col + t1 * dc};
  a = na;
  b = nb;
  return true;
}

struct Painter {
  BevRaster& img;
  DrawStats* stats = nullptr;

  // Overwrite all three channels (trajectory colors).
  void set_rgb(int row, int col, Rgb c) {
    if (row < 0 || row >= img.height || col < 0 || col >= img.width) return;
    img.at(0, row, col) = c.r;
    img.at(1, row, col) = c.g;
    img.at(2, row, col) = c.b;
  }

  // Map classes own one channel each; only that channel is raised so
  // overlapping classes stay individually recoverable.
  void set_channel(int row, int col, int ch) {
    if (row < 0 || row >= img.height || col < 0 || col >= img.width) return;
    std::uint8_t& v = img.at(ch, row, col);
    if (v == 0 && stats) {
      if (ch == 0) ++stats->boundary_px;
      if (ch == 1) ++stats->crossing_px;
      if (ch == 2) ++stats->divider_px;
    }
    v = 255;
  }

  template <typename SetPx>
  void thick(int row, int col, SetPx&& set_px) {
    // 2 px strokes: dilate one step right and down
    set_px(row, col);
    set_px(row + 1, col);
    set_px(row, col + 1);
    set_px(row + 1, col + 1);
  }

  template <typename SetPx>
  void bresenham(int r0, int c0, int r1, int c1, SetPx&& set_px) {
    const int dr = std::abs(r1 - r0), dc = std::abs(c1 - c0);
    const int sr = r0 < r1 ? 1 : -1, sc = c0 < c1 ? 1 : -1;
    int err = (dc > dr ? dc : -dr) / 2;
    int r = r0, c = c0;
    for (;;) {
      thick(r, c, set_px);
      if (r == r1 && c == c1) break;
      const int e2 = err;
      if (e2 > -dc) {
        err -= dr;
        c += sc;
      }
      if (e2 < dr) {
        err += dc;
        r += sr;
      }
    }
  }

  // Returns true when at least one pixel of the polyline landed in bounds.
  template <typename SetPx>
  bool polyline(const std::vector<Vec2>& pts, const RasterParams& rp, SetPx&& set_px) {
    bool drawn = false;
    if (pts.size() == 1) {
      const PixelHit h = pixel_of(pts[0], rp);
      if (h.in_bounds) {
        thick(h.row, h.col, set_px);
        drawn = true;
      }
      return drawn;
    }
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      Pt a = continuous_pixel(pts[i], rp);
      Pt b = continuous_pixel(pts[i + 1], rp);
      if (!clip_segment(a, b, rp)) continue;
      bresenham(static_cast<int>(std::lround(a.row)), static_cast<int>(std::lround(a.col)),
                static_cast<int>(std::lround(b.row)), static_cast<int>(std::lround(b.col)),
                set_px);
      drawn = true;
    }
    return drawn;
  }

  // Even-odd scanline fill over pixel centers, in continuous pixel space.
  template <typename SetPx>
  void fill_polygon(const std::vector<Vec2>& poly, const RasterParams& rp, SetPx&& set_px) {
    if (poly.size() < 3) return;
    std::vector<Pt> v;
    v.reserve(poly.size());
    for (const auto& p : poly) v.push_back(continuous_pixel(p, rp));
    if (v.front().row == v.back().row && v.front().col == v.back().col) v.pop_back();
    if (v.size() < 3) return;
    double rmin = v[0].row, rmax = v[0].row;
    for (const auto& p : v) {
      rmin = std::min(rmin, p.row);
      rmax = std::max(rmax, p.row);
    }
    const int r0 = std::max(0, static_cast<int>(std::ceil(rmin)));
    const int r1 = std::min(rp.height - 1, static_cast<int>(std::floor(rmax)));
    for (int r = r0; r <= r1; ++r) {
      const double y = r;
      std::vector<double> xs;
      for (std::size_t i = 0; i < v.size(); ++i) {
        const Pt& a = v[i];
        const Pt& b = v[(i + 1) % v.size()];
        // half-open rule: count an edge when it spans the scanline
        if ((a.row <= y && b.row > y) || (b.row <= y && a.row > y)) {
          const double t = (y - a.row) / (b.row - a.row);
          xs.push_back(a.col + t * (b.col - a.col));
        }
      }
      std::sort(xs.begin(), xs.end());
      for (std::size_t i = 0; i + 1 < xs.size(); i += 2) {
        const int c0 = std::max(0, static_cast<int>(std::ceil(xs[i])));
        const int c1 = std::min(rp.width - 1, static_cast<int>(std::floor(xs[i + 1])));
        for (int c = c0; c <= c1; ++c) set_px(r, c);
      }
    }
  }
};

std::vector<Vec2> waypoints_of(const traj::Trajectory& t) {
  std::vector<Vec2> pts;
  pts.reserve(t.points.size());
  for (std::size_t i = 0; i < t.points.size(); ++i) pts.push_back(t.pos(i));
  return pts;
}

Rgb color_of(const traj::Trajectory& t) {
  if (t.agent_id == "ego") return kEgoColor;
  return t.category == AgentCategory::kPedestrian ? kPedestrianColor : kVehicleColor;
}

}  // namespace

PixelHit pixel_of(Vec2 meters, const RasterParams& rp) {
  const Pt p = continuous_pixel(meters, rp);
  const long r = std::lround(p.row);
  const long c = std::lround(p.col);
  PixelHit h;
  h.in_bounds = r >= 0 && r < rp.height && c >= 0 && c < rp.width;
  h.row = static_cast<int>(std::clamp(r, -(1L << 30), 1L << 30));
  h.col = static_cast<int>(std::clamp(c, -(1L << 30), 1L << 30));
  return h;
}

Vec2 meters_of(int row, int col, const RasterParams& rp) {
  return {(0.5 * rp.height - row) * rp.meters_per_pixel,
          (0.5 * rp.width - col) * rp.meters_per_pixel};
}

BevRaster BevRaster::blank(const RasterParams& rp) {
  BevRaster r;
  r.width = rp.width;
  r.height = rp.height;
  r.meters_per_pixel = rp.meters_per_pixel;
  r.data.assign(3u * rp.width * rp.height, 0);
  return r;
}

BevRaster rasterize_trajectories(const std::vector<traj::Trajectory>& trajs,
                                 const RasterParams& rp, std::vector<std::string>* warnings) {
  BevRaster img = BevRaster::blank(rp);
  Painter painter{img};
  auto draw = [&](const traj::Trajectory& t) {
    const Rgb color = color_of(t);
    const bool drawn = painter.polyline(waypoints_of(t), rp, [&](int r, int c) {
      painter.set_rgb(r, c, color);
    });
    if (!drawn && warnings)
      warnings->push_back("trajectory '" + t.agent_id + "' lies entirely outside the raster extent");
  };
  for (const auto& t : trajs)
    if (t.agent_id != "ego") draw(t);
  for (const auto& t : trajs)
    if (t.agent_id == "ego") draw(t);  // ego last, on top
  return img;
}

BevRaster rasterize_hdmap(const hdmap::HdMap& map, const RasterParams& rp, DrawStats* stats) {
  BevRaster img = BevRaster::blank(rp);
  Painter painter{img, stats};
  for (const auto& poly : map.crossings) {
    painter.fill_polygon(poly, rp, [&](int r, int c) { painter.set_channel(r, c, 1); });
    painter.polyline(poly, rp, [&](int r, int c) { painter.set_channel(r, c, 1); });
  }
  for (const auto& pl : map.dividers)
    painter.polyline(pl, rp, [&](int r, int c) { painter.set_channel(r, c, 2); });
  for (const auto& pl : map.boundaries)
    painter.polyline(pl, rp, [&](int r, int c) { painter.set_channel(r, c, 0); });
  return img;
}

bool draw_polyline_pixels(BevRaster& img, const std::vector<Vec2>& points_colrow, Rgb color) {
  if (points_colrow.empty()) return false;
  Painter painter{img, nullptr};
  const RasterParams rp{img.width, img.height, img.meters_per_pixel};
  bool drawn = false;
  auto set_px = [&](int r, int c) {
    if (r >= 0 && r < img.height && c >= 0 && c < img.width) drawn = true;
    painter.set_rgb(r, c, color);
  };
  if (points_colrow.size() == 1) {
    const int r = static_cast<int>(std::lround(points_colrow[0].y));
    const int c = static_cast<int>(std::lround(points_colrow[0].x));
    if (r >= 0 && r < img.height && c >= 0 && c < img.width) painter.thick(r, c, set_px);
    return drawn;
  }
  for (std::size_t i = 0; i + 1 < points_colrow.size(); ++i) {
    Pt a{points_colrow[i].y, points_colrow[i].x};
    Pt b{points_colrow[i + 1].y, points_colrow[i + 1].x};
    if (!clip_segment(a, b, rp)) continue;
    painter.bresenham(static_cast<int>(std::lround(a.row)), static_cast<int>(std::lround(a.col)),
                      static_cast<int>(std::lround(b.row)), static_cast<int>(std::lround(b.col)),
                      set_px);
  }
  return drawn;
}

void write_ppm(const BevRaster& raster, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("write_ppm: cannot open " + path);
  out << "P6\n" << raster.width << " " << raster.height << "\n255\n";
  std::vector<std::uint8_t> row(static_cast<std::size_t>(raster.width) * 3);
  for (int r = 0; r < raster.height; ++r) {
    for (int c = 0; c < raster.width; ++c) {
      row[3u * c + 0] = raster.at(0, r, c);
      row[3u * c + 1] = raster.at(1, r, c);
      row[3u * c + 2] = raster.at(2, r, c);
    }
    out.write(reinterpret_cast<const char*>(row.data()), static_cast<std::streamsize>(row.size()));
  }
  if (!out) throw std::runtime_error("write_ppm: short write to " + path);
}

BevRaster read_ppm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("read_ppm: cannot open " + path);
  auto next_token = [&in, &path]() {
    std::string tok;
    for (;;) {
      int c = in.get();
      if (c == EOF) throw std::runtime_error("read_ppm: truncated header in " + path);
      if (c == '#') {
        while (c != EOF && c != '\n') c = in.get();
        continue;
      }
      if (std::isspace(c)) {
        if (!tok.empty()) return tok;
        continue;
      }
      tok += static_cast<char>(c);
    }
  };
  if (next_token() != "P6") throw std::runtime_error("read_ppm: not a P6 file: " + path);
  const int w = std::stoi(next_token());
  const int h = std::stoi(next_token());
  const int maxval = std::stoi(next_token());
  if (w <= 0 || h <= 0 || maxval != 255)
    throw std::runtime_error("read_ppm: unsupported dimensions/maxval in " + path);
  BevRaster img;
  img.width = w;
  img.height = h;
  img.data.assign(3u * w * h, 0);
  std::vector<std::uint8_t> row(static_cast<std::size_t>(w) * 3);
  for (int r = 0; r < h; ++r) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(row.size()));
    if (in.gcount() != static_cast<std::streamsize>(row.size()))
      throw std::runtime_error("read_ppm: truncated pixel data in " + path);
    for (int c = 0; c < w; ++c) {
      img.at(0, r, c) = row[3u * c + 0];
      img.at(1, r, c) = row[3u * c + 1];
      img.at(2, r, c) = row[3u * c + 2];
    }
  }
  return img;
}

std::string raster_meta_json(const BevRaster& raster) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.bev_meta/1";
  j["width"] = raster.width;
  j["height"] = raster.height;
  j["meters_per_pixel"] = raster.meters_per_pixel;
  j["extent_x"] = {-0.5 * raster.height * raster.meters_per_pixel,
                   0.5 * raster.height * raster.meters_per_pixel};
  j["extent_y"] = {-0.5 * raster.width * raster.meters_per_pixel,
                   0.5 * raster.width * raster.meters_per_pixel};
  j["axes"] = "+x forward (up), +y left (left); origin at image center";
  j["channels"] = {"red: boundaries", "green: crossings", "blue: dividers"};
  return j.dump(2) + "\n";
}

std::string scene_svg(const std::vector<traj::Trajectory>& trajs, const hdmap::HdMap& map,
                      const RasterParams& rp) {
  std::string svg;
  auto emit_polyline = [&](const std::vector<Vec2>& pts, const char* color, const char* width) {
    if (pts.empty()) return;
    svg += "  <polyline fill=\"none\" stroke=\"";
    svg += color;
    svg += "\" stroke-width=\"";
    svg += width;
    svg += "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Pt p = continuous_pixel(pts[i], rp);
      if (i) svg += " ";
      svg += format_fixed(p.col, 2) + "," + format_fixed(p.row, 2);
    }
    svg += "\"/>\n";
  };
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " +
         std::to_string(rp.width) + " " + std::to_string(rp.height) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"#111\"/>\n";
  for (const auto& poly : map.crossings) {
    svg += "  <polygon fill=\"rgba(0,255,0,0.35)\" stroke=\"#0f0\" points=\"";
    const std::size_t n = poly.size() > 1 && poly.front() == poly.back() ? poly.size() - 1
                                                                         : poly.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Pt p = continuous_pixel(poly[i], rp);
      if (i) svg += " ";
      svg += format_fixed(p.col, 2) + "," + format_fixed(p.row, 2);
    }
    svg += "\"/>\n";
  }
  for (const auto& pl : map.dividers) emit_polyline(pl, "#00f", "2");
  for (const auto& pl : map.boundaries) emit_polyline(pl, "#f00", "2");
  for (const auto& t : trajs) {
    const Rgb c = color_of(t);
    char color[8];
    std::snprintf(color, sizeof(color), "#%02x%02x%02x", c.r, c.g, c.b);
    emit_polyline(waypoints_of(t), color, "2");
    const Pt start = continuous_pixel(t.pos(0), rp);
    svg += "  <circle cx=\"" + format_fixed(start.col, 2) + "\" cy=\"" +
           format_fixed(start.row, 2) + "\" r=\"4\" fill=\"" + color + "\"/>\n";
  }
  svg += "</svg>\n";
  return svg;
}

}  // namespace scenforge::bev
