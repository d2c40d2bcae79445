#include "scenforge/bev_raster.hpp"

#include <cmath>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "scenforge/dsl.hpp"
#include "scenforge/hdmap.hpp"
#include "scenforge/hdmap_post.hpp"
#include "scenforge/trajectory.hpp"
#include "test_util.hpp"

using namespace scenforge;
using namespace scenforge::bev;

namespace scenforge::bev {
// strict ordering so Rgb can live in a std::set (test-local)
inline bool operator<(const Rgb& a, const Rgb& b) {
  if (a.r != b.r) return a.r < b.r;
  if (a.g != b.g) return a.g < b.g;
  return a.b < b.b;
}
}  // namespace scenforge::bev

namespace {

traj::Trajectory straight(const std::string& id, AgentCategory cat, double y, int n = 80) {
  traj::Trajectory t;
  t.agent_id = id;
  t.category = cat;
  for (int i = 0; i < n; ++i) t.points.push_back({2.5 * i, y, 0.0, 0.25 * i});
  t.speeds.assign(static_cast<std::size_t>(n), 10.0);
  return t;
}

Rgb pixel_color(const BevRaster& r, int row, int col) {
  return {r.at(0, row, col), r.at(1, row, col), r.at(2, row, col)};
}

std::set<Rgb> palette(const BevRaster& r) {
  std::set<Rgb> out;
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col) {
      Rgb c = pixel_color(r, row, col);
      out.insert(c);
    }
  return out;
}

}  // namespace

TEST_CASE("pixel_of maps world axes onto image axes as documented") {
  RasterParams rp;
  auto c = pixel_of({0.0, 0.0}, rp);
  CHECK(c.in_bounds);
  CHECK(c.row == 256);
  CHECK(c.col == 256);
  auto fwd = pixel_of({51.2, 0.0}, rp);  // forward = up
  CHECK(fwd.in_bounds);
  CHECK(fwd.row == 0);
  CHECK(fwd.col == 256);
  auto left = pixel_of({0.0, 51.2}, rp);  // +y = image left
  CHECK(left.in_bounds);
  CHECK(left.row == 256);
  CHECK(left.col == 0);
  auto behind = pixel_of({-51.2, 0.0}, rp);  // rounds to row 512: out of range
  CHECK(!behind.in_bounds);
  CHECK(behind.row == 512);
}

TEST_CASE("meters_of is the exact inverse of pixel_of on every pixel center") {
  RasterParams rp;
  for (int row = 0; row < rp.height; ++row)
    for (int col = 0; col < rp.width; ++col) {
      const Vec2 m = meters_of(row, col, rp);
      const auto back = pixel_of(m, rp);
      REQUIRE(back.in_bounds);
      REQUIRE(back.row == row);
      REQUIRE(back.col == col);
    }
}

TEST_CASE("a straight ego paints an orange two-pixel stroke up the center") {
  const auto ego = straight("ego", AgentCategory::kVehicle, 0.0);
  const auto r = rasterize_trajectories({ego}, RasterParams{});
  // Column 256 (plus the 1-px dilation at 257) from the center row upward.
  int painted = 0;
  for (int row = 0; row <= 256; ++row) {
    if (pixel_color(r, row, 256) == kEgoColor) ++painted;
    // nothing outside the stroke columns
    CHECK(pixel_color(r, row, 200) == Rgb{0, 0, 0});
  }
  CHECK(painted >= 250);  // essentially the whole half-column
  auto colors = palette(r);
  CHECK(colors.count(kEgoColor) == 1);
  CHECK(colors.size() == 2);  // background + ego only
}

TEST_CASE("agent categories pick their documented colors") {
  const auto ego = straight("ego", AgentCategory::kVehicle, 0.0);
  const auto car = straight("a1", AgentCategory::kVehicle, 10.0);
  const auto ped = straight("p1", AgentCategory::kPedestrian, -10.0, 20);
  const auto r = rasterize_trajectories({ego, car, ped}, RasterParams{});
  auto colors = palette(r);
  CHECK(colors.count(kEgoColor) == 1);
  CHECK(colors.count(kVehicleColor) == 1);
  CHECK(colors.count(kPedestrianColor) == 1);
  CHECK(colors.size() == 4);
  // the vehicle at y=+10 m sits 50 px left of center: col 206
  CHECK(pixel_color(r, 256, 206) == kVehicleColor);
  CHECK(pixel_color(r, 256, 306) == kPedestrianColor);
}

TEST_CASE("the ego stroke wins overlaps because it is drawn last") {
  const auto ego = straight("ego", AgentCategory::kVehicle, 0.0);
  auto rival = straight("a1", AgentCategory::kVehicle, 0.0);  // same path
  const auto r = rasterize_trajectories({ego, rival}, RasterParams{});
  auto colors = palette(r);
  CHECK(colors.count(kEgoColor) == 1);
  CHECK(colors.count(kVehicleColor) == 0);  // fully covered by the ego
}

TEST_CASE("out-of-extent trajectories are skipped with a warning, not clamped") {
  const auto ego = straight("ego", AgentCategory::kVehicle, 0.0);
  auto far = straight("a9", AgentCategory::kVehicle, 500.0);  // off the raster
  std::vector<std::string> warnings;
  const auto r = rasterize_trajectories({ego, far}, RasterParams{}, &warnings);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("a9") != std::string::npos);
  auto colors = palette(r);
  CHECK(colors.count(kVehicleColor) == 0);
}

TEST_CASE("map classes paint only their own channels at exact offsets") {
  hdmap::HdMap map;
  map.lane_width = 3.5;
  map.lanes_per_side = 2;
  // Straight features spanning the visible extent.
  for (double off : {7.0, -7.0})
    map.boundaries.push_back({{-60.0, off}, {60.0, off}});
  for (double off : {3.5, -3.5})
    map.dividers.push_back({{-60.0, off}, {60.0, off}});
  map.crossings.push_back({{20.0, -8.0}, {23.0, -8.0}, {23.0, 8.0}, {20.0, 8.0}, {20.0, -8.0}});

  DrawStats stats;
  const auto r = rasterize_hdmap(map, RasterParams{}, &stats);

  // Boundary at y=+7 m -> col 221; divider at y=+3.5 -> col 238 (center row).
  const int col_b = pixel_of({0.0, 7.0}, RasterParams{}).col;
  const int col_d = pixel_of({0.0, 3.5}, RasterParams{}).col;
  CHECK(col_b == 221);  // 256 - 7.0/0.2
  CHECK(col_d == 239);  // 256 - 17.5 rounds half away from zero
  CHECK(r.at(0, 256, col_b) == 255);  // red channel only
  CHECK(r.at(1, 256, col_b) == 0);
  CHECK(r.at(2, 256, col_b) == 0);
  CHECK(r.at(2, 256, col_d) == 255);  // blue channel only
  CHECK(r.at(0, 256, col_d) == 0);
  CHECK(r.at(1, 256, col_d) == 0);

  // Green pixels appear only inside the crossing's bounding box (plus stroke).
  const auto tl = pixel_of({23.0, 8.0}, RasterParams{});
  const auto br = pixel_of({20.0, -8.0}, RasterParams{});
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col)
      if (r.at(1, row, col) != 0) {
        REQUIRE(row >= tl.row - 1);
        REQUIRE(row <= br.row + 2);
        REQUIRE(col >= tl.col - 1);
        REQUIRE(col <= br.col + 2);
      }

  // DrawStats agree with a direct count of nonzero pixels per channel.
  std::size_t red = 0, green = 0, blue = 0;
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col) {
      if (r.at(0, row, col) != 0) ++red;
      if (r.at(1, row, col) != 0) ++green;
      if (r.at(2, row, col) != 0) ++blue;
    }
  CHECK(stats.boundary_px == red);
  CHECK(stats.crossing_px == green);
  CHECK(stats.divider_px == blue);
  CHECK(red > 0);
  CHECK(green > 0);
  CHECK(blue > 0);
}

TEST_CASE("an empty map rasterizes to all zeros") {
  DrawStats stats;
  const auto r = rasterize_hdmap(hdmap::HdMap{}, RasterParams{}, &stats);
  for (std::uint8_t v : r.data) REQUIRE(v == 0);
  CHECK(stats.boundary_px == 0);
  CHECK(stats.crossing_px == 0);
  CHECK(stats.divider_px == 0);
}

TEST_CASE("a generated cut-in scene sweeps from its spawn lane to the ego lane") {
  auto pr = dsl::parse("scenario s\nseed 3\nego: forward\nagent a1: vehicle cut_in\n");
  REQUIRE(pr.ok());
  const auto trajs = traj::generate_scene(*pr.spec, traj::KernelParams{});
  // Wide raster (0.5 m/px) so the merge point ~60-100 m ahead stays in view.
  RasterParams rp;
  rp.meters_per_pixel = 0.5;
  const auto r = rasterize_trajectories(trajs, rp);
  int nearest = r.width, farthest = 0;
  for (int row = 0; row < r.height; ++row)
    for (int col = 0; col < r.width; ++col)
      if (pixel_color(r, row, col) == kVehicleColor) {
        nearest = std::min(nearest, std::abs(col - 256));
        farthest = std::max(farthest, std::abs(col - 256));
      }
  CHECK(nearest <= 2);   // merged stroke touches the ego lane band (<= 1 m)
  CHECK(farthest >= 6);  // spawn offset of at least 3 m is visible too
}

TEST_CASE("draw_polyline_pixels clips segments and reports visibility") {
  BevRaster img = BevRaster::blank(RasterParams{});
  // fully outside: nothing drawn
  CHECK(!draw_polyline_pixels(img, {{-50.0, -50.0}, {-10.0, -40.0}}, Rgb{9, 9, 9}));
  for (std::uint8_t v : img.data) REQUIRE(v == 0);
  // crossing segment: drawn and reported visible
  CHECK(draw_polyline_pixels(img, {{-10.0, 100.0}, {100.0, 100.0}}, Rgb{10, 20, 30}));
  CHECK(pixel_color(img, 100, 50) == Rgb{10, 20, 30});
}

TEST_CASE("PPM files round-trip the raster bytes exactly") {
  const auto ego = straight("ego", AgentCategory::kVehicle, 0.0);
  const auto car = straight("a1", AgentCategory::kVehicle, 5.0);
  const auto r = rasterize_trajectories({ego, car}, RasterParams{});
  testutil::TempDir tmp("bev_ppm");
  const std::string path = tmp.str() + "/t.ppm";
  write_ppm(r, path);
  const auto back = read_ppm(path);
  CHECK(back == r);
  // header is the binary P6 magic
  const std::string bytes = testutil::slurp(path);
  CHECK(bytes.substr(0, 2) == "P6");
  CHECK_THROWS_AS((void)read_ppm(tmp.str() + "/absent.ppm"), std::runtime_error);
}

TEST_CASE("raster metadata records the geo referencing") {
  const auto r = BevRaster::blank(RasterParams{});
  const std::string meta = raster_meta_json(r);
  CHECK(meta.find("scenforge.bev_meta/1") != std::string::npos);
  CHECK(meta.find("512") != std::string::npos);
  CHECK(raster_meta_json(r) == meta);
}

TEST_CASE("scene SVG output is deterministic and draws every layer") {
  auto pr = dsl::parse("scenario svg\nseed 5\nego: forward\nagent a1: vehicle cut_in\n");
  REQUIRE(pr.ok());
  const auto trajs = traj::generate_scene(*pr.spec, traj::KernelParams{});
  Rng rng(derive_seed(5, "hdmap"));
  const auto map = hdmap::synthesize(trajs, hdmap::SynthOptions{}, rng);
  const std::string svg = scene_svg(trajs, map, RasterParams{});
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("<polyline") != std::string::npos);
  CHECK(svg.find("#ffa500") != std::string::npos);  // ego stroke color
  CHECK(svg.find("#ffff00") != std::string::npos);  // vehicle stroke color
  CHECK(svg.find("#f00") != std::string::npos);     // boundaries
  CHECK(scene_svg(trajs, map, RasterParams{}) == svg);
}
