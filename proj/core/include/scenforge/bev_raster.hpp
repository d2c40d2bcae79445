#pragma once

// Bird's-eye-view rasterization.  World frame: +x forward (up in the image),
// +y left (left in the image); the ego origin sits at the image center.
// pixel_of rounds half away from zero and flags out-of-range results instead
// of clamping them.  Rasters are planar uint8 (channel, row, col) with three
// channels; strokes are 2 px wide (each Bresenham pixel dilated one step
// right and down).
//
// Color conventions:
//   trajectories: ego orange (255,165,0), vehicles yellow (255,255,0),
//                 pedestrians cyan (0,255,255) - drawn last to first so the
//                 ego ends up on top;
//   road map:     boundaries red -> channel 0, crossings green -> channel 1,
//                 dividers blue -> channel 2; map classes write only their
//                 own channel, so overlaps keep every class recoverable.

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "scenforge/common.hpp"
#include "scenforge/hdmap.hpp"
#include "scenforge/trajectory.hpp"

namespace scenforge::bev {

struct RasterParams {
  int width = 512;
  int height = 512;
  double meters_per_pixel = 0.2;
};

struct PixelHit {
  int row = 0;
  int col = 0;
  bool in_bounds = false;
};

PixelHit pixel_of(Vec2 meters, const RasterParams& rp);
Vec2 meters_of(int row, int col, const RasterParams& rp);  // pixel center

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

inline constexpr Rgb kEgoColor{255, 165, 0};
inline constexpr Rgb kVehicleColor{255, 255, 0};
inline constexpr Rgb kPedestrianColor{0, 255, 255};
inline constexpr Rgb kBoundaryColor{255, 0, 0};
inline constexpr Rgb kCrossingColor{0, 255, 0};
inline constexpr Rgb kDividerColor{0, 0, 255};

struct BevRaster {
  int width = 0;
  int height = 0;
  double meters_per_pixel = 0.2;
  std::vector<std::uint8_t> data;  // planar, 3 * height * width

  static BevRaster blank(const RasterParams& rp);
  std::uint8_t at(int ch, int row, int col) const {
    return data[static_cast<std::size_t>(ch) * height * width +
                static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)];
  }
  std::uint8_t& at(int ch, int row, int col) {
    return data[static_cast<std::size_t>(ch) * height * width +
                static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)];
  }
  friend bool operator==(const BevRaster&, const BevRaster&) = default;
};

// Unique pixels touched per map class (fill and outline counted once).
struct DrawStats {
  std::size_t boundary_px = 0;
  std::size_t crossing_px = 0;
  std::size_t divider_px = 0;
};

// Trajectories entirely outside the raster extent are skipped and reported
// in `warnings` (when given) instead of being clamped into view.
BevRaster rasterize_trajectories(const std::vector<traj::Trajectory>& trajs,
                                 const RasterParams& rp,
                                 std::vector<std::string>* warnings = nullptr);

BevRaster rasterize_hdmap(const hdmap::HdMap& map, const RasterParams& rp,
                          DrawStats* stats = nullptr);

// Draws a 2-px-thick polyline whose points are already continuous image
// coordinates (x = column, y = row), overwriting all three channels with
// `color`; used to stamp projected conditions into camera-sized images.
// Segments are clipped to the image; returns true when at least one pixel
// landed in bounds.
bool draw_polyline_pixels(BevRaster& img, const std::vector<Vec2>& points_colrow, Rgb color);

// Binary PPM (P6) with a JSON sidecar describing the geo referencing.
void write_ppm(const BevRaster& raster, const std::string& path);
BevRaster read_ppm(const std::string& path);  // throws std::runtime_error
std::string raster_meta_json(const BevRaster& raster);

// Debug vector rendering of the same scene (map plus trajectories).
std::string scene_svg(const std::vector<traj::Trajectory>& trajs, const hdmap::HdMap& map,
                      const RasterParams& rp);

}  // namespace scenforge::bev
