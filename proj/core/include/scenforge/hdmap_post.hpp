#pragma once

// BEV-to-camera post-processing: extract per-class binary masks from a road
// raster, thin them to 1 px skeletons, trace the skeletons into pixel
// polylines, and project road geometry into the six surround camera views.
//
// The skeletonizer is the classic two-subiteration thinning scheme run to a
// fixpoint (so it is idempotent by construction).  That scheme erases
// isolated 2x2 blocks entirely; to keep the component count stable, any
// input component that lost every pixel gets its topmost-leftmost pixel
// restored afterwards.  Restored pixels are isolated, which no thinning pass
// ever deletes, so idempotence is preserved.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "scenforge/bev_raster.hpp"
#include "scenforge/common.hpp"

namespace scenforge::post {

struct BinaryMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // row-major, 0 or 1

  static BinaryMask blank(int width, int height) {
    return {width, height, std::vector<std::uint8_t>(static_cast<std::size_t>(width) * height, 0)};
  }
  std::uint8_t at(int row, int col) const {
    return data[static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)];
  }
  std::uint8_t& at(int row, int col) {
    return data[static_cast<std::size_t>(row) * width + static_cast<std::size_t>(col)];
  }
  // Out-of-image reads are background.
  std::uint8_t get(int row, int col) const {
    if (row < 0 || row >= height || col < 0 || col >= width) return 0;
    return at(row, col);
  }
  std::size_t count() const;
  friend bool operator==(const BinaryMask&, const BinaryMask&) = default;
};

// Per-channel masks (channel value >= threshold), in raster channel order:
// [0]=boundaries, [1]=crossings, [2]=dividers.
std::array<BinaryMask, 3> binarize(const bev::BevRaster& raster, std::uint8_t threshold = 128);

// 1 px thinning; see the header comment.  Output pixels are a subset of the
// input except for the component-restoration rule, which only ever re-raises
// pixels that were set in the input.
BinaryMask skeletonize(const BinaryMask& mask);

struct Pixel {
  int row = 0;
  int col = 0;
  friend bool operator==(const Pixel&, const Pixel&) = default;
};

using PixelPolyline = std::vector<Pixel>;

// Walks a skeleton into polylines: open chains start/end at endpoints or
// junction pixels (3+ neighbors); junction pixels may appear in several
// polylines but every non-junction pixel appears exactly once; closed loops
// are emitted with the first pixel repeated at the end; isolated pixels
// become 1-point polylines.  Results are ordered by their starting pixel
// (topmost, then leftmost).
std::vector<PixelPolyline> trace_polylines(const BinaryMask& skeleton);

// ---- camera rig ----

struct CameraView {
  std::string name;  // FL, F, FR, BR, B, BL
  int width = 448;
  int height = 256;
  double fx = 500.0, fy = 500.0, cx = 224.0, cy = 128.0;
  Mat3 rotation;     // world -> camera
  Vec3 translation;  // world -> camera: p_cam = R * p_world + t
  friend bool operator==(const CameraView&, const CameraView&) = default;
};

struct CameraRig {
  std::vector<CameraView> views;  // fixed order: FL, F, FR, BR, B, BL
  friend bool operator==(const CameraRig&, const CameraRig&) = default;
};

inline constexpr std::array<const char*, 6> kViewOrder{"FL", "F", "FR", "BR", "B", "BL"};

// Six cameras at 1.6 m height over the ego origin, yawed at
// FL +60, F 0, FR -60, BL +120, B 180, BR -120 degrees; optical axis
// horizontal.  Camera frame: x right, y down, z forward.
CameraRig default_rig();

// Rig round trip ("scenforge.rig/1").
std::string rig_to_json(const CameraRig& rig);
CameraRig rig_from_json(const std::string& text);  // throws std::runtime_error

// Checks view count, the expected name set in order, image/intrinsic sanity,
// and rotation orthonormality within 1e-9.  Throws std::invalid_argument.
void validate_rig(const CameraRig& rig);

struct ProjectedPoint {
  double u = 0.0;
  double v = 0.0;
  bool visible = false;    // inside the image rectangle
  bool chain_start = false;  // first point after a near-plane gap
};

struct ProjectedPolyline {
  std::string view;
  std::string map_class;  // boundary / divider / crossing; tagged by callers
  std::vector<ProjectedPoint> points;
};

// Perspective projection of a world polyline into one view.  Segments
// crossing the near plane are clipped against it (retained depth is strictly
// greater than `near`); points behind it are dropped, and the first point
// after each gap is flagged chain_start.  Off-image points are retained with
// visible=false so consumers can clip in image space.
ProjectedPolyline project_to_view(const std::vector<Vec3>& world, const CameraView& view,
                                  double near = 0.1);

// Single-point helper: camera-space z (depth) plus image coordinates.
// No near-plane handling; callers decide what to do with small/negative z.
struct CamPoint {
  double u = 0.0, v = 0.0, z = 0.0;
};
CamPoint project_point(Vec3 world, const CameraView& view);

// Ground-plane lift (z = 0) and uniform densification to `max_step` meters.
std::vector<Vec3> lift_ground(const std::vector<Vec2>& pts);
std::vector<Vec2> densify(const std::vector<Vec2>& pts, double max_step);

}  // namespace scenforge::post
