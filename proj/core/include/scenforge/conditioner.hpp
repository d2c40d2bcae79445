#pragma once
// Multi-view condition assembly: 3D boxes derived from agent trajectories,
// per-view projection of boxes and lane skeletons, the unified wide-image
// layout (all camera views concatenated side by side), and the task masks
// that select which (frame, view) cells act as observed conditioning.
//
// World geometry is re-expressed in the ego frame of each clip frame before
// projection (the cameras ride on the ego vehicle), so conditions shift
// consistently as the ego moves.

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scenforge/bev_raster.hpp"
#include "scenforge/common.hpp"
#include "scenforge/dsl.hpp"
#include "scenforge/hdmap.hpp"
#include "scenforge/hdmap_post.hpp"
#include "scenforge/trajectory.hpp"

namespace scenforge::mv {

// Category → (length, width, height) in meters.  Keys are the category
// names used throughout ("vehicle", "pedestrian"); the table is data so real
// per-class dimensions can be injected from a file.
struct SizeTable {
  std::map<std::string, Vec3> entries;
  static SizeTable defaults();  // vehicle 4.6 x 1.95 x 1.73, pedestrian 0.7 x 0.7 x 1.7
  // Throws std::invalid_argument when the category is absent or non-positive.
  Vec3 lookup(AgentCategory cat) const;
};
std::string size_table_to_json(const SizeTable& table);
SizeTable size_table_from_json(const std::string& text);  // throws std::runtime_error

struct Box3D {
  std::string agent_id;
  AgentCategory category = AgentCategory::kVehicle;
  int frame = 0;     // waypoint index
  Vec3 center;       // ground-contact rule: center.z = size.z / 2
  Vec3 size;         // (length along heading, width, height), all > 0
  double yaw = 0.0;  // heading of the source trajectory at `frame`, exactly
  friend bool operator==(const Box3D&, const Box3D&) = default;
};

// One box per non-ego agent per requested frame (the ego is the camera
// platform and gets no box), ordered (frame, agent).  Throws
// std::out_of_range for frame indices past the trajectory end and
// std::invalid_argument for categories missing from the table.
std::vector<Box3D> boxes_from_trajectories(const std::vector<traj::Trajectory>& trajs,
                                           const SizeTable& table, std::span<const int> frames);

// The 8 corners with yaw applied about the center.  Fixed order: bottom face
// then top face, each front-left, front-right, rear-right, rear-left.
std::array<Vec3, 8> box_corners(const Box3D& box);

struct BoxPolygon {
  std::string view;
  std::string agent_id;
  AgentCategory category = AgentCategory::kVehicle;
  int frame = 0;
  // Convex hull in image coordinates (x = column, y = row), counterclockwise
  // for y-down axes, starting at the lexicographically smallest vertex; the
  // first point is not repeated.
  std::vector<Vec2> hull;
  bool fully_visible = false;  // all corners in front of the camera and inside the image
};

// Projects the corners with camera depth > near and returns their convex
// hull; a box with every corner at depth <= near is culled (nullopt).
std::optional<BoxPolygon> project_box(const Box3D& box, const post::CameraView& view,
                                      double near = 0.1);

// Planar frame-major 8-bit image stack: frames x 3 x height x width.
struct ImageSeq {
  int frames = 0;
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  static ImageSeq blank(int frames, int height, int width);
  std::uint8_t at(int t, int ch, int row, int col) const {
    return data[((static_cast<std::size_t>(t) * 3 + ch) * height + row) * width + col];
  }
  std::uint8_t& at(int t, int ch, int row, int col) {
    return data[((static_cast<std::size_t>(t) * 3 + ch) * height + row) * width + col];
  }
  friend bool operator==(const ImageSeq&, const ImageSeq&) = default;
};

struct ViewImageSeq {
  std::string view;
  ImageSeq seq;
  friend bool operator==(const ViewImageSeq&, const ViewImageSeq&) = default;
};

// Horizontal concatenation into one wide image stack.  Inputs must arrive
// keyed and ordered exactly FL, F, FR, BR, B, BL with identical dimensions;
// anything else throws std::invalid_argument.  Six 448-wide views → 2688.
ImageSeq unify_views(const std::vector<ViewImageSeq>& views);
// Exact inverse; the unified width must divide evenly by the view count.
std::vector<ViewImageSeq> split_views(const ImageSeq& unified);

enum class Task { kFuturePrediction, kFrontOutpaint, kFullGeneration };
std::string to_string(Task task);
Task task_from_string(const std::string& name);  // throws std::invalid_argument

// Binary mask over (frame, view) cells; 1 = observed/conditioning region,
// 0 = to-be-generated.
struct TaskMask {
  int frames = 0;
  int views = 0;
  std::vector<std::uint8_t> cells;  // frame-major
  std::uint8_t at(int frame, int view) const {
    return cells[static_cast<std::size_t>(frame) * views + view];
  }
  std::uint8_t& at(int frame, int view) {
    return cells[static_cast<std::size_t>(frame) * views + view];
  }
  std::size_t ones() const;
  friend bool operator==(const TaskMask&, const TaskMask&) = default;
};

// future_prediction → frame 0 observed in every view; front_outpaint → the F
// view observed in every frame; full_generation → nothing observed.
// Requires frames >= 1 and views == 6 (throws std::invalid_argument).
TaskMask make_mask(Task task, int frames, int views);

struct BundleOptions {
  int clip_frames = 8;        // frames per clip (waypoints are at 4 Hz)
  int clip_start = 0;         // first waypoint index of the clip
  double near = 0.1;          // near-plane depth, m
  double densify_step = 0.5;  // lane polyline resampling before projection, m
  std::uint8_t threshold = 128;
  SizeTable size_table = SizeTable::defaults();
  bev::RasterParams raster;   // BEV stage feeding the lane skeleton chain
};

struct ConditionBundle {
  std::string scenario_name;
  std::uint64_t seed = 0;
  std::vector<std::string> environment;  // sorted tags
  Task task = Task::kFullGeneration;
  int clip_start = 0;
  std::vector<double> timestamps;  // seconds, one per clip frame
  ImageSeq hdmap;                  // unified lane conditions, T x 3 x H x (K*W)
  ImageSeq boxes;                  // unified box conditions, same shape
  TaskMask mask;
  // Vector-form conditions for rendering and validation, indexed [clip frame].
  std::vector<std::vector<post::ProjectedPolyline>> lanes;
  std::vector<std::vector<BoxPolygon>> box_polygons;
};

// Long-video chaining: the next clip starts on this clip's final frame, so
// consecutive clips share exactly one frame and their timestamps abut.
int next_clip_start(const ConditionBundle& bundle);

// Full condition assembly for one clip.  The lane chain runs
// rasterize → binarize → skeletonize → trace → pixels-to-meters, then per
// frame: ego-frame transform → densify → ground lift → per-view projection →
// 2-px strokes.  Boxes are derived per frame, transformed, projected, and
// drawn as convex outlines.  Throws std::invalid_argument /
// std::out_of_range on inconsistent inputs.
ConditionBundle build_bundle(const dsl::ScenarioSpec& spec, const traj::TrajectorySet& trajs,
                             const hdmap::HdMap& map, const post::CameraRig& rig, Task task,
                             const BundleOptions& opt = {});

// Directory persistence: hdmap_cond_###.ppm and boxes_cond_###.ppm per clip
// frame (unified width), mask.json, meta.json, and conditions.json (the
// vector-form sidecar).  Files are written atomically.
void write_bundle(const ConditionBundle& bundle, const std::string& dir);
ConditionBundle read_bundle(const std::string& dir);  // throws std::runtime_error

}  // namespace scenforge::mv
