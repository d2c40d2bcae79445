#pragma once

// Road network synthesis.  The ego trajectory defines the road: its smoothed
// path is the corridor centerline, lane dividers run at whole-lane offsets on
// both sides, boundaries run at the outermost offset with a gentle sinusoidal
// waviness, and pedestrian crossings are placed where the scene implies a
// junction (sharp ego heading change, or a pedestrian entering the corridor).
// validate() recomputes everything it checks from the trajectories alone, so
// it works as an independent oracle for synthesize().

#include <string>
#include <vector>

#include "scenforge/common.hpp"
#include "scenforge/trajectory.hpp"

namespace scenforge::hdmap {

using Polyline = std::vector<Vec2>;

enum class MapClass { kBoundary, kCrossing, kDivider };

struct HdMap {
  std::vector<Polyline> boundaries;  // outer road edges
  std::vector<Polyline> dividers;    // lane lines between adjacent lanes
  std::vector<Polyline> crossings;   // closed polygons (first point repeated)
  double lane_width = 3.5;           // actual (jittered) width used
  int lanes_per_side = 2;
  friend bool operator==(const HdMap&, const HdMap&) = default;
};

struct SynthOptions {
  double lane_width = 3.5;
  int lanes_per_side = 2;
  double width_jitter = 0.2;          // one +- uniform draw per map; 0 disables
  double waviness_amp = 0.25;         // boundary waviness amplitude ceiling, m
  double waviness_wavelength = 40.0;  // meters along the road
  double crossing_half_length = 1.5;  // crossing extent along the road, half
  double crossing_margin = 0.5;       // lateral overhang beyond the boundary
};

// Requires a trajectory with agent id "ego"; throws std::invalid_argument
// otherwise.  Offset curves drop stations where the offset would fold over
// (1 - d*curvature below 5%), splitting the polyline there.
HdMap synthesize(const std::vector<traj::Trajectory>& trajs, const SynthOptions& opt, Rng& rng);

struct Violation {
  std::string rule;  // "corridor" | "offset-order" | "crossing-location"
  std::string detail;
};

// Geometric consistency between a map and the trajectories it was built for:
//   corridor          every vehicle waypoint lies between the boundary
//                     offset profiles of its side
//   offset-order      per side, every boundary sample lies strictly farther
//                     out than every divider sample
//   crossing-location every crossing sits within 15 m of a junction implied
//                     by the trajectories
// An empty result means the map is consistent.
std::vector<Violation> validate(const HdMap& map, const std::vector<traj::Trajectory>& trajs);

// Canonical JSON round trip ("scenforge.hdmap/1"); equal maps serialize to
// identical bytes.
std::string map_to_json(const HdMap& map);
HdMap map_from_json(const std::string& text);  // throws std::runtime_error

}  // namespace scenforge::hdmap
