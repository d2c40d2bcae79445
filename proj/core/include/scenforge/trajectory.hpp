#pragma once

// Agent trajectory generation.  Every maneuver produces a fixed-length
// waypoint sequence on a shared clock (num_points samples, t_inter seconds
// apart) by Euler-stepping a unicycle model:
//
//     pos(t) = pos(t-1) + vel * t_inter * (cos yaw, sin yaw)
//
// followed by a stochastic yaw/speed update drawn from maneuver-specific
// ranges.  Waypoint t stores the post-update yaw and speed, i.e. the values
// that produce pos(t+1).  All randomness flows through an explicit Rng, and
// every agent draws from its own sub-stream derived from (scenario seed,
// agent id, attempt), so scenes are reproducible bit for bit and inserting an
// agent never disturbs the others.
//
// The cut-in controller is the behavioral reference for lateral maneuvers:
// three phases (approach, merge, hold) selected by the remaining lateral
// error, with a crossing flag that latches once the agent crosses the target
// lane center and disables the approach/merge steering from then on.

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scenforge/common.hpp"
#include "scenforge/dsl.hpp"

namespace scenforge::traj {

struct Waypoint {
  double x = 0.0;
  double y = 0.0;
  double yaw = 0.0;  // radians, world frame; +x forward, +y left
  double t = 0.0;    // seconds since scene start
  friend bool operator==(const Waypoint&, const Waypoint&) = default;
};

struct Trajectory {
  std::string agent_id;
  AgentCategory category = AgentCategory::kVehicle;
  std::vector<Waypoint> points;
  std::vector<double> speeds;  // speeds[t] produces points[t+1]
  Vec2 pos(std::size_t i) const { return {points[i].x, points[i].y}; }
  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

struct KernelParams {
  int num_points = 80;       // waypoints per trajectory
  double t_inter = 0.25;     // seconds between waypoints (4 Hz)
  Interval v_range{2.0, 15.0};          // vehicle speed envelope, m/s
  Interval y_range{3.0, 4.0};           // lateral spawn offset magnitude, m
  Interval forward_range{-0.087266462599716474, 0.087266462599716474};  // +-5 deg
  double safe_dis = 10.0;    // collision-avoidance trigger distance, m
  double min_separation = 2.0;  // scene-level center distance floor, m
  int max_attempts = 8;      // per-agent respawn budget during scene repair
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Collision-avoidance steering bias.  Finds the nearest other agent at
// `step` (ties broken by lowest index in `others`); if it is closer than
// safe_dis, returns default_range shifted so its midpoint steers away from
// that agent: bearing >= 0 (left or dead ahead, measured against the current
// yaw) steers right, bearing < 0 steers left.  The shift magnitude is
// max(|midpoint|, half-width) of the default range, or 0.05 rad when the
// default range is centered and degenerate.  With no agent inside safe_dis
// the default range is returned unchanged.  Phase clamps still apply after
// the draw.  self.points[step] and every others[i]->points[step] must exist.
Interval update_yaw(double yaw, const Interval& default_range, double safe_dis,
                    const Trajectory& self, std::span<const Trajectory* const> others,
                    int step);

// The published cut-in controller.  Spawns 0..10 m ahead of the target with
// a lateral offset drawn from y_range on a random side, then approaches,
// merges into the target's lane, and holds, while keeping its speed at least
// 0.5 m/s above the target's current speed at every step.
Trajectory cut_in(const KernelParams& kp, const Trajectory& target, double safe_dis,
                  std::span<const Trajectory* const> others, const std::string& agent_id,
                  Rng& rng);

// Dispatch by function name; applies registry defaults for missing
// parameters.  `context` holds previously generated trajectories for target
// resolution and avoidance.  Throws ScenarioError for unresolvable targets.
Trajectory generate_maneuver(const dsl::ManeuverCall& call, const KernelParams& kp,
                             const std::vector<Trajectory>& context,
                             const std::string& agent_id, AgentCategory category,
                             bool is_ego, Rng& rng);

// Generates every agent in dependency order (targets before the agents that
// reference them; ego first among ready nodes, then declaration order) and
// repairs pairwise separation violations by re-drawing the later-generated
// offender from a fresh sub-stream, up to max_attempts per agent.  The ego
// trajectory is never re-drawn.  Returns [ego, agents in declaration order].
// Throws ScenarioError on dependency cycles or when repair fails.
std::vector<Trajectory> generate_scene(const dsl::ScenarioSpec& spec, const KernelParams& kp);

// Smallest center distance between any two trajectories at any timestep.
double min_pairwise_distance(const std::vector<Trajectory>& trajs);

// JSON round trip for trajectory sets ("scenforge.trajectories/1").
std::string trajectories_to_json(const std::vector<Trajectory>& trajs, double t_inter);
struct TrajectorySet {
  std::vector<Trajectory> trajs;
  double t_inter = 0.25;
};
TrajectorySet trajectories_from_json(const std::string& text);  // throws std::runtime_error

}  // namespace scenforge::traj
