#include "scenforge/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "json.hpp"

namespace scenforge::traj {

namespace {

constexpr double kDeg1 = kPi / 180.0;
constexpr double kDeg2 = 2.0 * kPi / 180.0;
constexpr double kDeg03 = 0.3 * kPi / 180.0;
constexpr double kDeg10 = 10.0 * kPi / 180.0;
constexpr double kDeg20 = 20.0 * kPi / 180.0;

// Per-step yaw update: either a range to draw from plus clamp bounds, or a
// forced increment (constant-rate arcs) that bypasses drawing and avoidance.
struct YawRule {
  Interval draw{0.0, 0.0};
  double lo = 0.0;
  double hi = 0.0;
  bool forced = false;
  double forced_delta = 0.0;
};

// Hold the heading near `center`: the perturbation always points back toward
// the center, and the result stays clamped to +-1 deg around it.
YawRule hold_rule(double yaw, double center) {
  YawRule r;
  r.draw = yaw >= center ? Interval{-kDeg03, 0.0} : Interval{0.0, kDeg03};
  r.lo = center - kDeg1;
  r.hi = center + kDeg1;
  return r;
}

// Lateral guidance toward a lane center.  Three phases by remaining error:
// approach (more than half the spawn offset away), merge (down to 0.5 m),
// hold.  The crossing latch permanently disables approach/merge once the
// lane center has been crossed, so the hard merge clamps can never push the
// agent back out of the lane.
struct LateralGuide {
  // Hold-phase steering gain: residual lane offset (m) to heading bias (rad),
  // saturated at +-2 deg so the hold stays gentle and cannot oscillate across
  // the center the way the +-10..20 deg merge clamps would.
  static constexpr double kHoldGain = kDeg2 / 0.25;

  double target_y = 0.0;
  double y_margin = 3.5;
  int mf = 1;  // +1 when spawned on the +y side of target_y
  bool flag = true;

  void observe_crossing(double y_prev, double y) {
    if ((y_prev - target_y) * (y - target_y) <= 0.0) flag = false;
  }

  bool settled(double y) const { return !flag || std::abs(y - target_y) <= 0.5; }

  YawRule rule(double y, double yaw) const {
    const double err = std::abs(y - target_y);
    if (err > 0.5 * y_margin && flag) {
      if (mf == 1) return {{-0.1, 0.0}, -kDeg20, 0.0};
      return {{0.0, 0.1}, 0.0, kDeg20};
    }
    if (err > 0.5 && flag) {
      if (mf == 1) return {{0.0, 0.1}, -kDeg20, -kDeg10};
      return {{-0.1, 0.0}, kDeg10, kDeg20};
    }
    // Settled: hold the heading, biased toward the residual lane offset so
    // per-step wander cannot accumulate into a lane departure.
    const double center = clamp(-kHoldGain * (y - target_y), -kDeg2, kDeg2);
    return hold_rule(yaw, center);
  }
};

struct Stepper {
  const KernelParams& kp;
  Rng& rng;
  std::span<const Trajectory* const> others;
  double avoid_dis = 0.0;  // <= 0 disables collision avoidance
  Trajectory traj;
  double vel = 0.0;

  void start(const std::string& id, AgentCategory cat, Vec2 p, double yaw0, double v0) {
    traj.agent_id = id;
    traj.category = cat;
    traj.points.push_back({p.x, p.y, yaw0, 0.0});
    traj.speeds.push_back(v0);
    vel = v0;
  }

  double y() const { return traj.points.back().y; }
  double x() const { return traj.points.back().x; }
  double yaw() const { return traj.points.back().yaw; }

  // Move with the current yaw/speed; the new waypoint temporarily carries the
  // old yaw until update() overwrites it.
  void advance(int t) {
    const Waypoint& prev = traj.points.back();
    traj.points.push_back({prev.x + vel * kp.t_inter * std::cos(prev.yaw),
                           prev.y + vel * kp.t_inter * std::sin(prev.yaw), prev.yaw,
                           t * kp.t_inter});
  }

  void update(int t, const YawRule& rule, Interval v_clamp, Interval v_perturb) {
    double nyaw = traj.points.back().yaw;
    if (rule.forced) {
      nyaw += rule.forced_delta;
    } else {
      Interval draw = rule.draw;
      if (avoid_dis > 0.0 && !others.empty())
        draw = update_yaw(nyaw, draw, avoid_dis, traj, others, t);
      nyaw += rng.uniform(draw);
      nyaw = clamp(nyaw, rule.lo, rule.hi);
    }
    traj.points.back().yaw = nyaw;
    vel = clamp(vel + rng.uniform(v_perturb), v_clamp.lo, std::max(v_clamp.lo, v_clamp.hi));
    traj.speeds.push_back(vel);
  }
};

constexpr Interval kVehiclePerturb{-2.0, 2.0};
constexpr Interval kWalkerPerturb{-0.2, 0.2};

// Spawn pose for vehicles without an explicit start: ego owns the origin and
// the road direction; other vehicles appear near the ego with a lateral lane
// offset on a random side and a slightly scattered heading.
struct SpawnPose {
  Vec2 p{0.0, 0.0};
  double yaw = 0.0;
};

SpawnPose vehicle_spawn(const KernelParams& kp, bool is_ego, Rng& rng) {
  if (is_ego) return {};
  SpawnPose s;
  s.p.x = rng.uniform(-5.0, 15.0);
  const int side = rng.coin() ? 1 : -1;
  s.p.y = side * rng.uniform(kp.y_range);
  s.yaw = rng.uniform(kp.forward_range);
  return s;
}

Interval walker_band(double speed) {
  return {std::max(0.5, speed - 0.3), std::min(2.0, speed + 0.3)};
}

Trajectory forward_m(const KernelParams& kp, double speed,
                     std::span<const Trajectory* const> others, const std::string& id,
                     bool is_ego, Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const Interval band{std::max(kp.v_range.lo, speed - 1.0), std::min(kp.v_range.hi, speed + 1.0)};
  const SpawnPose sp = vehicle_spawn(kp, is_ego, rng);
  st.start(id, AgentCategory::kVehicle, sp.p, sp.yaw, rng.uniform(band));
  for (int t = 1; t < kp.num_points; ++t) {
    st.advance(t);
    st.update(t, hold_rule(st.yaw(), 0.0), band, kVehiclePerturb);
  }
  return st.traj;
}

Trajectory ramp_m(const KernelParams& kp, double speed, double target_speed, double rate,
                  bool park, std::span<const Trajectory* const> others, const std::string& id,
                  bool is_ego, Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const SpawnPose sp = vehicle_spawn(kp, is_ego, rng);
  auto desired = [&](int t) {
    const double delta = clamp(target_speed - speed, -rate * t * kp.t_inter, rate * t * kp.t_inter);
    return speed + delta;
  };
  auto band = [&](int t) -> Interval {
    const double v = desired(t);
    if (park) return {std::max(0.0, v - 0.5), v + 0.1};
    return {std::max(0.0, v - 0.5), v + 0.5};
  };
  st.start(id, AgentCategory::kVehicle, sp.p, sp.yaw, rng.uniform(band(0)));
  for (int t = 1; t < kp.num_points; ++t) {
    st.advance(t);
    st.update(t, hold_rule(st.yaw(), 0.0), band(t), kVehiclePerturb);
  }
  return st.traj;
}

Trajectory steer_m(const KernelParams& kp, double speed, double yaw_rate, double duration,
                   int dir, std::span<const Trajectory* const> others, const std::string& id,
                   bool is_ego, Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const Interval band{std::max(kp.v_range.lo, speed - 0.5), std::min(kp.v_range.hi, speed + 0.5)};
  const SpawnPose sp = vehicle_spawn(kp, is_ego, rng);
  st.start(id, AgentCategory::kVehicle, sp.p, sp.yaw, rng.uniform(band));
  const int active = std::max(1, static_cast<int>(std::lround(duration / kp.t_inter)));
  double hold_center = sp.yaw;  // updated when the arc ends
  for (int t = 1; t < kp.num_points; ++t) {
    st.advance(t);
    if (t <= active) {
      YawRule r;
      r.forced = true;
      r.forced_delta = dir * yaw_rate * kp.t_inter;
      st.update(t, r, band, kVehiclePerturb);
      hold_center = st.yaw();
    } else {
      st.update(t, hold_rule(st.yaw(), hold_center), band, kVehiclePerturb);
    }
  }
  return st.traj;
}

Trajectory lane_change_m(const KernelParams& kp, double speed, double offset, int dir,
                         std::span<const Trajectory* const> others, const std::string& id,
                         bool is_ego, Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const Interval band{std::max(kp.v_range.lo, speed - 1.0), std::min(kp.v_range.hi, speed + 1.0)};
  const SpawnPose sp = vehicle_spawn(kp, is_ego, rng);
  st.start(id, AgentCategory::kVehicle, sp.p, sp.yaw, rng.uniform(band));
  LateralGuide guide{sp.p.y + dir * offset, offset, -dir};
  for (int t = 1; t < kp.num_points; ++t) {
    const double y_prev = st.y();
    st.advance(t);
    guide.observe_crossing(y_prev, st.y());
    st.update(t, guide.rule(st.y(), st.yaw()), band, kVehiclePerturb);
  }
  return st.traj;
}

Trajectory u_turn_m(const KernelParams& kp, double speed, double radius,
                    std::span<const Trajectory* const> others, const std::string& id,
                    bool is_ego, Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const Interval band{std::max(kp.v_range.lo, speed - 0.5), std::min(kp.v_range.hi, speed + 0.5)};
  const SpawnPose sp = vehicle_spawn(kp, is_ego, rng);
  st.start(id, AgentCategory::kVehicle, sp.p, sp.yaw, rng.uniform(band));
  const double goal = sp.yaw + kPi;  // left half-circle, unwrapped
  double swept = 0.0;
  for (int t = 1; t < kp.num_points; ++t) {
    st.advance(t);
    if (swept < kPi) {
      // Cap the last increment so the sweep lands exactly on the goal
      // heading instead of overshooting by up to one step's turn.
      YawRule r;
      r.forced = true;
      r.forced_delta = std::min(st.vel / radius * kp.t_inter, kPi - swept);
      swept += r.forced_delta;
      st.update(t, r, band, kVehiclePerturb);
    } else {
      st.update(t, hold_rule(st.yaw(), goal), band, kVehiclePerturb);
    }
  }
  return st.traj;
}

Trajectory overtake_m(const KernelParams& kp, const Trajectory& target, int dir, double offset,
                      std::span<const Trajectory* const> others, const std::string& id,
                      Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const Vec2 t0 = target.pos(0);
  const Vec2 p0{t0.x - rng.uniform(8.0, 15.0), t0.y};
  const double v0 = clamp(rng.uniform(kp.v_range), target.speeds[0] + 0.5, kp.v_range.hi + 0.5);
  st.start(id, AgentCategory::kVehicle, p0, target.points[0].yaw, v0);
  LateralGuide out{t0.y + dir * offset, offset, -dir};
  LateralGuide back{t0.y, offset, dir};
  int phase = 1;
  for (int t = 1; t < kp.num_points; ++t) {
    const double y_prev = st.y();
    st.advance(t);
    if (phase == 1) {
      out.observe_crossing(y_prev, st.y());
      if (out.settled(st.y())) phase = 2;
    } else if (phase == 2) {
      if (st.x() > target.points[t].x + 8.0) phase = 3;
    }
    YawRule rule;
    if (phase == 1) {
      rule = out.rule(st.y(), st.yaw());
    } else if (phase == 2) {
      rule = hold_rule(st.yaw(), 0.0);
    } else {
      back.observe_crossing(y_prev, st.y());
      rule = back.rule(st.y(), st.yaw());
    }
    st.update(t, rule, {target.speeds[t] + 0.5, kp.v_range.hi + 0.5}, kVehiclePerturb);
  }
  return st.traj;
}

Trajectory follow_m(const KernelParams& kp, const Trajectory& target, double time_gap,
                    std::span<const Trajectory* const> others, const std::string& id,
                    Rng& rng) {
  Stepper st{kp, rng, others, kp.safe_dis};
  const Vec2 t0 = target.pos(0);
  const double v0 = target.speeds[0];
  st.start(id, AgentCategory::kVehicle, {t0.x - (2.0 + time_gap * v0), t0.y},
           target.points[0].yaw, v0);
  for (int t = 1; t < kp.num_points; ++t) {
    st.advance(t);
    const double gap = distance({st.x(), st.y()}, target.pos(t));
    const double want = 2.0 + time_gap * st.vel;
    const double v_cmd = clamp(target.speeds[t] + 0.8 * (gap - want), 0.0, kp.v_range.hi);
    st.update(t, hold_rule(st.yaw(), target.points[0].yaw),
              {std::max(0.0, v_cmd - 0.5), v_cmd + 0.5}, kVehiclePerturb);
  }
  return st.traj;
}

// Walkers keep their course (no avoidance); the heading jitters inside a
// +-2 deg cone around the commanded heading with the perturbation always
// biased back toward it.
Trajectory walk_core(const KernelParams& kp, Vec2 start, double heading, double speed,
                     const std::string& id, Rng& rng) {
  Stepper st{kp, rng, {}, 0.0};
  const Interval band = walker_band(speed);
  st.start(id, AgentCategory::kPedestrian, start, heading + rng.uniform(-kDeg1, kDeg1),
           rng.uniform(band));
  for (int t = 1; t < kp.num_points; ++t) {
    st.advance(t);
    YawRule r = hold_rule(st.yaw(), heading);
    r.lo = heading - kDeg2;
    r.hi = heading + kDeg2;
    st.update(t, r, band, kWalkerPerturb);
  }
  return st.traj;
}

Trajectory pedestrian_cross_m(const KernelParams& kp, int dir, double speed,
                              double distance_ahead, const std::string& id, Rng& rng) {
  const double heading = dir * 0.5 * kPi;
  const Vec2 start{distance_ahead + rng.uniform(-5.0, 5.0), -dir * (8.0 + rng.uniform(0.0, 2.0))};
  return walk_core(kp, start, heading, speed, id, rng);
}

const Trajectory& resolve_target(const std::vector<Trajectory>& context, const std::string& id,
                                 const std::string& who) {
  for (const auto& tr : context)
    if (tr.agent_id == id) return tr;
  throw ScenarioError("agent '" + who + "': target '" + id + "' has no trajectory yet");
}

}  // namespace

Interval update_yaw(double yaw, const Interval& default_range, double safe_dis,
                    const Trajectory& self, std::span<const Trajectory* const> others,
                    int step) {
  const Vec2 p = self.pos(static_cast<std::size_t>(step));
  const Trajectory* nearest = nullptr;
  double best = safe_dis;
  for (const Trajectory* o : others) {
    if (!o || o->points.size() <= static_cast<std::size_t>(step)) continue;
    const double d = distance(p, o->pos(static_cast<std::size_t>(step)));
    if (d < best) {
      best = d;
      nearest = o;
    }
  }
  if (!nearest) return default_range;
  const Vec2 q = nearest->pos(static_cast<std::size_t>(step));
  const double bearing = wrap_angle(std::atan2(q.y - p.y, q.x - p.x) - yaw);
  double mag = std::max(std::abs(default_range.mid()), 0.5 * default_range.width());
  if (mag < 1e-12) mag = 0.05;
  const double mid = bearing >= 0.0 ? -mag : mag;
  const double hw = 0.5 * default_range.width();
  return {mid - hw, mid + hw};
}

Trajectory cut_in(const KernelParams& kp, const Trajectory& target, double safe_dis,
                  std::span<const Trajectory* const> others, const std::string& agent_id,
                  Rng& rng) {
  if (target.points.size() < static_cast<std::size_t>(kp.num_points) ||
      target.speeds.size() < static_cast<std::size_t>(kp.num_points))
    throw ScenarioError("cut_in: target trajectory shorter than num_points");
  Stepper st{kp, rng, others, safe_dis};
  const Vec2 t0 = target.pos(0);
  const double x0 = t0.x + rng.uniform(0.0, 10.0);
  const int mf = rng.coin() ? 1 : -1;
  const double off = rng.uniform(kp.y_range);
  const double yaw0 = rng.uniform(kp.forward_range);
  // The cutting vehicle always stays at least 0.5 m/s above the target's
  // current speed; the same floor applies to the spawn draw.
  const double v0 = clamp(rng.uniform(kp.v_range), target.speeds[0] + 0.5, kp.v_range.hi + 0.5);
  st.start(agent_id, AgentCategory::kVehicle, {x0, t0.y + mf * off}, yaw0, v0);
  LateralGuide guide{t0.y, off, mf};
  for (int t = 1; t < kp.num_points; ++t) {
    const double y_prev = st.y();
    st.advance(t);
    guide.observe_crossing(y_prev, st.y());
    st.update(t, guide.rule(st.y(), st.yaw()),
              {target.speeds[t] + 0.5, kp.v_range.hi + 0.5}, kVehiclePerturb);
  }
  return st.traj;
}

Trajectory generate_maneuver(const dsl::ManeuverCall& call, const KernelParams& kp,
                             const std::vector<Trajectory>& context,
                             const std::string& agent_id, AgentCategory category,
                             bool is_ego, Rng& rng) {
  if (kp.num_points < 2) throw ScenarioError("num_points must be at least 2");
  const dsl::FunctionSig* sig = dsl::find_function(call.function);
  if (!sig) throw ScenarioError("unknown function '" + call.function + "'");
  auto num = [&](const char* k) { return dsl::param_or_default(call, *sig, k).number; };
  auto text = [&](const char* k) { return dsl::param_or_default(call, *sig, k).text; };
  auto pnt = [&](const char* k) { return dsl::param_or_default(call, *sig, k).point; };

  std::vector<const Trajectory*> other_ptrs;
  other_ptrs.reserve(context.size());
  for (const auto& tr : context) other_ptrs.push_back(&tr);
  const std::span<const Trajectory* const> others(other_ptrs);

  const std::string& fn = call.function;
  if (fn == "forward") return forward_m(kp, num("speed"), others, agent_id, is_ego, rng);
  if (fn == "accelerate")
    return ramp_m(kp, num("speed"), num("target_speed"), num("rate"), false, others, agent_id,
                  is_ego, rng);
  if (fn == "brake")
    return ramp_m(kp, num("speed"), num("target_speed"), num("rate"), false, others, agent_id,
                  is_ego, rng);
  if (fn == "stop")
    return ramp_m(kp, num("speed"), 0.0, num("rate"), true, others, agent_id, is_ego, rng);
  if (fn == "steer_left")
    return steer_m(kp, num("speed"), num("yaw_rate"), num("duration"), 1, others, agent_id,
                   is_ego, rng);
  if (fn == "steer_right")
    return steer_m(kp, num("speed"), num("yaw_rate"), num("duration"), -1, others, agent_id,
                   is_ego, rng);
  if (fn == "lane_change_left")
    return lane_change_m(kp, num("speed"), num("offset"), 1, others, agent_id, is_ego, rng);
  if (fn == "lane_change_right")
    return lane_change_m(kp, num("speed"), num("offset"), -1, others, agent_id, is_ego, rng);
  if (fn == "overtake") {
    const Trajectory& target = resolve_target(context, text("target"), agent_id);
    return overtake_m(kp, target, text("side") == "right" ? -1 : 1, num("offset"), others,
                      agent_id, rng);
  }
  if (fn == "follow") {
    const Trajectory& target = resolve_target(context, text("target"), agent_id);
    return follow_m(kp, target, num("time_gap"), others, agent_id, rng);
  }
  if (fn == "u_turn")
    return u_turn_m(kp, num("speed"), num("radius"), others, agent_id, is_ego, rng);
  if (fn == "cut_in") {
    const Trajectory& target = resolve_target(context, text("target"), agent_id);
    return cut_in(kp, target, num("safe_dis"), others, agent_id, rng);
  }
  if (fn == "pedestrian_walk") {
    const Vec2 s = pnt("start");
    return walk_core(kp, s, num("heading"), num("speed"), agent_id, rng);
  }
  if (fn == "pedestrian_cross")
    return pedestrian_cross_m(kp, text("direction") == "right" ? -1 : 1, num("speed"),
                              num("distance_ahead"), agent_id, rng);
  (void)category;
  throw ScenarioError("function '" + fn + "' does not generate a trajectory");
}

std::vector<Trajectory> generate_scene(const dsl::ScenarioSpec& spec, const KernelParams& kp) {
  struct Node {
    std::string id;
    AgentCategory cat = AgentCategory::kVehicle;
    const dsl::ManeuverCall* call = nullptr;
    bool is_ego = false;
  };
  std::vector<Node> nodes;
  nodes.push_back({"ego", AgentCategory::kVehicle, &spec.ego, true});
  for (const auto& a : spec.agents) nodes.push_back({a.id, a.category, &a.call, false});

  auto index_of = [&nodes](const std::string& id) -> int {
    for (std::size_t i = 0; i < nodes.size(); ++i)
      if (nodes[i].id == id) return static_cast<int>(i);
    return -1;
  };

  auto deps_of = [&](const Node& n) {
    std::vector<int> deps;
    const dsl::FunctionSig* sig = dsl::find_function(n.call->function);
    if (!sig) throw ScenarioError("unknown function '" + n.call->function + "'");
    for (const auto& ps : sig->params) {
      if (ps.type != dsl::ParamType::kAgentRef) continue;
      const std::string tid = dsl::param_or_default(*n.call, *sig, ps.name).text;
      const int idx = index_of(tid);
      if (idx < 0)
        throw ScenarioError("agent '" + n.id + "' targets undeclared agent '" + tid + "'");
      deps.push_back(idx);
    }
    return deps;
  };

  // Dependency order: ego first among ready nodes, then declaration order.
  std::vector<int> order;
  std::vector<bool> placed(nodes.size(), false);
  while (order.size() < nodes.size()) {
    int pick = -1;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (placed[i]) continue;
      bool ready = true;
      for (int d : deps_of(nodes[i]))
        if (!placed[static_cast<std::size_t>(d)]) ready = false;
      if (ready) {
        pick = static_cast<int>(i);
        break;
      }
    }
    if (pick < 0) throw ScenarioError("dependency cycle among agent targets");
    placed[static_cast<std::size_t>(pick)] = true;
    order.push_back(pick);
  }

  std::vector<int> attempt(nodes.size(), 0);
  std::vector<Trajectory> built(nodes.size());
  for (;;) {
    std::vector<Trajectory> context;
    for (int idx : order) {
      const Node& n = nodes[static_cast<std::size_t>(idx)];
      Rng rng(derive_seed(spec.seed, n.id, static_cast<std::uint64_t>(attempt[idx])));
      built[static_cast<std::size_t>(idx)] =
          generate_maneuver(*n.call, kp, context, n.id, n.cat, n.is_ego, rng);
      context.push_back(built[static_cast<std::size_t>(idx)]);
    }

    // First separation violation in (timestep, topo pair) order; the
    // offender is the later-generated member, never the ego.
    int offender = -1;
    int bad_t = -1;
    std::string other_id;
    for (int t = 0; t < kp.num_points && offender < 0; ++t) {
      for (std::size_t a = 0; a + 1 < order.size() && offender < 0; ++a) {
        for (std::size_t b = a + 1; b < order.size(); ++b) {
          const Trajectory& ta = built[static_cast<std::size_t>(order[a])];
          const Trajectory& tb = built[static_cast<std::size_t>(order[b])];
          if (distance(ta.pos(t), tb.pos(t)) >= kp.min_separation) continue;
          int off = order[b];
          std::string other = ta.agent_id;
          if (nodes[static_cast<std::size_t>(off)].is_ego) {
            off = order[a];
            other = tb.agent_id;
          }
          offender = off;
          other_id = other;
          bad_t = t;
          break;
        }
      }
    }
    if (offender < 0) break;
    if (++attempt[static_cast<std::size_t>(offender)] > kp.max_attempts)
      throw ScenarioError("could not keep '" + nodes[static_cast<std::size_t>(offender)].id +
                          "' and '" + other_id + "' separated by " +
                          format_double(kp.min_separation) + " m (violation at step " +
                          std::to_string(bad_t) + ")");
  }

  std::vector<Trajectory> out;
  out.reserve(nodes.size());
  for (std::size_t i = 0; i < nodes.size(); ++i) out.push_back(std::move(built[i]));
  return out;
}

double min_pairwise_distance(const std::vector<Trajectory>& trajs) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t a = 0; a + 1 < trajs.size(); ++a)
    for (std::size_t b = a + 1; b < trajs.size(); ++b) {
      const std::size_t n = std::min(trajs[a].points.size(), trajs[b].points.size());
      for (std::size_t t = 0; t < n; ++t)
        best = std::min(best, distance(trajs[a].pos(t), trajs[b].pos(t)));
    }
  return best;
}

std::string trajectories_to_json(const std::vector<Trajectory>& trajs, double t_inter) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.trajectories/1";
  j["t_inter"] = t_inter;
  auto& agents = j["agents"] = nlohmann::ordered_json::array();
  for (const auto& tr : trajs) {
    nlohmann::ordered_json a;
    a["id"] = tr.agent_id;
    a["category"] = std::string(to_string(tr.category));
    auto& pts = a["points"] = nlohmann::ordered_json::array();
    for (const auto& w : tr.points) pts.push_back({w.x, w.y, w.yaw, w.t});
    a["speeds"] = tr.speeds;
    agents.push_back(std::move(a));
  }
  return j.dump(2) + "\n";
}

TrajectorySet trajectories_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"] != "scenforge.trajectories/1")
      throw std::runtime_error("trajectories_from_json: unknown schema");
    TrajectorySet set;
    set.t_inter = j.at("t_inter").get<double>();
    for (const auto& a : j.at("agents")) {
      Trajectory tr;
      tr.agent_id = a.at("id").get<std::string>();
      tr.category = agent_category_from_string(a.at("category").get<std::string>());
      for (const auto& p : a.at("points")) {
        if (!p.is_array() || p.size() != 4)
          throw std::runtime_error("trajectories_from_json: waypoint must be [x, y, yaw, t]");
        tr.points.push_back({p[0].get<double>(), p[1].get<double>(), p[2].get<double>(),
                             p[3].get<double>()});
      }
      tr.speeds = a.at("speeds").get<std::vector<double>>();
      if (tr.speeds.size() != tr.points.size())
        throw std::runtime_error("trajectories_from_json: speeds/points size mismatch");
      set.trajs.push_back(std::move(tr));
    }
    return set;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("trajectories_from_json: ") + ex.what());
  }
}

}  // namespace scenforge::traj
