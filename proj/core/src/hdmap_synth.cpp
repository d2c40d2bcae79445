#include "scenforge/hdmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "json.hpp"

namespace scenforge::hdmap {

namespace {

constexpr double kFoldThreshold = 0.05;   // drop offset stations beyond this fold-over
constexpr double kJunctionTurn = kPi / 6; // 30 deg heading change implies a junction
constexpr double kJunctionWindow = 2.0;   // seconds for the heading-change rule
constexpr double kJunctionMerge = 10.0;   // cluster junction stations within this
constexpr double kCrossingSlack = 15.0;   // max distance crossing <-> junction
constexpr double kExtendMargin = 5.0;     // corridor extension beyond the agents
constexpr double kExtendSpacing = 2.0;    // vertex spacing along extensions
constexpr double kLateralMargin = 0.5;    // road half-width headroom over the agents

const traj::Trajectory* find_ego(const std::vector<traj::Trajectory>& trajs) {
  for (const auto& t : trajs)
    if (t.agent_id == "ego") return &t;
  return nullptr;
}

// Smoothed ego path with per-point station, unit tangent/left normal, and a
// signed curvature estimate.
struct Centerline {
  std::vector<Vec2> pts;
  std::vector<double> station;
  std::vector<Vec2> tangent;
  std::vector<Vec2> normal;  // left of tangent
  std::vector<double> curvature;
};

Centerline finalize_centerline(std::vector<Vec2> pts) {
  const std::size_t n = pts.size();
  Centerline cl;
  cl.pts = std::move(pts);
  cl.station.resize(n);
  cl.tangent.resize(n);
  cl.normal.resize(n);
  cl.curvature.assign(n, 0.0);
  cl.station[0] = 0.0;
  Vec2 last_dir{1.0, 0.0};
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0) cl.station[i] = cl.station[i - 1] + distance(cl.pts[i - 1], cl.pts[i]);
    Vec2 d{0, 0};
    if (i + 1 < n) d = cl.pts[i + 1] - cl.pts[i];
    else d = cl.pts[i] - cl.pts[i - 1];
    const double len = norm(d);
    if (len > 1e-9) last_dir = (1.0 / len) * d;  // reuse previous dir when stationary
    cl.tangent[i] = last_dir;
    cl.normal[i] = {-last_dir.y, last_dir.x};
  }
  for (std::size_t i = 1; i < n; ++i) {
    const double dth = wrap_angle(std::atan2(cl.tangent[i].y, cl.tangent[i].x) -
                                  std::atan2(cl.tangent[i - 1].y, cl.tangent[i - 1].x));
    const double ds = std::max(1e-6, cl.station[i] - cl.station[i - 1]);
    cl.curvature[i] = dth / ds;
  }
  return cl;
}

Centerline centerline_of(const traj::Trajectory& ego) {
  const std::size_t n = ego.points.size();
  if (n < 2) throw std::invalid_argument("centerline: ego has fewer than 2 waypoints");
  std::vector<Vec2> pts(n);
  // moving average, window of 5, clamped at the ends
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= 2 ? i - 2 : 0;
    const std::size_t hi = std::min(n - 1, i + 2);
    Vec2 acc{0, 0};
    for (std::size_t k = lo; k <= hi; ++k) acc = acc + ego.pos(k);
    pts[i] = (1.0 / static_cast<double>(hi - lo + 1)) * acc;
  }
  return finalize_centerline(std::move(pts));
}

// Straight-line extension along the terminal tangents, so the mapped corridor
// can cover agents that start behind or run past the ego clip.
Centerline extend_centerline(const Centerline& cl, double before, double after) {
  std::vector<Vec2> pts;
  if (before > 0.0) {
    const int k = std::max(1, static_cast<int>(std::ceil(before / kExtendSpacing)));
    const double step = before / k;
    for (int j = k; j >= 1; --j)
      pts.push_back(cl.pts.front() + (-static_cast<double>(j) * step) * cl.tangent.front());
  }
  pts.insert(pts.end(), cl.pts.begin(), cl.pts.end());
  if (after > 0.0) {
    const int k = std::max(1, static_cast<int>(std::ceil(after / kExtendSpacing)));
    const double step = after / k;
    for (int j = 1; j <= k; ++j)
      pts.push_back(cl.pts.back() + (static_cast<double>(j) * step) * cl.tangent.back());
  }
  return finalize_centerline(std::move(pts));
}

// Signed projection of a point onto the centerline: (station, lateral offset),
// lateral positive on the left.
struct Projection {
  double station = 0.0;
  double lateral = 0.0;
};

Projection project_onto(const Centerline& cl, Vec2 p) {
  double best_d2 = std::numeric_limits<double>::infinity();
  std::size_t bi = 0;
  double bu = 0.0;
  for (std::size_t i = 0; i + 1 < cl.pts.size(); ++i) {
    const Vec2 a = cl.pts[i], b = cl.pts[i + 1];
    const Vec2 ab = b - a;
    const double len2 = dot(ab, ab);
    const double u = len2 > 1e-12 ? clamp(dot(p - a, ab) / len2, 0.0, 1.0) : 0.0;
    const Vec2 q = a + u * ab;
    const double d2 = dot(p - q, p - q);
    if (d2 < best_d2) {
      best_d2 = d2;
      bi = i;
      bu = u;
    }
  }
  const std::size_t last = cl.pts.size() - 2;
  const Vec2 a = cl.pts[bi], b = cl.pts[bi + 1];
  const Vec2 ab = b - a;
  const double len2 = dot(ab, ab);
  double u = bu;
  if (len2 > 1e-12) {
    // Points beyond either end keep a true perpendicular offset: extrapolate
    // along the terminal segment instead of snapping to its end vertex.
    const double u_raw = dot(p - a, ab) / len2;
    if ((bi == 0 && u_raw < 0.0) || (bi == last && u_raw > 1.0)) u = u_raw;
  }
  const Vec2 t = len2 > 1e-12 ? (1.0 / std::sqrt(len2)) * ab : cl.tangent[bi];
  const Vec2 q = a + u * ab;
  const double side = cross(t, p - q);
  Projection best;
  best.station = cl.station[bi] + u * (cl.station[bi + 1] - cl.station[bi]);
  best.lateral = side >= 0.0 ? norm(p - q) : -norm(p - q);
  return best;
}

// Offset curve at (possibly varying) lateral distance, split where the curve
// folds over (1 - d*kappa <= threshold).
template <typename OffsetFn>
std::vector<Polyline> offset_curve(const Centerline& cl, OffsetFn&& offset_at) {
  std::vector<Polyline> out;
  Polyline cur;
  for (std::size_t i = 0; i < cl.pts.size(); ++i) {
    const double d = offset_at(i);
    if (1.0 - d * cl.curvature[i] <= kFoldThreshold) {
      if (cur.size() >= 2) out.push_back(std::move(cur));
      cur.clear();
      continue;
    }
    cur.push_back(cl.pts[i] + d * cl.normal[i]);
  }
  if (cur.size() >= 2) out.push_back(std::move(cur));
  return out;
}

// Stations where the scene implies a junction: a heading change above 30 deg
// within 2 s of ego travel, or a pedestrian entering the road corridor.
// Nearby stations (within 10 m) are merged to their mean.
std::vector<double> junction_stations(const Centerline& cl,
                                      const std::vector<traj::Trajectory>& trajs,
                                      double corridor_halfwidth) {
  std::vector<double> raw;
  if (const traj::Trajectory* ego = find_ego(trajs)) {
    const auto& pts = ego->points;
    std::size_t i = 0;
    while (i + 1 < pts.size()) {
      std::size_t turned = 0;
      for (std::size_t j = i + 1; j < pts.size() && pts[j].t - pts[i].t <= kJunctionWindow; ++j) {
        if (std::abs(wrap_angle(pts[j].yaw - pts[i].yaw)) > kJunctionTurn) {
          turned = j;
          break;
        }
      }
      if (turned) {
        raw.push_back(0.5 * (cl.station[i] + cl.station[turned]));
        i = turned;  // continue after the detected turn
      } else {
        ++i;
      }
    }
  }
  for (const auto& t : trajs) {
    if (t.category != AgentCategory::kPedestrian) continue;
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const Projection pr = project_onto(cl, t.pos(i));
      if (std::abs(pr.lateral) <= corridor_halfwidth) {
        raw.push_back(pr.station);
        break;
      }
    }
  }
  std::sort(raw.begin(), raw.end());
  std::vector<double> merged;
  std::size_t i = 0;
  while (i < raw.size()) {
    std::size_t j = i + 1;
    double sum = raw[i];
    while (j < raw.size() && raw[j] - raw[j - 1] <= kJunctionMerge) sum += raw[j++];
    merged.push_back(sum / static_cast<double>(j - i));
    i = j;
  }
  return merged;
}

// Interpolated centerline pose at an arbitrary station.
struct Pose {
  Vec2 p;
  Vec2 tangent;
  Vec2 normal;
};

Pose pose_at(const Centerline& cl, double s) {
  if (s <= cl.station.front())
    return {cl.pts.front(), cl.tangent.front(), cl.normal.front()};
  if (s >= cl.station.back())
    return {cl.pts.back(), cl.tangent.back(), cl.normal.back()};
  std::size_t i = 1;
  while (cl.station[i] < s) ++i;
  const double ds = cl.station[i] - cl.station[i - 1];
  const double u = ds > 1e-12 ? (s - cl.station[i - 1]) / ds : 0.0;
  const Vec2 p = cl.pts[i - 1] + u * (cl.pts[i] - cl.pts[i - 1]);
  const Vec2 t = cl.tangent[i - 1] + u * (cl.tangent[i] - cl.tangent[i - 1]);
  const double len = norm(t);
  const Vec2 tn = len > 1e-12 ? (1.0 / len) * t : cl.tangent[i - 1];
  return {p, tn, {-tn.y, tn.x}};
}

nlohmann::ordered_json polylines_to_json(const std::vector<Polyline>& ps) {
  auto arr = nlohmann::ordered_json::array();
  for (const auto& pl : ps) {
    auto a = nlohmann::ordered_json::array();
    for (const auto& p : pl) a.push_back({p.x, p.y});
    arr.push_back(std::move(a));
  }
  return arr;
}

std::vector<Polyline> polylines_from_json(const nlohmann::json& j) {
  std::vector<Polyline> out;
  for (const auto& a : j) {
    Polyline pl;
    for (const auto& p : a) {
      if (!p.is_array() || p.size() != 2)
        throw std::runtime_error("map_from_json: point must be [x, y]");
      pl.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    out.push_back(std::move(pl));
  }
  return out;
}

}  // namespace

HdMap synthesize(const std::vector<traj::Trajectory>& trajs, const SynthOptions& opt, Rng& rng) {
  const traj::Trajectory* ego = find_ego(trajs);
  if (!ego) throw std::invalid_argument("synthesize: no trajectory with agent id 'ego'");
  if (opt.lanes_per_side < 1) throw std::invalid_argument("synthesize: lanes_per_side < 1");
  Centerline cl = centerline_of(*ego);

  // The map must cover every agent, not just the ego clip: faster agents run
  // past the ego path's end, followers start behind it, and a lane change
  // from the outermost lane implies the road continues one lane further out.
  double s_lo = 0.0, s_hi = cl.station.back(), lat_max = 0.0;
  for (const auto& t : trajs)
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const auto pr = project_onto(cl, t.pos(i));
      s_lo = std::min(s_lo, pr.station);
      s_hi = std::max(s_hi, pr.station);
      if (t.category == AgentCategory::kVehicle)
        lat_max = std::max(lat_max, std::abs(pr.lateral));
    }
  const double before = s_lo < 0.0 ? -s_lo + kExtendMargin : 0.0;
  const double after = s_hi > cl.station.back() ? s_hi - cl.station.back() + kExtendMargin : 0.0;
  if (before > 0.0 || after > 0.0) cl = extend_centerline(cl, before, after);

  HdMap map;
  map.lane_width = opt.lane_width + rng.uniform(-opt.width_jitter, opt.width_jitter);
  const double w = map.lane_width;
  // Even at the deepest inward waviness excursion, the boundary must clear
  // the widest vehicle excursion by kLateralMargin.
  const int lanes_needed =
      static_cast<int>(std::ceil((lat_max + opt.waviness_amp + kLateralMargin) / w));
  map.lanes_per_side = std::max(opt.lanes_per_side, lanes_needed);
  const double half = map.lanes_per_side * w;

  for (int k = 1; k < map.lanes_per_side; ++k) {
    for (int side : {1, -1}) {
      auto parts = offset_curve(cl, [&](std::size_t) { return side * k * w; });
      for (auto& p : parts) map.dividers.push_back(std::move(p));
    }
  }
  for (int side : {1, -1}) {
    const double amp = opt.waviness_amp > 0.0 ? rng.uniform(0.3 * opt.waviness_amp, opt.waviness_amp)
                                              : 0.0;
    const double phase = rng.uniform(0.0, 2.0 * kPi);
    auto parts = offset_curve(cl, [&](std::size_t i) {
      const double wav =
          amp * std::sin(2.0 * kPi * cl.station[i] / opt.waviness_wavelength + phase);
      return side * half + wav;
    });
    for (auto& p : parts) map.boundaries.push_back(std::move(p));
  }

  for (double s : junction_stations(cl, trajs, half)) {
    const Pose pose = pose_at(cl, s);
    const double hl = opt.crossing_half_length;
    const double hw = half + opt.crossing_margin;
    Polyline poly{pose.p + (-hl) * pose.tangent + (-hw) * pose.normal,
                  pose.p + hl * pose.tangent + (-hw) * pose.normal,
                  pose.p + hl * pose.tangent + hw * pose.normal,
                  pose.p + (-hl) * pose.tangent + hw * pose.normal};
    poly.push_back(poly.front());  // closed
    map.crossings.push_back(std::move(poly));
  }
  return map;
}

std::vector<Violation> validate(const HdMap& map, const std::vector<traj::Trajectory>& trajs) {
  std::vector<Violation> out;
  const traj::Trajectory* ego = find_ego(trajs);
  if (!ego) {
    out.push_back({"corridor", "no trajectory with agent id 'ego'"});
    return out;
  }
  const Centerline cl = centerline_of(*ego);

  // Offset samples of every map element, projected onto the recomputed
  // centerline.  side > 0 is left.
  struct Sample {
    double station;
    double offset;
  };
  std::vector<Sample> bleft, bright, dleft, dright;
  for (const auto& pl : map.boundaries)
    for (const auto& p : pl) {
      const Projection pr = project_onto(cl, p);
      (pr.lateral >= 0.0 ? bleft : bright).push_back({pr.station, pr.lateral});
    }
  for (const auto& pl : map.dividers)
    for (const auto& p : pl) {
      const Projection pr = project_onto(cl, p);
      (pr.lateral >= 0.0 ? dleft : dright).push_back({pr.station, pr.lateral});
    }

  // corridor: every vehicle waypoint between the boundary profiles
  auto bound_at = [](std::vector<Sample>& samples, double s) {
    // piecewise-linear |offset| profile over station; nearest outside range
    double lo_s = std::numeric_limits<double>::infinity(), lo_v = 0.0;
    double hi_s = -std::numeric_limits<double>::infinity(), hi_v = 0.0;
    double prev_s = 0.0, prev_v = 0.0, next_s = 0.0, next_v = 0.0;
    bool has_prev = false, has_next = false;
    for (const auto& smp : samples) {
      const double a = std::abs(smp.offset);
      if (smp.station < lo_s) lo_s = smp.station, lo_v = a;
      if (smp.station > hi_s) hi_s = smp.station, hi_v = a;
      if (smp.station <= s && (!has_prev || smp.station > prev_s)) {
        prev_s = smp.station;
        prev_v = a;
        has_prev = true;
      }
      if (smp.station >= s && (!has_next || smp.station < next_s)) {
        next_s = smp.station;
        next_v = a;
        has_next = true;
      }
    }
    if (has_prev && has_next) {
      const double ds = next_s - prev_s;
      return ds > 1e-12 ? prev_v + (s - prev_s) / ds * (next_v - prev_v) : prev_v;
    }
    if (has_prev) return hi_v;
    if (has_next) return lo_v;
    return std::numeric_limits<double>::infinity();  // no boundary on this side
  };

  for (const auto& t : trajs) {
    if (t.category != AgentCategory::kVehicle) continue;
    for (std::size_t i = 0; i < t.points.size(); ++i) {
      const Projection pr = project_onto(cl, t.pos(i));
      auto& side = pr.lateral >= 0.0 ? bleft : bright;
      const double bound = bound_at(side, pr.station);
      if (std::abs(pr.lateral) >= bound) {
        out.push_back({"corridor", "agent '" + t.agent_id + "' leaves the corridor at step " +
                                       std::to_string(i) + " (offset " +
                                       format_double(pr.lateral) + ", bound " +
                                       format_double(bound) + ")"});
        break;  // one violation per agent is enough signal
      }
    }
  }

  // offset-order: boundaries strictly outside dividers, per side
  auto order_check = [&out](const std::vector<Sample>& bs, const std::vector<Sample>& ds,
                            const char* side) {
    if (bs.empty() || ds.empty()) return;
    double bmin = std::numeric_limits<double>::infinity(), dmax = 0.0;
    for (const auto& s : bs) bmin = std::min(bmin, std::abs(s.offset));
    for (const auto& s : ds) dmax = std::max(dmax, std::abs(s.offset));
    if (bmin <= dmax)
      out.push_back({"offset-order", std::string("on the ") + side +
                                         " side a boundary sample (|offset| " +
                                         format_double(bmin) +
                                         ") is not outside every divider (|offset| " +
                                         format_double(dmax) + ")"});
  };
  order_check(bleft, dleft, "left");
  order_check(bright, dright, "right");

  // crossing-location: every crossing near a junction implied by trajectories
  if (!map.crossings.empty()) {
    double bsum = 0.0;
    std::size_t bcount = 0;
    for (const auto& s : bleft) bsum += std::abs(s.offset), ++bcount;
    for (const auto& s : bright) bsum += std::abs(s.offset), ++bcount;
    const double half_est = bcount ? bsum / static_cast<double>(bcount)
                                   : map.lanes_per_side * map.lane_width;
    const std::vector<double> junctions = junction_stations(cl, trajs, half_est);
    for (std::size_t ci = 0; ci < map.crossings.size(); ++ci) {
      const auto& poly = map.crossings[ci];
      Vec2 centroid{0, 0};
      const std::size_t n = poly.size() > 1 ? poly.size() - 1 : poly.size();  // drop repeat
      for (std::size_t i = 0; i < n; ++i) centroid = centroid + poly[i];
      centroid = (1.0 / static_cast<double>(n)) * centroid;
      const double s = project_onto(cl, centroid).station;
      bool near = false;
      for (double j : junctions)
        if (std::abs(j - s) <= kCrossingSlack) near = true;
      if (!near)
        out.push_back({"crossing-location", "crossing " + std::to_string(ci) + " at station " +
                                                format_double(s) +
                                                " has no junction within " +
                                                format_double(kCrossingSlack) + " m"});
    }
  }
  return out;
}

std::string map_to_json(const HdMap& map) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.hdmap/1";
  j["lane_width"] = map.lane_width;
  j["lanes_per_side"] = map.lanes_per_side;
  j["boundaries"] = polylines_to_json(map.boundaries);
  j["dividers"] = polylines_to_json(map.dividers);
  j["crossings"] = polylines_to_json(map.crossings);
  return j.dump(2) + "\n";
}

HdMap map_from_json(const std::string& text) {
  try {
    nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"] != "scenforge.hdmap/1")
      throw std::runtime_error("map_from_json: unknown schema");
    HdMap map;
    map.lane_width = j.at("lane_width").get<double>();
    map.lanes_per_side = j.at("lanes_per_side").get<int>();
    map.boundaries = polylines_from_json(j.at("boundaries"));
    map.dividers = polylines_from_json(j.at("dividers"));
    map.crossings = polylines_from_json(j.at("crossings"));
    return map;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("map_from_json: ") + ex.what());
  }
}

}  // namespace scenforge::hdmap
