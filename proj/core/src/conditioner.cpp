#include "scenforge/conditioner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <utility>

#include "json.hpp"

namespace scenforge::mv {

namespace {

constexpr const char* kClassNames[3] = {"boundary", "crossing", "divider"};
constexpr bev::Rgb kClassColors[3] = {bev::kBoundaryColor, bev::kCrossingColor,
                                      bev::kDividerColor};

// World point into the ego frame given the ego pose (e, psi).
Vec2 to_ego(Vec2 p, Vec2 e, double cpsi, double spsi) {
  const double dx = p.x - e.x, dy = p.y - e.y;
  return {cpsi * dx + spsi * dy, -spsi * dx + cpsi * dy};
}

// Andrew monotone chain keeping right turns, which orders the hull
// counterclockwise for image axes (y down); starts at the lexicographically
// smallest point, collinear interior points dropped.
std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
  std::sort(pts.begin(), pts.end(), [](const Vec2& a, const Vec2& b) {
    if (a.x != b.x) return a.x < b.x;
    return a.y < b.y;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }),
            pts.end());
  const std::size_t n = pts.size();
  if (n <= 2) return pts;
  auto turn = [](const Vec2& o, const Vec2& a, const Vec2& b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
  };
  std::vector<Vec2> hull(2 * n);
  std::size_t k = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (k >= 2 && turn(hull[k - 2], hull[k - 1], pts[i]) >= 0.0) --k;
    hull[k++] = pts[i];
  }
  for (std::size_t i = n - 1, lower = k + 1; i-- > 0;) {
    while (k >= lower && turn(hull[k - 2], hull[k - 1], pts[i]) >= 0.0) --k;
    hull[k++] = pts[i];
  }
  hull.resize(k - 1);  // the walk ends back on the first point
  return hull;
}

void draw_projected(bev::BevRaster& canvas, const post::ProjectedPolyline& proj, bev::Rgb color) {
  std::vector<Vec2> chain;
  auto flush = [&] {
    if (!chain.empty()) bev::draw_polyline_pixels(canvas, chain, color);
    chain.clear();
  };
  for (const post::ProjectedPoint& p : proj.points) {
    if (p.chain_start) flush();
    chain.push_back({p.u, p.v});
  }
  flush();
}

std::string frame_ppm(const ImageSeq& seq, int t) {
  std::string out =
      "P6\n" + std::to_string(seq.width) + " " + std::to_string(seq.height) + "\n255\n";
  out.reserve(out.size() + 3u * static_cast<std::size_t>(seq.width) * seq.height);
  for (int r = 0; r < seq.height; ++r)
    for (int c = 0; c < seq.width; ++c) {
      out.push_back(static_cast<char>(seq.at(t, 0, r, c)));
      out.push_back(static_cast<char>(seq.at(t, 1, r, c)));
      out.push_back(static_cast<char>(seq.at(t, 2, r, c)));
    }
  return out;
}

std::string frame_file(const char* stem, int i) {
  char name[64];
  std::snprintf(name, sizeof(name), "%s_%03d.ppm", stem, i);
  return name;
}

}  // namespace

SizeTable SizeTable::defaults() {
  SizeTable t;
  t.entries["vehicle"] = {4.6, 1.95, 1.73};
  t.entries["pedestrian"] = {0.7, 0.7, 1.7};
  return t;
}

Vec3 SizeTable::lookup(AgentCategory cat) const {
  const std::string key{to_string(cat)};
  const auto it = entries.find(key);
  if (it == entries.end())
    throw std::invalid_argument("size table has no entry for category '" + key + "'");
  const Vec3& s = it->second;
  if (!(s.x > 0.0 && s.y > 0.0 && s.z > 0.0))
    throw std::invalid_argument("size table entry for '" + key + "' must be strictly positive");
  return s;
}

std::string size_table_to_json(const SizeTable& table) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.size_table/1";
  auto& entries = j["entries"] = nlohmann::ordered_json::object();
  for (const auto& [name, s] : table.entries) entries[name] = {s.x, s.y, s.z};
  return j.dump(2) + "\n";
}

SizeTable size_table_from_json(const std::string& text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    if (!j.contains("schema") || j["schema"] != "scenforge.size_table/1")
      throw std::runtime_error("unknown schema");
    SizeTable t;
    for (const auto& [name, dims] : j.at("entries").items()) {
      const auto v = dims.get<std::vector<double>>();
      if (v.size() != 3) throw std::runtime_error("entry '" + name + "' must have 3 dims");
      t.entries[name] = {v[0], v[1], v[2]};
    }
    return t;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("size_table_from_json: ") + ex.what());
  }
}

std::vector<Box3D> boxes_from_trajectories(const std::vector<traj::Trajectory>& trajs,
                                           const SizeTable& table, std::span<const int> frames) {
  std::vector<Box3D> out;
  for (const int f : frames) {
    for (const auto& t : trajs) {
      if (t.agent_id == "ego") continue;
      if (f < 0 || static_cast<std::size_t>(f) >= t.points.size())
        throw std::out_of_range("boxes_from_trajectories: frame " + std::to_string(f) +
                                " past the end of trajectory '" + t.agent_id + "'");
      const Vec3 size = table.lookup(t.category);
      Box3D b;
      b.agent_id = t.agent_id;
      b.category = t.category;
      b.frame = f;
      b.size = size;
      b.center = {t.points[f].x, t.points[f].y, 0.5 * size.z};
      b.yaw = t.points[f].yaw;
      out.push_back(std::move(b));
    }
  }
  return out;
}

std::array<Vec3, 8> box_corners(const Box3D& box) {
  const double hl = 0.5 * box.size.x, hw = 0.5 * box.size.y, hh = 0.5 * box.size.z;
  const double c = std::cos(box.yaw), s = std::sin(box.yaw);
  // local frame: x forward, y left; corners FL, FR, RR, RL
  constexpr double sx[4] = {1.0, 1.0, -1.0, -1.0};
  constexpr double sy[4] = {1.0, -1.0, -1.0, 1.0};
  std::array<Vec3, 8> out;
  for (int level = 0; level < 2; ++level) {
    const double z = box.center.z + (level == 0 ? -hh : hh);
    for (int i = 0; i < 4; ++i) {
      const double lx = sx[i] * hl, ly = sy[i] * hw;
      out[static_cast<std::size_t>(level) * 4 + i] = {box.center.x + lx * c - ly * s,
                                                      box.center.y + lx * s + ly * c, z};
    }
  }
  return out;
}

std::optional<BoxPolygon> project_box(const Box3D& box, const post::CameraView& view,
                                      double near) {
  const std::array<Vec3, 8> corners = box_corners(box);
  std::vector<Vec2> img_pts;
  img_pts.reserve(8);
  int retained = 0;
  bool inside_all = true;
  for (const Vec3& w : corners) {
    const post::CamPoint cp = post::project_point(w, view);
    if (cp.z <= near) continue;
    ++retained;
    img_pts.push_back({cp.u, cp.v});
    if (!(cp.u >= 0.0 && cp.u <= view.width - 1.0 && cp.v >= 0.0 && cp.v <= view.height - 1.0))
      inside_all = false;
  }
  if (retained == 0) return std::nullopt;
  BoxPolygon poly;
  poly.view = view.name;
  poly.agent_id = box.agent_id;
  poly.category = box.category;
  poly.frame = box.frame;
  poly.hull = convex_hull(std::move(img_pts));
  poly.fully_visible = retained == 8 && inside_all;
  return poly;
}

ImageSeq ImageSeq::blank(int frames, int height, int width) {
  if (frames < 0 || height <= 0 || width <= 0)
    throw std::invalid_argument("ImageSeq::blank: non-positive dimensions");
  ImageSeq s;
  s.frames = frames;
  s.height = height;
  s.width = width;
  s.data.assign(static_cast<std::size_t>(frames) * 3 * height * width, 0);
  return s;
}

ImageSeq unify_views(const std::vector<ViewImageSeq>& views) {
  if (views.size() != post::kViewOrder.size())
    throw std::invalid_argument("unify_views: expected " + std::to_string(post::kViewOrder.size()) +
                                " views, got " + std::to_string(views.size()));
  for (std::size_t k = 0; k < views.size(); ++k)
    if (views[k].view != post::kViewOrder[k])
      throw std::invalid_argument("unify_views: slot " + std::to_string(k) + " must be view '" +
                                  post::kViewOrder[k] + "', got '" + views[k].view +
                                  "' (fixed order FL, F, FR, BR, B, BL)");
  const ImageSeq& first = views[0].seq;
  for (const auto& v : views)
    if (v.seq.frames != first.frames || v.seq.height != first.height ||
        v.seq.width != first.width)
      throw std::invalid_argument("unify_views: dimension mismatch for view '" + v.view + "'");

  const int kn = static_cast<int>(views.size());
  ImageSeq out = ImageSeq::blank(first.frames, first.height, first.width * kn);
  const std::size_t w = static_cast<std::size_t>(first.width);
  for (int t = 0; t < first.frames; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (int r = 0; r < first.height; ++r) {
        const std::size_t row = (static_cast<std::size_t>(t) * 3 + ch) * first.height + r;
        for (int k = 0; k < kn; ++k)
          std::copy_n(views[k].seq.data.data() + row * w, w,
                      out.data.data() + row * (w * kn) + static_cast<std::size_t>(k) * w);
      }
  return out;
}

std::vector<ViewImageSeq> split_views(const ImageSeq& unified) {
  const int kn = static_cast<int>(post::kViewOrder.size());
  if (unified.width % kn != 0)
    throw std::invalid_argument("split_views: width " + std::to_string(unified.width) +
                                " does not divide into " + std::to_string(kn) + " views");
  const int vw = unified.width / kn;
  std::vector<ViewImageSeq> out;
  out.reserve(kn);
  for (int k = 0; k < kn; ++k)
    out.push_back({post::kViewOrder[k], ImageSeq::blank(unified.frames, unified.height, vw)});
  const std::size_t w = static_cast<std::size_t>(vw);
  for (int t = 0; t < unified.frames; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (int r = 0; r < unified.height; ++r) {
        const std::size_t row = (static_cast<std::size_t>(t) * 3 + ch) * unified.height + r;
        for (int k = 0; k < kn; ++k)
          std::copy_n(unified.data.data() + row * (w * kn) + static_cast<std::size_t>(k) * w, w,
                      out[k].seq.data.data() + row * w);
      }
  return out;
}

std::string to_string(Task task) {
  switch (task) {
    case Task::kFuturePrediction: return "future_prediction";
    case Task::kFrontOutpaint: return "front_outpaint";
    case Task::kFullGeneration: return "full_generation";
  }
  return "full_generation";
}

Task task_from_string(const std::string& name) {
  if (name == "future_prediction") return Task::kFuturePrediction;
  if (name == "front_outpaint") return Task::kFrontOutpaint;
  if (name == "full_generation") return Task::kFullGeneration;
  throw std::invalid_argument("unknown task '" + name +
                              "' (want future_prediction | front_outpaint | full_generation)");
}

std::size_t TaskMask::ones() const {
  std::size_t n = 0;
  for (std::uint8_t v : cells) n += v;
  return n;
}

TaskMask make_mask(Task task, int frames, int views) {
  if (frames < 1) throw std::invalid_argument("make_mask: frames must be >= 1");
  if (views != static_cast<int>(post::kViewOrder.size()))
    throw std::invalid_argument("make_mask: views must be " +
                                std::to_string(post::kViewOrder.size()));
  TaskMask m;
  m.frames = frames;
  m.views = views;
  m.cells.assign(static_cast<std::size_t>(frames) * views, 0);
  switch (task) {
    case Task::kFuturePrediction:
      for (int k = 0; k < views; ++k) m.at(0, k) = 1;
      break;
    case Task::kFrontOutpaint: {
      constexpr int kFrontIndex = 1;  // FL, F, FR, BR, B, BL
      for (int t = 0; t < frames; ++t) m.at(t, kFrontIndex) = 1;
      break;
    }
    case Task::kFullGeneration:
      break;
  }
  return m;
}

int next_clip_start(const ConditionBundle& bundle) {
  const int frames = bundle.mask.frames > 0 ? bundle.mask.frames
                                            : static_cast<int>(bundle.timestamps.size());
  return bundle.clip_start + std::max(0, frames - 1);
}

ConditionBundle build_bundle(const dsl::ScenarioSpec& spec, const traj::TrajectorySet& trajs,
                             const hdmap::HdMap& map, const post::CameraRig& rig, Task task,
                             const BundleOptions& opt) {
  post::validate_rig(rig);
  if (opt.clip_frames < 1) throw std::invalid_argument("build_bundle: clip_frames must be >= 1");

  const traj::Trajectory* ego = nullptr;
  for (const auto& t : trajs.trajs)
    if (t.agent_id == "ego") {
      ego = &t;
      break;
    }
  if (!ego) throw std::invalid_argument("build_bundle: trajectory set has no 'ego'");
  const int n_points = static_cast<int>(ego->points.size());
  if (opt.clip_start < 0 || opt.clip_start + opt.clip_frames > n_points)
    throw std::out_of_range("build_bundle: clip frames [" + std::to_string(opt.clip_start) + ", " +
                            std::to_string(opt.clip_start + opt.clip_frames) +
                            ") exceed the trajectory length " + std::to_string(n_points));

  const int frames_n = opt.clip_frames;
  const int views_n = static_cast<int>(rig.views.size());
  const int vw = rig.views[0].width, vh = rig.views[0].height;
  for (const auto& v : rig.views)
    if (v.width != vw || v.height != vh)
      throw std::invalid_argument("build_bundle: all views must share one image size");

  // Lane skeleton chain in the world frame, computed once.
  const bev::BevRaster braster = bev::rasterize_hdmap(map, opt.raster);
  const std::array<post::BinaryMask, 3> class_masks = post::binarize(braster, opt.threshold);
  std::vector<std::pair<int, std::vector<Vec2>>> world_lanes;  // (class, meters)
  for (int ch = 0; ch < 3; ++ch) {
    const post::BinaryMask skel = post::skeletonize(class_masks[ch]);
    for (const auto& ppl : post::trace_polylines(skel)) {
      std::vector<Vec2> pts;
      pts.reserve(ppl.size());
      for (const post::Pixel& px : ppl) pts.push_back(bev::meters_of(px.row, px.col, opt.raster));
      world_lanes.emplace_back(ch, std::move(pts));
    }
  }

  std::vector<int> frame_ids(static_cast<std::size_t>(frames_n));
  for (int i = 0; i < frames_n; ++i) frame_ids[static_cast<std::size_t>(i)] = opt.clip_start + i;
  const std::vector<Box3D> all_boxes =
      boxes_from_trajectories(trajs.trajs, opt.size_table, frame_ids);

  ConditionBundle bundle;
  bundle.scenario_name = spec.name;
  bundle.seed = spec.seed;
  bundle.environment.assign(spec.environment.begin(), spec.environment.end());
  bundle.task = task;
  bundle.clip_start = opt.clip_start;
  bundle.lanes.resize(static_cast<std::size_t>(frames_n));
  bundle.box_polygons.resize(static_cast<std::size_t>(frames_n));

  std::vector<ViewImageSeq> lane_views, box_views;
  for (int k = 0; k < views_n; ++k) {
    lane_views.push_back({rig.views[k].name, ImageSeq::blank(frames_n, vh, vw)});
    box_views.push_back({rig.views[k].name, ImageSeq::blank(frames_n, vh, vw)});
  }

  const bev::RasterParams canvas_rp{vw, vh, opt.raster.meters_per_pixel};
  const std::size_t frame_bytes = static_cast<std::size_t>(3) * vh * vw;
  for (int i = 0; i < frames_n; ++i) {
    const int f = opt.clip_start + i;
    const traj::Waypoint& pose = ego->points[static_cast<std::size_t>(f)];
    bundle.timestamps.push_back(pose.t);
    const double cpsi = std::cos(pose.yaw), spsi = std::sin(pose.yaw);
    const Vec2 e{pose.x, pose.y};

    std::vector<bev::BevRaster> lane_canvas, box_canvas;
    for (int k = 0; k < views_n; ++k) {
      lane_canvas.push_back(bev::BevRaster::blank(canvas_rp));
      box_canvas.push_back(bev::BevRaster::blank(canvas_rp));
    }

    for (const auto& [ch, world_pts] : world_lanes) {
      std::vector<Vec2> ego_pts;
      ego_pts.reserve(world_pts.size());
      for (const Vec2& p : world_pts) ego_pts.push_back(to_ego(p, e, cpsi, spsi));
      const std::vector<Vec3> lifted =
          post::lift_ground(post::densify(ego_pts, opt.densify_step));
      for (int k = 0; k < views_n; ++k) {
        post::ProjectedPolyline proj = post::project_to_view(lifted, rig.views[k], opt.near);
        if (proj.points.empty()) continue;
        proj.map_class = kClassNames[ch];
        draw_projected(lane_canvas[k], proj, kClassColors[ch]);
        bundle.lanes[static_cast<std::size_t>(i)].push_back(std::move(proj));
      }
    }

    for (const Box3D& b : all_boxes) {
      if (b.frame != f) continue;
      Box3D be = b;
      const Vec2 c2 = to_ego({b.center.x, b.center.y}, e, cpsi, spsi);
      be.center = {c2.x, c2.y, b.center.z};
      be.yaw = wrap_angle(b.yaw - pose.yaw);
      for (int k = 0; k < views_n; ++k) {
        std::optional<BoxPolygon> bp = project_box(be, rig.views[k], opt.near);
        if (!bp) continue;
        std::vector<Vec2> outline = bp->hull;
        if (outline.size() > 2) outline.push_back(outline.front());
        bev::draw_polyline_pixels(box_canvas[k], outline,
                                  b.category == AgentCategory::kPedestrian
                                      ? bev::kPedestrianColor
                                      : bev::kVehicleColor);
        bundle.box_polygons[static_cast<std::size_t>(i)].push_back(std::move(*bp));
      }
    }

    for (int k = 0; k < views_n; ++k) {
      std::copy(lane_canvas[k].data.begin(), lane_canvas[k].data.end(),
                lane_views[k].seq.data.begin() + static_cast<std::size_t>(i) * frame_bytes);
      std::copy(box_canvas[k].data.begin(), box_canvas[k].data.end(),
                box_views[k].seq.data.begin() + static_cast<std::size_t>(i) * frame_bytes);
    }
  }

  bundle.hdmap = unify_views(lane_views);
  bundle.boxes = unify_views(box_views);
  bundle.mask = make_mask(task, frames_n, views_n);
  return bundle;
}

namespace {

std::string meta_json(const ConditionBundle& b) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.bundle_meta/1";
  j["scenario"] = b.scenario_name;
  j["seed"] = b.seed;
  j["environment"] = b.environment;
  j["task"] = to_string(b.task);
  j["clip_start"] = b.clip_start;
  j["frames"] = b.mask.frames;
  j["views"] = std::vector<std::string>(post::kViewOrder.begin(), post::kViewOrder.end());
  j["view_width"] = b.hdmap.width / std::max(1, b.mask.views);
  j["view_height"] = b.hdmap.height;
  j["unified_width"] = b.hdmap.width;
  j["timestamps"] = b.timestamps;
  return j.dump(2) + "\n";
}

std::string mask_json(const ConditionBundle& b) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.task_mask/1";
  j["task"] = to_string(b.task);
  j["frames"] = b.mask.frames;
  j["views"] = b.mask.views;
  j["semantics"] = "1 = observed conditioning cell, 0 = generated";
  auto& rows = j["cells"] = nlohmann::ordered_json::array();
  for (int t = 0; t < b.mask.frames; ++t) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (int k = 0; k < b.mask.views; ++k) row.push_back(static_cast<int>(b.mask.at(t, k)));
    rows.push_back(std::move(row));
  }
  return j.dump(2) + "\n";
}

std::string conditions_json(const ConditionBundle& b) {
  nlohmann::ordered_json j;
  j["schema"] = "scenforge.conditions/1";
  auto& frames = j["frames"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < b.lanes.size(); ++i) {
    nlohmann::ordered_json e;
    e["frame"] = b.clip_start + static_cast<int>(i);
    auto& lanes = e["lanes"] = nlohmann::ordered_json::array();
    for (const auto& pl : b.lanes[i]) {
      nlohmann::ordered_json l;
      l["view"] = pl.view;
      l["class"] = pl.map_class;
      auto& pts = l["points"] = nlohmann::ordered_json::array();
      for (const auto& p : pl.points)
        pts.push_back({p.u, p.v, p.visible ? 1 : 0, p.chain_start ? 1 : 0});
      lanes.push_back(std::move(l));
    }
    auto& boxes = e["boxes"] = nlohmann::ordered_json::array();
    for (const auto& bp : b.box_polygons[i]) {
      nlohmann::ordered_json x;
      x["view"] = bp.view;
      x["agent"] = bp.agent_id;
      x["category"] = std::string(to_string(bp.category));
      x["fully_visible"] = bp.fully_visible;
      auto& hull = x["hull"] = nlohmann::ordered_json::array();
      for (const auto& p : bp.hull) hull.push_back({p.x, p.y});
      boxes.push_back(std::move(x));
    }
    frames.push_back(std::move(e));
  }
  return j.dump(2) + "\n";
}

}  // namespace

void write_bundle(const ConditionBundle& bundle, const std::string& dir) {
  std::filesystem::create_directories(dir);
  for (int i = 0; i < bundle.hdmap.frames; ++i) {
    write_file_atomic(dir + "/" + frame_file("hdmap_cond", i), frame_ppm(bundle.hdmap, i));
    write_file_atomic(dir + "/" + frame_file("boxes_cond", i), frame_ppm(bundle.boxes, i));
  }
  write_file_atomic(dir + "/mask.json", mask_json(bundle));
  write_file_atomic(dir + "/meta.json", meta_json(bundle));
  write_file_atomic(dir + "/conditions.json", conditions_json(bundle));
}

ConditionBundle read_bundle(const std::string& dir) {
  try {
    const nlohmann::json meta = nlohmann::json::parse(read_file(dir + "/meta.json"));
    if (!meta.contains("schema") || meta["schema"] != "scenforge.bundle_meta/1")
      throw std::runtime_error("meta.json has an unknown schema");
    ConditionBundle b;
    b.scenario_name = meta.at("scenario").get<std::string>();
    b.seed = meta.at("seed").get<std::uint64_t>();
    b.environment = meta.at("environment").get<std::vector<std::string>>();
    b.task = task_from_string(meta.at("task").get<std::string>());
    b.clip_start = meta.at("clip_start").get<int>();
    b.timestamps = meta.at("timestamps").get<std::vector<double>>();
    const int frames_n = meta.at("frames").get<int>();
    const int vh = meta.at("view_height").get<int>();
    const int uw = meta.at("unified_width").get<int>();

    const nlohmann::json mj = nlohmann::json::parse(read_file(dir + "/mask.json"));
    if (!mj.contains("schema") || mj["schema"] != "scenforge.task_mask/1")
      throw std::runtime_error("mask.json has an unknown schema");
    TaskMask mask;
    mask.frames = mj.at("frames").get<int>();
    mask.views = mj.at("views").get<int>();
    if (mask.frames != frames_n) throw std::runtime_error("mask/meta frame count mismatch");
    for (const auto& row : mj.at("cells")) {
      if (static_cast<int>(row.size()) != mask.views)
        throw std::runtime_error("mask row width mismatch");
      for (const auto& cell : row) mask.cells.push_back(cell.get<int>() ? 1 : 0);
    }
    if (static_cast<int>(mask.cells.size()) != mask.frames * mask.views)
      throw std::runtime_error("mask cell count mismatch");
    b.mask = std::move(mask);

    b.hdmap = ImageSeq::blank(frames_n, vh, uw);
    b.boxes = ImageSeq::blank(frames_n, vh, uw);
    const std::size_t frame_bytes = static_cast<std::size_t>(3) * vh * uw;
    for (int i = 0; i < frames_n; ++i) {
      const bev::BevRaster hb = bev::read_ppm(dir + "/" + frame_file("hdmap_cond", i));
      const bev::BevRaster bb = bev::read_ppm(dir + "/" + frame_file("boxes_cond", i));
      if (hb.width != uw || hb.height != vh || bb.width != uw || bb.height != vh)
        throw std::runtime_error("condition image dimensions disagree with meta.json");
      std::copy(hb.data.begin(), hb.data.end(),
                b.hdmap.data.begin() + static_cast<std::size_t>(i) * frame_bytes);
      std::copy(bb.data.begin(), bb.data.end(),
                b.boxes.data.begin() + static_cast<std::size_t>(i) * frame_bytes);
    }

    const nlohmann::json cj = nlohmann::json::parse(read_file(dir + "/conditions.json"));
    if (!cj.contains("schema") || cj["schema"] != "scenforge.conditions/1")
      throw std::runtime_error("conditions.json has an unknown schema");
    b.lanes.resize(static_cast<std::size_t>(frames_n));
    b.box_polygons.resize(static_cast<std::size_t>(frames_n));
    std::size_t i = 0;
    for (const auto& e : cj.at("frames")) {
      if (i >= static_cast<std::size_t>(frames_n))
        throw std::runtime_error("conditions.json has more frames than meta.json");
      if (e.at("frame").get<int>() != b.clip_start + static_cast<int>(i))
        throw std::runtime_error("conditions.json frame indices out of order");
      for (const auto& l : e.at("lanes")) {
        post::ProjectedPolyline pl;
        pl.view = l.at("view").get<std::string>();
        pl.map_class = l.at("class").get<std::string>();
        for (const auto& p : l.at("points")) {
          post::ProjectedPoint pp;
          pp.u = p.at(0).get<double>();
          pp.v = p.at(1).get<double>();
          pp.visible = p.at(2).get<int>() != 0;
          pp.chain_start = p.at(3).get<int>() != 0;
          pl.points.push_back(pp);
        }
        b.lanes[i].push_back(std::move(pl));
      }
      for (const auto& x : e.at("boxes")) {
        BoxPolygon bp;
        bp.view = x.at("view").get<std::string>();
        bp.agent_id = x.at("agent").get<std::string>();
        bp.category = agent_category_from_string(x.at("category").get<std::string>());
        bp.frame = b.clip_start + static_cast<int>(i);
        bp.fully_visible = x.at("fully_visible").get<bool>();
        for (const auto& p : x.at("hull")) bp.hull.push_back({p.at(0).get<double>(),
                                                              p.at(1).get<double>()});
        b.box_polygons[i].push_back(std::move(bp));
      }
      ++i;
    }
    if (i != static_cast<std::size_t>(frames_n))
      throw std::runtime_error("conditions.json has fewer frames than meta.json");
    return b;
  } catch (const std::runtime_error&) {
    throw;
  } catch (const std::exception& ex) {
    throw std::runtime_error(std::string("read_bundle: ") + ex.what());
  }
}

}  // namespace scenforge::mv
