#include "scenforge/conditioner.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <utility>
#include <vector>

#include "doctest.h"
#include "scenforge/dsl.hpp"
#include "scenforge/hdmap.hpp"
#include "scenforge/hdmap_post.hpp"
#include "scenforge/trajectory.hpp"
#include "test_util.hpp"

using namespace scenforge;
using namespace scenforge::mv;

namespace {

traj::Trajectory straight(std::string id, AgentCategory cat, double y, int n,
                          double speed = 10.0) {
  traj::Trajectory t;
  t.agent_id = std::move(id);
  t.category = cat;
  for (int i = 0; i < n; ++i)
    t.points.push_back({speed * 0.25 * i, y, 0.0, 0.25 * i});
  t.speeds.assign(static_cast<std::size_t>(n) - 1, speed);
  return t;
}

double cross2(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }

// Independent hull validation: vertices must be drawn from the candidate
// points, wound with strictly negative cross products (counterclockwise for
// y-down image axes), start at the lexicographic minimum, and enclose every
// candidate.
void check_hull_contract(const std::vector<Vec2>& hull, const std::vector<Vec2>& candidates) {
  REQUIRE(!hull.empty());
  auto lex_less = [](Vec2 a, Vec2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; };
  // every vertex is one of the projected corners (bitwise)
  for (const Vec2& h : hull) {
    const bool found = std::any_of(candidates.begin(), candidates.end(),
                                   [&](Vec2 c) { return c.x == h.x && c.y == h.y; });
    REQUIRE(found);
  }
  // no duplicate vertices
  for (std::size_t i = 0; i < hull.size(); ++i)
    for (std::size_t j = i + 1; j < hull.size(); ++j)
      REQUIRE(!(hull[i] == hull[j]));
  // starts at the lexicographically smallest vertex
  for (const Vec2& h : hull) REQUIRE(!lex_less(h, hull.front()));
  if (hull.size() < 3) return;
  // turns wind one way, cyclically (tolerance scales with the coordinate
  // magnitude: near-plane projections reach huge pixel values)
  for (std::size_t i = 0; i < hull.size(); ++i) {
    const Vec2 a = hull[i];
    const Vec2 b = hull[(i + 1) % hull.size()];
    const Vec2 c = hull[(i + 2) % hull.size()];
    const double scale = std::max(1.0, norm(b - a) * norm(c - b));
    REQUIRE(cross2(b - a, c - b) < 1e-9 * scale);
  }
  // all candidates inside or on the boundary
  for (const Vec2& p : candidates) {
    for (std::size_t i = 0; i < hull.size(); ++i) {
      const Vec2 a = hull[i];
      const Vec2 b = hull[(i + 1) % hull.size()];
      const double scale = std::max(1.0, norm(b - a) * norm(p - a));
      REQUIRE(cross2(b - a, p - a) <= 1e-9 * scale);
    }
  }
}

}  // namespace

TEST_CASE("the default size table carries both categories and round-trips") {
  const SizeTable table = SizeTable::defaults();
  CHECK(table.lookup(AgentCategory::kVehicle) == Vec3{4.6, 1.95, 1.73});
  CHECK(table.lookup(AgentCategory::kPedestrian) == Vec3{0.7, 0.7, 1.7});

  const std::string text = size_table_to_json(table);
  CHECK(text.find("scenforge.size_table/1") != std::string::npos);
  const SizeTable back = size_table_from_json(text);
  CHECK(back.entries == table.entries);
  CHECK(size_table_to_json(back) == text);

  SizeTable empty;
  CHECK_THROWS_AS((void)empty.lookup(AgentCategory::kVehicle), std::invalid_argument);
  SizeTable bad;
  bad.entries["vehicle"] = {4.6, 0.0, 1.73};
  CHECK_THROWS_AS((void)bad.lookup(AgentCategory::kVehicle), std::invalid_argument);
  CHECK_THROWS_AS((void)size_table_from_json("{}"), std::runtime_error);
  CHECK_THROWS_AS((void)size_table_from_json("nope"), std::runtime_error);
}

TEST_CASE("boxes are derived per frame and agent with the ground-contact rule") {
  std::vector<traj::Trajectory> trajs;
  trajs.push_back(straight("ego", AgentCategory::kVehicle, 0.0, 10));
  trajs.push_back(straight("a1", AgentCategory::kVehicle, 3.5, 10));
  trajs.push_back(straight("p1", AgentCategory::kPedestrian, -4.0, 10, 1.2));
  trajs[1].points[3].yaw = 0.31;  // make one sample's heading distinctive

  const SizeTable table = SizeTable::defaults();
  const std::vector<int> frames{0, 3};
  const auto boxes = boxes_from_trajectories(trajs, table, frames);
  REQUIRE(boxes.size() == 4);  // (frame, agent) ordering, ego excluded
  CHECK(boxes[0].agent_id == "a1");
  CHECK(boxes[1].agent_id == "p1");
  CHECK(boxes[2].agent_id == "a1");
  CHECK(boxes[3].agent_id == "p1");
  CHECK(boxes[0].frame == 0);
  CHECK(boxes[2].frame == 3);

  // vehicle height 1.73 -> center z exactly half of it; yaw copied bitwise
  CHECK(boxes[2].center == Vec3{trajs[1].points[3].x, 3.5, 0.5 * 1.73});
  CHECK(boxes[2].yaw == 0.31);
  CHECK(boxes[2].size == Vec3{4.6, 1.95, 1.73});
  CHECK(boxes[3].center.z == 0.5 * 1.7);
  CHECK(boxes[3].category == AgentCategory::kPedestrian);

  // full clip: 2 non-ego agents x 8 frames
  std::vector<int> clip(8);
  for (int i = 0; i < 8; ++i) clip[static_cast<std::size_t>(i)] = i;
  CHECK(boxes_from_trajectories(trajs, table, clip).size() == 16);

  const std::vector<int> past{99};
  CHECK_THROWS_AS((void)boxes_from_trajectories(trajs, table, past), std::out_of_range);
  const std::vector<int> negative{-1};
  CHECK_THROWS_AS((void)boxes_from_trajectories(trajs, table, negative), std::out_of_range);
  SizeTable empty;
  CHECK_THROWS_AS((void)boxes_from_trajectories(trajs, empty, frames), std::invalid_argument);
}

TEST_CASE("box corners follow the documented order and yaw rotation") {
  Box3D box;
  box.center = {10.0, 2.0, 0.865};
  box.size = {4.6, 1.95, 1.73};
  box.yaw = 0.0;
  const auto c = box_corners(box);
  // bottom face FL, FR, RR, RL -- exact with yaw 0
  CHECK(c[0] == Vec3{10.0 + 2.3, 2.0 + 0.975, 0.0});
  CHECK(c[1] == Vec3{10.0 + 2.3, 2.0 - 0.975, 0.0});
  CHECK(c[2] == Vec3{10.0 - 2.3, 2.0 - 0.975, 0.0});
  CHECK(c[3] == Vec3{10.0 - 2.3, 2.0 + 0.975, 0.0});
  // top face repeats the footprint at full height
  for (int i = 0; i < 4; ++i) {
    CHECK(c[4 + i].x == c[i].x);
    CHECK(c[4 + i].y == c[i].y);
    CHECK(c[4 + i].z == 0.865 + 0.865);
  }

  box.yaw = kPi / 2.0;  // quarter turn: length now runs along +y
  const auto r = box_corners(box);
  CHECK(r[0].x == doctest::Approx(10.0 - 0.975).epsilon(1e-12));
  CHECK(r[0].y == doctest::Approx(2.0 + 2.3).epsilon(1e-12));
  CHECK(r[1].x == doctest::Approx(10.0 + 0.975).epsilon(1e-12));
  CHECK(r[1].y == doctest::Approx(2.0 + 2.3).epsilon(1e-12));
}

TEST_CASE("corner placement matches an independent rigid-motion oracle") {
  std::mt19937 gen(515);
  auto u01 = [&] { return static_cast<double>(gen() % 1000000) / 1000000.0; };
  for (int trial = 0; trial < 1000; ++trial) {
    Box3D box;
    box.center = {u01() * 80.0 - 40.0, u01() * 80.0 - 40.0, u01() * 2.0};
    box.size = {0.5 + 4.5 * u01(), 0.5 + 2.0 * u01(), 0.5 + 2.0 * u01()};
    box.yaw = (u01() * 2.0 - 1.0) * kPi;
    const auto corners = box_corners(box);

    // oracle: rotate each local corner with an explicit rotation matrix
    const double cy = std::cos(box.yaw), sy = std::sin(box.yaw);
    int idx = 0;
    double max_err = 0.0;
    for (int level = 0; level < 2; ++level) {
      const double lz = (level == 0 ? -0.5 : 0.5) * box.size.z;
      const double fwd[4] = {0.5, 0.5, -0.5, -0.5};
      const double left[4] = {0.5, -0.5, -0.5, 0.5};
      for (int k = 0; k < 4; ++k, ++idx) {
        const double lx = fwd[k] * box.size.x;
        const double ly = left[k] * box.size.y;
        const Vec3 want{box.center.x + cy * lx - sy * ly, box.center.y + sy * lx + cy * ly,
                        box.center.z + lz};
        max_err = std::max({max_err, std::abs(corners[idx].x - want.x),
                            std::abs(corners[idx].y - want.y), std::abs(corners[idx].z - want.z)});
      }
    }
    CAPTURE(trial);
    REQUIRE(max_err <= 1e-12);
    // footprint diagonal check: opposite corners are the full diagonal apart
    const double diag = std::hypot(box.size.x, box.size.y);
    CHECK(std::hypot(corners[0].x - corners[2].x, corners[0].y - corners[2].y) ==
          doctest::Approx(diag).epsilon(1e-12));
  }
}

TEST_CASE("project_box culls boxes behind the camera and flags partial ones") {
  const auto rig = post::default_rig();
  const auto& front = rig.views[1];
  Box3D box;
  box.size = {4.6, 1.95, 1.73};
  box.yaw = 0.0;

  box.center = {-20.0, 0.0, 0.865};  // fully behind the F camera
  CHECK(!project_box(box, front).has_value());

  box.center = {0.0, 0.0, 0.865};  // straddles the near plane
  const auto partial = project_box(box, front);
  REQUIRE(partial.has_value());
  CHECK(!partial->fully_visible);
  CHECK(!partial->hull.empty());

  box.center = {10.0, 0.0, 0.865};  // comfortably ahead
  const auto full = project_box(box, front);
  REQUIRE(full.has_value());
  CHECK(full->fully_visible);
  CHECK(full->view == "F");
}

TEST_CASE("a face-on box projects to a symmetric near-face rectangle") {
  const auto rig = post::default_rig();
  const auto& front = rig.views[1];
  Box3D box;
  box.agent_id = "a1";
  box.size = {4.6, 1.95, 1.73};
  box.yaw = 0.0;
  box.center = {10.0, 0.0, 0.865};
  const auto poly = project_box(box, front);
  REQUIRE(poly.has_value());
  // the near face hides the far face entirely: a 4-vertex hull
  REQUIRE(poly->hull.size() == 4);
  std::vector<double> us;
  for (const auto& p : poly->hull) us.push_back(p.x);
  std::sort(us.begin(), us.end());
  // left/right pairs mirror about the principal column u = 224
  CHECK(us[0] + us[3] == doctest::Approx(448.0).epsilon(1e-9));
  CHECK(us[1] + us[2] == doctest::Approx(448.0).epsilon(1e-9));
  CHECK(us[0] == doctest::Approx(us[1]).epsilon(1e-12));
  CHECK(us[2] == doctest::Approx(us[3]).epsilon(1e-12));
  CHECK(us[3] - us[0] > 100.0);  // the near face at 7.7 m spans widely
  // winding: down the left edge first (counterclockwise with y down)
  CHECK(poly->hull[0].x == poly->hull[1].x);
  CHECK(poly->hull[0].y < poly->hull[1].y);
  CHECK(poly->hull[2].x > poly->hull[1].x);
}

TEST_CASE("projected hulls satisfy the convex-hull contract on random boxes") {
  const auto rig = post::default_rig();
  std::mt19937 gen(616);
  auto u01 = [&] { return static_cast<double>(gen() % 1000000) / 1000000.0; };
  int produced = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    Box3D box;
    box.center = {u01() * 50.0 - 10.0, u01() * 30.0 - 15.0, u01() * 1.5};
    box.size = {0.5 + 4.5 * u01(), 0.5 + 2.0 * u01(), 0.5 + 2.0 * u01()};
    box.yaw = (u01() * 2.0 - 1.0) * kPi;
    const auto& view = rig.views[trial % 6];

    std::vector<Vec2> candidates;
    int retained = 0;
    bool inside_all = true;
    for (const Vec3& w : box_corners(box)) {
      const auto cp = post::project_point(w, view);
      if (cp.z <= 0.1) continue;
      ++retained;
      candidates.push_back({cp.u, cp.v});
      if (!(cp.u >= 0.0 && cp.u <= view.width - 1.0 && cp.v >= 0.0 &&
            cp.v <= view.height - 1.0))
        inside_all = false;
    }
    const auto poly = project_box(box, view);
    CAPTURE(trial);
    if (retained == 0) {
      REQUIRE(!poly.has_value());
      continue;
    }
    ++produced;
    REQUIRE(poly.has_value());
    CHECK(poly->fully_visible == (retained == 8 && inside_all));
    CHECK(poly->view == view.name);
    check_hull_contract(poly->hull, candidates);
  }
  CHECK(produced > 300);  // the sweep must actually exercise visible boxes
}

TEST_CASE("unify_views concatenates in fixed view order and splits back") {
  std::vector<ViewImageSeq> views;
  for (int k = 0; k < 6; ++k) {
    ViewImageSeq v;
    v.view = post::kViewOrder[k];
    v.seq = ImageSeq::blank(2, 4, 6);
    for (int t = 0; t < 2; ++t)
      for (int ch = 0; ch < 3; ++ch)
        for (int r = 0; r < 4; ++r)
          for (int c = 0; c < 6; ++c)
            v.seq.at(t, ch, r, c) = static_cast<std::uint8_t>(40 * k + 10 * t + 3 * ch + c);
    views.push_back(std::move(v));
  }
  const ImageSeq wide = unify_views(views);
  CHECK(wide.frames == 2);
  CHECK(wide.height == 4);
  CHECK(wide.width == 36);
  for (int t = 0; t < 2; ++t)
    for (int ch = 0; ch < 3; ++ch)
      for (int r = 0; r < 4; ++r)
        for (int k = 0; k < 6; ++k)
          for (int c = 0; c < 6; ++c)
            REQUIRE(wide.at(t, ch, r, 6 * k + c) == views[k].seq.at(t, ch, r, c));

  const auto split = split_views(wide);
  REQUIRE(split.size() == 6);
  CHECK(split == views);              // byte-exact inverse
  CHECK(unify_views(split) == wide);  // and back again

  auto permuted = views;
  std::swap(permuted[0], permuted[1]);
  CHECK_THROWS_AS((void)unify_views(permuted), std::invalid_argument);
  auto missing = views;
  missing.pop_back();
  CHECK_THROWS_AS((void)unify_views(missing), std::invalid_argument);
  auto uneven = views;
  uneven[3].seq = ImageSeq::blank(2, 4, 7);
  CHECK_THROWS_AS((void)unify_views(uneven), std::invalid_argument);

  ImageSeq odd = ImageSeq::blank(1, 2, 35);  // 35 does not divide by 6
  CHECK_THROWS_AS((void)split_views(odd), std::invalid_argument);
}

TEST_CASE("six full-size views unify to the wide-layout dimensions") {
  std::vector<ViewImageSeq> views;
  for (int k = 0; k < 6; ++k) views.push_back({post::kViewOrder[k], ImageSeq::blank(8, 256, 448)});
  const ImageSeq wide = unify_views(views);
  CHECK(wide.frames == 8);
  CHECK(wide.height == 256);
  CHECK(wide.width == 2688);
  CHECK(wide.data.size() == 8u * 3u * 256u * 2688u);
}

TEST_CASE("task names round-trip and reject unknown strings") {
  for (Task t : {Task::kFuturePrediction, Task::kFrontOutpaint, Task::kFullGeneration})
    CHECK(task_from_string(to_string(t)) == t);
  CHECK(to_string(Task::kFrontOutpaint) == "front_outpaint");
  CHECK_THROWS_AS((void)task_from_string("outpaint"), std::invalid_argument);
  CHECK_THROWS_AS((void)task_from_string(""), std::invalid_argument);
}

TEST_CASE("task masks partition the cell grid for all three tasks") {
  const auto future = make_mask(Task::kFuturePrediction, 8, 6);
  CHECK(future.ones() == 6);
  for (int k = 0; k < 6; ++k) CHECK(future.at(0, k) == 1);
  for (int t = 1; t < 8; ++t)
    for (int k = 0; k < 6; ++k) CHECK(future.at(t, k) == 0);

  const auto outpaint = make_mask(Task::kFrontOutpaint, 8, 6);
  CHECK(outpaint.ones() == 8);
  for (int t = 0; t < 8; ++t)
    for (int k = 0; k < 6; ++k) CHECK(outpaint.at(t, k) == (k == 1 ? 1 : 0));

  const auto full = make_mask(Task::kFullGeneration, 8, 6);
  CHECK(full.ones() == 0);

  // partition identity: every cell is binary, observed + generated = all
  for (const auto& m : {future, outpaint, full}) {
    CHECK(m.cells.size() == 48);
    std::size_t zeros = 0;
    for (auto c : m.cells) {
      CHECK((c == 0 || c == 1));
      zeros += c == 0;
    }
    CHECK(zeros + m.ones() == 48);
  }

  CHECK_THROWS_AS((void)make_mask(Task::kFullGeneration, 0, 6), std::invalid_argument);
  CHECK_THROWS_AS((void)make_mask(Task::kFullGeneration, 8, 5), std::invalid_argument);
}

namespace {

struct BundleFixture {
  dsl::ScenarioSpec spec;
  traj::TrajectorySet trajs;
  hdmap::HdMap map;
  post::CameraRig rig = post::default_rig();

  BundleFixture() {
    auto pr = dsl::parse(
        "scenario bundle_probe\nseed 11\nenv rain\nego: forward\n"
        "agent a1: vehicle cut_in\nagent p1: pedestrian pedestrian_cross\n");
    REQUIRE(pr.ok());
    spec = *pr.spec;
    trajs.trajs = traj::generate_scene(spec, traj::KernelParams{});
    Rng rng(derive_seed(spec.seed, "hdmap"));
    map = hdmap::synthesize(trajs.trajs, hdmap::SynthOptions{}, rng);
  }
};

}  // namespace

TEST_CASE("build_bundle assembles the unified clip with matching metadata") {
  BundleFixture fx;
  const auto bundle = build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFuturePrediction);

  CHECK(bundle.scenario_name == "bundle_probe");
  CHECK(bundle.seed == 11);
  CHECK(bundle.environment == std::vector<std::string>{"rain"});
  CHECK(bundle.task == Task::kFuturePrediction);
  CHECK(bundle.clip_start == 0);

  CHECK(bundle.hdmap.frames == 8);
  CHECK(bundle.hdmap.height == 256);
  CHECK(bundle.hdmap.width == 2688);
  CHECK(bundle.hdmap.data.size() == 8u * 3u * 256u * 2688u);
  CHECK(bundle.boxes.frames == 8);
  CHECK(bundle.boxes.width == 2688);
  CHECK(bundle.mask == make_mask(Task::kFuturePrediction, 8, 6));

  REQUIRE(bundle.timestamps.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(bundle.timestamps[i] == 0.25 * i);

  REQUIRE(bundle.lanes.size() == 8);
  REQUIRE(bundle.box_polygons.size() == 8);
  const std::set<std::string> names(post::kViewOrder.begin(), post::kViewOrder.end());
  std::size_t total_lanes = 0, total_boxes = 0;
  for (std::size_t i = 0; i < 8; ++i) {
    total_lanes += bundle.lanes[i].size();
    total_boxes += bundle.box_polygons[i].size();
    for (const auto& pl : bundle.lanes[i]) {
      CHECK(names.count(pl.view) == 1);
      CHECK((pl.map_class == "boundary" || pl.map_class == "crossing" ||
             pl.map_class == "divider"));
      REQUIRE(!pl.points.empty());
      CHECK(pl.points.front().chain_start);
    }
    for (const auto& bp : bundle.box_polygons[i]) {
      CHECK(names.count(bp.view) == 1);
      CHECK((bp.agent_id == "a1" || bp.agent_id == "p1"));
      CHECK(bp.frame == static_cast<int>(i));
      CHECK(!bp.hull.empty());
    }
  }
  CHECK(total_lanes > 0);
  CHECK(total_boxes > 0);

  // both condition stacks carry actual strokes
  const bool lane_pixel =
      std::any_of(bundle.hdmap.data.begin(), bundle.hdmap.data.end(), [](auto b) { return b != 0; });
  const bool box_pixel =
      std::any_of(bundle.boxes.data.begin(), bundle.boxes.data.end(), [](auto b) { return b != 0; });
  CHECK(lane_pixel);
  CHECK(box_pixel);
}

TEST_CASE("build_bundle is deterministic") {
  BundleFixture fx;
  const auto a = build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFullGeneration);
  const auto b = build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFullGeneration);
  CHECK(a.hdmap == b.hdmap);
  CHECK(a.boxes == b.boxes);
  CHECK(a.mask == b.mask);
  CHECK(a.timestamps == b.timestamps);
  CHECK(a.mask.ones() == 0);

  testutil::TempDir da("bundle_a"), db("bundle_b");
  write_bundle(a, da.str());
  write_bundle(b, db.str());
  CHECK(testutil::tree_bytes(da.str()) == testutil::tree_bytes(db.str()));
}

TEST_CASE("clip chaining shares exactly one frame between consecutive clips") {
  BundleFixture fx;
  BundleOptions opt;
  opt.raster.width = 256;
  opt.raster.height = 256;
  const auto first = build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFuturePrediction, opt);
  const int start = next_clip_start(first);
  CHECK(start == 7);

  BundleOptions opt2 = opt;
  opt2.clip_start = start;
  const auto second = build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFuturePrediction, opt2);
  CHECK(second.clip_start == 7);
  CHECK(second.timestamps.front() == first.timestamps.back());  // shared frame
  for (std::size_t i = 1; i < second.timestamps.size(); ++i)
    CHECK(second.timestamps[i] > second.timestamps[i - 1]);
  CHECK(next_clip_start(second) == 14);
}

TEST_CASE("build_bundle validates its inputs") {
  BundleFixture fx;
  BundleOptions opt;
  opt.raster.width = 128;
  opt.raster.height = 128;

  BundleOptions bad = opt;
  bad.clip_frames = 0;
  CHECK_THROWS_AS((void)build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFullGeneration, bad),
                  std::invalid_argument);

  bad = opt;
  bad.clip_start = 75;  // 75 + 8 > 80
  CHECK_THROWS_AS((void)build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFullGeneration, bad),
                  std::out_of_range);

  auto broken_rig = fx.rig;
  broken_rig.views.pop_back();
  CHECK_THROWS_AS(
      (void)build_bundle(fx.spec, fx.trajs, fx.map, broken_rig, Task::kFullGeneration, opt),
      std::invalid_argument);

  auto no_ego = fx.trajs;
  no_ego.trajs.erase(no_ego.trajs.begin());
  REQUIRE(no_ego.trajs.front().agent_id != "ego");
  CHECK_THROWS_AS((void)build_bundle(fx.spec, no_ego, fx.map, fx.rig, Task::kFullGeneration, opt),
                  std::invalid_argument);
}

TEST_CASE("bundles round-trip through their directory format") {
  BundleFixture fx;
  BundleOptions opt;
  opt.clip_frames = 3;  // small clip keeps the directory light
  opt.raster.width = 256;
  opt.raster.height = 256;
  const auto bundle = build_bundle(fx.spec, fx.trajs, fx.map, fx.rig, Task::kFrontOutpaint, opt);

  testutil::TempDir dir("bundle_rt");
  write_bundle(bundle, dir.str());
  for (const char* name :
       {"hdmap_cond_000.ppm", "hdmap_cond_002.ppm", "boxes_cond_000.ppm", "boxes_cond_002.ppm",
        "mask.json", "meta.json", "conditions.json"})
    CHECK(!testutil::slurp(dir.str() + "/" + name).empty());
  CHECK(testutil::slurp(dir.str() + "/meta.json").find("scenforge.bundle_meta/1") !=
        std::string::npos);

  const auto back = read_bundle(dir.str());
  CHECK(back.scenario_name == bundle.scenario_name);
  CHECK(back.seed == bundle.seed);
  CHECK(back.environment == bundle.environment);
  CHECK(back.task == bundle.task);
  CHECK(back.clip_start == bundle.clip_start);
  CHECK(back.timestamps == bundle.timestamps);
  CHECK(back.hdmap == bundle.hdmap);  // image payloads byte-exact
  CHECK(back.boxes == bundle.boxes);
  CHECK(back.mask == bundle.mask);
  REQUIRE(back.lanes.size() == bundle.lanes.size());
  REQUIRE(back.box_polygons.size() == bundle.box_polygons.size());
  for (std::size_t i = 0; i < bundle.lanes.size(); ++i) {
    REQUIRE(back.lanes[i].size() == bundle.lanes[i].size());
    for (std::size_t k = 0; k < bundle.lanes[i].size(); ++k) {
      CHECK(back.lanes[i][k].view == bundle.lanes[i][k].view);
      CHECK(back.lanes[i][k].map_class == bundle.lanes[i][k].map_class);
      CHECK(back.lanes[i][k].points.size() == bundle.lanes[i][k].points.size());
    }
    REQUIRE(back.box_polygons[i].size() == bundle.box_polygons[i].size());
    for (std::size_t k = 0; k < bundle.box_polygons[i].size(); ++k) {
      CHECK(back.box_polygons[i][k].agent_id == bundle.box_polygons[i][k].agent_id);
      CHECK(back.box_polygons[i][k].hull.size() == bundle.box_polygons[i][k].hull.size());
    }
  }

  // a second write of the recovered bundle reproduces the tree byte for byte
  testutil::TempDir dir2("bundle_rt2");
  write_bundle(back, dir2.str());
  CHECK(testutil::tree_bytes(dir2.str()) == testutil::tree_bytes(dir.str()));

  CHECK_THROWS_AS((void)read_bundle(dir.str() + "/missing"), std::runtime_error);
}
