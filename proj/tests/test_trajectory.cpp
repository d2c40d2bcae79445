#include "scenforge/trajectory.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "scenforge/dsl.hpp"
#include "test_util.hpp"

using namespace scenforge;
using namespace scenforge::traj;

namespace {

dsl::ScenarioSpec must_parse(const std::string& text) {
  auto r = dsl::parse(text);
  REQUIRE(r.ok());
  return *r.spec;
}

// A target moving straight down +x at a constant speed; enough points for any
// follower.
Trajectory straight_target(int n, double speed, double y = 0.0) {
  Trajectory t;
  t.agent_id = "ego";
  t.category = AgentCategory::kVehicle;
  for (int i = 0; i < n; ++i)
    t.points.push_back({speed * 0.25 * i, y, 0.0, 0.25 * i});
  t.speeds.assign(static_cast<std::size_t>(n), speed);
  return t;
}

}  // namespace

TEST_CASE("generated scenes replay byte-identically against the stored golden") {
  const auto spec = must_parse(
      "scenario golden\nseed 42\nego: forward\nagent a1: vehicle cut_in\n");
  const auto trajs = generate_scene(spec, KernelParams{});
  const std::string fresh = trajectories_to_json(trajs, KernelParams{}.t_inter);
  const std::string stored =
      testutil::slurp(testutil::data_dir() + "/golden_cutin_seed42.json");
  CHECK(fresh == stored);
}

TEST_CASE("trajectories share the fixed clock and length") {
  const auto spec = must_parse(
      "scenario kin\nseed 7\nego: forward\n"
      "agent a1: vehicle cut_in\nagent p1: pedestrian pedestrian_walk\n");
  for (const auto& t : generate_scene(spec, KernelParams{})) {
    REQUIRE(t.points.size() == 80);
    REQUIRE(t.speeds.size() == t.points.size());
    for (std::size_t i = 0; i < t.points.size(); ++i)
      CHECK(t.points[i].t == doctest::Approx(0.25 * static_cast<double>(i)).epsilon(1e-12));
  }
}

TEST_CASE("position deltas are reproduced from stored yaw and speed") {
  // Waypoint t stores the post-update yaw/speed that produce waypoint t+1.
  const auto spec = must_parse(
      "scenario kin2\nseed 11\nego: steer_left\n"
      "agent a1: vehicle cut_in\nagent p1: pedestrian pedestrian_cross\n");
  const auto trajs = generate_scene(spec, KernelParams{});
  REQUIRE(trajs.size() == 3);
  for (const auto& t : trajs) {
    for (std::size_t i = 0; i + 1 < t.points.size(); ++i) {
      const double dx = t.speeds[i] * 0.25 * std::cos(t.points[i].yaw);
      const double dy = t.speeds[i] * 0.25 * std::sin(t.points[i].yaw);
      CHECK(t.points[i + 1].x == t.points[i].x + dx);
      CHECK(t.points[i + 1].y == t.points[i].y + dy);
    }
  }
}

TEST_CASE("cut_in keeps its speed strictly above the target at every step") {
  Rng rng(123);
  const auto target = straight_target(80, 8.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = cut_in(KernelParams{}, target, 10.0, {}, "a1", rng);
    REQUIRE(t.speeds.size() == 80);
    for (std::size_t i = 0; i < t.speeds.size(); ++i)
      CHECK(t.speeds[i] >= target.speeds[i] + 0.5);
  }
}

TEST_CASE("cut_in enters the target lane and stays inside the half-meter band") {
  Rng rng(2024);
  const auto target = straight_target(80, 8.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto t = cut_in(KernelParams{}, target, 10.0, {}, "a1", rng);
    const double y0 = t.points.front().y;
    CHECK(std::abs(y0) >= 3.0);  // spawns a full lane offset away
    CHECK(std::abs(y0) <= 4.0);
    // once the lateral error first drops to 0.5 m it never grows past it again
    std::size_t settle = t.points.size();
    for (std::size_t i = 0; i < t.points.size(); ++i)
      if (std::abs(t.points[i].y) <= 0.5) {
        settle = i;
        break;
      }
    REQUIRE(settle < t.points.size());
    for (std::size_t i = settle; i < t.points.size(); ++i)
      CHECK(std::abs(t.points[i].y) <= 0.5);
    CHECK(std::abs(t.points.back().y) <= 0.5);
  }
}

TEST_CASE("cut_in rejects targets shorter than the requested horizon") {
  Rng rng(5);
  const auto target = straight_target(40, 8.0);
  CHECK_THROWS_AS((void)cut_in(KernelParams{}, target, 10.0, {}, "a1", rng), ScenarioError);
}

TEST_CASE("update_yaw leaves the range alone when nobody is near") {
  const auto self = straight_target(10, 8.0, 0.0);
  auto far = straight_target(10, 8.0, 100.0);
  far.agent_id = "far";
  const Trajectory* others[] = {&far};
  const Interval base{-0.1, 0.2};
  const auto out = update_yaw(0.0, base, 10.0, self, others, 3);
  CHECK(out.lo == base.lo);
  CHECK(out.hi == base.hi);
}

TEST_CASE("update_yaw steers right when the intruder is ahead-left") {
  const auto self = straight_target(10, 8.0, 0.0);
  auto intruder = straight_target(10, 8.0, 3.0);  // 3 m to the left
  intruder.agent_id = "x";
  const Trajectory* others[] = {&intruder};
  const Interval base{-0.1, 0.1};  // centered; shift = half-width = 0.1
  const auto out = update_yaw(0.0, base, 10.0, self, others, 0);
  // shifted midpoint must be negative (steer right, away from +y)
  CHECK((out.lo + out.hi) / 2.0 < 0.0);
  CHECK(out.lo == doctest::Approx(-0.2).epsilon(1e-12));
  CHECK(out.hi == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("update_yaw steers left when the intruder is to the right") {
  const auto self = straight_target(10, 8.0, 0.0);
  auto intruder = straight_target(10, 8.0, -3.0);
  intruder.agent_id = "x";
  const Trajectory* others[] = {&intruder};
  const Interval base{-0.1, 0.1};
  const auto out = update_yaw(0.0, base, 10.0, self, others, 0);
  CHECK((out.lo + out.hi) / 2.0 > 0.0);
}

TEST_CASE("update_yaw breaks distance ties toward the lowest index") {
  const auto self = straight_target(10, 8.0, 0.0);
  auto left = straight_target(10, 8.0, 3.0);
  auto right = straight_target(10, 8.0, -3.0);  // same distance
  left.agent_id = "l";
  right.agent_id = "r";
  const Interval base{-0.1, 0.1};
  {
    const Trajectory* others[] = {&left, &right};
    const auto out = update_yaw(0.0, base, 10.0, self, others, 0);
    CHECK((out.lo + out.hi) / 2.0 < 0.0);  // avoided the left one
  }
  {
    const Trajectory* others[] = {&right, &left};
    const auto out = update_yaw(0.0, base, 10.0, self, others, 0);
    CHECK((out.lo + out.hi) / 2.0 > 0.0);  // avoided the right one
  }
}

TEST_CASE("update_yaw uses the fallback shift for a degenerate centered range") {
  const auto self = straight_target(10, 8.0, 0.0);
  auto intruder = straight_target(10, 8.0, 3.0);
  intruder.agent_id = "x";
  const Trajectory* others[] = {&intruder};
  const auto out = update_yaw(0.0, Interval{0.0, 0.0}, 10.0, self, others, 0);
  CHECK(out.lo == doctest::Approx(-0.05).epsilon(1e-12));
  CHECK(out.hi == doctest::Approx(-0.05).epsilon(1e-12));
}

TEST_CASE("forward keeps the heading within its drift envelope") {
  const auto spec = must_parse("scenario fwd\nseed 3\nego: forward speed=10\n");
  const auto trajs = generate_scene(spec, KernelParams{});
  REQUIRE(trajs.size() == 1);
  const auto& t = trajs[0];
  CHECK(t.agent_id == "ego");
  CHECK(t.points.front().x == 0.0);
  CHECK(t.points.front().y == 0.0);
  for (const auto& p : t.points) CHECK(std::abs(p.yaw) <= 0.087266462599716474 + 1e-12);
  // net motion is dominated by +x
  CHECK(t.points.back().x > 100.0);
  CHECK(std::abs(t.points.back().y) < t.points.back().x * 0.15);
}

TEST_CASE("u_turn reverses the heading over 500 seeds") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto spec = must_parse("scenario u\nseed " + std::to_string(seed) +
                                 "\nego: u_turn\n");
    const auto trajs = generate_scene(spec, KernelParams{});
    const double h0 = trajs[0].points.front().yaw;
    const double h1 = trajs[0].points.back().yaw;
    const double err = std::abs(wrap_angle(h1 - h0 - kPi));
    CHECK(err <= 10.0 * kPi / 180.0);
  }
}

TEST_CASE("pedestrian_cross moves across the road, not along it") {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    const auto spec = must_parse("scenario pc\nseed " + std::to_string(seed) +
                                 "\nego: forward\nagent p1: pedestrian pedestrian_cross\n");
    const auto trajs = generate_scene(spec, KernelParams{});
    REQUIRE(trajs.size() == 2);
    const auto& p = trajs[1];
    CHECK(p.category == AgentCategory::kPedestrian);
    const double lat = std::abs(p.points.back().y - p.points.front().y);
    const double lon = std::abs(p.points.back().x - p.points.front().x);
    CHECK(lat >= 6.0);   // crosses at least both lanes of one side
    CHECK(lon <= 1.0);   // essentially no drift along the road
  }
}

TEST_CASE("scenes are bit-exact per seed and differ across seeds") {
  const std::string body = "\nego: forward\nagent a1: vehicle cut_in\n";
  const auto s9a = generate_scene(must_parse("scenario r\nseed 9" + body), KernelParams{});
  const auto s9b = generate_scene(must_parse("scenario r\nseed 9" + body), KernelParams{});
  const auto s10 = generate_scene(must_parse("scenario r\nseed 10" + body), KernelParams{});
  CHECK(s9a == s9b);
  CHECK(s9a != s10);
}

TEST_CASE("agent sub-streams are independent of insertion order") {
  // Adding a second agent must not change the first agent's trajectory.
  const auto one = generate_scene(
      must_parse("scenario i\nseed 21\nego: forward\nagent a1: vehicle follow target=ego\n"),
      KernelParams{});
  const auto two = generate_scene(
      must_parse("scenario i\nseed 21\nego: forward\nagent a1: vehicle follow target=ego\n"
                 "agent p9: pedestrian pedestrian_walk start=(40,30)\n"),
      KernelParams{});
  REQUIRE(one.size() == 2);
  REQUIRE(two.size() == 3);
  CHECK(one[0] == two[0]);
  CHECK(one[1] == two[1]);
}

TEST_CASE("generate_scene enforces the pairwise separation floor") {
  const auto spec = must_parse(
      "scenario sep\nseed 4\nego: forward\n"
      "agent a1: vehicle cut_in target=ego\nagent a2: vehicle follow target=ego\n");
  const auto trajs = generate_scene(spec, KernelParams{});
  CHECK(min_pairwise_distance(trajs) >= 2.0);
}

TEST_CASE("generate_scene orders outputs ego-first, then declaration order") {
  const auto spec = must_parse(
      "scenario ord\nseed 2\nego: forward\n"
      "agent b: vehicle follow target=ego\nagent a: vehicle overtake target=b\n");
  const auto trajs = generate_scene(spec, KernelParams{});
  REQUIRE(trajs.size() == 3);
  CHECK(trajs[0].agent_id == "ego");
  CHECK(trajs[1].agent_id == "b");
  CHECK(trajs[2].agent_id == "a");
}

TEST_CASE("min_pairwise_distance reports the true minimum") {
  auto a = straight_target(3, 4.0, 0.0);
  auto b = straight_target(3, 4.0, 5.0);
  b.agent_id = "b";
  b.points[2].y = 1.5;  // closest moment: 1.5 m
  CHECK(min_pairwise_distance({a, b}) == doctest::Approx(1.5).epsilon(1e-12));
}

TEST_CASE("trajectory JSON round-trips exactly") {
  const auto spec = must_parse(
      "scenario rt\nseed 17\nego: forward\nagent a1: vehicle cut_in\n"
      "agent p1: pedestrian pedestrian_cross\n");
  const auto trajs = generate_scene(spec, KernelParams{});
  const std::string text = trajectories_to_json(trajs, 0.25);
  const auto back = trajectories_from_json(text);
  CHECK(back.t_inter == 0.25);
  REQUIRE(back.trajs.size() == trajs.size());
  CHECK(back.trajs == trajs);
  // serialization is deterministic
  CHECK(trajectories_to_json(back.trajs, back.t_inter) == text);
}

TEST_CASE("trajectories_from_json rejects garbage") {
  CHECK_THROWS_AS((void)trajectories_from_json("not json"), std::runtime_error);
  CHECK_THROWS_AS((void)trajectories_from_json("{\"schema\":\"bogus/9\"}"), std::runtime_error);
}
