#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "siteswarm/errors.hpp"
#include "siteswarm/harness/oracles.hpp"
#include "siteswarm/sim/world.hpp"

using namespace siteswarm;
using sim::Pose2;
using sim::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;

sim::ArmSpec arm(std::vector<double> links, Pose2 mount = {}) {
  sim::ArmSpec a;
  a.mount = mount;
  a.link_lengths = links;
  a.lower.assign(links.size(), -kPi);
  a.upper.assign(links.size(), kPi);
  return a;
}

sim::WorldSpec two_arms(double base_gap) {
  sim::WorldSpec w;
  w.arms = {arm({0.3, 0.25, 0.15}, {Vec2(-base_gap / 2, 0.0), 0.0}),
            arm({0.3, 0.25, 0.15}, {Vec2(base_gap / 2, 0.0), 0.0})};
  return w;
}

std::vector<Eigen::VectorXd> actions(const sim::WorldSpec& spec, double v = 0.0) {
  std::vector<Eigen::VectorXd> out;
  for (Eigen::Index d : spec.action_dims()) out.push_back(Eigen::VectorXd::Constant(d, v));
  return out;
}

}  // namespace

TEST_CASE("forward kinematics cases") {
  const sim::ArmSpec a = arm({1.0, 1.0});
  const sim::ArmChain c0 = sim::forward_kinematics(a, std::vector<double>{0.0, 0.0}, {});
  CHECK(c0.tip.position.isApprox(Vec2(2.0, 0.0), 1e-15));
  CHECK(c0.tip.heading == 0.0);
  const sim::ArmChain c1 = sim::forward_kinematics(a, std::vector<double>{kPi / 2, 0.0}, {});
  CHECK((c1.tip.position - Vec2(0.0, 2.0)).norm() < 1e-15);
  CHECK(c1.tip.heading == doctest::Approx(kPi / 2));
  CHECK(c1.links.size() == 2);
}

TEST_CASE("forward kinematics: tip within total reach") {
  const sim::ArmSpec a = arm({0.3, 0.25, 0.15}, {Vec2(0.4, -0.1), 0.7});
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-kPi, kPi);
  for (int i = 0; i < 10000; ++i) {
    std::vector<double> q{u(rng), u(rng), u(rng)};
    const Vec2 tip = sim::forward_kinematics(a, q, a.mount).tip.position;
    REQUIRE((tip - a.mount.position).norm() <= 0.7 + 1e-12);
  }
  CHECK_THROWS_AS(sim::forward_kinematics(a, std::vector<double>{0.0}, {}), ShapeError);
}

TEST_CASE("segment distance cases") {
  CHECK(sim::segment_distance({Vec2(-1, 0), Vec2(1, 0)}, {Vec2(0, -1), Vec2(0, 1)}) == 0.0);
  CHECK(sim::segment_distance({Vec2(0, 0), Vec2(1, 0)}, {Vec2(0, 1), Vec2(1, 1)}) == 1.0);
  CHECK(sim::segment_distance({Vec2(0, 0), Vec2(1, 0)}, {Vec2(2, 0), Vec2(3, 0)}) == 1.0);
  CHECK(sim::segment_distance({Vec2(0, 0), Vec2(0, 0)}, {Vec2(3, 4), Vec2(3, 4)}) == 5.0);
}

TEST_CASE("segment distance vs dense sampling") {
  const harness::OracleResult r = harness::segment_distance_oracle(12, 20);
  CHECK_MESSAGE(r.passed, r.detail);
  CHECK(r.max_error < 2e-3);
}

TEST_CASE("collisions: folded overlap vs wide separation") {
  const sim::WorldSpec spec = two_arms(0.2);
  // Left arm reaches right, right arm reaches left at the same height.
  sim::WorldState w = sim::make_world(spec, {{0.0, 0.0, 0.0}, {kPi, 0.0, 0.0}}, {}, {});
  CHECK(w.collisions.self);
  sim::WorldSpec wide = two_arms(3.0);
  sim::WorldState far = sim::make_world(wide, {{kPi, 0.0, 0.0}, {0.0, 0.0, 0.0}}, {}, {});
  CHECK_FALSE(far.collisions.self);
  CHECK_FALSE(far.collisions.object);
}

TEST_CASE("collisions: agree with all-pairs brute force") {
  const harness::OracleResult r = harness::collision_oracle(31, 100);
  CHECK_MESSAGE(r.passed, r.detail);
}

TEST_CASE("collisions: filter silences an arm/object pair") {
  const sim::WorldSpec spec = two_arms(3.0);
  std::vector<sim::Object> objs{sim::make_bolt("b", Vec2(-1.5 + 0.3, 0.0))};
  sim::WorldState w = sim::make_world(spec, {{0.0, 0.0, 0.0}, {0.0, 0.0, 0.0}}, {}, objs);
  CHECK(w.collisions.arm_object[0] == 1);
  CHECK_FALSE(sim::detect_collisions(spec, w, sim::CollisionFilter(0, 0)).object);
}

TEST_CASE("step: zero action, limits, reversibility") {
  sim::WorldSpec spec = two_arms(3.0);
  spec.arms[0].upper[0] = 0.2;
  const sim::WorldState w0 = sim::make_world(spec, {{0.1, 0.3, -0.2}, {0.0, 0.5, 0.5}}, {}, {});
  sim::WorldState w1 = sim::step(spec, w0, actions(spec));
  CHECK(w1.joints == w0.joints);
  CHECK(w1.step == w0.step + 1);

  auto a = actions(spec, 1.0);
  const sim::WorldState pushed = sim::step(spec, w0, a);
  CHECK(pushed.joints[0][0] == 0.2);

  auto plus = actions(spec), minus = actions(spec);
  plus[1](1) = 0.5;
  minus[1](1) = -0.5;
  const sim::WorldState back = sim::step(spec, sim::step(spec, w0, plus), minus);
  CHECK(back.joints[1][1] == doctest::Approx(w0.joints[1][1]).epsilon(1e-15));

  auto bad = actions(spec);
  bad.pop_back();
  CHECK_THROWS_AS(sim::step(spec, w0, bad), ShapeError);
}

TEST_CASE("grasp condition thresholds") {
  sim::WorldSpec spec;
  spec.arms = {arm({0.3, 0.25, 0.15})};
  const std::vector<std::vector<double>> q{{0.0, 0.0, 0.0}};  // tip at (0.7, 0), axis +x
  const auto world_with = [&](const Vec2& p) {
    return sim::make_world(spec, q, {}, {sim::make_bolt("b", p)});
  };
  // 0.05 m ahead: alignment 1.
  CHECK(sim::grasp_condition(spec, world_with(Vec2(0.75, 0.0)), 0, 0));
  // 0.05 m at alignment 0.99.
  const double c = 0.99, s = std::sqrt(1 - c * c);
  CHECK(sim::grasp_condition(spec, world_with(Vec2(0.7 + 0.05 * c, 0.05 * s)), 0, 0));
  CHECK_FALSE(sim::grasp_condition(spec, world_with(Vec2(1.2, 0.0)), 0, 0));
  // 0.05 m at alignment 0.2.
  const double s2 = std::sqrt(1 - 0.04);
  CHECK(sim::alignment({Vec2(0.7, 0.0), 0.0}, Vec2(0.7 + 0.05 * 0.2, 0.05 * s2)) == doctest::Approx(0.2));
  CHECK_FALSE(sim::grasp_condition(spec, world_with(Vec2(0.7 + 0.05 * 0.2, 0.05 * s2)), 0, 0));
  // Just inside / outside the configured cutoff.
  const double ca = spec.grasp_alignment + 1e-6, cb = spec.grasp_alignment - 1e-6;
  CHECK(sim::grasp_condition(spec, world_with(Vec2(0.7 + 0.05 * ca, 0.05 * std::sqrt(1 - ca * ca))), 0, 0));
  CHECK_FALSE(sim::grasp_condition(spec, world_with(Vec2(0.7 + 0.05 * cb, 0.05 * std::sqrt(1 - cb * cb))), 0, 0));
}

TEST_CASE("grasp: attach carries the object, release drops it") {
  sim::WorldSpec spec;
  spec.arms = {arm({0.3, 0.25, 0.15})};
  sim::WorldState w = sim::make_world(spec, {{0.0, 0.0, 0.0}}, {}, {sim::make_bolt("b", Vec2(0.75, 0.0))});
  w = sim::try_grasp(spec, w, 0, 0);
  REQUIRE(w.grasped[0] == 0);
  CHECK(sim::holder_of(w, 0) == 0);
  CHECK_THROWS_AS(sim::try_grasp(spec, w, 0, 0), UsageError);
  std::vector<Eigen::VectorXd> a{Eigen::VectorXd::Zero(3)};
  a[0](0) = 1.0;
  const sim::WorldState moved = sim::step(spec, w, a);
  const Pose2 g = sim::gripper_pose(spec, moved, 0);
  CHECK((moved.objects[0].pose.position - (g.position + 0.05 * g.axis())).norm() < 1e-12);
  sim::WorldState dropped = moved;
  sim::release(dropped, 0);
  CHECK(dropped.grasped[0] == -1);
  const sim::WorldState still = sim::step(spec, dropped, a);
  CHECK(still.objects[0].pose == dropped.objects[0].pose);
}

TEST_CASE("mobile base: the arm mount follows the carrier") {
  sim::WorldSpec spec;
  spec.mobile_base = true;
  spec.arms = {arm({0.3, 0.25, 0.15}, {Vec2(0.0, 0.2), -kPi / 2})};
  sim::WorldState w = sim::make_world(spec, {{0.0, 0.0, 0.0}}, {Vec2::Zero(), 0.0}, {});
  std::vector<Eigen::VectorXd> a{Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)};
  a[1](0) = 1.0;
  const sim::WorldState next = sim::step(spec, w, a);
  CHECK(next.base.position.x() == doctest::Approx(spec.max_speed));
  CHECK(sim::arm_base_pose(spec, next, 0).position.x() == doctest::Approx(spec.max_speed));
  CHECK(sim::arm_base_pose(spec, next, 0).position.y() == doctest::Approx(0.2));
  a[1](0) = 0.0;
  a[1](1) = 1.0;
  const sim::WorldState turned = sim::step(spec, next, a);
  CHECK(turned.base.heading == doctest::Approx(spec.max_turn));
}
