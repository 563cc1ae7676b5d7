#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "siteswarm/errors.hpp"
#include "siteswarm/harness/oracles.hpp"
#include "siteswarm/ik/ik.hpp"
#include "siteswarm/sim/world.hpp"

using namespace siteswarm;
using sim::Pose2;
using sim::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;

sim::ArmSpec arm(std::vector<double> links) {
  sim::ArmSpec a;
  a.link_lengths = links;
  a.lower.assign(links.size(), -kPi);
  a.upper.assign(links.size(), kPi);
  return a;
}

sim::WorldSpec single_arm() {
  sim::WorldSpec w;
  w.arms = {arm({0.3, 0.25, 0.15})};
  return w;
}

}  // namespace

TEST_CASE("solve_ik: full extension and symmetry with a zero-length wrist") {
  const sim::ArmSpec a = arm({1.0, 1.0, 0.0});
  const ik::IkSolution s = ik::solve_ik(a, {Vec2(2.0, 0.0), 0.0}, {}, std::vector<double>{0.1, 0.1, 0.0});
  CHECK(std::abs(s.angles[0]) < 1e-7);
  CHECK(std::abs(s.angles[1]) < 1e-7);
  const ik::IkSolution t = ik::solve_ik(a, {Vec2(0.0, 2.0), kPi / 2}, {}, std::vector<double>{1.5, 0.0, 0.0});
  CHECK(t.angles[0] == doctest::Approx(kPi / 2).epsilon(1e-7));
  CHECK(std::abs(t.angles[1]) < 1e-7);
}

TEST_CASE("solve_ik: round trip and annulus oracle") {
  const harness::OracleResult r = harness::ik_oracle(5, 10000);
  CHECK_MESSAGE(r.passed, r.detail);
  CHECK(r.max_error < 1e-9);
}

TEST_CASE("solve_ik: branch choice follows the current joints") {
  const sim::ArmSpec a = arm({0.3, 0.25, 0.15});
  const std::vector<double> up{0.4, 0.9, -0.5}, down{1.3, -0.9, 0.4};
  const Pose2 target = sim::forward_kinematics(a, up, {}).tip;
  const ik::IkSolution s = ik::solve_ik(a, target, {}, up);
  CHECK(s.branch == ik::branch_of(up));
  const ik::IkSolution d = ik::solve_ik(a, target, {}, up, ik::Branch::ElbowDown);
  CHECK(d.branch == ik::Branch::ElbowDown);
  CHECK(d.angles[1] < 0.0);
  CHECK(ik::branch_of(down) == ik::Branch::ElbowDown);
  CHECK(d.residual < 1e-9);
}

TEST_CASE("solve_ik: unreachable targets") {
  const sim::ArmSpec a = arm({0.3, 0.25, 0.15});
  CHECK_THROWS_AS(ik::solve_ik(a, {Vec2(1.0, 0.0), 0.0}, {}, std::vector<double>(3, 0.0)), UnreachableError);
  // Wrist centre at the base: inside the inner radius.
  CHECK_THROWS_AS(ik::solve_ik(a, {Vec2(0.15, 0.0), 0.0}, {}, std::vector<double>(3, 0.0)), UnreachableError);
}

TEST_CASE("finish_with_ik: goal equal to the current pose") {
  const sim::WorldSpec spec = single_arm();
  sim::WorldState w = sim::make_world(spec, {{0.3, 0.8, -0.4}}, {}, {});
  const Pose2 g = sim::gripper_pose(spec, w, 0);
  const ik::IkRun r = ik::finish_with_ik(spec, w, 0, g, {});
  CHECK(r.success);
  CHECK(r.path.empty());
}

TEST_CASE("finish_with_ik: short move ahead converges monotonically") {
  const sim::WorldSpec spec = single_arm();
  sim::WorldState w = sim::make_world(spec, {{0.3, 1.4, -0.6}}, {}, {});
  const Pose2 g0 = sim::gripper_pose(spec, w, 0);
  const Pose2 goal{g0.position + 0.08 * g0.axis(), g0.heading};
  const ik::IkRun r = ik::finish_with_ik(spec, w, 0, goal, {});
  INFO(r.diagnostic);
  REQUIRE(r.success);
  CHECK(r.final_error < 1e-3);
  for (std::size_t k = 1; k < r.tip_errors.size(); ++k) CHECK(r.tip_errors[k] < r.tip_errors[k - 1]);
  for (ik::Branch b : r.branches) CHECK(b == ik::branch_of(std::vector<double>{0.3, 1.4, -0.6}));
  CHECK((sim::gripper_pose(spec, w, 0).position - goal.position).norm() == doctest::Approx(r.final_error));
}

TEST_CASE("finish_with_ik: platform across the path fails with a collision") {
  sim::WorldSpec spec = single_arm();
  sim::WorldState w0 = sim::make_world(spec, {{0.3, 0.8, -0.4}}, {}, {});
  const Pose2 g0 = sim::gripper_pose(spec, w0, 0);
  const Vec2 mid = g0.position + 0.04 * g0.axis();
  const Vec2 n(-g0.axis().y(), g0.axis().x());
  sim::WorldState w = sim::make_world(
      spec, w0.joints, {}, {sim::make_fixture("platform", {mid - 0.1 * n, mid + 0.1 * n})});
  REQUIRE_FALSE(w.collisions.object);
  const ik::IkRun r = ik::finish_with_ik(spec, w, 0, {g0.position + 0.08 * g0.axis(), g0.heading}, {});
  CHECK_FALSE(r.success);
  CHECK(r.failure == ik::IkFailure::Collision);
  CHECK(r.failure_step.has_value());
  CHECK_FALSE(r.diagnostic.empty());
  CHECK(sim::detect_collisions(spec, w).arm_object[0] == 1);
}

TEST_CASE("finish_with_ik: refuses to start beyond the handoff threshold") {
  const sim::WorldSpec spec = single_arm();
  sim::WorldState w = sim::make_world(spec, {{0.3, 0.8, -0.4}}, {}, {});
  const Pose2 g0 = sim::gripper_pose(spec, w, 0);
  CHECK_THROWS_AS(ik::finish_with_ik(spec, w, 0, {g0.position + Vec2(0.2, 0.0), g0.heading}, {}), UsageError);
}

TEST_CASE("finish_with_ik: targets past the reach report unreachable") {
  const sim::WorldSpec spec = single_arm();
  sim::WorldState w = sim::make_world(spec, {{0.0, 0.05, 0.0}}, {}, {});
  const Pose2 g0 = sim::gripper_pose(spec, w, 0);
  const ik::IkRun r = ik::finish_with_ik(spec, w, 0, {g0.position + Vec2(0.09, 0.0), g0.heading}, {});
  CHECK_FALSE(r.success);
  CHECK(r.failure == ik::IkFailure::Unreachable);
  CHECK_FALSE(r.diagnostic.empty());
}

TEST_CASE("finish_with_ik: near-straight elbow bunches waypoints instead of jumping") {
  const sim::WorldSpec spec = single_arm();
  const std::vector<double> q0 = {0.4, 0.01, -0.3};
  sim::WorldState w = sim::make_world(spec, {q0}, {}, {});
  const Pose2 g0 = sim::gripper_pose(spec, w, 0);
  // Pulling the tip toward the base must bend the elbow open from ~0.
  const Vec2 in = -(g0.position - Vec2::Zero()).normalized();
  const Pose2 goal{g0.position + 0.06 * in, g0.heading};
  const ik::IkRun r = ik::finish_with_ik(spec, w, 0, goal, {});
  INFO(r.diagnostic);
  REQUIRE(r.success);
  CHECK(r.path.size() <= 40);
  std::vector<double> prev = q0;
  for (std::size_t k = 0; k < r.path.size(); ++k) {
    for (std::size_t j = 0; j < 3; ++j) {
      CHECK(std::abs(r.path[k][j] - prev[j]) <= spec.arms[0].max_joint_delta + 1e-12);
    }
    CHECK(r.branches[k] == ik::Branch::ElbowUp);
    // Every waypoint lies on the segment from start to goal.
    sim::WorldState probe = sim::make_world(spec, {r.path[k]}, {}, {});
    const Vec2 p = sim::gripper_pose(spec, probe, 0).position;
    const Vec2 d = goal.position - g0.position;
    const double along = (p - g0.position).dot(d) / d.squaredNorm();
    CHECK((g0.position + along * d - p).norm() < 1e-9);
    prev = r.path[k];
  }
  // The first uniform waypoint would have needed more than the limit.
  const Pose2 first{g0.position + (0.06 / 12.0) * in, g0.heading};
  const ik::IkSolution direct = ik::solve_ik(spec.arms[0], first, {}, q0, ik::Branch::ElbowUp);
  CHECK(std::abs(direct.angles[1] - q0[1]) > spec.arms[0].max_joint_delta);
}
