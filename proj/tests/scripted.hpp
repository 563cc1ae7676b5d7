#ifndef SITESWARM_TESTS_SCRIPTED_HPP_
#define SITESWARM_TESTS_SCRIPTED_HPP_

#include <algorithm>
#include <cmath>

#include "siteswarm/errors.hpp"
#include "siteswarm/harness/evaluate.hpp"
#include "siteswarm/ik/ik.hpp"
#include "siteswarm/sim/world.hpp"
#include "siteswarm/tasks/task_env.hpp"

namespace scripted {

using namespace siteswarm;

// Joint-space step toward an IK solution for `goal`; zeros when unreachable.
inline Eigen::VectorXd step_toward(const tasks::TaskEnv& env, std::size_t arm, const sim::Pose2& goal) {
  const sim::WorldSpec& spec = env.spec().world;
  const sim::WorldState& w = env.world();
  const sim::ArmSpec& a = spec.arms[arm];
  Eigen::VectorXd act = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(a.joint_count()));
  try {
    const ik::IkSolution s = ik::solve_ik(a, goal, sim::arm_base_pose(spec, w, arm), w.joints[arm]);
    for (std::size_t j = 0; j < a.joint_count(); ++j) {
      act(static_cast<Eigen::Index>(j)) =
          std::clamp((s.angles[j] - w.joints[arm][j]) / a.max_joint_delta, -1.0, 1.0);
    }
  } catch (const UnreachableError&) {
  }
  return act;
}

// Pick-and-place controller for the single-object-per-arm tasks (1, 2,
// reach): approach the grasp point radially from the arm base, then carry it
// to the target keeping the current heading.
inline harness::Controller pick_and_place(double standoff = 0.05) {
  return [standoff](const std::vector<Eigen::VectorXd>&, const tasks::TaskEnv& env) {
    const tasks::TaskSpec& spec = env.spec();
    const sim::WorldState& w = env.world();
    std::vector<Eigen::VectorXd> out;
    for (std::size_t arm = 0; arm < spec.world.arms.size(); ++arm) {
      const tasks::ArmRole& role = spec.roles[arm];
      const sim::Object& obj = w.objects[static_cast<std::size_t>(role.object)];
      const sim::Vec2 p = obj.world_grasp_point();
      if (!env.progress().picked[arm]) {
        const sim::Vec2 base = sim::arm_base_pose(spec.world, w, arm).position;
        const sim::Vec2 dir = (p - base).normalized();
        out.push_back(step_toward(env, arm, {p - standoff * dir, std::atan2(dir.y(), dir.x())}));
      } else {
        const sim::Pose2 g = sim::gripper_pose(spec.world, w, arm);
        const sim::Vec2 offset = p - g.position;
        out.push_back(step_toward(env, arm, {role.target.position - offset, g.heading}));
      }
    }
    return out;
  };
}

}  // namespace scripted

#endif  // SITESWARM_TESTS_SCRIPTED_HPP_
