#ifndef SITESWARM_IK_IK_HPP_
#define SITESWARM_IK_IK_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "siteswarm/sim/world.hpp"

namespace siteswarm::ik {

// Sign of the elbow joint: ElbowUp has q2 >= 0.
enum class Branch { ElbowUp, ElbowDown };

struct IkSolution {
  std::vector<double> angles;
  Branch branch = Branch::ElbowUp;
  double residual = 0.0;  // tip position error of FK(angles), m
};

// Closed form for a 3-joint planar arm (two positioning links + wrist).
// `target` and `base_pose` are in the world frame. Among the in-limit
// branches the one closest to `current` (joint-space L2) wins; each joint is
// shifted by multiples of 2 pi to fit its limits. Throws UnreachableError
// outside the annulus or when no branch fits the limits.
IkSolution solve_ik(const sim::ArmSpec& spec, const sim::Pose2& target,
                    const sim::Pose2& base_pose, std::span<const double> current);
// Same, restricted to one branch.
IkSolution solve_ik(const sim::ArmSpec& spec, const sim::Pose2& target,
                    const sim::Pose2& base_pose, std::span<const double> current,
                    Branch branch);

Branch branch_of(std::span<const double> angles);

enum class IkFailure { None, Unreachable, JointDelta, Collision, Precision };

struct IkRun {
  bool success = false;
  IkFailure failure = IkFailure::None;
  std::optional<std::size_t> failure_step;
  std::string diagnostic;
  std::vector<std::vector<double>> path;  // joint angles after each waypoint
  std::vector<Branch> branches;
  std::vector<double> tip_errors;         // distance to goal after each waypoint
  double final_error = 0.0;
};

struct FinishOptions {
  std::size_t max_steps = 40;
  double waypoints_per_decimetre = 20.0;
  double handoff_threshold = 0.1;  // precondition on the start tip error
  double success_tolerance = 1e-3;
  int ignore_object = -1;  // object the gripper is closing on
  sim::CollisionFilter filter;  // further pairs to ignore
};

// Straight-line Cartesian interpolation of the gripper pose from its current
// value to `goal`, solving IK per waypoint on the current elbow branch and
// applying each waypoint to `world` (held objects follow). Stops at the first
// collision involving `arm`, unreachable waypoint or joint step larger than
// the arm's per-step delta; `world` then holds the last valid waypoint.
// Throws UsageError when the start is farther than the handoff threshold.
IkRun finish_with_ik(const sim::WorldSpec& spec, sim::WorldState& world,
                     std::size_t arm, const sim::Pose2& goal,
                     const FinishOptions& opts = {});

const char* to_string(IkFailure f);
const char* to_string(Branch b);

}  // namespace siteswarm::ik

#endif  // SITESWARM_IK_IK_HPP_
