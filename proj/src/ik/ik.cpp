#include "siteswarm/ik/ik.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "siteswarm/errors.hpp"

namespace siteswarm::ik {

using sim::Pose2;
using sim::Vec2;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Shifts `angle` by multiples of 2 pi into [lo, hi], preferring the
// candidate nearest `ref`. Returns nullopt when none fits.
std::optional<double> fit_limits(double angle, double lo, double hi, double ref) {
  std::optional<double> best;
  const double base = angle - kTwoPi * std::round((angle - ref) / kTwoPi);
  for (int k = -2; k <= 2; ++k) {
    const double a = base + k * kTwoPi;
    if (a < lo - 1e-12 || a > hi + 1e-12) continue;
    const double c = std::clamp(a, lo, hi);
    if (!best || std::abs(c - ref) < std::abs(*best - ref)) best = c;
  }
  return best;
}

struct Candidate {
  std::vector<double> angles;
  Branch branch;
};

std::vector<Candidate> candidates(const sim::ArmSpec& spec, const Pose2& target,
                                  const Pose2& base_pose,
                                  std::span<const double> current) {
  if (spec.joint_count() != 3) {
    throw ShapeError("ik: closed form needs a 3-joint arm, got " +
                     std::to_string(spec.joint_count()));
  }
  if (current.size() != 3) throw ShapeError("ik: current angles must have 3 entries");
  const double l1 = spec.link_lengths[0], l2 = spec.link_lengths[1],
               l3 = spec.link_lengths[2];
  const Pose2 local = sim::compose(sim::inverse(base_pose), target);
  const double phi = local.heading;
  const Vec2 wrist = local.position - l3 * Vec2(std::cos(phi), std::sin(phi));
  const double r2 = wrist.squaredNorm();
  const double r = std::sqrt(r2);
  const double tol = 1e-12;
  if (r > l1 + l2 + tol || r < std::abs(l1 - l2) - tol) {
    throw UnreachableError("ik: wrist distance " + std::to_string(r) +
                           " outside annulus [" + std::to_string(std::abs(l1 - l2)) +
                           ", " + std::to_string(l1 + l2) + "]");
  }
  const double c2 = std::clamp((r2 - l1 * l1 - l2 * l2) / (2.0 * l1 * l2), -1.0, 1.0);
  const double q2_abs = std::acos(c2);

  std::vector<Candidate> out;
  for (Branch b : {Branch::ElbowUp, Branch::ElbowDown}) {
    const double q2 = b == Branch::ElbowUp ? q2_abs : -q2_abs;
    const double q1 = std::atan2(wrist.y(), wrist.x()) -
                      std::atan2(l2 * std::sin(q2), l1 + l2 * std::cos(q2));
    const double q3 = phi - q1 - q2;
    const double raw[3] = {q1, q2, q3};
    std::vector<double> angles(3);
    bool ok = true;
    for (std::size_t k = 0; k < 3 && ok; ++k) {
      auto fit = fit_limits(raw[k], spec.lower[k], spec.upper[k], current[k]);
      if (fit) {
        angles[k] = *fit;
      } else {
        ok = false;
      }
    }
    if (ok) out.push_back({std::move(angles), b});
    if (q2_abs == 0.0) break;  // both branches coincide
  }
  return out;
}

IkSolution finish(const sim::ArmSpec& spec, const Pose2& target, const Pose2& base_pose,
                  Candidate c) {
  IkSolution sol;
  sol.branch = c.branch;
  sol.angles = std::move(c.angles);
  const sim::ArmChain chain = sim::forward_kinematics(spec, sol.angles, base_pose);
  sol.residual = (chain.tip.position - target.position).norm();
  return sol;
}

double joint_distance(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s;
}

}  // namespace

Branch branch_of(std::span<const double> angles) {
  return angles.size() > 1 && angles[1] < 0.0 ? Branch::ElbowDown : Branch::ElbowUp;
}

IkSolution solve_ik(const sim::ArmSpec& spec, const Pose2& target,
                    const Pose2& base_pose, std::span<const double> current) {
  std::vector<Candidate> cs = candidates(spec, target, base_pose, current);
  if (cs.empty()) throw UnreachableError("ik: no branch satisfies the joint limits");
  std::size_t best = 0;
  for (std::size_t i = 1; i < cs.size(); ++i) {
    if (joint_distance(cs[i].angles, current) < joint_distance(cs[best].angles, current)) {
      best = i;
    }
  }
  return finish(spec, target, base_pose, std::move(cs[best]));
}

IkSolution solve_ik(const sim::ArmSpec& spec, const Pose2& target,
                    const Pose2& base_pose, std::span<const double> current,
                    Branch branch) {
  std::vector<Candidate> cs = candidates(spec, target, base_pose, current);
  for (Candidate& c : cs) {
    // At full extension/fold both branches coincide; accept either tag.
    if (c.branch == branch || cs.size() == 1) {
      c.branch = branch;
      return finish(spec, target, base_pose, std::move(c));
    }
  }
  throw UnreachableError(std::string("ik: ") + to_string(branch) +
                         " branch violates the joint limits");
}

IkRun finish_with_ik(const sim::WorldSpec& spec, sim::WorldState& world,
                     std::size_t arm, const Pose2& goal, const FinishOptions& opts) {
  const sim::ArmSpec& arm_spec = spec.arms.at(arm);
  const Pose2 start = sim::gripper_pose(spec, world, arm);
  const double start_err = (goal.position - start.position).norm();
  if (start_err > opts.handoff_threshold + 1e-12) {
    throw UsageError("ik: gripper is " + std::to_string(start_err) +
                     " m from the goal, beyond the handoff threshold");
  }

  IkRun run;
  const double dtheta = sim::wrap_angle(goal.heading - start.heading);
  if (start_err == 0.0 && dtheta == 0.0) {
    run.success = true;
    return run;
  }

  // Nominal spacing: the Cartesian density, raised so that the wrist rotation
  // per waypoint stays under half the joint-delta limit. A waypoint that still
  // needs a larger joint step (near a straight elbow) is moved closer by
  // halving, so waypoints stay on the line but bunch up where needed.
  const double by_dist = std::ceil(start_err / 0.1 * opts.waypoints_per_decimetre);
  const double by_turn = std::ceil(std::abs(dtheta) / (0.5 * arm_spec.max_joint_delta));
  const double nominal =
      1.0 / std::min(std::max({1.0, by_dist, by_turn}),
                     static_cast<double>(std::max<std::size_t>(opts.max_steps, 1)));
  constexpr int kMaxHalvings = 8;

  const Branch branch = branch_of(world.joints[arm]);
  const Pose2 base = sim::arm_base_pose(spec, world, arm);
  sim::CollisionFilter filter = opts.filter;
  filter.add(static_cast<int>(arm), opts.ignore_object);

  double s = 0.0;
  for (std::size_t k = 1; s < 1.0; ++k) {
    if (k > opts.max_steps) {
      run.failure = IkFailure::JointDelta;
      run.failure_step = k;
      run.diagnostic = "ik: " + std::to_string(opts.max_steps) +
                       " waypoints used with the goal not reached (s = " + std::to_string(s) + ")";
      run.final_error = (sim::gripper_pose(spec, world, arm).position - goal.position).norm();
      return run;
    }
    double ds = std::min(nominal, 1.0 - s);
    IkSolution sol;
    std::string too_far;
    for (int h = 0; h <= kMaxHalvings; ++h, ds *= 0.5) {
      const double at = ds >= 1.0 - s ? 1.0 : s + ds;
      const Pose2 wp{start.position + at * (goal.position - start.position),
                     start.heading + at * dtheta};
      try {
        sol = solve_ik(arm_spec, wp, base, world.joints[arm], branch);
      } catch (const UnreachableError& e) {
        run.failure = IkFailure::Unreachable;
        run.failure_step = k;
        run.diagnostic = e.what();
        run.final_error = (sim::gripper_pose(spec, world, arm).position - goal.position).norm();
        return run;
      }
      too_far.clear();
      for (std::size_t j = 0; j < sol.angles.size() && too_far.empty(); ++j) {
        const double d = std::abs(sol.angles[j] - world.joints[arm][j]);
        if (d > arm_spec.max_joint_delta + 1e-12) {
          too_far = "ik: joint " + std::to_string(j) + " would move " + std::to_string(d) +
                    " rad in one step";
        }
      }
      if (too_far.empty()) break;
    }
    if (!too_far.empty()) {
      run.failure = IkFailure::JointDelta;
      run.failure_step = k;
      run.diagnostic = too_far;
      run.final_error = (sim::gripper_pose(spec, world, arm).position - goal.position).norm();
      return run;
    }
    s = ds >= 1.0 - s ? 1.0 : s + ds;
    world.joints[arm] = sol.angles;
    sim::update_grasped(spec, world);
    world.collisions = sim::detect_collisions(spec, world, filter);

    run.path.push_back(sol.angles);
    run.branches.push_back(sol.branch);
    const double err = (sim::gripper_pose(spec, world, arm).position - goal.position).norm();
    run.tip_errors.push_back(err);

    for (const sim::Contact& c : world.collisions.contacts) {
      const bool mine = c.arm == static_cast<int>(arm) || c.other_arm == static_cast<int>(arm);
      if (!mine) continue;
      run.failure = IkFailure::Collision;
      run.failure_step = k;
      run.diagnostic = c.kind == sim::Contact::Kind::ArmArm
                           ? "ik: self-collision with arm " +
                                 std::to_string(c.arm == static_cast<int>(arm)
                                                    ? c.other_arm
                                                    : c.arm)
                           : "ik: contact with object " + std::to_string(c.object);
      run.final_error = err;
      return run;
    }
  }

  run.final_error = run.tip_errors.back();
  if (run.final_error < opts.success_tolerance) {
    run.success = true;
  } else {
    run.failure = IkFailure::Precision;
    run.failure_step = run.path.size();
    run.diagnostic = "ik: final tip error " + std::to_string(run.final_error) + " m";
  }
  return run;
}

const char* to_string(IkFailure f) {
  switch (f) {
    case IkFailure::None: return "none";
    case IkFailure::Unreachable: return "unreachable";
    case IkFailure::JointDelta: return "joint-delta";
    case IkFailure::Collision: return "collision";
    case IkFailure::Precision: return "precision";
  }
  return "?";
}

const char* to_string(Branch b) {
  return b == Branch::ElbowUp ? "elbow-up" : "elbow-down";
}

}  // namespace siteswarm::ik
