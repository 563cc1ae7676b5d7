#include "siteswarm/sim/world.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "siteswarm/errors.hpp"

namespace siteswarm::sim {

double ArmSpec::reach() const {
  double r = 0.0;
  for (double l : link_lengths) r += l;
  return r;
}

void ArmSpec::validate() const {
  const std::size_t n = link_lengths.size();
  if (n == 0) throw ConfigError("arm: no links");
  if (lower.size() != n || upper.size() != n) {
    throw ConfigError("arm: need one limit pair per joint");
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (!(link_lengths[k] >= 0.0)) throw ConfigError("arm: link lengths must be >= 0");
    if (!(lower[k] <= upper[k])) throw ConfigError("arm: joint limits out of order");
  }
  if (!(link_lengths[0] > 0.0)) throw ConfigError("arm: first link must have positive length");
  if (!(max_joint_delta > 0.0)) throw ConfigError("arm: joint delta limit must be > 0");
}

ArmChain forward_kinematics(const ArmSpec& spec, std::span<const double> angles,
                            const Pose2& base_pose) {
  if (angles.size() != spec.joint_count()) {
    throw ShapeError("fk: " + std::to_string(angles.size()) + " angles for " +
                     std::to_string(spec.joint_count()) + " joints");
  }
  ArmChain chain;
  chain.links.reserve(angles.size());
  Vec2 p = base_pose.position;
  double heading = base_pose.heading;
  for (std::size_t k = 0; k < angles.size(); ++k) {
    heading += angles[k];
    const Vec2 next = p + spec.link_lengths[k] * Vec2(std::cos(heading), std::sin(heading));
    chain.links.push_back({p, next});
    p = next;
  }
  chain.tip = {p, heading};
  return chain;
}

Object make_bolt(std::string name, const Vec2& position, double radius) {
  Object o;
  o.kind = ObjectKind::Bolt;
  o.name = std::move(name);
  o.pose = {position, 0.0};
  o.discs.push_back({Vec2::Zero(), radius});
  o.movable = true;
  return o;
}

Object make_plate(std::string name, const Pose2& handle_pose, double length,
                  double handle_offset, double hole_x) {
  Object o;
  o.kind = ObjectKind::Plate;
  o.name = std::move(name);
  o.pose = handle_pose;
  o.segments.push_back(
      {Vec2(-0.5 * length, -handle_offset), Vec2(0.5 * length, -handle_offset)});
  o.tags.push_back(Vec2(hole_x, -handle_offset));
  o.movable = true;
  return o;
}

Object make_box(std::string name, const Pose2& centre, double width, double depth,
                double tag_clearance) {
  Object o;
  o.kind = ObjectKind::Box;
  o.name = std::move(name);
  o.pose = centre;
  const double hx = 0.5 * width, hy = 0.5 * depth;
  const Vec2 c[4] = {Vec2(-hx, -hy), Vec2(hx, -hy), Vec2(hx, hy), Vec2(-hx, hy)};
  for (int k = 0; k < 4; ++k) o.segments.push_back({c[k], c[(k + 1) % 4]});
  o.tags.push_back(Vec2(-hx - tag_clearance, 0.0));
  o.tags.push_back(Vec2(hx + tag_clearance, 0.0));
  o.movable = true;
  return o;
}

Object make_fixture(std::string name, const Segment2& segment) {
  Object o;
  o.kind = ObjectKind::Fixture;
  o.name = std::move(name);
  o.segments.push_back(segment);
  return o;
}

std::vector<Eigen::Index> WorldSpec::action_dims() const {
  std::vector<Eigen::Index> dims;
  for (const ArmSpec& a : arms) dims.push_back(static_cast<Eigen::Index>(a.joint_count()));
  if (mobile_base) dims.push_back(2);
  return dims;
}

WorldState make_world(const WorldSpec& spec, std::vector<std::vector<double>> joints,
                      const Pose2& base, std::vector<Object> objects) {
  if (joints.size() != spec.arms.size()) {
    throw ShapeError("world: need one joint vector per arm");
  }
  for (std::size_t a = 0; a < spec.arms.size(); ++a) {
    spec.arms[a].validate();
    if (joints[a].size() != spec.arms[a].joint_count()) {
      throw ShapeError("world: joint count mismatch for arm " + std::to_string(a));
    }
    for (std::size_t k = 0; k < joints[a].size(); ++k) {
      joints[a][k] = std::clamp(joints[a][k], spec.arms[a].lower[k], spec.arms[a].upper[k]);
    }
  }
  WorldState w;
  w.joints = std::move(joints);
  w.base = base;
  w.objects = std::move(objects);
  w.grasped.assign(spec.arms.size(), -1);
  w.grasp_offset.assign(spec.arms.size(), Pose2{});
  w.collisions = detect_collisions(spec, w);
  return w;
}

Pose2 arm_base_pose(const WorldSpec& spec, const WorldState& world, std::size_t arm) {
  return spec.mobile_base ? compose(world.base, spec.arms.at(arm).mount)
                          : spec.arms.at(arm).mount;
}

ArmChain arm_chain(const WorldSpec& spec, const WorldState& world, std::size_t arm) {
  return forward_kinematics(spec.arms.at(arm), world.joints.at(arm),
                            arm_base_pose(spec, world, arm));
}

Pose2 gripper_pose(const WorldSpec& spec, const WorldState& world, std::size_t arm) {
  return arm_chain(spec, world, arm).tip;
}

Segment2 base_footprint(const WorldSpec& spec, const WorldState& world) {
  return transform(world.base, spec.base_footprint);
}

double alignment(const Pose2& gripper, const Vec2& point) {
  const Vec2 d = point - gripper.position;
  const double n = d.norm();
  if (n == 0.0) return 1.0;
  return std::clamp(gripper.axis().dot(d) / n, -1.0, 1.0);
}

double segment_object_distance(const Segment2& s, const Object& o) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment2& ls : o.segments) {
    best = std::min(best, segment_distance(s, transform(o.pose, ls)));
  }
  for (const Disc2& ld : o.discs) {
    best = std::min(best, disc_segment_distance(transform(o.pose, ld), s));
  }
  return best;
}

double object_distance(const Object& a, const Object& b) {
  double best = std::numeric_limits<double>::infinity();
  for (const Segment2& ls : a.segments) {
    best = std::min(best, segment_object_distance(transform(a.pose, ls), b));
  }
  for (const Disc2& ld : a.discs) {
    const Disc2 d = transform(a.pose, ld);
    for (const Segment2& s : b.segments) {
      best = std::min(best, disc_segment_distance(d, transform(b.pose, s)));
    }
    for (const Disc2& e : b.discs) {
      best = std::min(best, disc_distance(d, transform(b.pose, e)));
    }
  }
  return best;
}

void CollisionFilter::add(int arm, int object) {
  if (arm < 0 || object < 0 || ignores(static_cast<std::size_t>(arm),
                                       static_cast<std::size_t>(object))) {
    return;
  }
  pairs.emplace_back(arm, object);
}

bool CollisionFilter::ignores(std::size_t arm, std::size_t object) const {
  for (const auto& [a, o] : pairs) {
    if (a == static_cast<int>(arm) && o == static_cast<int>(object)) return true;
  }
  return false;
}

int holder_of(const WorldState& world, std::size_t object) {
  for (std::size_t a = 0; a < world.grasped.size(); ++a) {
    if (world.grasped[a] == static_cast<int>(object)) return static_cast<int>(a);
  }
  return -1;
}

CollisionReport detect_collisions(const WorldSpec& spec, const WorldState& world,
                                  const CollisionFilter& filter) {
  const double margin = spec.collision_margin;
  const std::size_t n_arms = spec.arms.size();
  CollisionReport rep;
  rep.arm_object.assign(n_arms, 0);

  std::vector<ArmChain> chains;
  chains.reserve(n_arms);
  for (std::size_t a = 0; a < n_arms; ++a) chains.push_back(arm_chain(spec, world, a));

  const auto ignored = [&](std::size_t arm, std::size_t obj) {
    return filter.ignores(arm, obj);
  };

  // Arm vs arm.
  for (std::size_t a = 0; a < n_arms; ++a) {
    for (std::size_t b = a + 1; b < n_arms; ++b) {
      for (std::size_t i = 0; i < chains[a].links.size(); ++i) {
        for (std::size_t j = 0; j < chains[b].links.size(); ++j) {
          const double d = segment_distance(chains[a].links[i], chains[b].links[j]);
          if (d < margin) {
            rep.self = true;
            rep.contacts.push_back({Contact::Kind::ArmArm, static_cast<int>(a),
                                    static_cast<int>(i), static_cast<int>(b),
                                    static_cast<int>(j), -1, d});
          }
        }
      }
    }
  }

  // Arm links vs objects not held by that arm.
  for (std::size_t a = 0; a < n_arms; ++a) {
    for (std::size_t o = 0; o < world.objects.size(); ++o) {
      if (world.grasped[a] == static_cast<int>(o) || ignored(a, o)) continue;
      for (std::size_t i = 0; i < chains[a].links.size(); ++i) {
        const double d = segment_object_distance(chains[a].links[i], world.objects[o]);
        if (d < margin) {
          rep.arm_object[a] = 1;
          rep.contacts.push_back({Contact::Kind::ArmObject, static_cast<int>(a),
                                  static_cast<int>(i), -1, -1, static_cast<int>(o), d});
        }
      }
    }
  }

  // A held object moves with its arm and counts as part of it.
  for (std::size_t a = 0; a < n_arms; ++a) {
    const int held = world.grasped[a];
    if (held < 0) continue;
    for (std::size_t o = 0; o < world.objects.size(); ++o) {
      if (static_cast<int>(o) == held || ignored(a, o)) continue;
      const double d = object_distance(world.objects[static_cast<std::size_t>(held)],
                                       world.objects[o]);
      if (d < margin) {
        rep.arm_object[a] = 1;
        rep.contacts.push_back({Contact::Kind::HeldObject, static_cast<int>(a), -1, -1,
                                -1, static_cast<int>(o), d});
      }
    }
  }

  if (spec.mobile_base) {
    const Segment2 fp = base_footprint(spec, world);
    for (std::size_t o = 0; o < world.objects.size(); ++o) {
      if (holder_of(world, o) >= 0) continue;
      const double d = segment_object_distance(fp, world.objects[o]);
      if (d < margin) {
        rep.base_object = true;
        rep.contacts.push_back({Contact::Kind::BaseObject, -1, -1, -1, -1,
                                static_cast<int>(o), d});
      }
    }
  }

  rep.object = rep.base_object;
  for (std::uint8_t f : rep.arm_object) rep.object = rep.object || f;
  return rep;
}

void update_grasped(const WorldSpec& spec, WorldState& world) {
  for (std::size_t a = 0; a < world.grasped.size(); ++a) {
    const int o = world.grasped[a];
    if (o < 0) continue;
    world.objects[static_cast<std::size_t>(o)].pose =
        compose(gripper_pose(spec, world, a), world.grasp_offset[a]);
  }
}

WorldState step(const WorldSpec& spec, const WorldState& world,
                std::span<const Eigen::VectorXd> actions) {
  const std::vector<Eigen::Index> dims = spec.action_dims();
  if (actions.size() != dims.size()) {
    throw ShapeError("step: expected " + std::to_string(dims.size()) +
                     " action vectors, got " + std::to_string(actions.size()));
  }
  for (std::size_t i = 0; i < dims.size(); ++i) {
    if (actions[i].size() != dims[i]) {
      throw ShapeError("step: action " + std::to_string(i) + " has length " +
                       std::to_string(actions[i].size()));
    }
    if (!actions[i].allFinite()) throw NumericError("step: non-finite action");
  }

  WorldState next = world;
  for (std::size_t a = 0; a < spec.arms.size(); ++a) {
    const ArmSpec& arm = spec.arms[a];
    for (std::size_t k = 0; k < arm.joint_count(); ++k) {
      const double u = std::clamp(actions[a](static_cast<Eigen::Index>(k)), -1.0, 1.0);
      next.joints[a][k] =
          std::clamp(next.joints[a][k] + u * arm.max_joint_delta, arm.lower[k], arm.upper[k]);
    }
  }

  if (spec.mobile_base) {
    const Eigen::VectorXd& u = actions[spec.arms.size()];
    const double v = std::clamp(u(0), -1.0, 1.0) * spec.max_speed;
    const double w = std::clamp(u(1), -1.0, 1.0) * spec.max_turn;
    next.base.heading = world.base.heading + w;
    next.base.position = world.base.position + v * next.base.axis();
    const Vec2 moved = next.base.position - world.base.position;
    if (moved.squaredNorm() > 0.0) {
      // Kinematic push: a free box touched by the base footprint is carried
      // along by the base displacement.
      const Segment2 fp = base_footprint(spec, next);
      for (std::size_t o = 0; o < next.objects.size(); ++o) {
        Object& obj = next.objects[o];
        if (obj.kind != ObjectKind::Box || holder_of(next, o) >= 0) continue;
        if (segment_object_distance(fp, obj) < spec.collision_margin) {
          obj.pose.position += moved;
        }
      }
    }
  }

  update_grasped(spec, next);
  next.collisions = detect_collisions(spec, next);
  next.step = world.step + 1;
  return next;
}

bool grasp_condition(const WorldSpec& spec, const WorldState& world, std::size_t arm,
                     std::size_t object) {
  const Pose2 g = gripper_pose(spec, world, arm);
  const Vec2 p = world.objects.at(object).world_grasp_point();
  return (p - g.position).norm() < spec.grasp_distance &&
         alignment(g, p) >= spec.grasp_alignment;
}

void attach(const WorldSpec& spec, WorldState& world, std::size_t arm,
            std::size_t object) {
  const Pose2 g = gripper_pose(spec, world, arm);
  world.grasped.at(arm) = static_cast<int>(object);
  world.grasp_offset.at(arm) = compose(inverse(g), world.objects.at(object).pose);
}

void release(WorldState& world, std::size_t arm) {
  world.grasped.at(arm) = -1;
  world.grasp_offset.at(arm) = Pose2{};
}

WorldState try_grasp(const WorldSpec& spec, const WorldState& world, std::size_t arm,
                     std::size_t object) {
  if (holder_of(world, object) >= 0) {
    throw UsageError("grasp: object " + std::to_string(object) + " is already held");
  }
  if (!grasp_condition(spec, world, arm, object)) return world;
  WorldState next = world;
  attach(spec, next, arm, object);
  next.collisions = detect_collisions(spec, next);
  return next;
}

}  // namespace siteswarm::sim
