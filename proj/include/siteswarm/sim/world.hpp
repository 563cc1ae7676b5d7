#ifndef SITESWARM_SIM_WORLD_HPP_
#define SITESWARM_SIM_WORLD_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "siteswarm/sim/geometry.hpp"

namespace siteswarm::sim {

// Planar serial arm. Joint k rotates link k relative to link k-1 (joint 0
// relative to the mount).
struct ArmSpec {
  Pose2 mount;  // in the carrier frame (world when there is no mobile base)
  std::vector<double> link_lengths;
  std::vector<double> lower;
  std::vector<double> upper;
  double max_joint_delta = 0.15;  // rad per step at |action| = 1
  double jaw_half_width = 0.02;

  std::size_t joint_count() const { return link_lengths.size(); }
  double reach() const;
  void validate() const;
};

struct ArmChain {
  std::vector<Segment2> links;
  Pose2 tip;  // centre of the gripper tips; heading = gripper axis
};

ArmChain forward_kinematics(const ArmSpec& spec, std::span<const double> angles,
                            const Pose2& base_pose);

enum class ObjectKind { Bolt, Plate, Box, Fixture };

// Rigid object with collision geometry in its local frame.
struct Object {
  ObjectKind kind = ObjectKind::Fixture;
  std::string name;
  Pose2 pose;
  std::vector<Segment2> segments;
  std::vector<Disc2> discs;
  Vec2 grasp_point = Vec2::Zero();  // local
  std::vector<Vec2> tags;           // local: plate holes, box handle tags
  bool movable = false;

  Vec2 world_grasp_point() const { return transform(pose, grasp_point); }
  Vec2 world_tag(std::size_t i) const { return transform(pose, tags.at(i)); }
};

Object make_bolt(std::string name, const Vec2& position, double radius = 0.008);
// Pose is the handle pose; the plate body is a `length` segment along the
// local x axis, offset by `handle_offset` on local -y. One hole tag at +hole_x.
Object make_plate(std::string name, const Pose2& handle_pose, double length = 0.3,
                  double handle_offset = 0.04, double hole_x = 0.08);
// Rectangle `width` (local x) by `depth` (local y) with handle tags just past
// both short ends.
Object make_box(std::string name, const Pose2& centre, double width = 0.6,
                double depth = 0.3, double tag_clearance = 0.03);
Object make_fixture(std::string name, const Segment2& segment);

struct WorldSpec {
  std::vector<ArmSpec> arms;
  bool mobile_base = false;
  double max_speed = 0.05;  // m per step at |action| = 1
  double max_turn = 0.15;   // rad per step at |action| = 1
  Segment2 base_footprint{Vec2(-0.2, 0.0), Vec2(0.2, 0.0)};  // carrier frame
  double collision_margin = 0.01;
  double grasp_distance = 0.1;
  double grasp_alignment = 0.95;

  std::size_t agent_count() const { return arms.size() + (mobile_base ? 1 : 0); }
  std::vector<Eigen::Index> action_dims() const;
};

struct Contact {
  enum class Kind { ArmArm, ArmObject, HeldObject, BaseObject };
  Kind kind = Kind::ArmArm;
  int arm = -1;
  int link = -1;
  int other_arm = -1;
  int other_link = -1;
  int object = -1;
  double distance = 0.0;
};

struct CollisionReport {
  bool self = false;    // c_s: links of two different arms within margin
  bool object = false;  // c_o: any arm/held-object/base contact with an object
  std::vector<std::uint8_t> arm_object;  // per-arm c_o
  bool base_object = false;
  std::vector<Contact> contacts;
};

struct WorldState {
  std::vector<std::vector<double>> joints;
  Pose2 base;  // carrier pose; identity when there is no mobile base
  std::vector<Object> objects;
  std::vector<int> grasped;         // per arm: object index or -1
  std::vector<Pose2> grasp_offset;  // object pose in the gripper frame
  std::int64_t step = 0;
  CollisionReport collisions;
};

WorldState make_world(const WorldSpec& spec, std::vector<std::vector<double>> joints,
                      const Pose2& base, std::vector<Object> objects);

Pose2 arm_base_pose(const WorldSpec& spec, const WorldState& world, std::size_t arm);
ArmChain arm_chain(const WorldSpec& spec, const WorldState& world, std::size_t arm);
Pose2 gripper_pose(const WorldSpec& spec, const WorldState& world, std::size_t arm);
Segment2 base_footprint(const WorldSpec& spec, const WorldState& world);

// Cosine between the gripper axis and the tip->point direction (1 at the tip).
double alignment(const Pose2& gripper, const Vec2& point);

// (arm, object) pairs excluded from a collision query, e.g. the object an IK
// controller is closing the gripper on. A pair also silences that arm's held
// object against the object.
struct CollisionFilter {
  std::vector<std::pair<int, int>> pairs;

  CollisionFilter() = default;
  CollisionFilter(int arm, int object) { add(arm, object); }
  void add(int arm, int object);
  bool ignores(std::size_t arm, std::size_t object) const;
};

CollisionReport detect_collisions(const WorldSpec& spec, const WorldState& world,
                                  const CollisionFilter& filter = {});
double object_distance(const Object& a, const Object& b);
double segment_object_distance(const Segment2& s, const Object& o);

// Re-poses every grasped object from its gripper and stored offset.
void update_grasped(const WorldSpec& spec, WorldState& world);

// Arms first (one entry per joint), then the base (forward, turn) when
// mobile. Entries are clamped to [-1, 1]. Deterministic.
WorldState step(const WorldSpec& spec, const WorldState& world,
                std::span<const Eigen::VectorXd> actions);

bool grasp_condition(const WorldSpec& spec, const WorldState& world, std::size_t arm,
                     std::size_t object);
// Attaches `object` to `arm` with the current relative pose when the grasp
// condition holds; otherwise returns the world unchanged. Throws UsageError
// when the object is already grasped.
WorldState try_grasp(const WorldSpec& spec, const WorldState& world, std::size_t arm,
                     std::size_t object);
void attach(const WorldSpec& spec, WorldState& world, std::size_t arm,
            std::size_t object);
void release(WorldState& world, std::size_t arm);
int holder_of(const WorldState& world, std::size_t object);

}  // namespace siteswarm::sim

#endif  // SITESWARM_SIM_WORLD_HPP_
