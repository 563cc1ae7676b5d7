#include "siteswarm/tasks/task_env.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "siteswarm/errors.hpp"

namespace siteswarm::tasks {

using sim::Pose2;
using sim::Vec2;

namespace {

constexpr double kPi = std::numbers::pi;

sim::ArmSpec make_arm(const Pose2& mount) {
  sim::ArmSpec a;
  a.mount = mount;
  a.link_lengths = {0.3, 0.25, 0.15};
  a.lower = {-0.5, -2.6, -2.6};
  a.upper = {kPi + 0.5, 2.6, 2.6};
  return a;
}

// Left home: tip at (-0.45, 0.35) in the torso frame, gripper pointing +y,
// elbow out to the left so the two elbows stay apart. The right home is its
// mirror image.
std::vector<double> left_home() {
  const sim::ArmSpec arm = make_arm({Vec2(-0.2, 0.0), 0.0});
  const std::vector<double> guess = {2.4, -1.9, 1.0};
  return ik::solve_ik(arm, {Vec2(-0.45, 0.35), kPi / 2}, arm.mount, guess,
                      ik::Branch::ElbowDown)
      .angles;
}

std::vector<double> mirror_angles(const std::vector<double>& q) {
  return {kPi - q[0], -q[1], -q[2]};
}

void add_torso_arms(TaskSpec& s) {
  s.world.arms = {make_arm({Vec2(-0.2, 0.0), 0.0}), make_arm({Vec2(0.2, 0.0), 0.0})};
  const std::vector<double> l = left_home();
  s.home = {l, mirror_angles(l)};
}

double heading_to(const Pose2& from, const Vec2& p) {
  const Vec2 d = p - from.position;
  if (d.squaredNorm() == 0.0) return from.heading;
  return std::atan2(d.y(), d.x());
}

}  // namespace

bool SampleRect::contains(const Vec2& p) const {
  return std::abs(p.x() - centre.x()) <= 0.5 * size.x() + 1e-12 &&
         std::abs(p.y() - centre.y()) <= 0.5 * size.y() + 1e-12;
}

void TaskSpec::validate() const {
  if (agent_names.size() != world.agent_count()) {
    throw ConfigError("task: agent roster does not match the world");
  }
  if (home.size() != world.arms.size() || roles.size() != world.arms.size()) {
    throw ConfigError("task: need one home pose and one role per arm");
  }
  for (const sim::ArmSpec& a : world.arms) a.validate();
  if (episode_length <= 0) throw ConfigError("task: episode_length must be > 0");
  if (collision_budget < 0) throw ConfigError("task: collision_budget must be >= 0");
  if (!(world.grasp_distance > 0.0)) throw ConfigError("task: grasp_distance must be > 0");
  if (!(world.grasp_alignment >= -1.0 && world.grasp_alignment <= 1.0)) {
    throw ConfigError("task: grasp_alignment must lie in [-1, 1]");
  }
  if (!(world.collision_margin >= 0.0)) throw ConfigError("task: collision_margin must be >= 0");
  for (const ArmRole& r : roles) {
    if (r.object >= static_cast<int>(objects.size()) ||
        r.place_ignore >= static_cast<int>(objects.size())) {
      throw ConfigError("task: role refers to a missing object");
    }
  }
  if (max_resample <= 0) throw ConfigError("task: max_resample must be > 0");
}

TaskSpec make_task(TaskId id) {
  TaskSpec s;
  s.id = id;
  s.weights = default_weights(id);
  switch (id) {
    case TaskId::Task1: {
      s.agent_names = {"left", "right"};
      add_torso_arms(s);
      const SampleRect rect{Vec2(0.0, 0.42), Vec2(0.4, 0.24)};
      s.objects = {{sim::make_bolt("bolt_left", rect.centre - Vec2(0.1, 0.0)), rect},
                   {sim::make_bolt("bolt_right", rect.centre + Vec2(0.1, 0.0)), rect},
                   {sim::make_fixture("platform", {Vec2(-0.25, 0.70), Vec2(0.25, 0.70)}),
                    std::nullopt}};
      s.roles = {{0, {Vec2(-0.12, 0.62), 0.0}}, {1, {Vec2(0.12, 0.62), 0.0}}};
      s.hg_plane_y = 0.70;
      s.episode_length = 20;
      break;
    }
    case TaskId::Reach: {
      s.agent_names = {"right"};
      s.world.arms = {make_arm({Vec2(0.2, 0.0), 0.0})};
      s.home = {mirror_angles(left_home())};
      const SampleRect rect{Vec2(0.2, 0.45), Vec2(0.4, 0.24)};
      s.objects = {{sim::make_bolt("bolt", rect.centre), rect},
                   {sim::make_fixture("platform", {Vec2(-0.25, 0.70), Vec2(0.25, 0.70)}),
                    std::nullopt}};
      s.roles = {{0, {Vec2(0.12, 0.62), 0.0}}};
      s.hg_plane_y = 0.70;
      s.episode_length = 20;
      break;
    }
    case TaskId::Task2: {
      s.agent_names = {"left", "right"};
      add_torso_arms(s);
      const SampleRect bolt_rect{Vec2(-0.35, 0.35), Vec2(0.1, 0.24)};
      const SampleRect plate_rect{Vec2(0.5, 0.4), Vec2(0.05, 0.24)};
      const Pose2 plate_target{Vec2(0.1, 0.58), kPi};
      sim::Object plate = sim::make_plate("plate", {plate_rect.centre, kPi / 2});
      const Vec2 hole = sim::transform(plate_target, plate.tags[0]);
      s.objects = {{sim::make_bolt("bolt", bolt_rect.centre), bolt_rect},
                   {std::move(plate), plate_rect},
                   {sim::make_fixture("beam", {Vec2(-0.3, 0.68), Vec2(0.3, 0.68)}),
                    std::nullopt}};
      s.roles = {{0, {hole, 0.0}, false, -1, 1}, {1, plate_target, true, -1, -1}};
      s.episode_length = 30;
      break;
    }
    case TaskId::Task3: {
      s.agent_names = {"left", "right"};
      add_torso_arms(s);
      const SampleRect rect{Vec2(-0.3, 0.4), Vec2(0.1, 0.2)};
      s.objects = {{sim::make_bolt("bolt", rect.centre), rect},
                   {sim::make_fixture("beam", {Vec2(0.5, 0.45), Vec2(0.5, 0.75)}),
                    std::nullopt}};
      // The left arm delivers the bolt to the right gripper; the right arm
      // installs it next to the beam.
      s.roles = {{0, {Vec2::Zero(), 0.0}}, {0, {Vec2(0.4, 0.55), 0.0}}};
      s.episode_length = 25;
      break;
    }
    case TaskId::Task4: {
      s.agent_names = {"left", "right", "wheels"};
      s.world.mobile_base = true;
      s.world.base_footprint = {Vec2(0.0, -0.25), Vec2(0.0, 0.25)};
      // Arm frames coincide with the torso layout when the base heads +y.
      s.world.arms = {make_arm({Vec2(0.0, 0.2), -kPi / 2}),
                      make_arm({Vec2(0.0, -0.2), -kPi / 2})};
      const std::vector<double> l = left_home();
      s.home = {l, mirror_angles(l)};
      s.base_start = {Vec2::Zero(), kPi / 2};
      const SampleRect rect{Vec2(0.0, 1.3), Vec2(1.0, 1.0)};
      s.objects = {{sim::make_box("box", {rect.centre, 0.0}), rect}};
      s.roles = {{-1, {}, false, 0, -1}, {-1, {}, false, 1, -1}};
      s.episode_length = 50;
      break;
    }
  }
  s.validate();
  return s;
}

const ObservationSlot& ObservationLayout::at(const std::string& name) const {
  for (const ObservationSlot& s : slots) {
    if (s.name == name) return s;
  }
  throw NotFoundError("observation slot '" + name + "'");
}

namespace {

// Object blocks: position, heading (plates, boxes), target, target - object,
// object - responsible gripper, hole/tag positions, tag - gripper.
struct ObjectView {
  std::size_t index = 0;
  bool heading = false;
  std::optional<Vec2> target;
  std::vector<std::size_t> arms;      // grippers measured against the grasp point
  bool tags = false;
  std::vector<std::size_t> tag_arms;  // task 4: arm k measured against tag k
  bool staging = false;               // task 4: staging point - base
};

std::vector<ObjectView> object_views(const TaskSpec& spec) {
  std::vector<ObjectView> out;
  for (std::size_t o = 0; o < spec.objects.size(); ++o) {
    const sim::Object& obj = spec.objects[o].proto;
    if (!obj.movable) continue;
    ObjectView v;
    v.index = o;
    v.heading = obj.kind != sim::ObjectKind::Bolt;
    v.tags = !obj.tags.empty();
    for (std::size_t a = 0; a < spec.roles.size(); ++a) {
      const ArmRole& r = spec.roles[a];
      if (r.object == static_cast<int>(o)) {
        v.arms.push_back(a);
        const bool has_target = !(spec.id == TaskId::Task3 && a == 0) &&
                                spec.id != TaskId::Reach;
        if (has_target && !v.target) v.target = r.target.position;
      }
      if (obj.kind == sim::ObjectKind::Box && r.tag >= 0) v.tag_arms.push_back(a);
    }
    v.staging = obj.kind == sim::ObjectKind::Box && spec.world.mobile_base;
    out.push_back(std::move(v));
  }
  return out;
}

std::size_t view_size(const ObjectView& v, const sim::Object& obj) {
  std::size_t n = 2;
  if (v.heading) n += 2;
  if (v.target) n += 4;
  n += 2 * v.arms.size();
  if (v.tags) n += 2 * obj.tags.size();
  n += 2 * v.tag_arms.size();
  if (v.staging) n += 2;
  return n;
}

}  // namespace

ObservationLayout make_layout(const TaskSpec& spec) {
  ObservationLayout l;
  auto add = [&l](std::string name, std::size_t n) {
    l.slots.push_back({std::move(name), l.size, n});
    l.size += n;
  };
  const std::vector<Eigen::Index> dims = spec.world.action_dims();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    add("action." + spec.agent_names[i], static_cast<std::size_t>(dims[i]));
  }
  for (std::size_t a = 0; a < spec.world.arms.size(); ++a) {
    const std::string p = "arm." + spec.agent_names[a];
    add(p + ".joints", spec.world.arms[a].joint_count());
    add(p + ".tip", 2);
    add(p + ".heading", 2);
    add(p + ".flags", 3);
  }
  if (spec.world.mobile_base) add("base.pose", 4);
  if (spec.id == TaskId::Task3) add("grippers", 4);  // tip delta, axis dot, facing flag
  for (const ObjectView& v : object_views(spec)) {
    const sim::Object& obj = spec.objects[v.index].proto;
    add("object." + obj.name, view_size(v, obj));
  }
  add("time", 1);
  return l;
}

Progress::Progress(std::size_t arms)
    : picked(arms, 0), placed(arms, 0), held(arms, 0), failed(arms, 0), frozen(arms, 0) {}

Eigen::VectorXd observe(const TaskSpec& spec, const ObservationLayout& layout,
                        const sim::WorldState& world, const Progress& progress,
                        std::span<const Eigen::VectorXd> last_actions, int t) {
  Eigen::VectorXd s = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layout.size));
  Eigen::Index k = 0;
  auto put = [&s, &k](double v) { s(k++) = v; };
  auto put2 = [&put](const Vec2& v) {
    put(v.x());
    put(v.y());
  };

  for (const Eigen::VectorXd& a : last_actions) {
    for (Eigen::Index j = 0; j < a.size(); ++j) put(a(j));
  }
  std::vector<Pose2> tips;
  for (std::size_t a = 0; a < spec.world.arms.size(); ++a) {
    for (double q : world.joints[a]) put(q / kPi);
    const Pose2 tip = sim::gripper_pose(spec.world, world, a);
    tips.push_back(tip);
    put2(tip.position);
    put(std::cos(tip.heading));
    put(std::sin(tip.heading));
    put(world.grasped[a] >= 0 ? 1.0 : 0.0);
    put(progress.picked[a]);
    put(progress.placed[a]);
  }
  if (spec.world.mobile_base) {
    put2(world.base.position);
    put(std::cos(world.base.heading));
    put(std::sin(world.base.heading));
  }
  if (spec.id == TaskId::Task3) {
    put2(tips[1].position - tips[0].position);
    put(-tips[0].axis().dot(tips[1].axis()));
    put(progress.handoff ? 1.0 : 0.0);
  }
  for (const ObjectView& v : object_views(spec)) {
    const sim::Object& obj = world.objects[v.index];
    const Vec2 p = obj.world_grasp_point();
    put2(p);
    if (v.heading) {
      put(std::cos(obj.pose.heading));
      put(std::sin(obj.pose.heading));
    }
    if (v.target) {
      put2(*v.target);
      put2(*v.target - p);
    }
    for (std::size_t a : v.arms) put2(p - tips[a].position);
    if (v.tags) {
      for (std::size_t i = 0; i < obj.tags.size(); ++i) put2(obj.world_tag(i));
    }
    for (std::size_t a : v.tag_arms) {
      put2(obj.world_tag(static_cast<std::size_t>(spec.roles[a].tag)) - tips[a].position);
    }
    if (v.staging) put2(obj.pose.position + spec.staging_offset - world.base.position);
  }
  put(static_cast<double>(t) / spec.episode_length);
  if (static_cast<std::size_t>(k) != layout.size) {
    throw ShapeError("observe: layout declares " + std::to_string(layout.size) +
                     " entries, wrote " + std::to_string(k));
  }
  return s;
}

std::vector<RewardTerms> measure_terms(const TaskSpec& spec, const sim::WorldState& world,
                                       const Progress& progress, double box_shift) {
  const std::size_t n_arms = spec.world.arms.size();
  std::vector<RewardTerms> terms(spec.agent_count());
  std::vector<Pose2> tips;
  for (std::size_t a = 0; a < n_arms; ++a) tips.push_back(sim::gripper_pose(spec.world, world, a));
  const double c_s = world.collisions.self ? 1.0 : 0.0;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    terms[i].c_s = c_s;
    if (i < n_arms) terms[i].c_o = world.collisions.arm_object[i];
  }

  switch (spec.id) {
    case TaskId::Task1:
    case TaskId::Reach:
    case TaskId::Task2:
      for (std::size_t a = 0; a < n_arms; ++a) {
        const ArmRole& role = spec.roles[a];
        const sim::Object& obj = world.objects[static_cast<std::size_t>(role.object)];
        const Vec2 p = obj.world_grasp_point();
        RewardTerms& t = terms[a];
        if (progress.placed[a]) {
          t.align_object = 1.0;
        } else if (progress.picked[a]) {
          t.d_o = (p - tips[a].position).norm();
          t.d_T = (p - role.target.position).norm();
          t.align_object = 1.0;
          if (role.match_heading) {
            t.v_o = std::abs(sim::wrap_angle(obj.pose.heading - role.target.heading));
          }
        } else {
          t.d_o = (p - tips[a].position).norm();
          t.align_object = sim::alignment(tips[a], p);
        }
        if (spec.hg_mode == HgMode::Penetration) {
          t.h_g = std::max(0.0, tips[a].position.y() - spec.hg_plane_y);
        }
      }
      break;
    case TaskId::Task3: {
      const sim::Object& bolt = world.objects[static_cast<std::size_t>(spec.roles[0].object)];
      const Vec2 p = bolt.world_grasp_point();
      const double facing = progress.handoff ? 1.0 : -tips[0].axis().dot(tips[1].axis());
      const double between = (tips[0].position - tips[1].position).norm();
      RewardTerms& l = terms[0];
      RewardTerms& r = terms[1];
      l.align_grippers = facing;
      r.align_grippers = facing;
      if (progress.handoff) {
        l.align_object = 1.0;
      } else if (progress.picked[0]) {
        l.d_o = (p - tips[0].position).norm();
        l.d_T = between;
        l.align_object = 1.0;
      } else {
        l.d_o = (p - tips[0].position).norm();
        l.align_object = sim::alignment(tips[0], p);
      }
      if (progress.placed[1]) {
        // Installed: nothing left to shape.
      } else if (progress.handoff) {
        r.d_o = (p - tips[1].position).norm();
        r.d_T = (p - spec.roles[1].target.position).norm();
      } else {
        r.d_o = between;
      }
      for (RewardTerms* t : {&l, &r}) {
        if (spec.hg_mode == HgMode::Penetration) {
          const std::size_t a = t == &l ? 0 : 1;
          t->h_g = std::max(0.0, tips[a].position.y() - spec.hg_plane_y);
        }
      }
      break;
    }
    case TaskId::Task4: {
      const sim::Object& box = world.objects[0];
      for (std::size_t a = 0; a < n_arms; ++a) {
        RewardTerms& t = terms[a];
        if (!progress.placed[a]) {
          t.d_T = (box.world_tag(static_cast<std::size_t>(spec.roles[a].tag)) -
                   tips[a].position)
                      .norm();
        }
        t.box_shift = box_shift;
      }
      RewardTerms& w = terms[n_arms];
      w.d_T = (box.pose.position + spec.staging_offset - world.base.position).norm();
      w.c_o = world.collisions.base_object ? 1.0 : 0.0;
      break;
    }
  }
  return terms;
}

const char* to_string(StageKind k) {
  switch (k) {
    case StageKind::Pick: return "pick";
    case StageKind::Place: return "place";
    case StageKind::Handoff: return "handoff";
    case StageKind::Hold: return "hold";
  }
  return "?";
}

TaskEnv::TaskEnv(TaskSpec spec) : spec_(std::move(spec)) {
  spec_.validate();
  layout_ = make_layout(spec_);
  progress_ = Progress(spec_.world.arms.size());
}

std::vector<Eigen::Index> TaskEnv::observation_dims() const {
  return std::vector<Eigen::Index>(agent_count(), static_cast<Eigen::Index>(layout_.size));
}

std::vector<Eigen::Index> TaskEnv::action_dims() const { return spec_.world.action_dims(); }

void TaskEnv::sample_objects(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  for (int attempt = 0; attempt < spec_.max_resample; ++attempt) {
    std::vector<sim::Object> objs;
    for (const ObjectSlot& slot : spec_.objects) {
      sim::Object o = slot.proto;
      if (slot.rect) {
        const double x = slot.rect->centre.x() + slot.rect->size.x() * u(rng);
        const double y = slot.rect->centre.y() + slot.rect->size.y() * u(rng);
        o.pose.position = Vec2(x, y);
      }
      objs.push_back(std::move(o));
    }
    sim::WorldState w = sim::make_world(spec_.world, spec_.home, spec_.base_start, objs);
    bool ok = !w.collisions.self && !w.collisions.object;
    for (std::size_t i = 0; ok && i < objs.size(); ++i) {
      for (std::size_t j = i + 1; ok && j < objs.size(); ++j) {
        if (!objs[i].movable && !objs[j].movable) continue;
        ok = sim::object_distance(objs[i], objs[j]) >= spec_.min_separation;
      }
    }
    if (ok) {
      world_ = std::move(w);
      return;
    }
  }
  throw ConfigError("reset: no collision-free object placement after " +
                    std::to_string(spec_.max_resample) + " draws");
}

std::vector<Eigen::VectorXd> TaskEnv::reset(std::uint64_t seed) {
  seed_ = seed;
  // seed_seq scrambles nearby seeds; raw mt19937_64 seeding leaves their first
  // draws correlated.
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)};
  std::mt19937_64 rng(seq);
  sample_objects(rng);
  progress_ = Progress(spec_.world.arms.size());
  filter_ = {};
  last_actions_.clear();
  for (Eigen::Index d : action_dims()) last_actions_.push_back(Eigen::VectorXd::Zero(d));
  events_.clear();
  t_ = 0;
  done_ = false;
  terms_ = measure_terms(spec_, world_, progress_, 0.0);
  return observations();
}

std::vector<Eigen::VectorXd> TaskEnv::observations() const {
  const Eigen::VectorXd shared = observe(spec_, layout_, world_, progress_, last_actions_, t_);
  std::vector<Eigen::VectorXd> out(agent_count(), shared);
  if (!spec_.share_actions) {
    for (std::size_t i = 0; i < out.size(); ++i) {
      for (std::size_t j = 0; j < out.size(); ++j) {
        if (i == j) continue;
        const ObservationSlot& slot = layout_.at("action." + spec_.agent_names[j]);
        out[i].segment(static_cast<Eigen::Index>(slot.offset),
                       static_cast<Eigen::Index>(slot.size))
            .setZero();
      }
    }
  }
  return out;
}

ik::IkRun TaskEnv::run_ik(std::size_t arm, const Pose2& goal, int ignore_object) {
  ik::FinishOptions opts;
  opts.max_steps = spec_.ik_max_steps;
  opts.handoff_threshold = spec_.world.grasp_distance;
  opts.ignore_object = ignore_object;
  opts.filter = filter_;
  return ik::finish_with_ik(spec_.world, world_, arm, goal, opts);
}

void TaskEnv::pick(std::size_t arm, std::vector<StageEvent>& raised) {
  const std::size_t o = static_cast<std::size_t>(spec_.roles[arm].object);
  StageEvent ev{world_.step, arm, StageKind::Pick, spec_.ik_handoff, {}};
  if (spec_.ik_handoff) {
    const Pose2 tip = sim::gripper_pose(spec_.world, world_, arm);
    const Vec2 p = world_.objects[o].world_grasp_point();
    ev.ik = run_ik(arm, {p, heading_to(tip, p)}, static_cast<int>(o));
    if (ev.ik.success) {
      sim::attach(spec_.world, world_, arm, o);
      progress_.picked[arm] = 1;
      bonus_o_[arm] = 1.0;
    } else {
      progress_.failed[arm] = 1;
      progress_.frozen[arm] = 1;
    }
  } else {
    sim::attach(spec_.world, world_, arm, o);
    progress_.picked[arm] = 1;
    bonus_o_[arm] = 1.0;
  }
  raised.push_back(std::move(ev));
}

void TaskEnv::place(std::size_t arm, std::vector<StageEvent>& raised) {
  const ArmRole& role = spec_.roles[arm];
  const std::size_t o = static_cast<std::size_t>(role.object);
  StageEvent ev{world_.step, arm, StageKind::Place, spec_.ik_handoff, {}};
  bool ok = true;
  if (spec_.ik_handoff) {
    const sim::Object& obj = world_.objects[o];
    const Pose2 want{role.target.position,
                     role.match_heading ? role.target.heading : obj.pose.heading};
    const Pose2 goal = sim::compose(want, sim::inverse(world_.grasp_offset[arm]));
    ev.ik = run_ik(arm, goal, role.place_ignore);
    ok = ev.ik.success;
  }
  if (ok) {
    progress_.placed[arm] = 1;
    bonus_T_[arm] = 1.0;
    if (role.place_ignore >= 0) {
      filter_.add(static_cast<int>(arm), role.place_ignore);
      const int other = sim::holder_of(world_, static_cast<std::size_t>(role.place_ignore));
      if (other >= 0) filter_.add(other, static_cast<int>(o));
    }
  } else {
    progress_.failed[arm] = 1;
  }
  progress_.frozen[arm] = 1;
  raised.push_back(std::move(ev));
}

void TaskEnv::handoff(std::vector<StageEvent>& raised) {
  const std::size_t o = static_cast<std::size_t>(spec_.roles[0].object);
  StageEvent ev{world_.step, 1, StageKind::Handoff, spec_.ik_handoff, {}};
  bool ok = true;
  if (spec_.ik_handoff) {
    const Pose2 tip = sim::gripper_pose(spec_.world, world_, 1);
    const Vec2 p = world_.objects[o].world_grasp_point();
    const double h = heading_to(tip, p);
    const Vec2 goal = p - spec_.handoff_clearance * Vec2(std::cos(h), std::sin(h));
    ev.ik = run_ik(1, {goal, h}, static_cast<int>(o));
    ok = ev.ik.success;
  }
  if (ok) {
    bonus_o_[1] = 1.0;
    bonus_T_[0] = 1.0;
    sim::release(world_, 0);
    sim::attach(spec_.world, world_, 1, o);
    filter_.add(0, static_cast<int>(o));
    progress_.handoff = true;
    progress_.placed[0] = 1;
    progress_.picked[1] = 1;
  } else {
    progress_.failed[1] = 1;
    progress_.frozen[1] = 1;
  }
  raised.push_back(std::move(ev));
}

bool TaskEnv::tag_condition(std::size_t arm) const {
  const Pose2 tip = sim::gripper_pose(spec_.world, world_, arm);
  const Vec2 tag = world_.objects[0].world_tag(static_cast<std::size_t>(spec_.roles[arm].tag));
  return (tag - tip.position).norm() < spec_.world.grasp_distance &&
         sim::alignment(tip, tag) >= spec_.world.grasp_alignment;
}

void TaskEnv::lift(std::vector<StageEvent>& raised) {
  progress_.staged = true;
  for (std::size_t a = 0; a < spec_.world.arms.size(); ++a) {
    bonus_T_[a] = 1.0;
    StageEvent ev{world_.step, a, StageKind::Hold, spec_.ik_handoff, {}};
    bool ok = true;
    if (spec_.ik_handoff) {
      const Pose2 tip = sim::gripper_pose(spec_.world, world_, a);
      const Vec2 tag =
          world_.objects[0].world_tag(static_cast<std::size_t>(spec_.roles[a].tag));
      ev.ik = run_ik(a, {tag, heading_to(tip, tag)}, 0);
      ok = ev.ik.success;
    }
    if (ok) {
      progress_.placed[a] = 1;
    } else {
      progress_.failed[a] = 1;
    }
    progress_.frozen[a] = 1;
    raised.push_back(std::move(ev));
  }
  bonus_T_.back() = 1.0;
}

mappo::EnvStep TaskEnv::step(std::span<const Eigen::VectorXd> actions) {
  if (done_) throw UsageError("step: episode is over; call reset()");
  const std::vector<Eigen::Index> dims = action_dims();
  if (actions.size() != dims.size()) {
    throw ShapeError("step: expected " + std::to_string(dims.size()) + " actions, got " +
                     std::to_string(actions.size()));
  }
  std::vector<Eigen::VectorXd> applied(actions.begin(), actions.end());
  for (std::size_t i = 0; i < applied.size(); ++i) {
    if (applied[i].size() != dims[i]) {
      throw ShapeError("step: action " + std::to_string(i) + " has length " +
                       std::to_string(applied[i].size()));
    }
    applied[i] = applied[i].cwiseMax(-1.0).cwiseMin(1.0);
    if (i < progress_.frozen.size() && progress_.frozen[i]) applied[i].setZero();
  }

  const Vec2 box_before = spec_.id == TaskId::Task4 ? world_.objects[0].pose.position
                                                     : Vec2::Zero();
  world_ = sim::step(spec_.world, world_, applied);
  ++t_;
  bonus_o_.assign(agent_count(), 0.0);
  bonus_T_.assign(agent_count(), 0.0);
  std::vector<StageEvent> raised;

  const double reach = spec_.world.grasp_distance;
  switch (spec_.id) {
    case TaskId::Task1:
    case TaskId::Reach:
    case TaskId::Task2:
      for (std::size_t a = 0; a < spec_.world.arms.size(); ++a) {
        if (progress_.frozen[a]) continue;
        const ArmRole& role = spec_.roles[a];
        const std::size_t o = static_cast<std::size_t>(role.object);
        if (!progress_.picked[a]) {
          if (sim::holder_of(world_, o) < 0 && sim::grasp_condition(spec_.world, world_, a, o)) {
            pick(a, raised);
          }
        } else if (spec_.id != TaskId::Reach) {
          const sim::Object& obj = world_.objects[o];
          const bool near = (obj.world_grasp_point() - role.target.position).norm() < reach;
          const bool aligned =
              !role.match_heading ||
              std::abs(sim::wrap_angle(obj.pose.heading - role.target.heading)) <=
                  spec_.heading_tolerance;
          if (near && aligned) place(a, raised);
        }
      }
      break;
    case TaskId::Task3: {
      const std::size_t o = static_cast<std::size_t>(spec_.roles[0].object);
      if (!progress_.picked[0] && !progress_.frozen[0]) {
        if (sim::grasp_condition(spec_.world, world_, 0, o)) pick(0, raised);
      } else if (progress_.picked[0] && !progress_.handoff && !progress_.frozen[1] &&
                 !progress_.failed[0]) {
        if (sim::grasp_condition(spec_.world, world_, 1, o)) handoff(raised);
      } else if (progress_.handoff && !progress_.frozen[1]) {
        if ((world_.objects[o].world_grasp_point() - spec_.roles[1].target.position).norm() <
            reach) {
          place(1, raised);
        }
      }
      break;
    }
    case TaskId::Task4: {
      bool all = true;
      for (std::size_t a = 0; a < spec_.world.arms.size(); ++a) {
        const bool c = tag_condition(a);
        if (c) progress_.held[a] = 1;
        all = all && c;
      }
      if (all && !progress_.staged) lift(raised);
      break;
    }
  }

  world_.collisions = sim::detect_collisions(spec_.world, world_, filter_);
  if (world_.collisions.self) ++progress_.self_collision_steps;
  if (world_.collisions.self || world_.collisions.object) ++progress_.collision_steps;

  const double shift =
      spec_.id == TaskId::Task4 ? (world_.objects[0].pose.position - box_before).norm() : 0.0;
  terms_ = measure_terms(spec_, world_, progress_, shift);
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    terms_[i].r_o = bonus_o_[i];
    terms_[i].r_T = bonus_T_[i];
  }

  switch (spec_.id) {
    case TaskId::Reach:
      progress_.success = progress_.picked[0] != 0;
      break;
    case TaskId::Task1:
    case TaskId::Task2:
      progress_.success = std::all_of(progress_.placed.begin(), progress_.placed.end(),
                                      [](std::uint8_t f) { return f != 0; });
      break;
    case TaskId::Task3:
      progress_.success = progress_.placed[1] != 0;
      break;
    case TaskId::Task4:
      progress_.success = progress_.placed[0] && progress_.placed[1];
      break;
  }
  const bool timeout = t_ >= spec_.episode_length;
  const bool over_budget =
      spec_.collision_budget > 0 && progress_.collision_steps >= spec_.collision_budget;
  const bool finished = progress_.success || (spec_.id == TaskId::Task4 && progress_.staged);
  done_ = finished || timeout || over_budget;

  mappo::EnvStep out;
  out.rewards = compute_rewards(spec_.id, terms_, spec_.weights);
  out.done = done_;
  out.timeout = timeout && !finished && !over_budget;
  out.success = progress_.success;
  out.self_collision = world_.collisions.self;
  last_actions_ = applied;
  out.observations = observations();

  events_.insert(events_.end(), raised.begin(), raised.end());
  if (sink_) {
    StepRecord rec;
    rec.seed = seed_;
    rec.t = t_;
    rec.world = &world_;
    rec.progress = &progress_;
    rec.actions = applied;
    rec.terms = terms_;
    rec.rewards = out.rewards;
    rec.events = raised;
    rec.done = done_;
    rec.success = progress_.success;
    sink_(rec);
  }
  return out;
}

}  // namespace siteswarm::tasks
