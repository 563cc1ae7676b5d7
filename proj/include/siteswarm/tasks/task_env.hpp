#ifndef SITESWARM_TASKS_TASK_ENV_HPP_
#define SITESWARM_TASKS_TASK_ENV_HPP_

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "siteswarm/ik/ik.hpp"
#include "siteswarm/mappo/environment.hpp"
#include "siteswarm/sim/world.hpp"
#include "siteswarm/tasks/rewards.hpp"

namespace siteswarm::tasks {

struct SampleRect {
  sim::Vec2 centre = sim::Vec2::Zero();
  sim::Vec2 size = sim::Vec2::Zero();  // full width (x), full height (y)

  bool contains(const sim::Vec2& p) const;
};

// Object template: movable objects with a rectangle are re-sampled on reset.
struct ObjectSlot {
  sim::Object proto;
  std::optional<SampleRect> rect;
};

// What an arm is responsible for. `object` is picked via its grasp point and
// carried until its grasp point is within the grasp distance of `target`
// (and, when `match_heading`, its heading within the heading tolerance).
struct ArmRole {
  int object = -1;
  sim::Pose2 target;
  bool match_heading = false;
  int tag = -1;             // task 4: box tag the gripper must reach
  int place_ignore = -1;    // object the carried one may touch when placed
};

enum class HgMode { Zero, Penetration };

struct TaskSpec {
  TaskId id = TaskId::Task1;
  std::vector<std::string> agent_names;
  sim::WorldSpec world;
  std::vector<std::vector<double>> home;
  sim::Pose2 base_start;
  std::vector<ObjectSlot> objects;
  std::vector<ArmRole> roles;  // one per arm
  int episode_length = 20;
  RewardWeights weights;
  HgMode hg_mode = HgMode::Zero;
  double hg_plane_y = 0.0;     // Penetration: depth of the tip past this line
  int collision_budget = 0;    // steps with any collision before the episode ends; 0 = off
  bool share_actions = true;   // false: other agents' action slots read zero
  bool ik_handoff = true;      // finish stages with IK instead of snapping
  double min_separation = 0.03;
  double heading_tolerance = 0.35;   // rad, plate placement
  double handoff_clearance = 0.03;   // task 3 receiver stops short of the bolt
  sim::Vec2 staging_offset{0.0, -0.55};  // task 4 base staging point from box centre
  std::size_t ik_max_steps = 40;
  int max_resample = 100;

  std::size_t agent_count() const { return agent_names.size(); }
  void validate() const;
};

TaskSpec make_task(TaskId id);

// Named, contiguous block of the shared observation.
struct ObservationSlot {
  std::string name;
  std::size_t offset = 0;
  std::size_t size = 0;
};

struct ObservationLayout {
  std::vector<ObservationSlot> slots;
  std::size_t size = 0;

  const ObservationSlot& at(const std::string& name) const;
};

ObservationLayout make_layout(const TaskSpec& spec);

// Per-episode stage bookkeeping. Flags only ever go from 0 to 1.
struct Progress {
  std::vector<std::uint8_t> picked;  // arm holds its object (task 3 right: received it)
  std::vector<std::uint8_t> placed;  // arm finished its object (task 3 left: handed off)
  std::vector<std::uint8_t> held;    // task 4: arm met its tag condition at least once
  std::vector<std::uint8_t> failed;  // an IK finish failed; the arm is frozen
  std::vector<std::uint8_t> frozen;
  bool handoff = false;
  bool staged = false;  // task 4: both tags reached at once
  bool success = false;
  std::int64_t self_collision_steps = 0;
  std::int64_t collision_steps = 0;

  explicit Progress(std::size_t arms = 0);
  bool operator==(const Progress&) const = default;
};

// Terms for every agent. Bonuses r_o/r_T are left at zero; the environment
// sets them from stage events.
std::vector<RewardTerms> measure_terms(const TaskSpec& spec, const sim::WorldState& world,
                                       const Progress& progress, double box_shift);

// Shared state vector with every agent's last action.
Eigen::VectorXd observe(const TaskSpec& spec, const ObservationLayout& layout,
                        const sim::WorldState& world, const Progress& progress,
                        std::span<const Eigen::VectorXd> last_actions, int t);

enum class StageKind { Pick, Place, Handoff, Hold };
const char* to_string(StageKind k);

struct StageEvent {
  std::int64_t step = 0;
  std::size_t arm = 0;
  StageKind kind = StageKind::Pick;
  bool ik_used = false;
  ik::IkRun ik;
};

struct StepRecord {
  std::uint64_t seed = 0;
  int t = 0;
  const sim::WorldState* world = nullptr;
  const Progress* progress = nullptr;
  std::span<const Eigen::VectorXd> actions;
  std::span<const RewardTerms> terms;
  std::span<const double> rewards;
  std::span<const StageEvent> events;  // raised at this step
  bool done = false;
  bool success = false;
};

class TaskEnv : public mappo::MultiAgentEnv {
 public:
  explicit TaskEnv(TaskSpec spec);

  std::size_t agent_count() const override { return spec_.agent_count(); }
  std::vector<Eigen::Index> observation_dims() const override;
  std::vector<Eigen::Index> action_dims() const override;
  std::vector<Eigen::VectorXd> reset(std::uint64_t seed) override;
  mappo::EnvStep step(std::span<const Eigen::VectorXd> actions) override;

  // Per-agent observations of the current state.
  std::vector<Eigen::VectorXd> observations() const;

  const TaskSpec& spec() const { return spec_; }
  const ObservationLayout& layout() const { return layout_; }
  const sim::WorldState& world() const { return world_; }
  const Progress& progress() const { return progress_; }
  const std::vector<RewardTerms>& terms() const { return terms_; }
  const std::vector<StageEvent>& events() const { return events_; }
  int t() const { return t_; }
  bool done() const { return done_; }
  std::uint64_t seed() const { return seed_; }

  void set_step_sink(std::function<void(const StepRecord&)> sink) { sink_ = std::move(sink); }

 private:
  void sample_objects(std::mt19937_64& rng);
  void pick(std::size_t arm, std::vector<StageEvent>& raised);
  void place(std::size_t arm, std::vector<StageEvent>& raised);
  void handoff(std::vector<StageEvent>& raised);
  void lift(std::vector<StageEvent>& raised);
  bool tag_condition(std::size_t arm) const;
  ik::IkRun run_ik(std::size_t arm, const sim::Pose2& goal, int ignore_object);

  TaskSpec spec_;
  ObservationLayout layout_;
  sim::WorldState world_;
  Progress progress_;
  sim::CollisionFilter filter_;  // pairs silenced for the rest of the episode
  std::vector<Eigen::VectorXd> last_actions_;
  std::vector<RewardTerms> terms_;
  std::vector<double> bonus_o_, bonus_T_;
  std::vector<StageEvent> events_;
  int t_ = 0;
  bool done_ = true;
  std::uint64_t seed_ = 0;
  std::function<void(const StepRecord&)> sink_;
};

}  // namespace siteswarm::tasks

#endif  // SITESWARM_TASKS_TASK_ENV_HPP_
