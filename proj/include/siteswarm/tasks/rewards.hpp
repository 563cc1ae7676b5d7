#ifndef SITESWARM_TASKS_REWARDS_HPP_
#define SITESWARM_TASKS_REWARDS_HPP_

#include <span>
#include <string>
#include <vector>

namespace siteswarm::tasks {

enum class TaskId { Task1 = 1, Task2 = 2, Task3 = 3, Task4 = 4, Reach = 5 };

TaskId parse_task(const std::string& s);  // "1".."4" or "reach"
std::string task_name(TaskId id);

struct RewardWeights {
  double phi1 = 0.2;
  double phi2 = 0.2;
  double phi3 = 0.1;
  double phi4 = 1.0;
  double phi5 = 1.0;
  double phi6 = 0.2;

  bool operator==(const RewardWeights&) const = default;
};

// Published coefficients for each task. Task 2 keeps its negative phi6 here;
// the reward applies its magnitude. Task 4's phi5 is stored but unused.
RewardWeights default_weights(TaskId id);

// Measured quantities for one agent at one step. Terms that do not apply to
// an agent's current stage are zero (distances) or one (alignments held by a
// grasp).
struct RewardTerms {
  double d_o = 0.0;             // gripper to object, m
  double d_T = 0.0;             // object to target, or effector to effector
  double align_object = 0.0;    // gripper axis . direction to the object
  double align_grippers = 0.0;  // task 3: left axis . (-right axis)
  double v_o = 0.0;             // task 2: plate heading error, rad
  double c_s = 0.0;
  double c_o = 0.0;
  double box_shift = 0.0;  // task 4: box displacement this step, m
  double h_g = 0.0;
  double r_o = 0.0;
  double r_T = 0.0;

  bool operator==(const RewardTerms&) const = default;
};

enum class Side { Left, Right };

double reward_task1(const RewardTerms& t, const RewardWeights& w);
double reward_task2(const RewardTerms& t, const RewardWeights& w);
double reward_task3(const RewardTerms& t, const RewardWeights& w, Side side);
double reward_task4_arm(const RewardTerms& t, const RewardWeights& w);
double reward_task4_wheels(const RewardTerms& t, const RewardWeights& w);

// Per-agent rewards in roster order (left arm, right arm, wheels). The reach
// task scores its single arm with the task 1 formula.
std::vector<double> compute_rewards(TaskId id, std::span<const RewardTerms> terms,
                                    const RewardWeights& w);

}  // namespace siteswarm::tasks

#endif  // SITESWARM_TASKS_REWARDS_HPP_
