#include "siteswarm/tasks/rewards.hpp"

#include <cmath>

#include "siteswarm/errors.hpp"

namespace siteswarm::tasks {

TaskId parse_task(const std::string& s) {
  if (s == "1") return TaskId::Task1;
  if (s == "2") return TaskId::Task2;
  if (s == "3") return TaskId::Task3;
  if (s == "4") return TaskId::Task4;
  if (s == "reach") return TaskId::Reach;
  throw ConfigError("unknown task '" + s + "' (expected 1, 2, 3, 4 or reach)");
}

std::string task_name(TaskId id) {
  switch (id) {
    case TaskId::Task1: return "1";
    case TaskId::Task2: return "2";
    case TaskId::Task3: return "3";
    case TaskId::Task4: return "4";
    case TaskId::Reach: return "reach";
  }
  throw ConfigError("bad task id");
}

RewardWeights default_weights(TaskId id) {
  switch (id) {
    case TaskId::Task1:
    case TaskId::Reach:
      return {0.2, 0.2, 0.1, 1.0, 1.0, 0.2};
    case TaskId::Task2:
      return {0.2, 0.2, 0.1, 1.0, 1.0, -0.1};
    case TaskId::Task3:
      return {0.2, 0.2, 0.1, 1.0, 1.0, 0.1};
    case TaskId::Task4:
      return {0.1, 0.5, 0.05, 1.0, 1.0, 0.0};
  }
  throw ConfigError("bad task id");
}

double reward_task1(const RewardTerms& t, const RewardWeights& w) {
  return -w.phi1 * t.d_o - w.phi2 * t.d_T + w.phi3 * t.align_object - w.phi4 * t.c_s -
         w.phi5 * t.c_o - w.phi6 * t.h_g + t.r_o + t.r_T;
}

double reward_task2(const RewardTerms& t, const RewardWeights& w) {
  return -w.phi1 * t.d_o - w.phi2 * t.d_T + w.phi3 * t.align_object - w.phi4 * t.c_s -
         w.phi5 * t.c_o - std::abs(w.phi6) * t.v_o + t.r_o + t.r_T;
}

double reward_task3(const RewardTerms& t, const RewardWeights& w, Side side) {
  const double shared = -w.phi1 * t.d_o - w.phi2 * t.d_T - w.phi4 * t.c_s -
                        w.phi5 * t.c_o + w.phi6 * t.align_grippers + t.r_o + t.r_T;
  return side == Side::Left ? shared + w.phi3 * t.align_object : shared;
}

double reward_task4_arm(const RewardTerms& t, const RewardWeights& w) {
  return -w.phi1 * t.d_T - w.phi2 * t.c_s - w.phi3 * t.box_shift + t.r_T;
}

double reward_task4_wheels(const RewardTerms& t, const RewardWeights& w) {
  return -w.phi1 * t.d_T - w.phi2 * t.c_s - w.phi4 * t.c_o + t.r_T;
}

std::vector<double> compute_rewards(TaskId id, std::span<const RewardTerms> terms,
                                    const RewardWeights& w) {
  const std::size_t agents = id == TaskId::Task4 ? 3 : id == TaskId::Reach ? 1 : 2;
  if (terms.size() != agents) {
    throw ShapeError("compute_rewards: task " + task_name(id) + " has " + std::to_string(agents) +
                     " agents, got " + std::to_string(terms.size()) + " term sets");
  }
  std::vector<double> r(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i) {
    switch (id) {
      case TaskId::Task1:
      case TaskId::Reach:
        r[i] = reward_task1(terms[i], w);
        break;
      case TaskId::Task2:
        r[i] = reward_task2(terms[i], w);
        break;
      case TaskId::Task3:
        r[i] = reward_task3(terms[i], w, i == 0 ? Side::Left : Side::Right);
        break;
      case TaskId::Task4:
        r[i] = i < 2 ? reward_task4_arm(terms[i], w) : reward_task4_wheels(terms[i], w);
        break;
    }
  }
  return r;
}

}  // namespace siteswarm::tasks
