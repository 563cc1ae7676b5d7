#include "siteswarm/harness/config.hpp"

#include <fstream>
#include <set>

#include "siteswarm/errors.hpp"

namespace siteswarm::harness {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out, const std::string& where) {
  if (!j.contains(key)) return;
  try {
    out = j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(where + "." + key + ": " + e.what());
  }
}

std::string hg_name(tasks::HgMode m) {
  return m == tasks::HgMode::Zero ? "zero" : "penetration";
}

tasks::HgMode parse_hg(const std::string& s) {
  if (s == "zero") return tasks::HgMode::Zero;
  if (s == "penetration") return tasks::HgMode::Penetration;
  throw ConfigError("task_options.hg_mode: expected 'zero' or 'penetration', got '" + s + "'");
}

}  // namespace

mappo::TrainerConfig default_trainer(tasks::TaskId id) {
  mappo::TrainerConfig c;
  switch (id) {
    case tasks::TaskId::Task1:
      c.total_steps = 2'000'000;
      c.episode_length = 20;
      break;
    case tasks::TaskId::Task2:
      c.total_steps = 2'500'000;
      c.episode_length = 30;
      break;
    case tasks::TaskId::Task3:
      c.total_steps = 2'000'000;
      c.episode_length = 25;
      break;
    case tasks::TaskId::Task4:
      c.total_steps = 1'000'000;
      c.buffer_size = 4000;
      c.episode_length = 50;
      break;
    case tasks::TaskId::Reach:
      c.total_steps = 300'000;
      c.episode_length = 20;
      break;
  }
  return c;
}

ExperimentConfig default_experiment(tasks::TaskId id) {
  ExperimentConfig c;
  c.task = id;
  c.trainer = default_trainer(id);
  c.weights = tasks::default_weights(id);
  return c;
}

void ExperimentConfig::validate() const {
  trainer.validate();
  if (checkpoint_interval < 0) throw ConfigError("checkpoint_interval must be >= 0");
  if (eval_episodes <= 0) throw ConfigError("eval_episodes must be > 0");
  build_task(*this).validate();
}

json to_json(const ExperimentConfig& c) {
  const mappo::TrainerConfig& t = c.trainer;
  json j;
  j["task"] = tasks::task_name(c.task);
  j["trainer"] = {{"total_steps", t.total_steps},
                  {"buffer_size", t.buffer_size},
                  {"minibatches", t.minibatches},
                  {"epochs", t.epochs},
                  {"learning_rate", t.learning_rate},
                  {"clip", t.clip},
                  {"value_coef", t.value_coef},
                  {"entropy_coef", t.entropy_coef},
                  {"gae_lambda", t.gae_lambda},
                  {"gamma", t.gamma},
                  {"episode_length", t.episode_length},
                  {"seed", t.seed},
                  {"hidden", t.hidden},
                  {"max_grad_norm", t.max_grad_norm},
                  {"normalize_advantages", t.normalize_advantages},
                  {"init_log_std", t.init_log_std},
                  {"envs", t.envs},
                  {"threads", t.threads}};
  const TaskOptions& o = c.options;
  j["task_options"] = {{"share_actions", o.share_actions},
                       {"ik_handoff", o.ik_handoff},
                       {"hg_mode", hg_name(o.hg_mode)},
                       {"collision_budget", o.collision_budget},
                       {"grasp_distance", o.grasp_distance},
                       {"grasp_alignment", o.grasp_alignment},
                       {"collision_margin", o.collision_margin},
                       {"max_joint_delta", o.max_joint_delta}};
  const tasks::RewardWeights& w = c.weights;
  j["weights"] = {{"phi1", w.phi1}, {"phi2", w.phi2}, {"phi3", w.phi3},
                  {"phi4", w.phi4}, {"phi5", w.phi5}, {"phi6", w.phi6}};
  j["output_dir"] = c.output_dir;
  j["checkpoint_interval"] = c.checkpoint_interval;
  j["eval_episodes"] = c.eval_episodes;
  return j;
}

ExperimentConfig from_json(const json& j, std::optional<tasks::TaskId> task) {
  reject_unknown(j,
                 {"task", "trainer", "task_options", "weights", "output_dir",
                  "checkpoint_interval", "eval_episodes"},
                 "config");
  tasks::TaskId id = tasks::TaskId::Task1;
  if (j.contains("task")) {
    const json& v = j.at("task");
    id = tasks::parse_task(v.is_number_integer() ? std::to_string(v.get<int>())
                                                 : v.get<std::string>());
  }
  if (task) id = *task;
  ExperimentConfig c = default_experiment(id);

  if (j.contains("trainer")) {
    const json& t = j.at("trainer");
    reject_unknown(t,
                   {"total_steps", "buffer_size", "minibatches", "epochs", "learning_rate",
                    "clip", "value_coef", "entropy_coef", "gae_lambda", "gamma",
                    "episode_length", "seed", "hidden", "max_grad_norm",
                    "normalize_advantages", "init_log_std", "envs", "threads"},
                   "trainer");
    mappo::TrainerConfig& tc = c.trainer;
    read(t, "total_steps", tc.total_steps, "trainer");
    read(t, "buffer_size", tc.buffer_size, "trainer");
    read(t, "minibatches", tc.minibatches, "trainer");
    read(t, "epochs", tc.epochs, "trainer");
    read(t, "learning_rate", tc.learning_rate, "trainer");
    read(t, "clip", tc.clip, "trainer");
    read(t, "value_coef", tc.value_coef, "trainer");
    read(t, "entropy_coef", tc.entropy_coef, "trainer");
    read(t, "gae_lambda", tc.gae_lambda, "trainer");
    read(t, "gamma", tc.gamma, "trainer");
    read(t, "episode_length", tc.episode_length, "trainer");
    read(t, "seed", tc.seed, "trainer");
    read(t, "hidden", tc.hidden, "trainer");
    read(t, "max_grad_norm", tc.max_grad_norm, "trainer");
    read(t, "normalize_advantages", tc.normalize_advantages, "trainer");
    read(t, "init_log_std", tc.init_log_std, "trainer");
    read(t, "envs", tc.envs, "trainer");
    read(t, "threads", tc.threads, "trainer");
  }
  if (j.contains("task_options")) {
    const json& t = j.at("task_options");
    reject_unknown(t,
                   {"share_actions", "ik_handoff", "hg_mode", "collision_budget",
                    "grasp_distance", "grasp_alignment", "collision_margin",
                    "max_joint_delta"},
                   "task_options");
    TaskOptions& o = c.options;
    read(t, "share_actions", o.share_actions, "task_options");
    read(t, "ik_handoff", o.ik_handoff, "task_options");
    std::string hg = hg_name(o.hg_mode);
    read(t, "hg_mode", hg, "task_options");
    o.hg_mode = parse_hg(hg);
    read(t, "collision_budget", o.collision_budget, "task_options");
    read(t, "grasp_distance", o.grasp_distance, "task_options");
    read(t, "grasp_alignment", o.grasp_alignment, "task_options");
    read(t, "collision_margin", o.collision_margin, "task_options");
    read(t, "max_joint_delta", o.max_joint_delta, "task_options");
  }
  if (j.contains("weights")) {
    const json& w = j.at("weights");
    reject_unknown(w, {"phi1", "phi2", "phi3", "phi4", "phi5", "phi6"}, "weights");
    read(w, "phi1", c.weights.phi1, "weights");
    read(w, "phi2", c.weights.phi2, "weights");
    read(w, "phi3", c.weights.phi3, "weights");
    read(w, "phi4", c.weights.phi4, "weights");
    read(w, "phi5", c.weights.phi5, "weights");
    read(w, "phi6", c.weights.phi6, "weights");
  }
  read(j, "output_dir", c.output_dir, "config");
  read(j, "checkpoint_interval", c.checkpoint_interval, "config");
  read(j, "eval_episodes", c.eval_episodes, "config");
  c.validate();
  return c;
}

ExperimentConfig load_experiment(const std::filesystem::path& path,
                                 std::optional<tasks::TaskId> task) {
  std::ifstream in(path);
  if (!in) throw NotFoundError("config file '" + path.string() + "' not found");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file '" + path.string() + "': " + e.what());
  }
  return from_json(j, task);
}

tasks::TaskSpec build_task(const ExperimentConfig& c) {
  tasks::TaskSpec s = tasks::make_task(c.task);
  s.episode_length = static_cast<int>(c.trainer.episode_length);
  s.weights = c.weights;
  s.share_actions = c.options.share_actions;
  s.ik_handoff = c.options.ik_handoff;
  s.hg_mode = c.options.hg_mode;
  s.collision_budget = c.options.collision_budget;
  s.world.grasp_distance = c.options.grasp_distance;
  s.world.grasp_alignment = c.options.grasp_alignment;
  s.world.collision_margin = c.options.collision_margin;
  for (sim::ArmSpec& a : s.world.arms) a.max_joint_delta = c.options.max_joint_delta;
  s.validate();
  return s;
}

mappo::EnvFactory make_env_factory(const ExperimentConfig& c,
                                   std::function<void(const tasks::StepRecord&)> sink) {
  const tasks::TaskSpec spec = build_task(c);
  return [spec, sink](std::size_t worker) -> std::unique_ptr<mappo::MultiAgentEnv> {
    auto env = std::make_unique<tasks::TaskEnv>(spec);
    if (worker == 0 && sink) env->set_step_sink(sink);
    return env;
  };
}

}  // namespace siteswarm::harness
