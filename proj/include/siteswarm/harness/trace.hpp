#ifndef SITESWARM_HARNESS_TRACE_HPP_
#define SITESWARM_HARNESS_TRACE_HPP_

#include "json.hpp"

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "siteswarm/harness/config.hpp"
#include "siteswarm/tasks/task_env.hpp"

namespace siteswarm::harness {

// Line-delimited JSON. The first line is a header
//   {"type":"header","task":...,"agents":[...],"weights":{...},"config":{...}}
// and every further line is one environment step
//   {"type":"step","seed","t","world":{...},"actions","terms","rewards","events","done","success"}.
nlohmann::json trace_header(const ExperimentConfig& c, const tasks::TaskSpec& spec);
nlohmann::json step_to_json(const tasks::StepRecord& r);
nlohmann::json world_to_json(const sim::WorldState& w);
nlohmann::json terms_to_json(const tasks::RewardTerms& t);
tasks::RewardTerms terms_from_json(const nlohmann::json& j);

// Writes the header, then the steps of the first `max_episodes` episodes
// passed to `sink()`. Not thread-safe; attach to a single environment.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& path, const nlohmann::json& header,
              std::size_t max_episodes);

  std::function<void(const tasks::StepRecord&)> sink();
  void write(const tasks::StepRecord& r);
  std::size_t episodes_started() const { return started_; }
  std::size_t lines() const { return lines_; }

 private:
  std::ofstream out_;
  std::size_t max_episodes_;
  std::size_t started_ = 0;
  std::size_t lines_ = 0;
};

struct Trace {
  nlohmann::json header;
  std::vector<nlohmann::json> steps;
};

// DecodeError on malformed lines or a missing header.
Trace read_trace(const std::filesystem::path& path);

struct RewardAudit {
  std::size_t steps = 0;
  std::size_t rewards = 0;
  double max_abs_error = 0.0;
  std::size_t flag_reversals = 0;  // picked/placed flags that went back to 0 within an episode
};

// Recomputes every logged reward from its logged terms and the header weights.
RewardAudit audit_rewards(const Trace& trace);

// Human-readable dump for the replay command.
void print_trace(const Trace& trace, std::ostream& out);

}  // namespace siteswarm::harness

#endif  // SITESWARM_HARNESS_TRACE_HPP_
