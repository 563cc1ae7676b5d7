#ifndef SITESWARM_HARNESS_METRICS_HPP_
#define SITESWARM_HARNESS_METRICS_HPP_

#include <filesystem>
#include <string>
#include <vector>

#include "siteswarm/mappo/trainer.hpp"

namespace siteswarm::harness {

// iteration,env_steps, then for each agent
// mean_episode_return_<a>,policy_loss_<a>,value_loss_<a>,entropy_<a>,clip_fraction_<a>,
// then success_rate_rolling,self_collisions_rolling.
std::string metrics_header(const std::vector<std::string>& agents);

// Values print with %.17g so re-parsing is exact; NaN prints as "nan".
std::string format_metrics(const std::vector<mappo::IterationMetrics>& history,
                           const std::vector<std::string>& agents);
std::vector<mappo::IterationMetrics> parse_metrics(const std::string& text,
                                                   const std::vector<std::string>& agents);

// Throws UsageError on an empty history.
void export_metrics(const std::vector<mappo::IterationMetrics>& history,
                    const std::vector<std::string>& agents, const std::filesystem::path& path);
std::vector<mappo::IterationMetrics> import_metrics(const std::filesystem::path& path,
                                                    const std::vector<std::string>& agents);

}  // namespace siteswarm::harness

#endif  // SITESWARM_HARNESS_METRICS_HPP_
