#include "siteswarm/harness/metrics.hpp"

#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "siteswarm/errors.hpp"
#include "siteswarm/harness/checkpoint.hpp"

namespace siteswarm::harness {

namespace {

void put(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += ',';
  out += buf;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || *end != '\0') throw DecodeError("metrics: bad number '" + s + "'");
  return v;
}

std::int64_t to_int(const std::string& s) {
  char* end = nullptr;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || *end != '\0') throw DecodeError("metrics: bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string metrics_header(const std::vector<std::string>& agents) {
  std::string h = "iteration,env_steps";
  for (const std::string& a : agents) {
    h += ",mean_episode_return_" + a + ",policy_loss_" + a + ",value_loss_" + a + ",entropy_" + a +
         ",clip_fraction_" + a;
  }
  h += ",success_rate_rolling,self_collisions_rolling";
  return h;
}

std::string format_metrics(const std::vector<mappo::IterationMetrics>& history,
                           const std::vector<std::string>& agents) {
  std::string out = metrics_header(agents) + "\n";
  for (const mappo::IterationMetrics& m : history) {
    if (m.mean_episode_return.size() != agents.size() || m.policy_loss.size() != agents.size() ||
        m.value_loss.size() != agents.size() || m.entropy.size() != agents.size() ||
        m.clip_fraction.size() != agents.size()) {
      throw ShapeError("metrics: per-agent columns do not match the agent list");
    }
    out += std::to_string(m.iteration) + "," + std::to_string(m.env_steps);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      put(out, m.mean_episode_return[i]);
      put(out, m.policy_loss[i]);
      put(out, m.value_loss[i]);
      put(out, m.entropy[i]);
      put(out, m.clip_fraction[i]);
    }
    put(out, m.success_rate_rolling);
    put(out, m.self_collisions_rolling);
    out += '\n';
  }
  return out;
}

std::vector<mappo::IterationMetrics> parse_metrics(const std::string& text,
                                                   const std::vector<std::string>& agents) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != metrics_header(agents)) {
    throw DecodeError("metrics: header does not match");
  }
  const std::size_t cols = 4 + 5 * agents.size();
  std::vector<mappo::IterationMetrics> out;
  while (std::getline(in, line)) {
    const std::vector<std::string> c = split(line);
    if (c.size() != cols) throw DecodeError("metrics: row has " + std::to_string(c.size()) + " columns");
    mappo::IterationMetrics m;
    m.iteration = to_int(c[0]);
    m.env_steps = to_int(c[1]);
    for (std::size_t i = 0; i < agents.size(); ++i) {
      const std::size_t k = 2 + 5 * i;
      m.mean_episode_return.push_back(to_double(c[k]));
      m.policy_loss.push_back(to_double(c[k + 1]));
      m.value_loss.push_back(to_double(c[k + 2]));
      m.entropy.push_back(to_double(c[k + 3]));
      m.clip_fraction.push_back(to_double(c[k + 4]));
    }
    m.success_rate_rolling = to_double(c[cols - 2]);
    m.self_collisions_rolling = to_double(c[cols - 1]);
    out.push_back(std::move(m));
  }
  return out;
}

void export_metrics(const std::vector<mappo::IterationMetrics>& history,
                    const std::vector<std::string>& agents, const std::filesystem::path& path) {
  if (history.empty()) throw UsageError("export_metrics: empty history");
  write_file_atomic(path, format_metrics(history, agents));
}

std::vector<mappo::IterationMetrics> import_metrics(const std::filesystem::path& path,
                                                    const std::vector<std::string>& agents) {
  return parse_metrics(read_file(path), agents);
}

}  // namespace siteswarm::harness
