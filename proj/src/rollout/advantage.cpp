#include "siteswarm/rollout/advantage.hpp"

#include <cmath>
#include <string>

#include "siteswarm/errors.hpp"

namespace siteswarm::rollout {

namespace {

void check_gamma(double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
}

void check_masks(std::span<const std::uint8_t> masks) {
  for (std::uint8_t m : masks) {
    if (m > 1) throw NumericError("mask must be 0 or 1");
  }
}

void check_length(const char* what, std::size_t a, std::size_t b) {
  if (a != b) {
    throw ShapeError(std::string(what) + ": length mismatch " + std::to_string(a) +
                     " vs " + std::to_string(b));
  }
}

}  // namespace

std::vector<double> compute_deltas(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double bootstrap,
                                   std::span<const std::uint8_t> masks,
                                   double gamma) {
  check_length("compute_deltas", rewards.size(), values.size());
  check_length("compute_deltas", rewards.size(), masks.size());
  check_gamma(gamma);
  check_masks(masks);
  const std::size_t n = rewards.size();
  std::vector<double> out(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double next = t + 1 < n ? values[t + 1] : bootstrap;
    out[t] = rewards[t] + gamma * masks[t] * next - values[t];
  }
  return out;
}

std::vector<double> compute_gae(std::span<const double> deltas,
                                std::span<const std::uint8_t> masks, double gamma,
                                double xi) {
  check_length("compute_gae", deltas.size(), masks.size());
  check_gamma(gamma);
  check_masks(masks);
  if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("xi must lie in [0, 1]");
  const std::size_t n = deltas.size();
  std::vector<double> out(n);
  double running = 0.0;
  for (std::size_t t = n; t-- > 0;) {
    running = deltas[t] + gamma * xi * masks[t] * running;
    out[t] = running;
  }
  return out;
}

std::vector<double> compute_returns(std::span<const double> rewards,
                                    std::span<const std::uint8_t> masks,
                                    double bootstrap, double gamma) {
  check_length("compute_returns", rewards.size(), masks.size());
  check_gamma(gamma);
  check_masks(masks);
  const std::size_t n = rewards.size();
  std::vector<double> out(n);
  double running = bootstrap;
  for (std::size_t t = n; t-- > 0;) {
    running = rewards[t] + gamma * masks[t] * running;
    out[t] = running;
  }
  return out;
}

std::vector<AdvantageSet> compute_advantages(const RolloutBuffer& buffer,
                                             double gamma, double xi) {
  if (buffer.has_open_segment()) {
    throw UsageError("advantages: buffer has an unterminated segment");
  }
  std::vector<AdvantageSet> out(buffer.agent_count());
  for (std::size_t i = 0; i < buffer.agent_count(); ++i) {
    AdvantageSet& set = out[i];
    set.deltas.reserve(buffer.size());
    set.advantages.reserve(buffer.size());
    set.returns.reserve(buffer.size());
    for (const Segment& seg : buffer.segments()) {
      const std::size_t len = seg.end - seg.begin;
      auto r = buffer.rewards(i).subspan(seg.begin, len);
      auto v = buffer.values(i).subspan(seg.begin, len);
      auto m = buffer.masks(i).subspan(seg.begin, len);
      const double boot = seg.bootstrap[i];
      std::vector<double> d = compute_deltas(r, v, boot, m, gamma);
      std::vector<double> a = compute_gae(d, m, gamma, xi);
      std::vector<double> ret = compute_returns(r, m, boot, gamma);
      set.deltas.insert(set.deltas.end(), d.begin(), d.end());
      set.advantages.insert(set.advantages.end(), a.begin(), a.end());
      set.returns.insert(set.returns.end(), ret.begin(), ret.end());
    }
  }
  return out;
}

void normalize(std::span<double> values) {
  if (values.empty()) return;
  const double n = static_cast<double>(values.size());
  double mean = 0.0;
  for (double v : values) mean += v;
  mean /= n;
  double var = 0.0;
  for (double v : values) var += (v - mean) * (v - mean);
  const double sd = std::sqrt(var / n);
  for (double& v : values) v = (v - mean) / (sd + 1e-8);
}

}  // namespace siteswarm::rollout
