#ifndef SITESWARM_ROLLOUT_ADVANTAGE_HPP_
#define SITESWARM_ROLLOUT_ADVANTAGE_HPP_

#include <cstdint>
#include <span>
#include <vector>

#include "siteswarm/rollout/buffer.hpp"

namespace siteswarm::rollout {

// Mask convention throughout: masks[t] == 0 means the episode ended at step t,
// so nothing from t+1 onwards flows back into t.

// delta_t = r_t + gamma * m_t * V(s_{t+1}) - V(s_t), with V(s_T) = bootstrap.
std::vector<double> compute_deltas(std::span<const double> rewards,
                                   std::span<const double> values,
                                   double bootstrap,
                                   std::span<const std::uint8_t> masks,
                                   double gamma);

// A_t = delta_t + gamma * xi * m_t * A_{t+1}, A_T = 0.
std::vector<double> compute_gae(std::span<const double> deltas,
                                std::span<const std::uint8_t> masks, double gamma,
                                double xi);

// v'_t = r_t + gamma * m_t * v'_{t+1}, v'_T = bootstrap.
std::vector<double> compute_returns(std::span<const double> rewards,
                                    std::span<const std::uint8_t> masks,
                                    double bootstrap, double gamma);

struct AdvantageSet {
  std::vector<double> deltas;
  std::vector<double> advantages;
  std::vector<double> returns;
};

// Per-agent deltas/advantages/returns over every closed segment of `buffer`.
std::vector<AdvantageSet> compute_advantages(const RolloutBuffer& buffer,
                                             double gamma, double xi);

// In-place standardisation: (x - mean) / (std + 1e-8).
void normalize(std::span<double> values);

}  // namespace siteswarm::rollout

#endif  // SITESWARM_ROLLOUT_ADVANTAGE_HPP_
