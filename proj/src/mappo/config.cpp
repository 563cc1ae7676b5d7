#include "siteswarm/mappo/config.hpp"

#include <cmath>
#include <string>

#include "siteswarm/errors.hpp"

namespace siteswarm::mappo {

std::int64_t TrainerConfig::iterations() const {
  return (total_steps + buffer_size - 1) / buffer_size;
}

void TrainerConfig::validate() const {
  auto positive = [](std::int64_t v, const char* name) {
    if (v <= 0) throw ConfigError(std::string(name) + " must be > 0, got " + std::to_string(v));
  };
  positive(total_steps, "total_steps");
  positive(buffer_size, "buffer_size");
  positive(minibatches, "minibatches");
  positive(epochs, "epochs");
  positive(episode_length, "episode_length");
  positive(envs, "envs");
  if (buffer_size % minibatches != 0) {
    throw ConfigError("minibatches (" + std::to_string(minibatches) +
                      ") must divide buffer_size (" + std::to_string(buffer_size) + ")");
  }
  if (buffer_size % envs != 0) {
    throw ConfigError("envs (" + std::to_string(envs) + ") must divide buffer_size (" +
                      std::to_string(buffer_size) + ")");
  }
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
    throw ConfigError("learning_rate must be > 0");
  }
  if (!(clip > 0.0 && clip < 1.0)) throw ConfigError("clip must lie in (0, 1)");
  if (!(value_coef > 0.0)) throw ConfigError("value_coef must be > 0");
  if (!(entropy_coef >= 0.0)) throw ConfigError("entropy_coef must be >= 0");
  if (!(gae_lambda >= 0.0 && gae_lambda <= 1.0)) throw ConfigError("gae_lambda must lie in [0, 1]");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (hidden.empty()) throw ConfigError("hidden must list at least one layer");
  for (Eigen::Index h : hidden) {
    if (h <= 0) throw ConfigError("hidden layer widths must be > 0");
  }
  if (!std::isfinite(max_grad_norm)) throw ConfigError("max_grad_norm must be finite");
  if (!std::isfinite(init_log_std)) throw ConfigError("init_log_std must be finite");
  if (threads < 0) throw ConfigError("threads must be >= 0");
}

}  // namespace siteswarm::mappo
