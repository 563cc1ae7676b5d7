#ifndef SITESWARM_MAPPO_LOSSES_HPP_
#define SITESWARM_MAPPO_LOSSES_HPP_

#include "siteswarm/mappo/config.hpp"
#include "siteswarm/nn/gaussian.hpp"
#include "siteswarm/nn/network.hpp"
#include "siteswarm/nn/tape.hpp"

namespace siteswarm::mappo {

// min(r * A, clip(r, 1 - zeta, 1 + zeta) * A). Throws NumericError on a
// non-finite ratio, UsageError on a non-positive ratio.
double clipped_surrogate(double ratio, double advantage, double clip);
double value_loss(double v_pred, double v_target);
// Minimised objective: -L_clip + c1 * L_v - c2 * L_e.
double total_loss(double l_clip, double l_v, double l_e, double value_coef,
                  double entropy_coef);

struct Minibatch {
  nn::Matrix observations;  // B x obs
  nn::Matrix actions;       // B x act
  nn::Vector old_log_probs;
  nn::Vector advantages;
  nn::Vector returns;
};

struct PpoLoss {
  nn::Var total;
  nn::Var surrogate;  // L_clip (to be maximised)
  nn::Var value;      // L_v
  nn::Var entropy;    // L_e
  nn::Vector ratio;
};

inline constexpr const char* kPolicyPrefix = "pi";
inline constexpr const char* kValuePrefix = "v";

// Records the full loss for one agent on `tape`. Parameter names are
// kPolicyPrefix.* (including .log_std) and kValuePrefix.*.
PpoLoss ppo_loss(nn::Tape& tape, const nn::PolicyParams& policy, const nn::NetParams& value,
                 const Minibatch& batch, const TrainerConfig& config);

}  // namespace siteswarm::mappo

#endif  // SITESWARM_MAPPO_LOSSES_HPP_
