#include "siteswarm/mappo/losses.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "siteswarm/errors.hpp"

namespace siteswarm::mappo {

double clipped_surrogate(double ratio, double advantage, double clip) {
  if (!std::isfinite(ratio)) throw NumericError("surrogate: non-finite probability ratio");
  if (!(ratio > 0.0)) throw UsageError("surrogate: ratio must be > 0");
  const double clipped = std::clamp(ratio, 1.0 - clip, 1.0 + clip);
  return std::min(ratio * advantage, clipped * advantage);
}

double value_loss(double v_pred, double v_target) {
  const double d = v_pred - v_target;
  return 0.5 * d * d;
}

double total_loss(double l_clip, double l_v, double l_e, double value_coef,
                  double entropy_coef) {
  return -l_clip + value_coef * l_v - entropy_coef * l_e;
}

PpoLoss ppo_loss(nn::Tape& tape, const nn::PolicyParams& policy, const nn::NetParams& value,
                 const Minibatch& batch, const TrainerConfig& config) {
  const Eigen::Index b = batch.observations.rows();
  if (batch.actions.rows() != b || batch.old_log_probs.size() != b ||
      batch.advantages.size() != b || batch.returns.size() != b) {
    throw ShapeError("ppo_loss: minibatch fields disagree on the batch size");
  }
  using nn::Var;
  const std::string pi = kPolicyPrefix, v = kValuePrefix;
  Var obs = tape.constant(batch.observations);

  const nn::NetVars pvars = nn::bind(tape, policy.net, pi);
  Var mean = nn::tanh(nn::forward(policy.net, pvars, obs));
  Var log_std = tape.param(pi + ".log_std", policy.log_std);
  Var lp = nn::log_prob(mean, log_std, batch.actions);

  Var ratio = nn::exp(nn::sub(lp, tape.constant(batch.old_log_probs)));
  Var adv = tape.constant(batch.advantages);
  Var surr1 = nn::mul(ratio, adv);
  Var surr2 = nn::mul(nn::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip), adv);
  Var l_clip = nn::mean(nn::minimum(surr1, surr2));

  const nn::NetVars vvars = nn::bind(tape, value, v);
  Var pred = nn::forward(value, vvars, obs);
  Var l_v = nn::mean(nn::scale(nn::square(nn::sub(pred, tape.constant(batch.returns))), 0.5));

  Var l_e = nn::entropy(log_std);

  Var total = nn::add(nn::add(nn::scale(l_clip, -1.0), nn::scale(l_v, config.value_coef)),
                      nn::scale(l_e, -config.entropy_coef));
  PpoLoss out{total, l_clip, l_v, l_e, ratio.value().col(0)};
  if (!std::isfinite(total.scalar())) {
    throw NumericError("ppo_loss: non-finite loss (surrogate " +
                       std::to_string(l_clip.scalar()) + ", value " +
                       std::to_string(l_v.scalar()) + ")");
  }
  return out;
}

}  // namespace siteswarm::mappo
