#ifndef SITESWARM_NN_ADAM_HPP_
#define SITESWARM_NN_ADAM_HPP_

#include <algorithm>
#include <cstdint>
#include <span>
#include <vector>

#include "siteswarm/nn/network.hpp"
#include "siteswarm/nn/tape.hpp"

namespace siteswarm::nn {

struct AdamOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// First and second moments, index-aligned with the ParamRef list passed to
// adam_step. Lazily sized on the first step.
struct AdamState {
  std::vector<Matrix> first;
  std::vector<Matrix> second;
  std::int64_t step = 0;

  bool operator==(const AdamState& o) const {
    return step == o.step && std::equal(first.begin(), first.end(), o.first.begin(), o.first.end(), same) &&
           std::equal(second.begin(), second.end(), o.second.begin(), o.second.end(), same);
  }
};

// Bias-corrected Adam update. Every param must have a gradient entry of the
// same shape. Throws NumericError naming the parameter on a non-finite
// gradient or result; params are left untouched in that case.
void adam_step(std::span<const ParamRef> params, const GradientMap& grads,
               AdamState& state, double lr, const AdamOptions& opts = {});

// L2 norm over the listed params' gradients.
double global_norm(std::span<const ParamRef> params, const GradientMap& grads);
// Rescales the listed gradients in place so their global norm is <= max_norm.
// Returns the pre-clip norm.
double clip_global_norm(std::span<const ParamRef> params, GradientMap& grads,
                        double max_norm);

}  // namespace siteswarm::nn

#endif  // SITESWARM_NN_ADAM_HPP_
