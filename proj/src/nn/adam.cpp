#include "siteswarm/nn/adam.hpp"

#include <cmath>

#include "siteswarm/errors.hpp"

namespace siteswarm::nn {

namespace {

const Matrix& grad_for(const GradientMap& grads, const ParamRef& p) {
  auto it = grads.find(p.name);
  if (it == grads.end()) throw ShapeError("adam: no gradient for " + p.name);
  if (it->second.rows() != p.value->rows() || it->second.cols() != p.value->cols()) {
    throw ShapeError("adam: gradient shape mismatch for " + p.name);
  }
  return it->second;
}

}  // namespace

void adam_step(std::span<const ParamRef> params, const GradientMap& grads,
               AdamState& state, double lr, const AdamOptions& opts) {
  if (!(lr > 0.0)) throw ConfigError("adam: learning rate must be positive");
  if (state.first.empty()) {
    for (const ParamRef& p : params) {
      state.first.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
      state.second.push_back(Matrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  if (state.first.size() != params.size()) {
    throw ShapeError("adam: moment count does not match parameter count");
  }

  // Validate everything before mutating anything.
  std::vector<const Matrix*> gs;
  gs.reserve(params.size());
  for (const ParamRef& p : params) {
    const Matrix& g = grad_for(grads, p);
    if (!g.allFinite()) throw NumericError("adam: non-finite gradient for " + p.name);
    gs.push_back(&g);
  }

  const std::int64_t step = state.step + 1;
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(step));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(step));

  std::vector<Matrix> m(params.size()), v(params.size()), next(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& g = *gs[i];
    m[i] = opts.beta1 * state.first[i] + (1.0 - opts.beta1) * g;
    v[i] = opts.beta2 * state.second[i] + (1.0 - opts.beta2) * g.cwiseProduct(g);
    next[i] = params[i].value->array() -
              lr * (m[i].array() / c1) /
                  ((v[i].array() / c2).sqrt() + opts.epsilon);
    if (!next[i].allFinite()) {
      throw NumericError("adam: update produced a non-finite entry in " +
                         params[i].name);
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    *params[i].value = std::move(next[i]);
    state.first[i] = std::move(m[i]);
    state.second[i] = std::move(v[i]);
  }
  state.step = step;
}

double global_norm(std::span<const ParamRef> params, const GradientMap& grads) {
  double sq = 0.0;
  for (const ParamRef& p : params) sq += grad_for(grads, p).squaredNorm();
  return std::sqrt(sq);
}

double clip_global_norm(std::span<const ParamRef> params, GradientMap& grads,
                        double max_norm) {
  const double norm = global_norm(params, grads);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (const ParamRef& p : params) grads.at(p.name) *= s;
  }
  return norm;
}

}  // namespace siteswarm::nn
