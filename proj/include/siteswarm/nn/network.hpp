#ifndef SITESWARM_NN_NETWORK_HPP_
#define SITESWARM_NN_NETWORK_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "siteswarm/nn/tape.hpp"

namespace siteswarm::nn {

using Vector = Eigen::VectorXd;

enum class Activation { Tanh, Identity };

// Exact element equality; false on a shape mismatch.
inline bool same(const Matrix& a, const Matrix& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
}

struct Layer {
  Matrix weight;  // out x in
  Matrix bias;    // 1 x out

  bool operator==(const Layer& o) const { return same(weight, o.weight) && same(bias, o.bias); }
};

// Dense feed-forward network. `hidden_activation[k]` applies after layer k for
// every layer except the last, which is always linear.
struct NetParams {
  std::vector<Layer> layers;
  std::vector<Activation> hidden_activation;

  Eigen::Index in_dim() const;
  Eigen::Index out_dim() const;
  std::size_t param_count() const;
  // Shape composition and finiteness; throws ShapeError / NumericError.
  void validate() const;

  bool operator==(const NetParams&) const = default;
};

// Mutable view of one trainable tensor. The name is the key used on tapes and
// in gradient maps.
struct ParamRef {
  std::string name;
  Matrix* value;
};

std::vector<ParamRef> named_params(NetParams& net, const std::string& prefix);

// Orthogonal initialisation: each weight is a gain-scaled orthonormal
// block drawn from a QR factorisation of a Gaussian matrix; biases zero.
NetParams make_mlp(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden,
                   Eigen::Index out_dim, double hidden_gain, double output_gain,
                   std::mt19937_64& rng);

Vector forward(const NetParams& net, const Vector& input);
// Row-per-sample batch evaluation.
Matrix forward_batch(const NetParams& net, const Matrix& inputs);

// Tape bindings for one network.
struct NetVars {
  std::vector<Var> weights;
  std::vector<Var> biases;
};

NetVars bind(Tape& tape, const NetParams& net, const std::string& prefix);
Var forward(const NetParams& net, const NetVars& vars, Var inputs);

}  // namespace siteswarm::nn

#endif  // SITESWARM_NN_NETWORK_HPP_
