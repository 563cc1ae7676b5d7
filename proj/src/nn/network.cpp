#include "siteswarm/nn/network.hpp"

#include <cmath>

#include "siteswarm/errors.hpp"

namespace siteswarm::nn {

Eigen::Index NetParams::in_dim() const {
  return layers.empty() ? 0 : layers.front().weight.cols();
}

Eigen::Index NetParams::out_dim() const {
  return layers.empty() ? 0 : layers.back().weight.rows();
}

std::size_t NetParams::param_count() const {
  std::size_t n = 0;
  for (const Layer& l : layers) n += l.weight.size() + l.bias.size();
  return n;
}

void NetParams::validate() const {
  if (layers.empty()) throw ShapeError("net: no layers");
  if (hidden_activation.size() + 1 != layers.size()) {
    throw ShapeError("net: need one activation per hidden layer");
  }
  for (std::size_t k = 0; k < layers.size(); ++k) {
    const Layer& l = layers[k];
    if (l.bias.rows() != 1 || l.bias.cols() != l.weight.rows()) {
      throw ShapeError("net: layer " + std::to_string(k) + " bias shape");
    }
    if (k > 0 && l.weight.cols() != layers[k - 1].weight.rows()) {
      throw ShapeError("net: layer " + std::to_string(k) +
                       " input does not match previous output");
    }
    if (!l.weight.allFinite() || !l.bias.allFinite()) {
      throw NumericError("net: layer " + std::to_string(k) +
                         " has a non-finite entry");
    }
  }
}

std::vector<ParamRef> named_params(NetParams& net, const std::string& prefix) {
  std::vector<ParamRef> out;
  out.reserve(net.layers.size() * 2);
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const std::string base = prefix + ".l" + std::to_string(k);
    out.push_back({base + ".w", &net.layers[k].weight});
    out.push_back({base + ".b", &net.layers[k].bias});
  }
  return out;
}

namespace {

Matrix orthogonal(Eigen::Index rows, Eigen::Index cols, double gain,
                  std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index big = std::max(rows, cols);
  const Eigen::Index small = std::min(rows, cols);
  Matrix a(big, small);
  for (Eigen::Index j = 0; j < small; ++j) {
    for (Eigen::Index i = 0; i < big; ++i) a(i, j) = normal(rng);
  }
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(big, small);
  // Sign fix so the draw is uniform over the orthogonal group.
  const Matrix r = qr.matrixQR().topRows(small).triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < small; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  Matrix w = rows >= cols ? q : Matrix(q.transpose());
  return gain * w;
}

void apply(Activation act, Matrix& m) {
  if (act == Activation::Tanh) m = m.array().tanh().matrix();
}

}  // namespace

NetParams make_mlp(Eigen::Index in_dim, const std::vector<Eigen::Index>& hidden,
                   Eigen::Index out_dim, double hidden_gain, double output_gain,
                   std::mt19937_64& rng) {
  if (in_dim <= 0 || out_dim <= 0) throw ShapeError("net: empty in/out dim");
  NetParams net;
  Eigen::Index prev = in_dim;
  for (Eigen::Index h : hidden) {
    if (h <= 0) throw ShapeError("net: empty hidden layer");
    net.layers.push_back({orthogonal(h, prev, hidden_gain, rng), Matrix::Zero(1, h)});
    net.hidden_activation.push_back(Activation::Tanh);
    prev = h;
  }
  net.layers.push_back(
      {orthogonal(out_dim, prev, output_gain, rng), Matrix::Zero(1, out_dim)});
  return net;
}

Matrix forward_batch(const NetParams& net, const Matrix& inputs) {
  if (net.layers.empty()) throw ShapeError("net: no layers");
  if (inputs.cols() != net.in_dim()) {
    throw ShapeError("net: input width " + std::to_string(inputs.cols()) +
                     " != " + std::to_string(net.in_dim()));
  }
  Matrix h = inputs;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& l = net.layers[k];
    Matrix y = h * l.weight.transpose();
    y.rowwise() += l.bias.row(0);
    if (k + 1 < net.layers.size()) apply(net.hidden_activation[k], y);
    h = std::move(y);
  }
  return h;
}

Vector forward(const NetParams& net, const Vector& input) {
  if (net.layers.empty()) throw ShapeError("net: no layers");
  if (input.size() != net.in_dim()) {
    throw ShapeError("net: input length " + std::to_string(input.size()) +
                     " != " + std::to_string(net.in_dim()));
  }
  Vector h = input;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const Layer& l = net.layers[k];
    Vector y = l.weight * h + l.bias.row(0).transpose();
    if (k + 1 < net.layers.size() &&
        net.hidden_activation[k] == Activation::Tanh) {
      y = y.array().tanh().matrix();
    }
    h = std::move(y);
  }
  return h;
}

NetVars bind(Tape& tape, const NetParams& net, const std::string& prefix) {
  NetVars vars;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    const std::string base = prefix + ".l" + std::to_string(k);
    vars.weights.push_back(tape.param(base + ".w", net.layers[k].weight));
    vars.biases.push_back(tape.param(base + ".b", net.layers[k].bias));
  }
  return vars;
}

Var forward(const NetParams& net, const NetVars& vars, Var inputs) {
  if (vars.weights.size() != net.layers.size()) {
    throw ShapeError("net: bound variables do not match the network");
  }
  Var h = inputs;
  for (std::size_t k = 0; k < net.layers.size(); ++k) {
    h = linear(h, vars.weights[k], vars.biases[k]);
    if (k + 1 < net.layers.size() &&
        net.hidden_activation[k] == Activation::Tanh) {
      h = tanh(h);
    }
  }
  return h;
}

}  // namespace siteswarm::nn
