#include "siteswarm/rollout/buffer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "siteswarm/errors.hpp"

namespace siteswarm::rollout {

RolloutBuffer::RolloutBuffer(std::size_t capacity,
                             std::vector<Eigen::Index> obs_dims,
                             std::vector<Eigen::Index> action_dims)
    : capacity_(capacity),
      obs_dims_(std::move(obs_dims)),
      act_dims_(std::move(action_dims)) {
  if (capacity_ == 0) throw ConfigError("buffer: capacity must be positive");
  if (obs_dims_.empty() || obs_dims_.size() != act_dims_.size()) {
    throw ShapeError("buffer: need one obs and action dim per agent");
  }
  const std::size_t n = obs_dims_.size();
  obs_.resize(n);
  act_.resize(n);
  rewards_.resize(n);
  values_.resize(n);
  log_probs_.resize(n);
  masks_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    obs_[i] = Matrix::Zero(static_cast<Eigen::Index>(capacity_), obs_dims_[i]);
    act_[i] = Matrix::Zero(static_cast<Eigen::Index>(capacity_), act_dims_[i]);
    rewards_[i].assign(capacity_, 0.0);
    values_[i].assign(capacity_, 0.0);
    log_probs_[i].assign(capacity_, 0.0);
    masks_[i].assign(capacity_, 0);
  }
}

void RolloutBuffer::append(const Transition& t) {
  if (full()) {
    throw CapacityError("buffer: full at " + std::to_string(capacity_) + " steps");
  }
  const std::size_t n = agent_count();
  if (t.observations.size() != n || t.actions.size() != n ||
      t.rewards.size() != n || t.values.size() != n || t.log_probs.size() != n ||
      t.masks.size() != n) {
    throw ShapeError("buffer: transition agent count mismatch");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (t.observations[i].size() != obs_dims_[i] ||
        t.actions[i].size() != act_dims_[i]) {
      throw ShapeError("buffer: transition dimension mismatch for agent " +
                       std::to_string(i));
    }
    if (t.masks[i] > 1) throw NumericError("buffer: mask must be 0 or 1");
    if (!t.observations[i].allFinite() || !t.actions[i].allFinite() ||
        !std::isfinite(t.rewards[i]) || !std::isfinite(t.values[i]) ||
        !std::isfinite(t.log_probs[i])) {
      throw NumericError("buffer: non-finite entry for agent " + std::to_string(i));
    }
  }
  const auto row = static_cast<Eigen::Index>(size_);
  for (std::size_t i = 0; i < n; ++i) {
    obs_[i].row(row) = t.observations[i].transpose();
    act_[i].row(row) = t.actions[i].transpose();
    rewards_[i][size_] = t.rewards[i];
    values_[i][size_] = t.values[i];
    log_probs_[i][size_] = t.log_probs[i];
    masks_[i][size_] = t.masks[i];
  }
  ++size_;
}

bool RolloutBuffer::has_open_segment() const {
  const std::size_t closed = segments_.empty() ? 0 : segments_.back().end;
  return closed < size_;
}

void RolloutBuffer::end_segment(std::vector<double> bootstrap) {
  if (bootstrap.size() != agent_count()) {
    throw ShapeError("buffer: bootstrap needs one value per agent");
  }
  for (double b : bootstrap) {
    if (!std::isfinite(b)) throw NumericError("buffer: non-finite bootstrap");
  }
  const std::size_t begin = segments_.empty() ? 0 : segments_.back().end;
  if (begin == size_) throw UsageError("buffer: end_segment on an empty run");
  segments_.push_back({begin, size_, std::move(bootstrap)});
}

void RolloutBuffer::append_buffer(const RolloutBuffer& other) {
  if (other.obs_dims_ != obs_dims_ || other.act_dims_ != act_dims_) {
    throw ShapeError("buffer: layout mismatch in append_buffer");
  }
  if (other.has_open_segment()) {
    throw UsageError("buffer: source has an unterminated segment");
  }
  if (has_open_segment()) {
    throw UsageError("buffer: destination has an unterminated segment");
  }
  if (size_ + other.size_ > capacity_) {
    throw CapacityError("buffer: append_buffer exceeds capacity");
  }
  const auto at = static_cast<Eigen::Index>(size_);
  const auto rows = static_cast<Eigen::Index>(other.size_);
  for (std::size_t i = 0; i < agent_count(); ++i) {
    obs_[i].middleRows(at, rows) = other.obs_[i].topRows(rows);
    act_[i].middleRows(at, rows) = other.act_[i].topRows(rows);
    std::copy_n(other.rewards_[i].begin(), other.size_, rewards_[i].begin() + at);
    std::copy_n(other.values_[i].begin(), other.size_, values_[i].begin() + at);
    std::copy_n(other.log_probs_[i].begin(), other.size_,
                log_probs_[i].begin() + at);
    std::copy_n(other.masks_[i].begin(), other.size_, masks_[i].begin() + at);
  }
  for (const Segment& s : other.segments_) {
    segments_.push_back({s.begin + size_, s.end + size_, s.bootstrap});
  }
  size_ += other.size_;
}

void RolloutBuffer::clear() {
  size_ = 0;
  segments_.clear();
}

Transition RolloutBuffer::at(std::size_t index) const {
  if (index >= size_) throw std::out_of_range("buffer: index out of range");
  Transition t;
  const auto row = static_cast<Eigen::Index>(index);
  for (std::size_t i = 0; i < agent_count(); ++i) {
    t.observations.push_back(obs_[i].row(row).transpose());
    t.actions.push_back(act_[i].row(row).transpose());
    t.rewards.push_back(rewards_[i][index]);
    t.values.push_back(values_[i][index]);
    t.log_probs.push_back(log_probs_[i][index]);
    t.masks.push_back(masks_[i][index]);
  }
  return t;
}

std::span<const double> RolloutBuffer::rewards(std::size_t agent) const {
  return {rewards_[agent].data(), size_};
}
std::span<const double> RolloutBuffer::values(std::size_t agent) const {
  return {values_[agent].data(), size_};
}
std::span<const double> RolloutBuffer::log_probs(std::size_t agent) const {
  return {log_probs_[agent].data(), size_};
}
std::span<const std::uint8_t> RolloutBuffer::masks(std::size_t agent) const {
  return {masks_[agent].data(), size_};
}

std::vector<std::vector<std::size_t>> minibatch_indices(std::size_t total,
                                                        std::size_t count,
                                                        std::mt19937_64& rng) {
  if (count == 0 || total == 0 || total % count != 0) {
    throw ConfigError("minibatch: mini-batch count " + std::to_string(count) +
                      " must divide buffer size " + std::to_string(total));
  }
  std::vector<std::size_t> perm(total);
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::shuffle(perm.begin(), perm.end(), rng);
  const std::size_t per = total / count;
  std::vector<std::vector<std::size_t>> out(count);
  for (std::size_t b = 0; b < count; ++b) {
    out[b].assign(perm.begin() + b * per, perm.begin() + (b + 1) * per);
  }
  return out;
}

}  // namespace siteswarm::rollout
