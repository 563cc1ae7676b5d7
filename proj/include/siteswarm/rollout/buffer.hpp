#ifndef SITESWARM_ROLLOUT_BUFFER_HPP_
#define SITESWARM_ROLLOUT_BUFFER_HPP_

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace siteswarm::rollout {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// One environment step for every agent. With action sharing all entries of
// `observations` hold the same global state s; the ablation without sharing
// gives each agent its own view.
struct Transition {
  std::vector<Vector> observations;
  std::vector<Vector> actions;  // unclamped policy draws
  std::vector<double> rewards;
  std::vector<double> values;
  std::vector<double> log_probs;
  std::vector<std::uint8_t> masks;  // 1 = episode continues after this step
};

// Contiguous run of steps from one environment stream. `bootstrap[i]` is
// agent i's V(s_T) for the state following the last step of the run.
struct Segment {
  std::size_t begin = 0;
  std::size_t end = 0;
  std::vector<double> bootstrap;
};

class RolloutBuffer {
 public:
  RolloutBuffer(std::size_t capacity, std::vector<Eigen::Index> obs_dims,
                std::vector<Eigen::Index> action_dims);

  // Throws CapacityError when full, ShapeError on agent/dimension mismatch,
  // NumericError on non-finite reals or a mask outside {0,1}.
  void append(const Transition& t);
  // Closes the open run [last end, size()) with per-agent bootstrap values.
  void end_segment(std::vector<double> bootstrap);
  // Appends every step and segment of `other` (same layout, not larger than
  // the remaining capacity). `other` must have no open run.
  void append_buffer(const RolloutBuffer& other);
  void clear();

  Transition at(std::size_t index) const;

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }
  bool full() const { return size_ == capacity_; }
  std::size_t agent_count() const { return obs_dims_.size(); }
  bool has_open_segment() const;

  // Row-per-step views; rows >= size() are unspecified.
  const Matrix& observations(std::size_t agent) const { return obs_[agent]; }
  const Matrix& actions(std::size_t agent) const { return act_[agent]; }
  std::span<const double> rewards(std::size_t agent) const;
  std::span<const double> values(std::size_t agent) const;
  std::span<const double> log_probs(std::size_t agent) const;
  std::span<const std::uint8_t> masks(std::size_t agent) const;
  const std::vector<Segment>& segments() const { return segments_; }

 private:
  std::size_t capacity_;
  std::size_t size_ = 0;
  std::vector<Eigen::Index> obs_dims_;
  std::vector<Eigen::Index> act_dims_;
  std::vector<Matrix> obs_;
  std::vector<Matrix> act_;
  std::vector<std::vector<double>> rewards_;
  std::vector<std::vector<double>> values_;
  std::vector<std::vector<double>> log_probs_;
  std::vector<std::vector<std::uint8_t>> masks_;
  std::vector<Segment> segments_;
};

// Seeded permutation of 0..total-1 split into `count` disjoint equal batches.
// Throws ConfigError when count does not divide total.
std::vector<std::vector<std::size_t>> minibatch_indices(std::size_t total,
                                                        std::size_t count,
                                                        std::mt19937_64& rng);

}  // namespace siteswarm::rollout

#endif  // SITESWARM_ROLLOUT_BUFFER_HPP_
