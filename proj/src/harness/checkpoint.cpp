#include "siteswarm/harness/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

#include "siteswarm/errors.hpp"

namespace siteswarm::harness {

static_assert(std::endian::native == std::endian::little, "checkpoint layout assumes little-endian");

namespace {

constexpr const char* kNnFormat = "nn_format=1";

class Writer {
 public:
  template <typename T>
  void pod(T v) {
    char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    out_.append(b, sizeof(T));
  }
  void u64(std::uint64_t v) { pod(v); }
  void i64(std::int64_t v) { pod(v); }
  void f64(double v) { pod(v); }
  void str(const std::string& s) {
    u64(s.size());
    out_ += s;
  }
  void doubles(const std::vector<double>& v) {
    u64(v.size());
    for (double d : v) f64(d);
  }
  void matrix(const nn::Matrix& m) {
    i64(m.rows());
    i64(m.cols());
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) f64(m(r, c));
    }
  }
  void net(const nn::NetParams& n) {
    u64(n.layers.size());
    for (std::size_t i = 0; i < n.layers.size(); ++i) {
      u64(i);
      matrix(n.layers[i].weight);
      matrix(n.layers[i].bias);
    }
    u64(n.hidden_activation.size());
    for (nn::Activation a : n.hidden_activation) pod(static_cast<std::uint8_t>(a));
  }
  void adam(const nn::AdamState& s) {
    i64(s.step);
    u64(s.first.size());
    for (const nn::Matrix& m : s.first) matrix(m);
    u64(s.second.size());
    for (const nn::Matrix& m : s.second) matrix(m);
  }
  std::string& bytes() { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  Reader(const std::string& b, std::size_t end) : b_(b), end_(end) {}

  template <typename T>
  T pod() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, b_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  std::uint64_t u64() { return pod<std::uint64_t>(); }
  std::int64_t i64() { return pod<std::int64_t>(); }
  double f64() { return pod<double>(); }
  std::size_t count(std::size_t elem_size) {
    const std::uint64_t n = u64();
    if (elem_size > 0 && n > (end_ - pos_) / elem_size) throw DecodeError("checkpoint: length field exceeds payload");
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const std::size_t n = count(1);
    std::string s = b_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::vector<double> doubles() {
    std::vector<double> v(count(8));
    for (double& d : v) d = f64();
    return v;
  }
  nn::Matrix matrix() {
    const std::int64_t r = i64(), c = i64();
    if (r < 0 || c < 0) throw DecodeError("checkpoint: negative matrix shape");
    if (r != 0 && static_cast<std::uint64_t>(c) > (end_ - pos_) / 8 / static_cast<std::uint64_t>(r)) {
      throw DecodeError("checkpoint: matrix exceeds payload");
    }
    nn::Matrix m(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      for (Eigen::Index j = 0; j < c; ++j) m(i, j) = f64();
    }
    return m;
  }
  nn::NetParams net() {
    nn::NetParams n;
    n.layers.resize(count(16));
    for (std::size_t i = 0; i < n.layers.size(); ++i) {
      if (u64() != i) throw DecodeError("checkpoint: layer index out of order");
      n.layers[i].weight = matrix();
      n.layers[i].bias = matrix();
    }
    n.hidden_activation.resize(count(1));
    for (nn::Activation& a : n.hidden_activation) {
      const auto v = pod<std::uint8_t>();
      if (v > static_cast<std::uint8_t>(nn::Activation::Identity)) throw DecodeError("checkpoint: bad activation");
      a = static_cast<nn::Activation>(v);
    }
    try {
      n.validate();
    } catch (const std::exception& e) {
      throw DecodeError(std::string("checkpoint: invalid network: ") + e.what());
    }
    return n;
  }
  nn::AdamState adam() {
    nn::AdamState s;
    s.step = i64();
    s.first.resize(count(16));
    for (nn::Matrix& m : s.first) m = matrix();
    s.second.resize(count(16));
    for (nn::Matrix& m : s.second) m = matrix();
    return s;
  }
  void expect(const char* data, std::size_t n, const char* what) {
    need(n);
    if (std::memcmp(b_.data() + pos_, data, n) != 0) throw DecodeError(std::string("checkpoint: bad ") + what);
    pos_ += n;
  }
  bool at_end() const { return pos_ == end_; }

 private:
  void need(std::size_t n) {
    if (end_ - pos_ < n) throw DecodeError("checkpoint: truncated payload");
  }
  const std::string& b_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

}  // namespace

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string encode_checkpoint(const Checkpoint& c) {
  if (!(c.state.config == c.experiment.trainer)) {
    throw UsageError("checkpoint: trainer state config differs from the experiment config");
  }
  Writer w;
  w.bytes().append(kCheckpointMagic, sizeof(kCheckpointMagic));
  w.pod(kCheckpointVersion);
  w.str(kNnFormat);
  w.str(to_json(c.experiment).dump());
  const mappo::TrainerState& s = c.state;
  w.i64(s.iteration);
  w.i64(s.env_steps);
  w.u64(s.episode_counters.size());
  for (std::uint64_t v : s.episode_counters) w.u64(v);
  w.u64(s.window.size());
  for (const mappo::EpisodeOutcome& o : s.window) {
    w.pod(static_cast<std::uint8_t>(o.success));
    w.i64(o.self_collision_steps);
  }
  w.u64(s.history.size());
  for (const mappo::IterationMetrics& m : s.history) {
    w.i64(m.iteration);
    w.i64(m.env_steps);
    w.doubles(m.mean_episode_return);
    w.doubles(m.policy_loss);
    w.doubles(m.value_loss);
    w.doubles(m.entropy);
    w.doubles(m.clip_fraction);
    w.f64(m.success_rate_rolling);
    w.f64(m.self_collisions_rolling);
  }
  w.u64(s.learners.size());
  for (const mappo::AgentLearner& l : s.learners) {
    w.u64(l.index);
    w.net(l.policy.net);
    w.matrix(l.policy.log_std);
    w.net(l.value);
    w.adam(l.policy_opt);
    w.adam(l.value_opt);
  }
  const std::uint64_t sum = fnv1a(w.bytes());
  w.u64(sum);
  return std::move(w.bytes());
}

Checkpoint decode_checkpoint(const std::string& bytes) {
  if (bytes.size() < sizeof(kCheckpointMagic) + 4 + 8) throw DecodeError("checkpoint: truncated payload");
  const std::size_t body = bytes.size() - 8;
  Reader r(bytes, bytes.size());
  r.expect(kCheckpointMagic, sizeof(kCheckpointMagic), "magic");
  const auto version = r.pod<std::uint32_t>();
  if (version != kCheckpointVersion) {
    throw DecodeError("checkpoint: format version " + std::to_string(version) + ", expected " +
                      std::to_string(kCheckpointVersion));
  }
  std::uint64_t stored;
  std::memcpy(&stored, bytes.data() + body, 8);
  if (fnv1a(bytes.substr(0, body)) != stored) throw DecodeError("checkpoint: checksum mismatch");

  Reader b(bytes, body);
  b.expect(kCheckpointMagic, sizeof(kCheckpointMagic), "magic");
  b.pod<std::uint32_t>();
  if (b.str() != kNnFormat) throw DecodeError("checkpoint: unsupported network payload format");
  Checkpoint c;
  try {
    c.experiment = from_json(nlohmann::json::parse(b.str()));
  } catch (const DecodeError&) {
    throw;
  } catch (const std::exception& e) {
    throw DecodeError(std::string("checkpoint: bad config snapshot: ") + e.what());
  }
  mappo::TrainerState& s = c.state;
  s.config = c.experiment.trainer;
  s.iteration = b.i64();
  s.env_steps = b.i64();
  s.episode_counters.resize(b.count(8));
  for (std::uint64_t& v : s.episode_counters) v = b.u64();
  s.window.resize(b.count(9));
  for (mappo::EpisodeOutcome& o : s.window) {
    o.success = b.pod<std::uint8_t>() != 0;
    o.self_collision_steps = b.i64();
  }
  s.history.resize(b.count(16));
  for (mappo::IterationMetrics& m : s.history) {
    m.iteration = b.i64();
    m.env_steps = b.i64();
    m.mean_episode_return = b.doubles();
    m.policy_loss = b.doubles();
    m.value_loss = b.doubles();
    m.entropy = b.doubles();
    m.clip_fraction = b.doubles();
    m.success_rate_rolling = b.f64();
    m.self_collisions_rolling = b.f64();
  }
  s.learners.resize(b.count(8));
  for (mappo::AgentLearner& l : s.learners) {
    l.index = static_cast<std::size_t>(b.u64());
    l.policy.net = b.net();
    l.policy.log_std = b.matrix();
    l.value = b.net();
    l.policy_opt = b.adam();
    l.value_opt = b.adam();
  }
  if (!b.at_end()) throw DecodeError("checkpoint: trailing bytes after payload");
  return c;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.flush();
    if (!out) throw std::runtime_error("write to '" + tmp.string() + "' failed");
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("'" + path.string() + "' not found");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  write_file_atomic(path, encode_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  if (!std::filesystem::is_regular_file(path)) {
    throw NotFoundError("checkpoint '" + path.string() + "' not found");
  }
  return decode_checkpoint(read_file(path));
}

std::uint64_t learner_hash(const std::vector<mappo::AgentLearner>& learners) {
  Writer w;
  for (const mappo::AgentLearner& l : learners) {
    w.net(l.policy.net);
    w.matrix(l.policy.log_std);
    w.net(l.value);
    w.adam(l.policy_opt);
    w.adam(l.value_opt);
  }
  return fnv1a(w.bytes());
}

}  // namespace siteswarm::harness
