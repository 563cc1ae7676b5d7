#ifndef SITESWARM_HARNESS_CHECKPOINT_HPP_
#define SITESWARM_HARNESS_CHECKPOINT_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "siteswarm/harness/config.hpp"
#include "siteswarm/mappo/trainer.hpp"

namespace siteswarm::harness {

inline constexpr char kCheckpointMagic[8] = {'S', 'S', 'W', 'M', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  ExperimentConfig experiment;
  mappo::TrainerState state;  // state.config mirrors experiment.trainer

  bool operator==(const Checkpoint&) const = default;
};

// Binary container:
//   magic "SSWMCKPT", u32 version, string "nn_format=1", string config JSON,
//   i64 iteration, i64 env_steps, episode counters, rolling window, metric
//   history, per-agent learners (layers, log_std, Adam moments), u64 FNV-1a
//   checksum of everything before it. Little-endian, doubles as IEEE bits.
std::string encode_checkpoint(const Checkpoint& c);
// Throws DecodeError on a bad magic, version, checksum or a truncated buffer.
Checkpoint decode_checkpoint(const std::string& bytes);

// Writes to a temporary sibling and renames it over `path`.
void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path);
// NotFoundError when the file is missing.
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Atomic whole-file write shared by the exporters.
void write_file_atomic(const std::filesystem::path& path, const std::string& bytes);
std::string read_file(const std::filesystem::path& path);

// FNV-1a over the bytes; used for checkpoint integrity and parameter hashes.
std::uint64_t fnv1a(const std::string& bytes);
std::uint64_t learner_hash(const std::vector<mappo::AgentLearner>& learners);

}  // namespace siteswarm::harness

#endif  // SITESWARM_HARNESS_CHECKPOINT_HPP_
