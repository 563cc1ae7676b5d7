#ifndef SITESWARM_HARNESS_ORACLES_HPP_
#define SITESWARM_HARNESS_ORACLES_HPP_

#include <cstdint>
#include <string>
#include <vector>

namespace siteswarm::harness {

// Brute-force reference checks shipped with the CLI. Each compares a
// production routine against an independent, slower formulation.
struct OracleResult {
  std::string name;
  bool passed = false;
  std::size_t cases = 0;
  double max_error = 0.0;
  std::string detail;
};

// Recursive advantages/returns vs explicit discounted sums on random masked
// sequences (T <= 10). Tolerance 1e-10.
OracleResult gae_oracle(std::uint64_t seed, std::size_t cases = 1000);
// FK(IK(t)) on targets drawn from FK of random in-limit joints (tolerance
// 1e-9), and targets outside the wrist annulus must raise UnreachableError.
OracleResult ik_oracle(std::uint64_t seed, std::size_t cases = 10000);
// detect_collisions flags vs all-pairs primitive distance checks on random
// two-arm worlds.
OracleResult collision_oracle(std::uint64_t seed, std::size_t worlds = 100);
// segment_distance vs the minimum over densely sampled point pairs (2e-3).
OracleResult segment_distance_oracle(std::uint64_t seed, std::size_t cases = 50);

std::vector<OracleResult> run_oracle_suites(std::uint64_t seed);

}  // namespace siteswarm::harness

#endif  // SITESWARM_HARNESS_ORACLES_HPP_
