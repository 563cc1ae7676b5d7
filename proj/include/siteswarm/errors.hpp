#ifndef SITESWARM_ERRORS_HPP_
#define SITESWARM_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace siteswarm {

// Dimension or sequence-length mismatch.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Invalid configuration (hyperparameters, geometry, unknown keys).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// API misuse, e.g. consuming a gradient tape twice or a bad CLI flag.
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// NaN/Inf produced by an update or a loss.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnreachableError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Corrupt or incompatible checkpoint / metrics / trace file.
class DecodeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotFoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace siteswarm

#endif  // SITESWARM_ERRORS_HPP_
