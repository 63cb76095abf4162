#pragma once

#include <stdexcept>
#include <string>

namespace ropsketch {

/// Shapes or lengths that do not agree (signal vs. ensemble, pattern vs. sketch).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IndexError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

/// Two sketches (or a pattern and a sketch) produced by different operators.
class FingerprintError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input data: bad magic, truncated file, out-of-range labels, zero-norm images.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid run configuration (CLI flags, experiment parameters, geometry).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ropsketch
