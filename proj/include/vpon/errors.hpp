#pragma once

#include <stdexcept>
#include <string>

namespace vpon {

/// Invalid argument to an operation (bad pmf, mismatched sizes, out-of-range knob).
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Offered load meets or exceeds capacity; the slice cannot be served.
class OverloadError : public std::runtime_error {
 public:
  OverloadError(double rho, const std::string& what)
      : std::runtime_error(what), rho_(rho) {}
  double rho() const { return rho_; }

 private:
  double rho_;
};

/// Unknown RU/tree id, or an RU not reachable from the serving tree.
class TopologyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Layout synthesis could not satisfy its placement rules.
class GenerationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad scenario/config input (unknown key, wrong type, unresolvable reference).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace vpon
