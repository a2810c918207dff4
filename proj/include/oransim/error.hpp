#pragma once

#include <stdexcept>
#include <string>

namespace oransim {

// Invalid user-facing parameters. The message names the offending field.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Broken internal precondition (double release, over-allocation, ...).
// Always a simulator bug, never a modeled outcome.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

class LookupError : public std::out_of_range {
 public:
  using std::out_of_range::out_of_range;
};

class OversizedTransaction : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace oransim
