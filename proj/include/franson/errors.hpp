#pragma once

#include <stdexcept>
#include <string>

namespace franson {

/// Invalid user configuration (bad parameter value, unknown key, ...).
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A Fock term would exceed the basis photon-number truncation.
class TruncationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Post-selection or normalization on an event of zero probability.
class EmptySelectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace franson
