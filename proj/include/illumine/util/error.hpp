#pragma once

#include <stdexcept>
#include <string>

namespace illumine {

/// A feature metric has no value for this input (e.g. orientation of a
/// single-column stroke). The search discards such individuals.
class FeatureUndefined : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The mutation operator could not produce a valid, parent-distinct mutant
/// within its attempt bound.
class MutationExhausted : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// The system under test failed to produce an answer (crash, timeout,
/// malformed reply).
class SutError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad user configuration: unknown metric, inconsistent archives, etc.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

} // namespace illumine
