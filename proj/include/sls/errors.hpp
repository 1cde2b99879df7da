#pragma once

#include <stdexcept>
#include <string>

namespace sls {

// Error taxonomy shared across the library. All carry a human-readable
// message; the CLI maps them onto process exit codes.

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyTrace : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonMonotoneTime : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NegativeConcentration : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewPoints : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ChannelMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EmptyCluster : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MissingBaseline : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewChains : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct TooFewDraws : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InitializationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonFiniteDeviance : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NoCompletedReps : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionMismatch : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace sls
