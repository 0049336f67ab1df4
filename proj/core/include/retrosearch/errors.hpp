#pragma once

#include <stdexcept>
#include <string>

namespace retro {

/// Bad or inconsistent experiment configuration. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// File could not be read, parsed, or written. CLI maps this to exit code 4.
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Every training iteration failed to produce a single terminal within budget.
/// CLI maps this to exit code 3.
struct TrainingStarved : std::runtime_error {
  explicit TrainingStarved(const std::string& what) : std::runtime_error(what) {}
};

/// Simplex exceeded its iteration guard. With Bland's rule this indicates a
/// bug (or a numerically hostile instance), not an unlucky pivot sequence.
struct SimplexStalled : std::runtime_error {
  explicit SimplexStalled(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace retro
