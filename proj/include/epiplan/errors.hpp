#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace epiplan {

/// Coarse failure classes; the CLI maps each to an exit status.
enum class ErrorCategory { config, data, solver, contract };

constexpr std::string_view to_string(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::data: return "data";
    case ErrorCategory::solver: return "solver";
    case ErrorCategory::contract: return "contract";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

struct ConfigError : Error {
  explicit ConfigError(const std::string& what) : Error(ErrorCategory::config, what) {}
};

struct DataError : Error {
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

struct SolverError : Error {
  explicit SolverError(const std::string& what) : Error(ErrorCategory::solver, what) {}
};

/// Dimension mismatches, out-of-range indices, violated preconditions.
struct ContractError : Error {
  explicit ContractError(const std::string& what) : Error(ErrorCategory::contract, what) {}
};

/// Bayes update with a zero normalizer: the observation has probability zero
/// under the predicted belief.
struct ImpossibleObservation : DataError {
  explicit ImpossibleObservation(const std::string& what) : DataError(what) {}
};

/// Calibration could not produce parameters (too little data, rank deficiency).
struct CalibrationError : DataError {
  explicit CalibrationError(const std::string& what) : DataError(what) {}
};

}  // namespace epiplan
