// Error taxonomy shared by the library and the CLI exit-status convention.
#pragma once

#include <stdexcept>
#include <string>

namespace ehsid {

// CLI exit codes. Each library exception carries the code it maps to.
enum class ExitCode : int {
  ok = 0,
  failure = 1,
  config = 2,
  data = 3,
  identifiability = 4,
  tuning = 5,
  divergence = 6,
  analysis = 7,
};

class Error : public std::runtime_error {
public:
  Error(ExitCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ExitCode code() const { return code_; }

private:
  ExitCode code_;
};

// Malformed configuration: bad parameter values, unit mismatches, out-of-range
// solver settings.
struct ConfigError : Error {
  explicit ConfigError(const std::string& w) : Error(ExitCode::config, w) {}
};

// Non-finite or otherwise invalid runtime input to an operation.
struct InputError : Error {
  explicit InputError(const std::string& w) : Error(ExitCode::config, w) {}
};

// Dataset too short, misaligned, or unreadable.
struct DataError : Error {
  explicit DataError(const std::string& w) : Error(ExitCode::data, w) {}
};

// Regression problem is rank deficient (insufficient excitation).
struct IdentifiabilityError : Error {
  explicit IdentifiabilityError(const std::string& w)
      : Error(ExitCode::identifiability, w) {}
};

// Auto-tuning could not find the requested operating regime.
struct TuningError : Error {
  explicit TuningError(const std::string& w) : Error(ExitCode::tuning, w) {}
};

// Simulation state became non-finite or unbounded.
struct DivergenceError : Error {
  explicit DivergenceError(const std::string& w)
      : Error(ExitCode::divergence, w) {}
};

// A frequency-domain or metric computation has no defined answer.
struct AnalysisError : Error {
  explicit AnalysisError(const std::string& w) : Error(ExitCode::analysis, w) {}
};

struct MetricError : Error {
  explicit MetricError(const std::string& w) : Error(ExitCode::analysis, w) {}
};

}  // namespace ehsid
