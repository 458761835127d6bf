#pragma once

#include <stdexcept>
#include <string>

namespace driftbv {

// Error taxonomy shared by all modules. Each failure mode gets its own type
// so callers can catch precisely; the what() string carries the context.

struct GraphHasNoResolvent : std::runtime_error {
  explicit GraphHasNoResolvent(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidInput : std::runtime_error {
  explicit InvalidInput(const std::string& msg) : std::runtime_error(msg) {}
};

struct OutsideDomainOfJ : std::runtime_error {
  explicit OutsideDomainOfJ(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadBoundarySpec : std::runtime_error {
  explicit BadBoundarySpec(const std::string& msg) : std::runtime_error(msg) {}
};

struct BadEtaConstants : std::runtime_error {
  explicit BadEtaConstants(const std::string& msg) : std::runtime_error(msg) {}
};

struct CutoffDoesNotFit : std::runtime_error {
  explicit CutoffDoesNotFit(const std::string& msg) : std::runtime_error(msg) {}
};

struct GridMismatch : std::runtime_error {
  explicit GridMismatch(const std::string& msg) : std::runtime_error(msg) {}
};

struct ExtensionMarginTooSmall : std::runtime_error {
  explicit ExtensionMarginTooSmall(const std::string& msg) : std::runtime_error(msg) {}
};

struct SolveFailed : std::runtime_error {
  double last_residual;
  SolveFailed(const std::string& msg, double res)
      : std::runtime_error(msg), last_residual(res) {}
};

struct StepTooLarge : std::runtime_error {
  explicit StepTooLarge(const std::string& msg) : std::runtime_error(msg) {}
};

struct UnknownEstimate : std::runtime_error {
  explicit UnknownEstimate(const std::string& msg) : std::runtime_error(msg) {}
};

struct CutoffRejected : std::runtime_error {
  explicit CutoffRejected(const std::string& msg) : std::runtime_error(msg) {}
};

struct OracleInapplicable : std::runtime_error {
  explicit OracleInapplicable(const std::string& msg) : std::runtime_error(msg) {}
};

struct TimeOutOfRange : std::runtime_error {
  explicit TimeOutOfRange(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace driftbv
