#ifndef HOMOG_ERRORS_HPP
#define HOMOG_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace homog {

/// Base class for all computational failures raised by this library.
/// Usage errors (bad arguments, malformed files) use std::invalid_argument
/// or ParseError instead.
class SolverError : public std::runtime_error {
 public:
  explicit SolverError(const std::string& msg) : std::runtime_error(msg) {}
};

class SingularTensor : public SolverError {
 public:
  explicit SingularTensor(const std::string& msg) : SolverError(msg) {}
};

class NonPositiveJacobian : public SolverError {
 public:
  explicit NonPositiveJacobian(const std::string& msg) : SolverError(msg) {}
};

class NewtonDiverged : public SolverError {
 public:
  explicit NewtonDiverged(const std::string& msg) : SolverError(msg) {}
};

class CgStalled : public SolverError {
 public:
  explicit CgStalled(const std::string& msg) : SolverError(msg) {}
};

class RootFindFailed : public SolverError {
 public:
  explicit RootFindFailed(const std::string& msg) : SolverError(msg) {}
};

class RejectionOverflow : public SolverError {
 public:
  explicit RejectionOverflow(const std::string& msg) : SolverError(msg) {}
};

class TrainingDiverged : public SolverError {
 public:
  explicit TrainingDiverged(const std::string& msg) : SolverError(msg) {}
};

class InsufficientData : public SolverError {
 public:
  explicit InsufficientData(const std::string& msg) : SolverError(msg) {}
};

class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace homog

#endif
