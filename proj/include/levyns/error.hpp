#pragma once

#include <stdexcept>
#include <string>

namespace levyns {

// Process exit codes used by the command line front end.
enum class ExitCode : int {
  ok = 0,
  usage = 1,
  assumption_failure = 2,
  integration_failure = 3,
  ingestion_error = 4,
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual ExitCode exit_code() const { return ExitCode::usage; }
};

// A precondition on an argument was violated (bad dimension, bad exponent, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

// A declared noise assumption does not hold on the sample set.
class AssumptionFailure : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::assumption_failure; }
};

class IntegrationFailure : public Error {
 public:
  IntegrationFailure(const std::string& what, double last_good_time)
      : Error(what), last_good_time_(last_good_time) {}
  ExitCode exit_code() const override { return ExitCode::integration_failure; }
  double last_good_time() const { return last_good_time_; }

 private:
  double last_good_time_;
};

// Malformed config, missing or mismatched artifact files.
class IngestionError : public Error {
 public:
  using Error::Error;
  ExitCode exit_code() const override { return ExitCode::ingestion_error; }
};

}  // namespace levyns
