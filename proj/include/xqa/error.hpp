#pragma once

#include <stdexcept>
#include <string>

namespace xqa {

// Exit codes used by the command-line front end.
enum class ExitCode : int { kOk = 0, kUsage = 1, kData = 2, kTransport = 3 };

// Bad command-line input or an unsatisfied precondition on caller arguments.
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed or inconsistent input data (files, records, ratings).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Failure talking to a remote QA endpoint.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, int chunk_index)
      : std::runtime_error(what), chunk_index_(chunk_index) {}

  // Index of the chunk whose request failed, or -1 when not chunk-specific.
  int chunk_index() const noexcept { return chunk_index_; }

 private:
  int chunk_index_;
};

}  // namespace xqa
