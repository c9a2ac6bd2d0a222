#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace cohere {

enum class ErrorKind {
  invalid_argument,  // precondition violated by the caller
  data,              // malformed or inconsistent input data
  config,            // bad run configuration
  io,                // file system failure
  numerical,         // solver failure or non-finite state
};

// Every library failure carries the module it originated in, so the CLI can
// report provenance and map the kind onto an exit code.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, std::string module, const std::string& message);

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& module() const noexcept { return module_; }

 private:
  ErrorKind kind_;
  std::string module_;
};

// Ingestion failure with file/row location. row is 1-based; 0 means the
// problem concerns the file as a whole.
class DataError : public Error {
 public:
  DataError(ErrorKind kind, std::string file, std::size_t row,
            std::string reason);

  const std::string& file() const noexcept { return file_; }
  std::size_t row() const noexcept { return row_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  std::string file_;
  std::size_t row_;
  std::string reason_;
};

}  // namespace cohere
