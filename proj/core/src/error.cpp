#include "cohere/error.hpp"

#include <utility>

namespace cohere {

namespace {

std::string locate(const std::string& file, std::size_t row,
                   const std::string& reason) {
  std::string out = file;
  if (row > 0) out += ":" + std::to_string(row);
  out += ": " + reason;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, std::string module, const std::string& message)
    : std::runtime_error("[" + module + "] " + message),
      kind_(kind),
      module_(std::move(module)) {}

DataError::DataError(ErrorKind kind, std::string file, std::size_t row,
                     std::string reason)
    : Error(kind, "dataset", locate(file, row, reason)),
      file_(std::move(file)),
      row_(row),
      reason_(std::move(reason)) {}

}  // namespace cohere
