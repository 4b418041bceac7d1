#pragma once

#include <stdexcept>
#include <string>

namespace faultline {

enum class ErrorKind {
  config,
  stream,
  input,
  solver,
  not_found,
  training,
  calibration,
  phase,
  insufficient_data,
  io,
  parse,
};

const char* to_string(ErrorKind kind) noexcept;

// Single exception type for the library; callers switch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace faultline
